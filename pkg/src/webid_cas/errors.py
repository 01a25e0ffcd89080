"""Shared exception taxonomy.

Every error carries a stable ``category`` slug so the HTTP layer and the CLI
can map failures to status codes / exit codes without string matching.
"""

from __future__ import annotations


class CasError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class ParseError(CasError):
    """Syntax error in an RDF document, with position information."""

    category = "parse"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(CasError):
    category = "validation"


class CertificateError(CasError):
    """Malformed or undecodable X.509 material."""

    category = "certificate"


class UnsupportedKeyError(CertificateError):
    """Certificate public key is not RSA."""

    category = "unsupported_key"


class UnknownActorError(CasError):
    category = "unknown_actor"


class NotFoundError(CasError):
    category = "not_found"


class IntegrityError(CasError):
    """Stored state disagrees with its recorded metadata."""

    category = "integrity"


class ConflictError(CasError):
    category = "conflict"


class StorageError(CasError):
    category = "storage"


class MalformedPackageError(CasError):
    category = "malformed_package"


class UnsupportedVersionError(CasError):
    category = "unsupported_version"


class ConfigError(CasError):
    category = "config"
