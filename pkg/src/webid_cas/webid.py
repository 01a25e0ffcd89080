"""WebID identities: certificate extraction, profile documents, verification.

An identity is an RSA key pair plus a self-signed certificate whose SAN URI
points at a FOAF profile publishing the public key. Verification fetches the
profile behind each SAN URI and compares the published keys against the
certificate's key; interlinking decides whether two certificates denote the
same subject (shared key pair, shared profile, or mutual semantic links).
"""

from __future__ import annotations

import datetime
import ipaddress
import logging
import os
import stat
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import rsa
from cryptography.x509.oid import NameOID

from . import opslog
from .errors import (
    CasError,
    CertificateError,
    ConflictError,
    ParseError,
    UnsupportedKeyError,
    ValidationError,
)
from .rdf import (
    RDF_TYPE,
    XSD_HEX_BINARY,
    XSD_INTEGER,
    BlankNode,
    IRI,
    Literal,
    Triple,
    defragment,
    iri_scheme,
    is_absolute_iri,
    parse_document,
)

logger = logging.getLogger(__name__)

FOAF_NS = "http://xmlns.com/foaf/0.1/"
CERT_NS = "http://www.w3.org/ns/auth/cert#"
PSID_NS = "http://persemid.bfh.ch/vocab/psid#"

FOAF_PERSON = IRI(FOAF_NS + "Person")
CERT_KEY = IRI(CERT_NS + "key")
CERT_RSA_PUBLIC_KEY = IRI(CERT_NS + "RSAPublicKey")
CERT_MODULUS = IRI(CERT_NS + "modulus")
CERT_EXPONENT = IRI(CERT_NS + "exponent")
LINKED_IDENTITY = IRI(PSID_NS + "linkedIdentity")

PROFILE_MEDIA_TYPE = "text/turtle"


class ProfileFetchError(CasError):
    """A profile IRI could not be dereferenced."""

    category = "profile_unreachable"


# A fetcher dereferences an IRI to (document bytes, media type) or raises
# ProfileFetchError. It is injected so verification runs without a network.
ProfileFetcher = Callable[[str], tuple[bytes, str]]


@dataclass(frozen=True)
class CertificateInfo:
    subject_name: str
    san_uris: tuple[str, ...]
    rsa_modulus: bytes
    rsa_exponent: int
    raw_der: bytes = field(repr=False)


@dataclass(frozen=True)
class RsaKeyInfo:
    modulus: bytes
    exponent: int


@dataclass(frozen=True)
class WebIdProfile:
    webid: str
    keys: tuple[RsaKeyInfo, ...]
    source_graph: tuple[Triple, ...]
    links: tuple[str, ...] = ()


class VerificationOutcome(Enum):
    VERIFIED = "verified"
    NO_SAN = "no_san"
    PROFILE_UNREACHABLE = "profile_unreachable"
    PROFILE_UNPARSEABLE = "profile_unparseable"
    KEY_MISMATCH = "key_mismatch"


@dataclass(frozen=True)
class VerificationResult:
    outcome: VerificationOutcome
    webid: str | None = None

    def __post_init__(self) -> None:
        if (self.outcome == VerificationOutcome.NO_SAN) != (self.webid is None):
            raise ValueError("webid is carried by every outcome except NO_SAN")

    @property
    def verified(self) -> bool:
        return self.outcome == VerificationOutcome.VERIFIED


@dataclass(frozen=True)
class InterlinkResult:
    method: int | None

    @property
    def linked(self) -> bool:
        return self.method is not None


NOT_LINKED = InterlinkResult(None)


# ---------------------------------------------------------------------------
# Certificate parsing
# ---------------------------------------------------------------------------

def int_to_bytes(value: int) -> bytes:
    return value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big")


def normalize_modulus(raw: bytes) -> bytes:
    return raw.lstrip(b"\x00") or b"\x00"


def decode_modulus_hex(lexical: str) -> bytes:
    """Decode a hexBinary modulus: whitespace-tolerant, case-insensitive,
    leading zero bytes stripped."""
    compact = "".join(lexical.split())
    if len(compact) % 2 != 0 or not compact:
        raise ValidationError(f"hexBinary value has odd length: {lexical!r}")
    try:
        raw = bytes.fromhex(compact)
    except ValueError as exc:
        raise ValidationError(f"invalid hexBinary value: {lexical!r}") from exc
    return normalize_modulus(raw)


def extract_certificate_info(der: bytes) -> CertificateInfo:
    """Authentication-relevant extract of a DER-encoded X.509 certificate."""
    opslog.note("webid.extract_certificate_info")
    try:
        cert = x509.load_der_x509_certificate(der)
    except Exception as exc:
        raise CertificateError(f"cannot parse DER certificate: {exc}") from exc
    public_key = cert.public_key()
    if not isinstance(public_key, rsa.RSAPublicKey):
        raise UnsupportedKeyError(f"unsupported public key type {type(public_key).__name__}")
    numbers = public_key.public_numbers()
    try:
        san = cert.extensions.get_extension_for_class(x509.SubjectAlternativeName)
        uris = tuple(san.value.get_values_for_type(x509.UniformResourceIdentifier))
    except x509.ExtensionNotFound:
        uris = ()
    return CertificateInfo(
        subject_name=cert.subject.rfc4514_string(),
        san_uris=uris,
        rsa_modulus=normalize_modulus(int_to_bytes(numbers.n)),
        rsa_exponent=numbers.e,
        raw_der=der,
    )


# ---------------------------------------------------------------------------
# Identity generation
# ---------------------------------------------------------------------------

def build_self_signed_certificate(
    private_key: rsa.RSAPrivateKey,
    common_name: str,
    san_uris: Sequence[str] = (),
    san_dns: Sequence[str] = (),
    san_ips: Sequence[str] = (),
    not_before: datetime.datetime | None = None,
    not_after: datetime.datetime | None = None,
) -> x509.Certificate:
    """Self-signed SHA-256 certificate; default validity is one year."""
    now = datetime.datetime.now(datetime.timezone.utc)
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, common_name)])
    builder = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(private_key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(not_before or (now - datetime.timedelta(days=1)))
        .not_valid_after(not_after or (now + datetime.timedelta(days=365)))
    )
    entries: list[x509.GeneralName] = [x509.UniformResourceIdentifier(uri) for uri in san_uris]
    entries += [x509.DNSName(dns) for dns in san_dns]
    entries += [x509.IPAddress(ipaddress.ip_address(ip)) for ip in san_ips]
    if entries:
        builder = builder.add_extension(x509.SubjectAlternativeName(entries), critical=False)
    return builder.sign(private_key, hashes.SHA256())


def profile_triples(webid: str, keys: Iterable[RsaKeyInfo]) -> list[Triple]:
    """FOAF profile graph publishing the given RSA keys for ``webid``."""
    subject = IRI(webid)
    triples = [Triple(subject, RDF_TYPE, FOAF_PERSON)]
    for index, key in enumerate(keys):
        node = BlankNode(f"key{index}")
        triples.append(Triple(subject, CERT_KEY, node))
        triples.append(Triple(node, RDF_TYPE, CERT_RSA_PUBLIC_KEY))
        triples.append(Triple(node, CERT_MODULUS, Literal(key.modulus.hex(), XSD_HEX_BINARY)))
        triples.append(Triple(node, CERT_EXPONENT, Literal(str(key.exponent), XSD_INTEGER)))
    return triples


def render_profile_turtle(webid: str, keys: Sequence[RsaKeyInfo], links: Sequence[str] = ()) -> str:
    """Profile document with the conventional layout: a fragment subject and
    one cert:key property list per published key."""
    subject_ref = "#" + webid.rsplit("#", 1)[1] if "#" in webid else webid
    lines = [
        "@prefix cert: <http://www.w3.org/ns/auth/cert#> .",
        "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .",
        "@prefix foaf: <http://xmlns.com/foaf/0.1/> .",
        f"@prefix psid: <{PSID_NS}> .",
        "",
        f"<{subject_ref}> a foaf:Person",
    ]
    for key in keys:
        lines += [
            "  ; cert:key [ a cert:RSAPublicKey ;",
            f'      cert:modulus "{key.modulus.hex()}"^^xsd:hexBinary ;',
            f"      cert:exponent {key.exponent} ]",
        ]
    for target in links:
        lines.append(f"  ; psid:linkedIdentity <{target}>")
    lines.append("  .")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GeneratedIdentity:
    name: str
    webid: str
    private_key_pem: bytes = field(repr=False)
    certificate_der: bytes = field(repr=False)
    certificate_pem: bytes = field(repr=False)
    profile_triples: tuple[Triple, ...]
    profile_turtle: str


def generate_identity(name: str, profile_uri: str, key_bits: int = 2048) -> GeneratedIdentity:
    """New RSA key pair, self-signed certificate with the profile URI in its
    SAN, and the matching FOAF profile document."""
    opslog.note("webid.generate_identity")
    if key_bits < 2048:
        raise ValidationError("key size below 2048 bits is not accepted")
    if not is_absolute_iri(profile_uri) or "#" not in profile_uri:
        raise ValidationError("profile URI must be absolute and carry a fragment")
    try:
        private_key = rsa.generate_private_key(public_exponent=65537, key_size=key_bits)
    except Exception as exc:
        raise CasError(f"RSA key generation failed: {exc}") from exc
    certificate = build_self_signed_certificate(private_key, name, san_uris=[profile_uri])
    key_info = RsaKeyInfo(
        modulus=normalize_modulus(int_to_bytes(private_key.public_key().public_numbers().n)),
        exponent=private_key.public_key().public_numbers().e,
    )
    triples = profile_triples(profile_uri, [key_info])
    return GeneratedIdentity(
        name=name,
        webid=profile_uri,
        private_key_pem=private_key.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        ),
        certificate_der=certificate.public_bytes(serialization.Encoding.DER),
        certificate_pem=certificate.public_bytes(serialization.Encoding.PEM),
        profile_triples=tuple(triples),
        profile_turtle=render_profile_turtle(profile_uri, [key_info]),
    )


def write_identity_files(directory: str | os.PathLike[str], identity: GeneratedIdentity, force: bool = False) -> dict[str, str]:
    """Write key PEM (owner-only mode), certificate PEM, and profile Turtle.

    Returns the written paths keyed by kind. Refuses to overwrite unless
    ``force`` is set.
    """
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    paths = {
        "key": os.path.join(directory, f"{identity.name}.key.pem"),
        "certificate": os.path.join(directory, f"{identity.name}.cert.pem"),
        "profile": os.path.join(directory, f"{identity.name}.profile.ttl"),
    }
    if not force:
        existing = [p for p in paths.values() if os.path.exists(p)]
        if existing:
            raise ConflictError(f"refusing to overwrite {', '.join(sorted(existing))} (use force)")
    flags = os.O_WRONLY | os.O_CREAT | os.O_TRUNC
    fd = os.open(paths["key"], flags, stat.S_IRUSR | stat.S_IWUSR)
    with os.fdopen(fd, "wb") as fh:
        fh.write(identity.private_key_pem)
    os.chmod(paths["key"], stat.S_IRUSR | stat.S_IWUSR)
    with open(paths["certificate"], "wb") as fh:
        fh.write(identity.certificate_pem)
    with open(paths["profile"], "w", encoding="utf-8") as fh:
        fh.write(identity.profile_turtle)
    return paths


# ---------------------------------------------------------------------------
# Profile parsing and verification
# ---------------------------------------------------------------------------

def parse_profile(text: str, profile_iri: str) -> WebIdProfile:
    """Parse a Turtle profile document and extract the published keys.

    Key entries with undecodable material are skipped: they can never match
    a certificate, and a profile must stay usable if one entry is broken.
    """
    base = defragment(profile_iri)
    triples = parse_document(text, base=base)
    subject = IRI(profile_iri)
    keys: list[RsaKeyInfo] = []
    for t in triples:
        if t.subject == subject and t.predicate == CERT_KEY and isinstance(t.object, BlankNode):
            modulus: bytes | None = None
            exponent: int | None = None
            for prop in triples:
                if prop.subject != t.object or not isinstance(prop.object, Literal):
                    continue
                try:
                    if prop.predicate == CERT_MODULUS:
                        modulus = decode_modulus_hex(prop.object.lexical)
                    elif prop.predicate == CERT_EXPONENT:
                        exponent = int(prop.object.lexical)
                except (ValidationError, ValueError):
                    logger.debug("skipping malformed key property on %s", profile_iri)
            if modulus is not None and exponent is not None:
                keys.append(RsaKeyInfo(modulus, exponent))
    links = tuple(
        t.object.value
        for t in triples
        if t.subject == subject and t.predicate == LINKED_IDENTITY and isinstance(t.object, IRI)
    )
    return WebIdProfile(webid=profile_iri, keys=tuple(keys), source_graph=tuple(triples), links=links)


def _fetch_profile(uri: str, fetch: ProfileFetcher) -> WebIdProfile | VerificationResult:
    try:
        body, _media_type = fetch(uri)
    except ProfileFetchError:
        return VerificationResult(VerificationOutcome.PROFILE_UNREACHABLE, uri)
    try:
        return parse_profile(body.decode("utf-8"), uri)
    except (ParseError, UnicodeDecodeError):
        return VerificationResult(VerificationOutcome.PROFILE_UNPARSEABLE, uri)


def verify_webid(cert: CertificateInfo, fetch: ProfileFetcher) -> VerificationResult:
    """WebID verification protocol.

    Walk the certificate's SAN URIs in order; for each, dereference and parse
    the profile and compare every published key against the certificate's
    modulus and exponent. The first match wins; with no SAN the result is
    NO_SAN; otherwise the failure of the last attempted URI is reported.
    """
    opslog.note("webid.verify_webid")
    if not cert.san_uris:
        return VerificationResult(VerificationOutcome.NO_SAN)
    last_failure: VerificationResult | None = None
    for uri in cert.san_uris:
        logger.debug("verifying WebID candidate %s (scheme %s)", uri, iri_scheme(uri) or "none")
        outcome = _fetch_profile(uri, fetch)
        if isinstance(outcome, VerificationResult):
            last_failure = outcome
            continue
        for key in outcome.keys:
            if key.modulus == cert.rsa_modulus and key.exponent == cert.rsa_exponent:
                logger.debug("WebID %s verified", uri)
                return VerificationResult(VerificationOutcome.VERIFIED, uri)
        last_failure = VerificationResult(VerificationOutcome.KEY_MISMATCH, uri)
    assert last_failure is not None
    return last_failure


# ---------------------------------------------------------------------------
# Interlinking
# ---------------------------------------------------------------------------

def check_interlink(a: CertificateInfo, b: CertificateInfo, fetch: ProfileFetcher) -> InterlinkResult:
    """Decide whether two certificates denote the same subject.

    Method 1: both certificates carry the same key pair values.
    Method 2: the certificates share a SAN URI and that profile publishes
    both keys.
    Method 3: each certificate verifies against its own profile and the two
    profiles assert the link predicate toward each other (both directions).
    The lowest-numbered applicable method wins; a fetch or parse failure only
    disqualifies the method that needed it.
    """
    opslog.note("webid.check_interlink")
    if a.rsa_modulus == b.rsa_modulus and a.rsa_exponent == b.rsa_exponent:
        return InterlinkResult(1)

    for uri in a.san_uris:
        if uri not in b.san_uris:
            continue
        profile = _fetch_profile(uri, fetch)
        if isinstance(profile, VerificationResult):
            continue  # method 2 inapplicable for this URI
        published = {(k.modulus, k.exponent) for k in profile.keys}
        if (a.rsa_modulus, a.rsa_exponent) in published and (b.rsa_modulus, b.rsa_exponent) in published:
            return InterlinkResult(2)

    result_a = verify_webid(a, fetch)
    result_b = verify_webid(b, fetch)
    if result_a.verified and result_b.verified:
        profile_a = _fetch_profile(result_a.webid or "", fetch)
        profile_b = _fetch_profile(result_b.webid or "", fetch)
        if isinstance(profile_a, WebIdProfile) and isinstance(profile_b, WebIdProfile):
            if result_b.webid in profile_a.links and result_a.webid in profile_b.links:
                return InterlinkResult(3)
    return NOT_LINKED
