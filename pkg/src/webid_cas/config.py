"""Server configuration: a JSON file with TLS material, actors, and paths.

Relative paths in the file are resolved against the config file's directory
so a deployment directory can be moved as a unit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError

ROLES = ("student", "bachelor", "master")
DEFAULT_MAX_UPLOAD_BYTES = 10 * 1024 * 1024


@dataclass(frozen=True)
class ActorConfig:
    short_name: str
    role: str
    iri: str
    vocabulary: str
    webid: str
    profile_path: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ConfigError(f"unknown actor role {self.role!r}")


@dataclass(frozen=True)
class ServerConfig:
    host: str
    port: int
    tls_cert_path: str
    tls_key_path: str
    client_ca_path: str
    dataset_path: str
    storage_root: str
    actors: tuple[ActorConfig, ...]
    static_root: str | None = None
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES
    known_profiles: dict[str, str] = field(default_factory=dict)

    @property
    def base_url(self) -> str:
        return f"https://{self.host}:{self.port}"

    def actor_by_short_name(self, short_name: str) -> ActorConfig | None:
        for actor in self.actors:
            if actor.short_name == short_name:
                return actor
        return None

    def to_json(self) -> str:
        return json.dumps(
            {
                "host": self.host,
                "port": self.port,
                "tls_cert_path": self.tls_cert_path,
                "tls_key_path": self.tls_key_path,
                "client_ca_path": self.client_ca_path,
                "dataset_path": self.dataset_path,
                "storage_root": self.storage_root,
                "static_root": self.static_root,
                "max_upload_bytes": self.max_upload_bytes,
                "known_profiles": self.known_profiles,
                "actors": [
                    {
                        "short_name": a.short_name,
                        "role": a.role,
                        "iri": a.iri,
                        "vocabulary": a.vocabulary,
                        "webid": a.webid,
                        "profile_path": a.profile_path,
                    }
                    for a in self.actors
                ],
            },
            indent=2,
        )

    def save(self, path: str | os.PathLike[str]) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike[str]) -> "ServerConfig":
        path = os.fspath(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

        base_dir = os.path.dirname(os.path.abspath(path))

        def resolve(value: str | None) -> str | None:
            if value is None:
                return None
            return value if os.path.isabs(value) else os.path.join(base_dir, value)

        try:
            actors = tuple(
                ActorConfig(
                    short_name=a["short_name"],
                    role=a["role"],
                    iri=a["iri"],
                    vocabulary=a["vocabulary"],
                    webid=a["webid"],
                    profile_path=resolve(a["profile_path"]),
                )
                for a in raw["actors"]
            )
            return cls(
                host=raw["host"],
                port=int(raw["port"]),
                tls_cert_path=resolve(raw["tls_cert_path"]),
                tls_key_path=resolve(raw["tls_key_path"]),
                client_ca_path=resolve(raw["client_ca_path"]),
                dataset_path=resolve(raw["dataset_path"]),
                storage_root=resolve(raw["storage_root"]),
                static_root=resolve(raw.get("static_root")),
                max_upload_bytes=int(raw.get("max_upload_bytes", DEFAULT_MAX_UPLOAD_BYTES)),
                known_profiles={k: resolve(v) for k, v in raw.get("known_profiles", {}).items()},
                actors=actors,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config {path} is missing or mistypes a field: {exc}") from exc
