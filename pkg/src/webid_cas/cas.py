"""Content access service: per-actor named graphs, permissions, documents.

Each actor owns one named graph (the actor IRI doubles as graph name and
subject base) and one directory under the storage root. Permission triples
in the owner's graph are the single source of authorization truth; document
files live on disk with their metadata mirrored as six triples per document.
"""

from __future__ import annotations

import os
import re
import secrets
import threading
from dataclasses import dataclass
from typing import Callable, Iterable

from . import opslog
from .errors import (
    IntegrityError,
    NotFoundError,
    StorageError,
    UnknownActorError,
    ValidationError,
)
from .rdf import (
    XSD_INTEGER,
    IRI,
    Literal,
    QuadStore,
    Term,
    Triple,
    local_name,
)

PERSEMID_VOCAB_ROOT = "http://persemid.bfh.ch/vocab/"

HANDLE_RE = re.compile(r"^[0-9a-f]{32}$")

METADATA_PREDICATES = (
    "fileExtension",
    "fileHandle",
    "fileName",
    "fileServerPath",
    "fileSize",
    "fileType",
)


@dataclass(frozen=True)
class Vocabulary:
    """An actor vocabulary namespace with the well-known predicates."""

    namespace: str

    def term(self, name: str) -> IRI:
        return IRI(self.namespace + name)

    @property
    def webid(self) -> IRI:
        return self.term("webid")

    @property
    def permission(self) -> IRI:
        return self.term("permission")

    @property
    def file(self) -> IRI:
        return self.term("file")


STUDENT_VOCAB = Vocabulary(PERSEMID_VOCAB_ROOT + "student#")
BACHELOR_VOCAB = Vocabulary(PERSEMID_VOCAB_ROOT + "hbsc#")
MASTER_VOCAB = Vocabulary(PERSEMID_VOCAB_ROOT + "hmsc#")


@dataclass(frozen=True)
class DocumentRecord:
    handle: str
    file_name: str
    file_extension: str
    file_type: str
    file_size: int
    server_path: str

    def as_dict(self) -> dict[str, object]:
        return {
            "handle": self.handle,
            "file_name": self.file_name,
            "file_extension": self.file_extension,
            "file_type": self.file_type,
            "file_size": self.file_size,
            "server_path": self.server_path,
        }


@dataclass(frozen=True)
class ActorRecord:
    """Structured view over an actor's named graph."""

    actor_iri: str
    vocabulary: Vocabulary
    attributes: tuple[Triple, ...]
    permissions: tuple[str, ...]
    documents: tuple[DocumentRecord, ...]


@dataclass(frozen=True)
class AccessDecision:
    allowed: bool
    reason: str | None = None


ALLOWED = AccessDecision(True)
NOT_AUTHENTICATED = AccessDecision(False, "not_authenticated")
NOT_AUTHORIZED = AccessDecision(False, "not_authorized")


@dataclass(frozen=True)
class _Actor:
    iri: str
    vocabulary: Vocabulary
    short_name: str


def random_handle() -> str:
    return secrets.token_hex(16)


class ContentAccessService:
    """Graph plus document-store operations for a set of registered actors."""

    def __init__(
        self,
        store: QuadStore,
        storage_root: str | os.PathLike[str],
        handle_factory: Callable[[], str] = random_handle,
    ) -> None:
        self.store = store
        self.storage_root = os.fspath(storage_root)
        self._actors: dict[str, _Actor] = {}
        self._handle_factory = handle_factory
        self._document_lock = threading.RLock()

    # -- actor registry -------------------------------------------------------

    def register_actor(self, actor_iri: str, vocabulary: Vocabulary, short_name: str) -> None:
        self._actors[actor_iri] = _Actor(actor_iri, vocabulary, short_name)
        self.store.create_graph(actor_iri)
        os.makedirs(os.path.join(self.storage_root, short_name), exist_ok=True)

    def actor(self, actor_iri: str) -> _Actor:
        try:
            return self._actors[actor_iri]
        except KeyError:
            raise UnknownActorError(f"actor <{actor_iri}> is not registered") from None

    def actor_subject(self, actor_iri: str) -> IRI:
        return IRI(actor_iri + "#")

    def document_subject(self, actor_iri: str, handle: str) -> IRI:
        return IRI(f"{actor_iri}#{handle}")

    def document_path(self, actor_iri: str, handle: str, extension: str) -> str:
        short = self.actor(actor_iri).short_name
        return os.path.join(self.storage_root, short, handle + extension)

    # -- permissions ----------------------------------------------------------

    def set_permission(self, actor_iri: str, webid: str, grant: bool) -> None:
        """Insert (grant) or remove (revoke) the permission triple; idempotent."""
        opslog.note("cas.set_permission")
        actor = self.actor(actor_iri)
        triple = Triple(self.actor_subject(actor_iri), actor.vocabulary.permission, IRI(webid))
        if grant:
            self.store.add(actor_iri, [triple])
        else:
            self.store.remove(actor_iri, [triple])

    def permissions(self, actor_iri: str) -> list[str]:
        actor = self.actor(actor_iri)
        found = self.store.match_pattern(
            graph=actor_iri,
            subject=self.actor_subject(actor_iri),
            predicate=actor.vocabulary.permission,
        )
        return sorted(q.triple.object.value for q in found if isinstance(q.triple.object, IRI))

    def owner_webids(self, actor_iri: str) -> list[str]:
        actor = self.actor(actor_iri)
        found = self.store.match_pattern(
            graph=actor_iri,
            subject=self.actor_subject(actor_iri),
            predicate=actor.vocabulary.webid,
        )
        return sorted(q.triple.object.value for q in found if isinstance(q.triple.object, IRI))

    def check_access(self, owner_iri: str, requester_webid: str | None) -> AccessDecision:
        """Allowed iff the requester is authenticated and is the owner's own
        WebID or appears as a permission object in the owner's graph."""
        opslog.note("cas.check_access")
        if requester_webid is None:
            return NOT_AUTHENTICATED
        if requester_webid in self.owner_webids(owner_iri):
            return ALLOWED
        if requester_webid in self.permissions(owner_iri):
            return ALLOWED
        return NOT_AUTHORIZED

    # -- documents --------------------------------------------------------------

    def store_document(self, actor_iri: str, file_name: str, media_type: str, data: bytes) -> DocumentRecord:
        """Store bytes under a fresh handle and mirror the metadata triples."""
        opslog.note("cas.store_document")
        actor = self.actor(actor_iri)
        if not data:
            raise ValidationError("refusing to store an empty document")
        extension = os.path.splitext(file_name)[1]
        if not extension:
            raise ValidationError(f"file name {file_name!r} has no extension")
        with self._document_lock:
            handle = self._handle_factory()
            if not HANDLE_RE.match(handle):
                raise ValidationError(f"handle factory produced invalid handle {handle!r}")
            path = self.document_path(actor_iri, handle, extension)
            if os.path.exists(path):
                raise StorageError(f"handle collision at {path}")
            try:
                tmp = path + ".tmp"
                with open(tmp, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, path)
            except OSError as exc:
                raise StorageError(f"cannot write document: {exc}") from exc
            record = DocumentRecord(
                handle=handle,
                file_name=file_name,
                file_extension=extension,
                file_type=media_type,
                file_size=len(data),
                server_path=path,
            )
            try:
                self.store.add(actor_iri, self._metadata_triples(actor, record))
            except BaseException:
                os.unlink(path)
                raise
        return record

    def _metadata_triples(self, actor: _Actor, record: DocumentRecord) -> list[Triple]:
        subject = self.document_subject(actor.iri, record.handle)
        voc = actor.vocabulary
        return [
            Triple(subject, voc.term("fileExtension"), Literal(record.file_extension)),
            Triple(subject, voc.term("fileHandle"), Literal(record.handle)),
            Triple(subject, voc.term("fileName"), Literal(record.file_name)),
            Triple(subject, voc.term("fileServerPath"), Literal(record.server_path)),
            Triple(subject, voc.term("fileSize"), Literal(str(record.file_size), XSD_INTEGER)),
            Triple(subject, voc.term("fileType"), Literal(record.file_type)),
            Triple(self.actor_subject(actor.iri), voc.file, subject),
        ]

    def get_document(self, actor_iri: str, handle: str) -> tuple[DocumentRecord, bytes]:
        """Metadata and exact stored bytes; integrity-checked against fileSize."""
        opslog.note("cas.get_document")
        self.actor(actor_iri)
        if not HANDLE_RE.match(handle):
            raise ValidationError(f"syntactically invalid handle {handle!r}")
        record = self._record_for_handle(actor_iri, handle)
        if record is None:
            raise NotFoundError(f"no document {handle} for <{actor_iri}>")
        try:
            with open(record.server_path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise IntegrityError(f"metadata present but file unreadable: {exc}") from exc
        if len(data) != record.file_size:
            raise IntegrityError(
                f"stored file is {len(data)} bytes but metadata records {record.file_size}"
            )
        return record, data

    def list_documents(self, actor_iri: str) -> list[DocumentRecord]:
        """All complete document records in the actor's graph, including
        imported ones (matched by predicate local name, not vocabulary)."""
        self.actor(actor_iri)
        handles = sorted(
            {
                q.triple.object.lexical
                for q in self.store.match_pattern(graph=actor_iri)
                if local_name(q.triple.predicate) == "fileHandle" and isinstance(q.triple.object, Literal)
            }
        )
        records = []
        for handle in handles:
            record = self._record_for_handle(actor_iri, handle)
            if record is not None:
                records.append(record)
        return records

    def _record_for_handle(self, actor_iri: str, handle: str) -> DocumentRecord | None:
        subjects = {
            q.triple.subject
            for q in self.store.match_pattern(graph=actor_iri, obj=Literal(handle))
            if local_name(q.triple.predicate) == "fileHandle"
        }
        if not subjects:
            return None
        subject = min(subjects, key=str)
        values: dict[str, Term] = {}
        for q in self.store.match_pattern(graph=actor_iri, subject=subject):
            name = local_name(q.triple.predicate)
            if name in METADATA_PREDICATES:
                values[name] = q.triple.object
        if set(values) != set(METADATA_PREDICATES):
            return None
        try:
            return DocumentRecord(
                handle=values["fileHandle"].lexical,
                file_name=values["fileName"].lexical,
                file_extension=values["fileExtension"].lexical,
                file_type=values["fileType"].lexical,
                file_size=int(values["fileSize"].lexical),
                server_path=values["fileServerPath"].lexical,
            )
        except (AttributeError, ValueError):
            return None

    # -- structured views ---------------------------------------------------------

    def actor_record(self, actor_iri: str) -> ActorRecord:
        actor = self.actor(actor_iri)
        subject = self.actor_subject(actor_iri)
        documents = self.list_documents(actor_iri)
        attributes = tuple(
            q.triple
            for q in self.store.match_pattern(graph=actor_iri, subject=subject)
            if q.triple.predicate != actor.vocabulary.permission
            and local_name(q.triple.predicate) != "file"
        )
        return ActorRecord(
            actor_iri=actor_iri,
            vocabulary=actor.vocabulary,
            attributes=attributes,
            permissions=tuple(self.permissions(actor_iri)),
            documents=tuple(documents),
        )

    def insert_attributes(self, actor_iri: str, pairs: Iterable[tuple[str, Term]]) -> int:
        """Attach attribute triples to the actor subject using its vocabulary."""
        actor = self.actor(actor_iri)
        subject = self.actor_subject(actor_iri)
        triples = [Triple(subject, actor.vocabulary.term(name), value) for name, value in pairs]
        return self.store.add(actor_iri, triples)
