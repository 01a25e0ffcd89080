"""Cross-domain data exchange as explicit ZIP packages.

A package is a ZIP archive with a single ``psidimas/`` root holding
``psidimas.json`` (the manifest), ``data.nt`` (the exported triples as
N-Triples), and one ``files/<handle>`` entry per referenced document, named
by bare handle. Exports never include permission triples; imports copy the
data into the target actor's graph unchanged except for ``fileServerPath``
values, which are rewritten to the importing side's local paths.
"""

from __future__ import annotations

import datetime
import io
import json
import os
import zipfile
from dataclasses import dataclass
from typing import Sequence

from . import opslog
from .cas import HANDLE_RE, ContentAccessService
from .errors import (
    ConflictError,
    IntegrityError,
    MalformedPackageError,
    ParseError,
    StorageError,
    UnsupportedVersionError,
)
from .rdf import (
    BlankNode,
    IRI,
    Literal,
    QuadStore,
    Triple,
    local_name,
    parse_document,
    relabel,
    serialize_document,
    serialize_ntriples,
    stable_labeling,
)

ARCHIVE_ROOT = "psidimas"
MANIFEST_ENTRY = f"{ARCHIVE_ROOT}/psidimas.json"
DATA_ENTRY = f"{ARCHIVE_ROOT}/data.nt"
FILES_PREFIX = f"{ARCHIVE_ROOT}/files/"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ManifestFile:
    handle: str
    file_name: str
    file_extension: str
    file_type: str
    file_size: int


@dataclass(frozen=True)
class ExportManifest:
    version: int
    source_actor: str
    source_vocabulary: str
    exported_at: str
    triple_count: int
    files: tuple[ManifestFile, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "source_actor": self.source_actor,
                "source_vocabulary": self.source_vocabulary,
                "exported_at": self.exported_at,
                "triple_count": self.triple_count,
                "files": [
                    {
                        "handle": f.handle,
                        "file_name": f.file_name,
                        "file_extension": f.file_extension,
                        "file_type": f.file_type,
                        "file_size": f.file_size,
                    }
                    for f in self.files
                ],
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExportManifest":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedPackageError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise MalformedPackageError("manifest must be a JSON object")
        version = raw.get("version")
        if version != MANIFEST_VERSION:
            raise UnsupportedVersionError(f"unsupported manifest version {version!r}")
        try:
            files = tuple(
                ManifestFile(
                    handle=str(entry["handle"]),
                    file_name=str(entry["file_name"]),
                    file_extension=str(entry["file_extension"]),
                    file_type=str(entry["file_type"]),
                    file_size=int(entry["file_size"]),
                )
                for entry in raw.get("files", [])
            )
            manifest = cls(
                version=int(version),
                source_actor=str(raw["source_actor"]),
                source_vocabulary=str(raw["source_vocabulary"]),
                exported_at=str(raw["exported_at"]),
                triple_count=int(raw["triple_count"]),
                files=files,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedPackageError(f"manifest is missing or mistypes a field: {exc}") from exc
        for entry in manifest.files:
            if not HANDLE_RE.match(entry.handle):
                raise MalformedPackageError(f"manifest lists invalid handle {entry.handle!r}")
        return manifest


@dataclass(frozen=True)
class ExportPackage:
    manifest: ExportManifest
    data_triples: tuple[Triple, ...]
    files: dict[str, bytes]


@dataclass(frozen=True)
class ImportSummary:
    triples_added: int
    files_added: int


def _is_permission_predicate(predicate: IRI) -> bool:
    return local_name(predicate) == "permission"


def _select_triples(all_triples: frozenset[Triple], subjects: Sequence[str] | None) -> set[Triple]:
    if subjects is None:
        return set(all_triples)
    wanted = {IRI(s) for s in subjects}
    selected = {t for t in all_triples if t.subject in wanted}
    # pull in blank-node property structures reachable from selected objects
    frontier = {t.object for t in selected if isinstance(t.object, BlankNode)}
    while frontier:
        node = frontier.pop()
        for t in all_triples:
            if t.subject == node and t not in selected:
                selected.add(t)
                if isinstance(t.object, BlankNode):
                    frontier.add(t.object)
    return selected


def build_export(
    store: QuadStore,
    cas: ContentAccessService,
    actor_iri: str,
    subjects: Sequence[str] | None = None,
    exported_at: str | None = None,
) -> bytes:
    """Build the ZIP package for an actor's graph.

    ``subjects`` of None exports everything; otherwise only triples whose
    subject is listed (plus attached blank-node structures). Permission
    triples are always excluded, and file links whose document metadata falls
    outside the selection are dropped so every file reference stays resolvable.
    """
    opslog.note("exchange.build_export")
    actor = cas.actor(actor_iri)
    graph = store.triples(actor_iri)
    selected = _select_triples(graph, subjects)
    selected = {t for t in selected if not _is_permission_predicate(t.predicate)}

    doc_subjects: dict[str, str] = {}
    for t in selected:
        if (
            local_name(t.predicate) == "fileHandle"
            and isinstance(t.object, Literal)
            and isinstance(t.subject, IRI)
        ):
            doc_subjects[t.object.lexical] = t.subject.value
    metadata: dict[str, dict[str, str]] = {subject: {} for subject in doc_subjects.values()}
    for t in selected:
        if isinstance(t.subject, IRI) and isinstance(t.object, Literal) and t.subject.value in metadata:
            metadata[t.subject.value][local_name(t.predicate)] = t.object.lexical

    # a file link must never dangle: drop links to documents outside the selection
    selected = {
        t
        for t in selected
        if not (
            local_name(t.predicate) == "file"
            and isinstance(t.object, IRI)
            and t.object.value not in metadata
        )
    }

    files: dict[str, bytes] = {}
    manifest_files = []
    for handle in sorted(doc_subjects):
        info = metadata[doc_subjects[handle]]
        path = info.get("fileServerPath")
        if path is None or not os.path.isfile(path):
            raise StorageError(f"document {handle} is referenced but missing on disk")
        with open(path, "rb") as fh:
            data = fh.read()
        recorded_size = info.get("fileSize")
        if recorded_size is not None and recorded_size != str(len(data)):
            raise IntegrityError(
                f"document {handle} is {len(data)} bytes on disk but its "
                f"metadata records {recorded_size}"
            )
        files[handle] = data
        manifest_files.append(
            ManifestFile(
                handle=handle,
                file_name=info.get("fileName", handle),
                file_extension=info.get("fileExtension", ""),
                file_type=info.get("fileType", "application/octet-stream"),
                file_size=len(data),
            )
        )

    ordered = sorted(selected, key=lambda t: serialize_ntriples([t]))
    data_text = serialize_document(ordered, "ntriples")
    manifest = ExportManifest(
        version=MANIFEST_VERSION,
        source_actor=actor_iri,
        source_vocabulary=actor.vocabulary.namespace,
        exported_at=exported_at or datetime.datetime.now(datetime.timezone.utc).isoformat(),
        triple_count=len(ordered),
        files=tuple(manifest_files),
    )

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        archive.writestr(MANIFEST_ENTRY, manifest.to_json())
        archive.writestr(DATA_ENTRY, data_text)
        for handle in sorted(files):
            archive.writestr(FILES_PREFIX + handle, files[handle])
    return buffer.getvalue()


def parse_package(zip_bytes: bytes) -> ExportPackage:
    """Read and validate a package: layout, manifest invariants, file sizes."""
    opslog.note("exchange.parse_package")
    try:
        archive = zipfile.ZipFile(io.BytesIO(zip_bytes))
    except zipfile.BadZipFile as exc:
        raise MalformedPackageError(f"not a ZIP archive: {exc}") from exc
    with archive:
        names = [n for n in archive.namelist() if not n.endswith("/")]
        if MANIFEST_ENTRY not in names or DATA_ENTRY not in names:
            raise MalformedPackageError(
                f"package must contain {MANIFEST_ENTRY} and {DATA_ENTRY}"
            )
        stray = [
            n for n in names if n not in (MANIFEST_ENTRY, DATA_ENTRY) and not n.startswith(FILES_PREFIX)
        ]
        if stray:
            raise MalformedPackageError(f"unexpected entries in package: {', '.join(sorted(stray))}")

        manifest = ExportManifest.from_json(archive.read(MANIFEST_ENTRY).decode("utf-8"))

        files: dict[str, bytes] = {}
        for name in names:
            if name.startswith(FILES_PREFIX):
                handle = name[len(FILES_PREFIX):]
                files[handle] = archive.read(name)

        declared = {f.handle for f in manifest.files}
        if declared != set(files):
            raise MalformedPackageError(
                "manifest file list and files/ entries disagree: "
                f"manifest={sorted(declared)} archive={sorted(files)}"
            )
        for entry in manifest.files:
            if len(files[entry.handle]) != entry.file_size:
                raise IntegrityError(
                    f"file {entry.handle} is {len(files[entry.handle])} bytes, "
                    f"manifest says {entry.file_size}"
                )

        try:
            data_triples = parse_document(archive.read(DATA_ENTRY).decode("utf-8"))
        except (ParseError, UnicodeDecodeError) as exc:
            raise MalformedPackageError(f"cannot parse data graph: {exc}") from exc
        if len(data_triples) != manifest.triple_count:
            raise IntegrityError(
                f"data graph has {len(data_triples)} statements, "
                f"manifest says {manifest.triple_count}"
            )
        referenced = {
            t.object.lexical
            for t in data_triples
            if local_name(t.predicate) == "fileHandle" and isinstance(t.object, Literal)
        }
        if not referenced <= set(files):
            raise MalformedPackageError(
                f"data graph references missing files: {sorted(referenced - set(files))}"
            )
    return ExportPackage(manifest=manifest, data_triples=tuple(data_triples), files=files)


def import_package(
    store: QuadStore,
    cas: ContentAccessService,
    package: ExportPackage,
    target_actor_iri: str,
) -> ImportSummary:
    """Copy a package into the target actor's graph and document store.

    Subjects and predicates are preserved so provenance stays readable; only
    ``fileServerPath`` values are rewritten to the new local paths. Importing
    the same package again adds nothing. A handle that already exists with
    different bytes aborts the import before anything is written.
    """
    opslog.note("exchange.import_package")
    cas.actor(target_actor_iri)

    extensions = {f.handle: f.file_extension for f in package.manifest.files}
    targets = {
        handle: cas.document_path(target_actor_iri, handle, extensions[handle])
        for handle in package.files
    }
    for handle, path in targets.items():
        if os.path.exists(path):
            with open(path, "rb") as fh:
                if fh.read() != package.files[handle]:
                    raise ConflictError(
                        f"handle {handle} already exists with different content"
                    )

    files_added = 0
    written: list[str] = []
    try:
        for handle, path in sorted(targets.items()):
            if os.path.exists(path):
                continue
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(package.files[handle])
            os.replace(tmp, path)
            written.append(path)
            files_added += 1
    except OSError as exc:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise StorageError(f"cannot write imported document: {exc}") from exc

    triples = relabel(package.data_triples, stable_labeling(package.data_triples))
    rewritten = []
    path_by_subject = {}
    for t in triples:
        if local_name(t.predicate) == "fileHandle" and isinstance(t.object, Literal):
            handle = t.object.lexical
            if handle in targets:
                path_by_subject[t.subject] = targets[handle]
    for t in triples:
        if (
            local_name(t.predicate) == "fileServerPath"
            and isinstance(t.object, Literal)
            and t.subject in path_by_subject
        ):
            rewritten.append(Triple(t.subject, t.predicate, Literal(path_by_subject[t.subject])))
        else:
            rewritten.append(t)

    triples_added = store.copy_triples(None, rewritten, target_actor_iri)
    return ImportSummary(triples_added=triples_added, files_added=files_added)
