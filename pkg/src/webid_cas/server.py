"""HTTPS application server.

One TLS port serves everything: static content and WebID profiles publicly,
and the store proxy, document upload, package exchange, and JSON actions
behind WebID authentication. The TLS layer requests (but does not require)
a client certificate; authentication is enforced per endpoint, and a
client's WebID is derived exclusively from the presented certificate via the
verification protocol, never from request content.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import mimetypes
import os
import ssl
import threading
import urllib.request
from dataclasses import dataclass
from email.parser import BytesParser
from email.policy import HTTP as HTTP_POLICY
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable
from urllib.parse import parse_qs, urlsplit

from . import opslog
from .cas import ContentAccessService, Vocabulary, random_handle
from .config import ActorConfig, ServerConfig
from .errors import (
    CasError,
    ConfigError,
    IntegrityError,
    MalformedPackageError,
    NotFoundError,
    ParseError,
    StorageError,
    UnsupportedVersionError,
)
from .exchange import build_export, import_package, parse_package
from .rdf import (
    BlankNode,
    IRI,
    Literal,
    QuadStore,
    Term,
    Triple,
    defragment,
    parse_document,
    relabel_blank_nodes,
    triple_to_ntriples,
)
from .webid import (
    ProfileFetchError,
    VerificationResult,
    extract_certificate_info,
    parse_profile,
    verify_webid,
)

logger = logging.getLogger(__name__)

OUTBOUND_TIMEOUT_SECONDS = 5.0


@dataclass(frozen=True)
class ActorRuntime:
    config: ActorConfig
    vocabulary: Vocabulary
    profile_text: str


class LocalFirstFetcher:
    """Profile fetcher that short-circuits to locally served documents.

    SAN URIs pointing at profiles this server publishes are answered from
    memory (dereferencing ourselves over TCP would deadlock single-threaded
    setups); anything else goes out over HTTP(S) with a short timeout.
    """

    def __init__(self, local_documents: dict[str, str], timeout: float = OUTBOUND_TIMEOUT_SECONDS):
        self._local = {defragment(iri): text for iri, text in local_documents.items()}
        self._timeout = timeout

    def __call__(self, uri: str) -> tuple[bytes, str]:
        document_iri = defragment(uri)
        local = self._local.get(document_iri)
        if local is not None:
            return local.encode("utf-8"), "text/turtle"
        try:
            with urllib.request.urlopen(document_iri, timeout=self._timeout) as response:
                media_type = response.headers.get_content_type()
                return response.read(), media_type
        except Exception as exc:
            raise ProfileFetchError(f"cannot fetch {document_iri}: {exc}") from exc


class ServerApp:
    """Shared state behind the request handlers: store, CAS, actors, fetcher."""

    def __init__(
        self,
        config: ServerConfig,
        handle_factory: Callable[[], str] = random_handle,
    ) -> None:
        self.config = config
        if os.path.exists(config.dataset_path):
            self.store = QuadStore.load(config.dataset_path)
        else:
            self.store = QuadStore()
        self.cas = ContentAccessService(self.store, config.storage_root, handle_factory)

        self.actors_by_short: dict[str, ActorRuntime] = {}
        self.actors_by_webid: dict[str, ActorRuntime] = {}
        local_documents: dict[str, str] = {}
        for actor_config in config.actors:
            try:
                with open(actor_config.profile_path, "r", encoding="utf-8") as fh:
                    profile_text = fh.read()
            except OSError as exc:
                raise ConfigError(
                    f"actor {actor_config.short_name} has no readable profile: {exc}"
                ) from exc
            profile = parse_profile(profile_text, actor_config.webid)
            if not profile.keys:
                raise ConfigError(
                    f"profile for actor {actor_config.short_name} publishes no usable key"
                )
            runtime = ActorRuntime(actor_config, Vocabulary(actor_config.vocabulary), profile_text)
            self.actors_by_short[actor_config.short_name] = runtime
            self.actors_by_webid[actor_config.webid] = runtime
            self.cas.register_actor(actor_config.iri, runtime.vocabulary, actor_config.short_name)
            local_documents[actor_config.webid] = profile_text

        for iri, path in config.known_profiles.items():
            with open(path, "r", encoding="utf-8") as fh:
                local_documents[iri] = fh.read()

        self.fetcher = LocalFirstFetcher(local_documents)
        self.export_selections: dict[str, list[str] | None] = {}
        self._persist_lock = threading.Lock()
        self._insert_counter = itertools.count()

        # every actor graph carries its own webid triple (the owner's own
        # access to its graph is decided by it)
        seeded = 0
        for runtime in self.actors_by_short.values():
            seeded += self.store.add(
                runtime.config.iri,
                [
                    Triple(
                        IRI(runtime.config.iri + "#"),
                        runtime.vocabulary.webid,
                        IRI(runtime.config.webid),
                    )
                ],
            )
        if seeded:
            self.persist()

    def authenticate(self, der: bytes | None) -> tuple[str | None, str]:
        """WebID of the presented client certificate, or None plus a reason."""
        if der is None:
            return None, "no client certificate presented"
        try:
            info = extract_certificate_info(der)
        except CasError as exc:
            return None, f"client certificate rejected: {exc}"
        result: VerificationResult = verify_webid(info, self.fetcher)
        if result.verified:
            return result.webid, "verified"
        return None, f"webid verification failed: {result.outcome.value} ({result.webid})"

    def actor_for_webid(self, webid: str | None) -> ActorRuntime | None:
        if webid is None:
            return None
        return self.actors_by_webid.get(webid)

    def persist(self) -> None:
        with self._persist_lock:
            self.store.save(self.config.dataset_path)

    def fresh_insert_prefix(self) -> str:
        return f"g{next(self._insert_counter)}_"


class _HttpError(Exception):
    def __init__(self, status: int, error: str, category: str, detail: str):
        self.status = status
        self.error = error
        self.category = category
        self.detail = detail
        super().__init__(detail)


def _unauthenticated(detail: str) -> _HttpError:
    return _HttpError(401, "authentication required", "auth", detail)


def _forbidden(detail: str) -> _HttpError:
    return _HttpError(403, "not authorized", "authz", detail)


_PACKAGE_ERRORS = (MalformedPackageError, IntegrityError, UnsupportedVersionError)


class RequestHandler(BaseHTTPRequestHandler):
    server: "CasHttpServer"
    protocol_version = "HTTP/1.1"
    timeout = 60

    # -- plumbing -------------------------------------------------------------

    def setup(self) -> None:
        if isinstance(self.request, ssl.SSLSocket):
            self.request.do_handshake()
        super().setup()

    def log_message(self, format: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), format % args)

    @property
    def app(self) -> ServerApp:
        return self.server.app

    def _client_certificate_der(self) -> bytes | None:
        if isinstance(self.connection, ssl.SSLSocket):
            return self.connection.getpeercert(binary_form=True)
        return None

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, data: bytes, media_type: str, status: int = 200, filename: str | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", media_type)
        self.send_header("Content-Length", str(len(data)))
        if filename is not None:
            self.send_header("Content-Disposition", f'attachment; filename="{filename}"')
        self.end_headers()
        self.wfile.write(data)

    def _send_error_json(self, error: _HttpError) -> None:
        self._send_json(
            {"error": error.error, "category": error.category, "detail": error.detail},
            status=error.status,
        )

    def _read_body(self, limit: int | None = None) -> bytes:
        length_header = self.headers.get("Content-Length")
        if length_header is None:
            raise _HttpError(411, "length required", "validation", "Content-Length header is required")
        try:
            length = int(length_header)
        except ValueError:
            raise _HttpError(400, "bad request", "validation", "malformed Content-Length") from None
        if length < 0:
            raise _HttpError(400, "bad request", "validation", "negative Content-Length")
        if limit is not None and length > limit:
            raise _HttpError(413, "payload too large", "validation", f"body exceeds {limit} bytes")
        self._body_consumed = True
        return self.rfile.read(length)

    def _drain_unread_body(self) -> None:
        """Consume a request body the handler never read, or the next
        request on this keep-alive connection would parse mid-body."""
        if getattr(self, "_body_consumed", False):
            return
        try:
            remaining = int(self.headers.get("Content-Length") or 0)
        except ValueError:
            return
        if remaining > 4 * 1024 * 1024:
            self.close_connection = True
            return
        while remaining > 0:
            chunk = self.rfile.read(min(remaining, 65536))
            if not chunk:
                return
            remaining -= len(chunk)

    def _json_body(self) -> dict:
        body = self._read_body(limit=self.app.config.max_upload_bytes)
        try:
            payload = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _HttpError(400, "bad request", "validation", f"body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise _HttpError(400, "bad request", "validation", "JSON body must be an object")
        return payload

    def _authenticate(self) -> str:
        webid, detail = self.app.authenticate(self._client_certificate_der())
        if webid is None:
            raise _unauthenticated(detail)
        return webid

    def _own_actor(self, webid: str) -> ActorRuntime:
        actor = self.app.actor_for_webid(webid)
        if actor is None:
            raise _forbidden(f"webid {webid} does not belong to a configured actor")
        return actor

    # -- dispatch ---------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        url = urlsplit(self.path)
        segments = [s for s in url.path.split("/") if s]
        self._body_consumed = False
        try:
            if not segments:
                if method != "GET":
                    raise _HttpError(404, "not found", "not_found", f"no route for {method} /")
                self._handle_root()
            elif segments[0] == "static" and method == "GET":
                self._handle_static(segments[1:])
            elif segments[0] == "webid" and method == "GET" and len(segments) == 2:
                self._handle_profile(segments[1])
            elif segments[0] == "store" and method == "POST" and len(segments) == 1:
                self._handle_store_proxy()
            elif segments[0] == "upload" and method == "POST" and len(segments) == 1:
                self._handle_upload()
            elif segments[0] == "export" and method == "GET" and len(segments) == 2:
                self._handle_export(segments[1])
            elif segments[0] == "import" and method == "POST" and len(segments) == 1:
                self._handle_import()
            elif segments[0] == "action" and len(segments) == 2:
                self._handle_action(method, segments[1], url.query)
            else:
                raise _HttpError(404, "not found", "not_found", f"no route for {method} {url.path}")
        except _HttpError as error:
            self._send_error_json(error)
        except CasError as error:
            logger.warning("request failed: %s", error)
            status = 500 if isinstance(error, StorageError) else 400
            self._send_error_json(_HttpError(status, "request failed", error.category, str(error)))
        except BrokenPipeError:
            pass
        except Exception:
            logger.exception("internal error handling %s %s", method, self.path)
            self._send_error_json(_HttpError(500, "internal error", "internal", "unexpected failure"))
        finally:
            try:
                self._drain_unread_body()
            except OSError:
                self.close_connection = True

    # -- public endpoints -----------------------------------------------------

    def _handle_root(self) -> None:
        if self.app.config.static_root is None:
            raise _HttpError(404, "not found", "not_found", "no static content configured")
        self.send_response(302)
        self.send_header("Location", "/static/index.html")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _handle_static(self, segments: list[str]) -> None:
        root = self.app.config.static_root
        if root is None:
            raise _HttpError(404, "not found", "not_found", "no static content configured")
        relative = os.path.join(*segments) if segments else "index.html"
        path = os.path.realpath(os.path.join(root, relative))
        if not path.startswith(os.path.realpath(root) + os.sep) and path != os.path.realpath(root):
            raise _HttpError(404, "not found", "not_found", "path escapes static root")
        if os.path.isdir(path):
            path = os.path.join(path, "index.html")
        if not os.path.isfile(path):
            raise _HttpError(404, "not found", "not_found", f"no static file {relative}")
        media_type = mimetypes.guess_type(path)[0] or "application/octet-stream"
        with open(path, "rb") as fh:
            self._send_bytes(fh.read(), media_type)

    def _handle_profile(self, short_name: str) -> None:
        opslog.note("server.handle_profile")
        actor = self.app.actors_by_short.get(short_name)
        if actor is None:
            raise _HttpError(404, "not found", "not_found", f"no actor {short_name!r}")
        self._send_bytes(actor.profile_text.encode("utf-8"), "text/turtle")

    # -- store proxy ---------------------------------------------------------

    def _handle_store_proxy(self) -> None:
        opslog.note("server.handle_store_proxy")
        webid = self._authenticate()
        payload = self._json_body()
        op = payload.get("op")
        graph = payload.get("graph")
        if not isinstance(graph, str):
            raise _HttpError(400, "bad request", "validation", "field 'graph' (IRI) is required")

        if op == "select":
            owner = self._graph_owner(graph)
            decision = self.app.cas.check_access(owner.config.iri, webid)
            if not decision.allowed:
                raise _forbidden(f"access to graph <{graph}> denied ({decision.reason})")
            pattern = {
                position: self._parse_pattern_term(payload.get(position))
                for position in ("subject", "predicate", "object")
            }
            quads = self.app.store.match_pattern(
                graph=graph,
                subject=pattern["subject"],
                predicate=pattern["predicate"],
                obj=pattern["object"],
            )
            self._send_json({"graph": graph, "triples": [triple_to_ntriples(q.triple) for q in quads]})
        elif op in ("insert", "delete"):
            actor = self._own_actor(webid)
            if graph != actor.config.iri:
                raise _forbidden("updates are allowed only on the requester's own graph")
            triples = self._parse_update_triples(payload)
            if op == "insert":
                count = self.app.store.add(
                    graph, relabel_blank_nodes(triples, self.app.fresh_insert_prefix())
                )
                self.app.persist()
                self._send_json({"graph": graph, "inserted": count})
            else:
                if any(isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode) for t in triples):
                    raise _HttpError(
                        400, "bad request", "validation", "deletes cannot address blank nodes"
                    )
                count = self.app.store.remove(graph, triples)
                self.app.persist()
                self._send_json({"graph": graph, "deleted": count})
        else:
            raise _HttpError(400, "bad request", "validation", f"unknown op {op!r}")

    def _graph_owner(self, graph: str) -> ActorRuntime:
        for actor in self.app.actors_by_short.values():
            if actor.config.iri == graph:
                return actor
        raise _HttpError(404, "not found", "unknown_actor", f"no actor owns graph <{graph}>")

    def _parse_pattern_term(self, encoded: object) -> Term | None:
        if encoded is None:
            return None
        if not isinstance(encoded, str):
            raise _HttpError(400, "bad request", "validation", "pattern terms must be strings")
        if encoded.startswith("_:"):
            raise _HttpError(400, "bad request", "validation", "blank nodes cannot be queried by label")
        try:
            triples = parse_document(f"<urn:x:s> <urn:x:p> {encoded} .", syntax="ntriples")
        except ParseError as exc:
            raise _HttpError(400, "bad request", "validation", f"malformed term {encoded!r}: {exc}") from exc
        return triples[0].object

    def _parse_update_triples(self, payload: dict) -> list[Triple]:
        text = payload.get("triples")
        if not isinstance(text, str):
            raise _HttpError(400, "bad request", "validation", "field 'triples' (N-Triples text) is required")
        try:
            return parse_document(text, syntax="ntriples")
        except ParseError as exc:
            raise _HttpError(400, "bad request", "validation", f"malformed triples: {exc}") from exc

    # -- upload ----------------------------------------------------------------

    def _handle_upload(self) -> None:
        opslog.note("server.handle_upload")
        webid = self._authenticate()
        actor = self._own_actor(webid)
        content_type = self.headers.get("Content-Type", "")
        if "multipart/form-data" not in content_type:
            raise _HttpError(400, "bad request", "validation", "expected multipart/form-data")
        body = self._read_body(limit=self.app.config.max_upload_bytes)
        file_name, media_type, data = self._parse_multipart(content_type, body)
        if not data:
            raise _HttpError(400, "bad request", "validation", "uploaded file part is empty")
        record = self.app.cas.store_document(actor.config.iri, file_name, media_type, data)
        self.app.persist()
        self._send_json({"document": record.as_dict()})

    @staticmethod
    def _parse_multipart(content_type: str, body: bytes) -> tuple[str, str, bytes]:
        header = f"Content-Type: {content_type}\r\n\r\n".encode("ascii")
        message = BytesParser(policy=HTTP_POLICY).parsebytes(header + body)
        if not message.is_multipart():
            raise _HttpError(400, "bad request", "validation", "malformed multipart body")
        for part in message.iter_parts():
            filename = part.get_filename()
            if filename is None:
                continue
            payload = part.get_payload(decode=True) or b""
            media_type = part.get_content_type()
            return filename, media_type, payload
        raise _HttpError(400, "bad request", "validation", "no file part in upload")

    # -- package exchange -------------------------------------------------------

    def _handle_export(self, name: str) -> None:
        opslog.note("server.handle_zip")
        webid = self._authenticate()
        if not name.endswith(".zip"):
            raise _HttpError(404, "not found", "not_found", "exports are served as <owner>.zip")
        owner = self.app.actors_by_short.get(name[: -len(".zip")])
        if owner is None:
            raise _HttpError(404, "not found", "not_found", f"no actor {name!r}")
        decision = self.app.cas.check_access(owner.config.iri, webid)
        if not decision.allowed:
            raise _forbidden(f"export of {owner.config.short_name} denied ({decision.reason})")
        subjects = self.app.export_selections.get(owner.config.short_name)
        zip_bytes = build_export(self.app.store, self.app.cas, owner.config.iri, subjects=subjects)
        self._send_bytes(zip_bytes, "application/zip", filename=f"export-{owner.config.short_name}.zip")

    def _handle_import(self) -> None:
        opslog.note("server.handle_zip")
        webid = self._authenticate()
        actor = self._own_actor(webid)
        body = self._read_body(limit=self.app.config.max_upload_bytes)
        try:
            package = parse_package(body)
            summary = import_package(self.app.store, self.app.cas, package, actor.config.iri)
        except _PACKAGE_ERRORS as exc:
            raise _HttpError(400, "package rejected", exc.category, str(exc)) from exc
        self.app.persist()
        self._send_json(
            {"triples_added": summary.triples_added, "files_added": summary.files_added}
        )

    # -- JSON actions ---------------------------------------------------------------

    def _handle_action(self, method: str, name: str, query: str) -> None:
        webid = self._authenticate()
        if name == "whoami":
            actor = self.app.actor_for_webid(webid)
            self._send_json(
                {
                    "webid": webid,
                    "actor": actor.config.short_name if actor else None,
                    "role": actor.config.role if actor else None,
                    "actor_iri": actor.config.iri if actor else None,
                }
            )
            return

        actor = self._own_actor(webid)
        if name == "get-document":
            if method == "GET":
                params = parse_qs(query)
                handle = (params.get("handle") or [""])[0]
            else:
                handle = str(self._json_body().get("handle", ""))
            try:
                record, data = self.app.cas.get_document(actor.config.iri, handle)
            except NotFoundError as exc:
                raise _HttpError(404, "not found", exc.category, str(exc)) from exc
            self._send_bytes(data, record.file_type, filename=record.file_name)
            return

        if method != "POST" and name not in ("list-own-data", "list-documents"):
            raise _HttpError(400, "bad request", "validation", f"action {name!r} requires POST")

        if name == "list-own-data":
            quads = self.app.store.match_pattern(graph=actor.config.iri)
            self._send_json(
                {
                    "graph": actor.config.iri,
                    "triples": sorted(triple_to_ntriples(q.triple) for q in quads),
                }
            )
        elif name == "list-documents":
            records = self.app.cas.list_documents(actor.config.iri)
            self._send_json({"documents": [r.as_dict() for r in records]})
        elif name == "set-permission":
            payload = self._json_body()
            target = payload.get("webid")
            grant = payload.get("grant")
            if not isinstance(target, str) or not isinstance(grant, bool):
                raise _HttpError(400, "bad request", "validation", "need 'webid' (string) and 'grant' (bool)")
            self.app.cas.set_permission(actor.config.iri, target, grant)
            self.app.persist()
            self._send_json({"webid": target, "granted": grant})
        elif name == "record-decision":
            payload = self._json_body()
            decision = payload.get("decision")
            student_webid = payload.get("student_webid")
            if decision not in ("accepted", "rejected") or not isinstance(student_webid, str):
                raise _HttpError(
                    400,
                    "bad request",
                    "validation",
                    "need 'decision' (accepted|rejected) and 'student_webid' (string)",
                )
            subject = decision_subject(actor.config.iri, student_webid)
            voc = actor.vocabulary
            self.app.store.add(
                actor.config.iri,
                [
                    Triple(subject, voc.term("decision"), Literal(decision)),
                    Triple(subject, voc.term("decisionFor"), IRI(student_webid)),
                ],
            )
            self.app.persist()
            self._send_json({"subject": subject.value, "decision": decision})
        elif name == "set-export-selection":
            payload = self._json_body()
            subjects = payload.get("subjects")
            if subjects is not None and not (
                isinstance(subjects, list) and all(isinstance(s, str) for s in subjects)
            ):
                raise _HttpError(400, "bad request", "validation", "'subjects' must be null or a list of IRIs")
            self.app.export_selections[actor.config.short_name] = subjects
            self._send_json({"actor": actor.config.short_name, "subjects": subjects})
        else:
            raise _HttpError(404, "not found", "not_found", f"unknown action {name!r}")


def decision_subject(actor_iri: str, student_webid: str) -> IRI:
    """Stable subject for a decision record, derived from the student's WebID."""
    digest = hashlib.sha256(student_webid.encode("utf-8")).hexdigest()[:16]
    return IRI(f"{actor_iri}#decision-{digest}")


class CasHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, app: ServerApp):
        self.app = app
        super().__init__((app.config.host, app.config.port), RequestHandler)
        context = ssl.SSLContext(ssl.PROTOCOL_TLS_SERVER)
        context.load_cert_chain(app.config.tls_cert_path, app.config.tls_key_path)
        context.verify_mode = ssl.CERT_OPTIONAL
        context.load_verify_locations(cafile=app.config.client_ca_path)
        self._ssl_context = context

    def get_request(self):
        sock, addr = self.socket.accept()
        sock.settimeout(30)
        # handshake is deferred to the worker thread (RequestHandler.setup)
        wrapped = self._ssl_context.wrap_socket(sock, server_side=True, do_handshake_on_connect=False)
        return wrapped, addr

    def handle_error(self, request, client_address) -> None:
        logger.debug("connection error from %s", client_address, exc_info=True)

    @property
    def port(self) -> int:
        return self.server_address[1]


class ServerHandle:
    """A running server plus its thread, for embedding and tests."""

    def __init__(self, app: ServerApp):
        self.app = app
        self.httpd = CasHttpServer(app)
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        return f"https://{self.app.config.host}:{self.httpd.port}"

    def start(self) -> "ServerHandle":
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=10)

    def __enter__(self) -> "ServerHandle":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def run_server(config: ServerConfig) -> None:
    """Blocking server loop (the CLI's serve command)."""
    app = ServerApp(config)
    httpd = CasHttpServer(app)
    logger.info("serving on https://%s:%s", config.host, httpd.port)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
