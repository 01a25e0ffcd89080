"""Scripted three-actor enrollment workflow against a live server.

The runner provisions a self-contained workspace (identities, TLS material,
config), starts the server in-process, and drives the full exchange over
HTTPS with per-actor client certificates:

  1. seed bachelor-side data (after an identity audit of all three actors)
  2. the student imports the bachelor package
  3. the student adds attributes and uploads a document
  4. the student grants the master's WebID access
  5. the master downloads and imports the dossier, checking the document
  6. the master records its decision and grants the student access
  7. the student retrieves and verifies the decision

Workspaces are reusable: a second run against the same directory performs
only idempotent actions and must report zero-added imports.
"""

from __future__ import annotations

import logging
import os
import socket
import time
from dataclasses import dataclass, field
from typing import Callable

import requests
from cryptography import x509
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import rsa

from . import opslog
from .cas import random_handle
from .config import ActorConfig, ServerConfig
from .errors import CasError
from .rdf import IRI, Literal, Triple, parse_document, serialize_ntriples
from .server import ServerApp, ServerHandle, decision_subject
from .webid import (
    build_self_signed_certificate,
    check_interlink,
    extract_certificate_info,
    generate_identity,
    write_identity_files,
)

logger = logging.getLogger(__name__)

ACTOR_PLAN = (
    ("student", "student", "http://persemid.bfh.ch/vocab/student#"),
    ("hbsc", "bachelor", "http://persemid.bfh.ch/vocab/hbsc#"),
    ("hmsc", "master", "http://persemid.bfh.ch/vocab/hmsc#"),
)

TRANSCRIPT_DOCUMENT = b"%PDF-1.4 bachelor transcript\n" + b"T" * 2048
CURRICULUM_DOCUMENT = b"%PDF-1.4 curriculum vitae\n" + b"C" * 4096


class WorkflowStepError(CasError):
    category = "workflow"

    def __init__(self, step: str, detail: str, transcript: list["StepResult"]):
        self.step = step
        self.detail = detail
        self.transcript = transcript
        super().__init__(f"step {step!r} failed: {detail}")


@dataclass
class StepResult:
    name: str
    status: str  # ok | skipped | failed
    detail: str = ""


@dataclass
class WorkflowResult:
    steps: list[StepResult]
    recorded_decision: str
    retrieved_decision: str

    @property
    def ok(self) -> bool:
        return (
            all(s.status in ("ok", "skipped") for s in self.steps)
            and self.recorded_decision == self.retrieved_decision
        )

    def transcript(self) -> str:
        lines = [
            f"[{index + 1}/{len(self.steps)}] {step.name}: {step.status}"
            + (f" - {step.detail}" if step.detail else "")
            for index, step in enumerate(self.steps)
        ]
        lines.append(f"decision recorded={self.recorded_decision!r} retrieved={self.retrieved_decision!r}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Workspace provisioning
# ---------------------------------------------------------------------------

def provision_identity(name: str, profile_uri: str, out_dir: str, key_bits: int = 2048, force: bool = False) -> dict[str, str]:
    """Generate and persist one identity (also the gen-identity CLI path)."""
    opslog.note("cli.cmd_gen_identity")
    identity = generate_identity(name, profile_uri, key_bits)
    return write_identity_files(out_dir, identity, force=force)


def free_port(host: str) -> int:
    with socket.socket() as probe:
        probe.bind((host, 0))
        return probe.getsockname()[1]


def prepare_workspace(root: str | os.PathLike[str], host: str = "127.0.0.1", port: int | None = None) -> str:
    """Create (or reuse) a self-contained deployment directory.

    Returns the config path. The port is fixed at first creation because the
    actors' WebIDs embed it.
    """
    root = os.fspath(root)
    config_path = os.path.join(root, "config.json")
    if os.path.exists(config_path):
        return config_path

    os.makedirs(root, exist_ok=True)
    port = port or free_port(host)
    identities_dir = os.path.join(root, "identities")
    server_dir = os.path.join(root, "server")
    os.makedirs(server_dir, exist_ok=True)

    actors = []
    bundle_parts = []
    for short_name, role, vocabulary in ACTOR_PLAN:
        webid = f"https://{host}:{port}/webid/{short_name}#id"
        paths = provision_identity(short_name, webid, identities_dir)
        with open(paths["certificate"], "rb") as fh:
            bundle_parts.append(fh.read())
        actors.append(
            ActorConfig(
                short_name=short_name,
                role=role,
                iri=f"https://{host}:{port}/actor/{short_name}",
                vocabulary=vocabulary,
                webid=webid,
                profile_path=os.path.join("identities", f"{short_name}.profile.ttl"),
            )
        )

    tls_key = rsa.generate_private_key(public_exponent=65537, key_size=2048)
    san_dns = sorted({host, "localhost"} - {"127.0.0.1"})
    tls_cert = build_self_signed_certificate(
        tls_key, host, san_dns=san_dns, san_ips=["127.0.0.1"]
    )
    with open(os.path.join(server_dir, "tls.key.pem"), "wb") as fh:
        fh.write(
            tls_key.private_bytes(
                serialization.Encoding.PEM,
                serialization.PrivateFormat.PKCS8,
                serialization.NoEncryption(),
            )
        )
    with open(os.path.join(server_dir, "tls.cert.pem"), "wb") as fh:
        fh.write(tls_cert.public_bytes(serialization.Encoding.PEM))
    with open(os.path.join(root, "client-ca.pem"), "wb") as fh:
        fh.write(b"".join(bundle_parts))

    config = ServerConfig(
        host=host,
        port=port,
        tls_cert_path=os.path.join("server", "tls.cert.pem"),
        tls_key_path=os.path.join("server", "tls.key.pem"),
        client_ca_path="client-ca.pem",
        dataset_path="dataset.nq",
        storage_root="storage",
        actors=tuple(actors),
    )
    config.save(config_path)
    return config_path


def append_to_client_ca(config: ServerConfig, certificate_pem: bytes) -> None:
    """Admit one more client certificate at the TLS layer (authorization is
    still decided per request)."""
    with open(config.client_ca_path, "ab") as fh:
        fh.write(certificate_pem)


# ---------------------------------------------------------------------------
# HTTP plumbing
# ---------------------------------------------------------------------------

class ActorClient:
    """requests session bound to one actor's client certificate."""

    def __init__(self, base_url: str, config: ServerConfig, short_name: str):
        identities_dir = os.path.join(os.path.dirname(config.client_ca_path), "identities")
        self.short_name = short_name
        self.base_url = base_url
        self.session = requests.Session()
        self.session.verify = config.tls_cert_path
        self.session.cert = (
            os.path.join(identities_dir, f"{short_name}.cert.pem"),
            os.path.join(identities_dir, f"{short_name}.key.pem"),
        )

    def request(self, method: str, path: str, expect: int = 200, **kwargs) -> requests.Response:
        response = self.session.request(method, self.base_url + path, timeout=30, **kwargs)
        if response.status_code != expect:
            raise RuntimeError(
                f"{method} {path} returned {response.status_code} (expected {expect}): "
                f"{response.text[:300]}"
            )
        return response

    def action(self, name: str, payload: dict | None = None) -> dict:
        return self.request("POST", f"/action/{name}", json=payload or {}).json()

    def insert(self, graph: str, triples: list[Triple]) -> int:
        payload = {"op": "insert", "graph": graph, "triples": serialize_ntriples(triples)}
        return self.request("POST", "/store", json=payload).json()["inserted"]

    def select(self, graph: str, predicate: str | None = None) -> list[str]:
        payload: dict = {"op": "select", "graph": graph}
        if predicate is not None:
            payload["predicate"] = f"<{predicate}>"
        return self.request("POST", "/store", json=payload).json()["triples"]

    def close(self) -> None:
        self.session.close()


# ---------------------------------------------------------------------------
# The workflow itself
# ---------------------------------------------------------------------------

@dataclass
class _Run:
    config: ServerConfig
    clients: dict[str, ActorClient]
    steps: list[StepResult] = field(default_factory=list)
    skip_grant: bool = False
    decision: str = "accepted"
    recorded_decision: str = ""
    retrieved_decision: str = ""

    def actor(self, short_name: str) -> ActorConfig:
        found = self.config.actor_by_short_name(short_name)
        assert found is not None
        return found


def run_workflow(
    workspace: str | os.PathLike[str],
    host: str = "127.0.0.1",
    port: int | None = None,
    skip_grant: bool = False,
    decision: str = "accepted",
    handle_factory: Callable[[], str] = random_handle,
) -> WorkflowResult:
    """Execute the whole enrollment exchange; raises WorkflowStepError on the
    first failing step."""
    opslog.note("cli.cmd_workflow")
    config_path = prepare_workspace(workspace, host=host, port=port)
    config = ServerConfig.load(config_path)
    app = ServerApp(config, handle_factory=handle_factory)
    started = time.monotonic()
    with ServerHandle(app) as server:
        clients = {
            short: ActorClient(server.base_url, config, short)
            for short, _, _ in ACTOR_PLAN
        }
        run = _Run(config=config, clients=clients, skip_grant=skip_grant, decision=decision)
        try:
            _execute(run)
        finally:
            for client in clients.values():
                client.close()
    result = WorkflowResult(
        steps=run.steps,
        recorded_decision=run.recorded_decision,
        retrieved_decision=run.retrieved_decision,
    )
    logger.info("workflow finished in %.2fs ok=%s", time.monotonic() - started, result.ok)
    return result


def _execute(run: _Run) -> None:
    plan = [
        ("seed-bachelor-data", _step_seed_bachelor),
        ("student-import-bachelor", _step_student_import),
        ("student-upload-document", _step_student_upload),
        ("student-grant-master", _step_student_grant),
        ("master-import-dossier", _step_master_import),
        ("master-decision", _step_master_decision),
        ("student-retrieve-decision", _step_student_retrieve),
    ]
    for name, step in plan:
        if name == "student-grant-master" and run.skip_grant:
            run.steps.append(StepResult(name, "skipped", "grant suppressed by flag"))
            continue
        try:
            detail = step(run)
        except Exception as exc:
            run.steps.append(StepResult(name, "failed", str(exc)))
            raise WorkflowStepError(name, str(exc), run.steps) from exc
        run.steps.append(StepResult(name, "ok", detail))


def _identity_audit(run: _Run) -> str:
    """All three actors must present distinct, non-interlinked identities."""
    infos = {}
    for short, client in run.clients.items():
        profile_url = f"{run.clients[short].base_url}/webid/{short}"
        response = client.request("GET", f"/webid/{short}")
        if "text/turtle" not in response.headers.get("Content-Type", ""):
            raise RuntimeError(f"profile {profile_url} not served as text/turtle")
        cert_path = client.session.cert[0]
        with open(cert_path, "rb") as fh:
            der = x509.load_pem_x509_certificate(fh.read()).public_bytes(serialization.Encoding.DER)
        infos[short] = (extract_certificate_info(der), response.text)

    fetched = {
        run.actor(short).webid: text for short, (_, text) in infos.items()
    }

    def fetch(uri: str) -> tuple[bytes, str]:
        from .rdf import defragment
        from .webid import ProfileFetchError

        for webid, text in fetched.items():
            if defragment(webid) == defragment(uri):
                return text.encode("utf-8"), "text/turtle"
        raise ProfileFetchError(f"not a workflow actor: {uri}")

    shorts = sorted(infos)
    for i, first in enumerate(shorts):
        for second in shorts[i + 1:]:
            link = check_interlink(infos[first][0], infos[second][0], fetch)
            if link.linked:
                raise RuntimeError(f"identities {first} and {second} are interlinked (method {link.method})")
    return f"{len(shorts)} distinct identities"


def _step_seed_bachelor(run: _Run) -> str:
    audit = _identity_audit(run)
    hbsc = run.clients["hbsc"]
    actor = run.actor("hbsc")
    vocabulary = actor.vocabulary
    existing = hbsc.select(actor.iri, predicate=vocabulary + "degree")
    inserted = 0
    if not existing:
        subject = IRI(actor.iri + "#")
        triples = [
            Triple(subject, IRI(vocabulary + "degree"), Literal("Bachelor of Science in Computer Science")),
            Triple(subject, IRI(vocabulary + "degreeDate"), Literal("2015-07-15")),
            Triple(subject, IRI(vocabulary + "finalGrade"), Literal("5.5")),
            Triple(subject, IRI(vocabulary + "matrikelnummer"), Literal("1-234-56")),
        ]
        inserted = hbsc.insert(actor.iri, triples)
    documents = hbsc.action("list-documents")["documents"]
    if not any(d["file_name"] == "Transcript.pdf" for d in documents):
        files = {"file": ("Transcript.pdf", TRANSCRIPT_DOCUMENT, "application/pdf")}
        hbsc.request("POST", "/upload", files=files)
    hbsc.action("set-permission", {"webid": run.actor("student").webid, "grant": True})
    return f"{audit}; degree triples inserted={inserted}"


def _step_student_import(run: _Run) -> str:
    student = run.clients["student"]
    package = student.request("GET", "/export/hbsc.zip").content
    summary = student.request(
        "POST", "/import", data=package, headers={"Content-Type": "application/zip"}
    ).json()
    return f"imported triples={summary['triples_added']} files={summary['files_added']}"


def _step_student_upload(run: _Run) -> str:
    student = run.clients["student"]
    actor = run.actor("student")
    vocabulary = actor.vocabulary
    inserted = 0
    if not student.select(actor.iri, predicate=vocabulary + "name"):
        subject = IRI(actor.iri + "#")
        inserted = student.insert(
            actor.iri,
            [
                Triple(subject, IRI(vocabulary + "name"), Literal("Dent")),
                Triple(subject, IRI(vocabulary + "vorname"), Literal("Stu")),
                Triple(subject, IRI(vocabulary + "email"), Literal("stu.dent@example.org")),
            ],
        )
    documents = student.action("list-documents")["documents"]
    if not any(d["file_name"] == "Curriculum.pdf" for d in documents):
        files = {"file": ("Curriculum.pdf", CURRICULUM_DOCUMENT, "application/pdf")}
        uploaded = student.request("POST", "/upload", files=files).json()["document"]
        detail = f"uploaded handle={uploaded['handle']} size={uploaded['file_size']}"
    else:
        detail = "document already present"
    return f"attributes inserted={inserted}; {detail}"


def _step_student_grant(run: _Run) -> str:
    student = run.clients["student"]
    target = run.actor("hmsc").webid
    student.action("set-permission", {"webid": target, "grant": True})
    return f"granted {target}"


def _step_master_import(run: _Run) -> str:
    master = run.clients["hmsc"]
    package = master.request("GET", "/export/student.zip").content
    summary = master.request(
        "POST", "/import", data=package, headers={"Content-Type": "application/zip"}
    ).json()
    documents = master.action("list-documents")["documents"]
    curriculum = [d for d in documents if d["file_name"] == "Curriculum.pdf"]
    if not curriculum:
        raise RuntimeError("imported dossier does not list the curriculum document")
    data = master.request("GET", f"/action/get-document?handle={curriculum[0]['handle']}").content
    if data != CURRICULUM_DOCUMENT:
        raise RuntimeError("downloaded document differs from the uploaded bytes")
    return f"imported triples={summary['triples_added']} files={summary['files_added']}; document verified"


def _step_master_decision(run: _Run) -> str:
    master = run.clients["hmsc"]
    student_webid = run.actor("student").webid
    recorded = master.action(
        "record-decision", {"decision": run.decision, "student_webid": student_webid}
    )
    master.action("set-permission", {"webid": student_webid, "grant": True})
    run.recorded_decision = recorded["decision"]
    return f"recorded {recorded['decision']} at {recorded['subject']}"


def _step_student_retrieve(run: _Run) -> str:
    student = run.clients["student"]
    package = student.request("GET", "/export/hmsc.zip").content
    summary = student.request(
        "POST", "/import", data=package, headers={"Content-Type": "application/zip"}
    ).json()
    master = run.actor("hmsc")
    subject = decision_subject(master.iri, run.actor("student").webid)
    lines = student.select(run.actor("student").iri, predicate=master.vocabulary + "decision")
    decisions = []
    for line in lines:
        for triple in parse_document(line, syntax="ntriples"):
            if triple.subject == subject and isinstance(triple.object, Literal):
                decisions.append(triple.object.lexical)
    if len(decisions) != 1:
        raise RuntimeError(f"expected exactly one decision statement, found {decisions}")
    run.retrieved_decision = decisions[0]
    if run.retrieved_decision != run.recorded_decision:
        raise RuntimeError(
            f"retrieved decision {run.retrieved_decision!r} differs from recorded {run.recorded_decision!r}"
        )
    return f"imported triples={summary['triples_added']}; decision={run.retrieved_decision!r}"
