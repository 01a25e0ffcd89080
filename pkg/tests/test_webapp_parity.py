"""Webapp parity: replaying the SPA's request sequence reproduces the CLI
workflow's final store state triple-for-triple.

No browser runs here (client-certificate selection cannot be driven
headlessly in this environment), so the test replays the exact HTTP calls
the webapp issues — the same routes, bodies, and ordering as
frontend/src/api.ts and frontend/src/views.ts — over three client-certificate
identities. Document handles are made deterministic by injecting a
sequential handle factory into both runs.
"""

import itertools
import os
import shutil

from webid_cas.config import ServerConfig
from webid_cas.rdf import QuadStore
from webid_cas.server import ServerApp, ServerHandle
from webid_cas.workflow import (
    CURRICULUM_DOCUMENT,
    TRANSCRIPT_DOCUMENT,
    prepare_workspace,
    run_workflow,
)

from conftest import ActorHttpClient


def sequential_handles():
    counter = itertools.count(1)
    return lambda: f"{next(counter):032x}"


def _graph_snapshot(dataset_path):
    store = QuadStore.load(dataset_path)
    return {graph: set(store.triples(graph)) for graph in store.graph_names()}


def _attribute_statement(subject: str, predicate: str, value: str) -> str:
    # mirror of frontend/src/nt.ts attributeStatement (plain string literals)
    escaped = (
        value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        .replace("\r", "\\r").replace("\t", "\\t")
    )
    return f'<{subject}> <{predicate}> "{escaped}" .\n'


def _replay_webapp_sequence(workspace, config: ServerConfig) -> None:
    app = ServerApp(config, handle_factory=sequential_handles())
    with ServerHandle(app) as server:
        clients = {
            short: ActorHttpClient(server.base_url, os.fspath(workspace), short)
            for short in ("student", "hbsc", "hmsc")
        }
        try:
            actor = {a.short_name: a for a in config.actors}

            # -- bachelor: dossier data view -------------------------------
            bachelor = clients["hbsc"]
            session = bachelor.post("/action/whoami", json={}).json()
            assert session["role"] == "bachelor"
            bachelor.post("/action/list-own-data", json={}).raise_for_status()
            bachelor.post("/action/list-documents", json={}).raise_for_status()
            subject = actor["hbsc"].iri + "#"
            vocabulary = actor["hbsc"].vocabulary
            for name, value in (
                ("degree", "Bachelor of Science in Computer Science"),
                ("degreeDate", "2015-07-15"),
                ("finalGrade", "5.5"),
                ("matrikelnummer", "1-234-56"),
            ):
                bachelor.post(
                    "/store",
                    json={
                        "op": "insert",
                        "graph": actor["hbsc"].iri,
                        "triples": _attribute_statement(subject, vocabulary + name, value),
                    },
                ).raise_for_status()
            bachelor.post(
                "/upload",
                files={"file": ("Transcript.pdf", TRANSCRIPT_DOCUMENT, "application/pdf")},
            ).raise_for_status()
            bachelor.post(
                "/action/set-permission",
                json={"webid": actor["student"].webid, "grant": True},
            ).raise_for_status()

            # -- student: dossier editor ------------------------------------
            student = clients["student"]
            assert student.post("/action/whoami", json={}).json()["role"] == "student"
            student.post("/action/list-own-data", json={}).raise_for_status()
            student.post("/action/list-documents", json={}).raise_for_status()
            package = student.get("/export/hbsc.zip")
            package.raise_for_status()
            student.post(
                "/import", data=package.content, headers={"Content-Type": "application/zip"}
            ).raise_for_status()
            subject = actor["student"].iri + "#"
            vocabulary = actor["student"].vocabulary
            for name, value in (("name", "Dent"), ("vorname", "Stu"), ("email", "stu.dent@example.org")):
                student.post(
                    "/store",
                    json={
                        "op": "insert",
                        "graph": actor["student"].iri,
                        "triples": _attribute_statement(subject, vocabulary + name, value),
                    },
                ).raise_for_status()
            student.post(
                "/upload",
                files={"file": ("Curriculum.pdf", CURRICULUM_DOCUMENT, "application/pdf")},
            ).raise_for_status()
            student.post(
                "/action/set-permission",
                json={"webid": actor["hmsc"].webid, "grant": True},
            ).raise_for_status()

            # -- master: review and decide -----------------------------------
            master = clients["hmsc"]
            assert master.post("/action/whoami", json={}).json()["role"] == "master"
            package = master.get("/export/student.zip")
            package.raise_for_status()
            master.post(
                "/import", data=package.content, headers={"Content-Type": "application/zip"}
            ).raise_for_status()
            master.post("/action/list-own-data", json={}).raise_for_status()
            documents = master.post("/action/list-documents", json={}).json()["documents"]
            curriculum = next(d for d in documents if d["file_name"] == "Curriculum.pdf")
            downloaded = master.get(f"/action/get-document?handle={curriculum['handle']}")
            downloaded.raise_for_status()
            assert downloaded.content == CURRICULUM_DOCUMENT
            master.post(
                "/action/record-decision",
                json={"decision": "accepted", "student_webid": actor["student"].webid},
            ).raise_for_status()
            master.post(
                "/action/set-permission",
                json={"webid": actor["student"].webid, "grant": True},
            ).raise_for_status()

            # -- student: decision view ---------------------------------------
            package = student.get("/export/hmsc.zip")
            package.raise_for_status()
            student.post(
                "/import", data=package.content, headers={"Content-Type": "application/zip"}
            ).raise_for_status()
            lines = student.post("/action/list-own-data", json={}).json()["triples"]
            assert any('"accepted"' in line and "decision>" in line for line in lines)
        finally:
            for client in clients.values():
                client.close()


def test_webapp_sequence_reaches_identical_store_state(tmp_path):
    workspace = tmp_path / "ws"
    config_path = prepare_workspace(workspace)
    config = ServerConfig.load(config_path)

    result = run_workflow(workspace, handle_factory=sequential_handles())
    assert result.ok
    cli_state = _graph_snapshot(config.dataset_path)

    # full state reset: the replay starts from the same empty store and
    # empty document storage the CLI run started from
    os.remove(config.dataset_path)
    shutil.rmtree(config.storage_root)
    _replay_webapp_sequence(workspace, config)
    webapp_state = _graph_snapshot(config.dataset_path)

    assert set(webapp_state) == set(cli_state)
    for graph in cli_state:
        assert webapp_state[graph] == cli_state[graph], f"graph {graph} differs"
    total = sum(len(triples) for triples in cli_state.values())
    print(f"\nACCEPTANCE [secondary] webapp-driven workflow parity "
          f"({len(cli_state)} graphs, {total} triples identical): PASS")
