"""HTTPS server endpoints: profiles, store proxy, upload, exchange, actions."""

import io
import zipfile

from webid_cas.rdf import IRI, Literal, Triple, parse_document, serialize_ntriples
from webid_cas.webid import extract_certificate_info, verify_webid

PDF = b"%PDF-1.4 server test " + b"s" * 512


def _upload(client, name="Curriculum.pdf", data=PDF, media_type="application/pdf"):
    return client.post("/upload", files={"file": (name, data, media_type)})


def _import(client, package):
    return client.post("/import", data=package, headers={"Content-Type": "application/zip"})


def _select(client, graph, predicate=None):
    payload = {"op": "select", "graph": graph}
    if predicate:
        payload["predicate"] = f"<{predicate}>"
    return client.post("/store", json=payload)


# -- profiles -----------------------------------------------------------------

def test_profile_served_publicly_as_turtle(live_server):
    anonymous = live_server.client(None)
    response = anonymous.get("/webid/student")
    assert response.status_code == 200
    assert response.headers["Content-Type"] == "text/turtle"
    triples = parse_document(response.text, base=live_server.webid("student"))
    assert len(triples) == 5
    local_names = {t.predicate.value.rsplit("#", 1)[-1] for t in triples}
    assert {"modulus", "exponent", "key"} <= local_names


def test_unknown_profile_404(live_server):
    response = live_server.client(None).get("/webid/nosuch")
    assert response.status_code == 404
    assert response.json()["category"] == "not_found"


def test_served_profile_authenticates_the_matching_certificate(live_server, deployment):
    response = live_server.client(None).get("/webid/student")
    with open(deployment / "identities" / "student.cert.pem", "rb") as fh:
        from cryptography import x509
        from cryptography.hazmat.primitives import serialization

        der = x509.load_pem_x509_certificate(fh.read()).public_bytes(serialization.Encoding.DER)
    info = extract_certificate_info(der)

    def fetch(uri):
        return response.content, "text/turtle"

    result = verify_webid(info, fetch)
    assert result.verified
    assert result.webid == live_server.webid("student")


# -- authentication ----------------------------------------------------------

def test_claimed_webid_header_is_ignored(live_server):
    anonymous = live_server.client(None)
    response = anonymous.post(
        "/store",
        json={"op": "select", "graph": live_server.actor_iri("student")},
        headers={"X-WebID": live_server.webid("student")},
    )
    assert response.status_code == 401
    assert response.json()["category"] == "auth"


def test_whoami_reports_server_side_role(live_server):
    for short, role in (("student", "student"), ("hbsc", "bachelor"), ("hmsc", "master")):
        payload = live_server.client(short).post("/action/whoami", json={}).json()
        assert payload == {
            "webid": live_server.webid(short),
            "actor": short,
            "role": role,
            "actor_iri": live_server.actor_iri(short),
        }
    stranger = live_server.client("stranger").post("/action/whoami", json={}).json()
    assert stranger["actor"] is None and stranger["role"] is None and stranger["actor_iri"] is None
    assert stranger["webid"] == "https://idp.test/stranger#id"


# -- store proxy ----------------------------------------------------------------

def test_store_select_requires_grant(live_server):
    student_graph = live_server.actor_iri("student")
    master = live_server.client("hmsc")
    assert _select(master, student_graph).status_code == 403

    student = live_server.client("student")
    student.post(
        "/action/set-permission", json={"webid": live_server.webid("hmsc"), "grant": True}
    ).raise_for_status()
    response = _select(master, student_graph)
    assert response.status_code == 200
    assert any("webid" in line for line in response.json()["triples"])


def test_store_updates_only_own_graph(live_server):
    student = live_server.client("student")
    own = live_server.actor_iri("student")
    foreign = live_server.actor_iri("hmsc")
    triples = serialize_ntriples(
        [Triple(IRI(own + "#"), IRI("http://persemid.bfh.ch/vocab/student#name"), Literal("Dent"))]
    )
    ok = student.post("/store", json={"op": "insert", "graph": own, "triples": triples})
    assert ok.status_code == 200 and ok.json()["inserted"] == 1
    # inserting the same triple again adds nothing
    again = student.post("/store", json={"op": "insert", "graph": own, "triples": triples})
    assert again.json()["inserted"] == 0
    denied = student.post("/store", json={"op": "delete", "graph": foreign, "triples": triples})
    assert denied.status_code == 403
    removed = student.post("/store", json={"op": "delete", "graph": own, "triples": triples})
    assert removed.json()["deleted"] == 1


def test_store_malformed_query_400(live_server):
    student = live_server.client("student")
    own = live_server.actor_iri("student")
    assert student.post("/store", json={"op": "select"}).status_code == 400
    assert student.post("/store", json={"op": "frobnicate", "graph": own}).status_code == 400
    assert (
        student.post("/store", json={"op": "select", "graph": own, "predicate": "<broken"}).status_code
        == 400
    )
    assert (
        student.post("/store", data=b"not json", headers={"Content-Type": "application/json"}).status_code
        == 400
    )


def test_store_select_unknown_graph_404(live_server):
    student = live_server.client("student")
    response = _select(student, "https://elsewhere.test/graph")
    assert response.status_code == 404


# -- upload -------------------------------------------------------------------

def test_upload_round_trip(live_server):
    student = live_server.client("student")
    response = _upload(student, data=b"x" * 605660)
    assert response.status_code == 200
    document = response.json()["document"]
    assert document["file_size"] == 605660
    assert document["file_name"] == "Curriculum.pdf"
    assert document["file_type"] == "application/pdf"
    fetched = student.get(f"/action/get-document?handle={document['handle']}")
    assert fetched.status_code == 200
    assert fetched.content == b"x" * 605660
    assert fetched.headers["Content-Type"] == "application/pdf"


def test_upload_requires_certificate(live_server):
    assert _upload(live_server.client(None)).status_code == 401


def test_upload_empty_part_400(live_server):
    response = _upload(live_server.client("student"), data=b"")
    assert response.status_code == 400


def test_upload_stranger_403(live_server):
    assert _upload(live_server.client("stranger")).status_code == 403


def test_upload_oversize_413(deployment):
    import json as json_module

    config_path = deployment / "config.json"
    raw = json_module.loads(config_path.read_text())
    raw["max_upload_bytes"] = 1024
    config_path.write_text(json_module.dumps(raw))
    from conftest import LiveServer

    server = LiveServer(deployment)
    server.handle.start()
    try:
        response = _upload(server.client("student"), data=b"y" * 4096)
        assert response.status_code == 413
    finally:
        server.close()


# -- export / import -------------------------------------------------------------

def test_export_authorization_and_content(live_server):
    student = live_server.client("student")
    master = live_server.client("hmsc")
    _upload(student).raise_for_status()

    assert master.get("/export/student.zip").status_code == 403
    student.post(
        "/action/set-permission", json={"webid": live_server.webid("hmsc"), "grant": True}
    ).raise_for_status()

    response = master.get("/export/student.zip")
    assert response.status_code == 200
    assert response.headers["Content-Type"] == "application/zip"
    with zipfile.ZipFile(io.BytesIO(response.content)) as archive:
        assert "psidimas/data.nt" in archive.namelist()

    summary = _import(master, response.content)
    assert summary.status_code == 200
    assert summary.json()["files_added"] == 1
    # re-import adds nothing
    assert _import(master, response.content).json() == {"triples_added": 0, "files_added": 0}


def test_export_revocation_flips_to_403(live_server):
    student = live_server.client("student")
    master = live_server.client("hmsc")
    student.post(
        "/action/set-permission", json={"webid": live_server.webid("hmsc"), "grant": True}
    ).raise_for_status()
    assert master.get("/export/student.zip").status_code == 200
    student.post(
        "/action/set-permission", json={"webid": live_server.webid("hmsc"), "grant": False}
    ).raise_for_status()
    assert master.get("/export/student.zip").status_code == 403


def test_export_own_graph_always_allowed(live_server):
    assert live_server.client("student").get("/export/student.zip").status_code == 200


def test_import_malformed_package_400(live_server):
    response = _import(live_server.client("student"), b"junk")
    assert response.status_code == 400
    assert response.json()["category"] == "malformed_package"


def test_export_respects_selection(live_server):
    student = live_server.client("student")
    uploaded = _upload(student).json()["document"]
    own_subject = live_server.actor_iri("student") + "#"
    student.post(
        "/action/set-export-selection", json={"subjects": [own_subject]}
    ).raise_for_status()
    package = student.get("/export/student.zip").content
    with zipfile.ZipFile(io.BytesIO(package)) as archive:
        names = archive.namelist()
    assert not any(uploaded["handle"] in name for name in names)
    student.post("/action/set-export-selection", json={"subjects": None}).raise_for_status()
    package = student.get("/export/student.zip").content
    with zipfile.ZipFile(io.BytesIO(package)) as archive:
        assert f"psidimas/files/{uploaded['handle']}" in archive.namelist()


# -- actions -------------------------------------------------------------------

def test_record_decision_and_list_own_data(live_server):
    master = live_server.client("hmsc")
    student_webid = live_server.webid("student")
    recorded = master.post(
        "/action/record-decision", json={"decision": "accepted", "student_webid": student_webid}
    )
    assert recorded.status_code == 200
    subject = recorded.json()["subject"]
    listed = master.post("/action/list-own-data", json={}).json()
    decision_lines = [line for line in listed["triples"] if subject in line and "decision>" in line]
    assert any('"accepted"' in line for line in decision_lines)


def test_record_decision_validates_input(live_server):
    master = live_server.client("hmsc")
    response = master.post(
        "/action/record-decision", json={"decision": "maybe", "student_webid": "x"}
    )
    assert response.status_code == 400


def test_list_documents_empty_then_populated(live_server):
    student = live_server.client("student")
    assert student.post("/action/list-documents", json={}).json() == {"documents": []}
    _upload(student).raise_for_status()
    documents = student.post("/action/list-documents", json={}).json()["documents"]
    assert [d["file_name"] for d in documents] == ["Curriculum.pdf"]


def test_get_document_unknown_handle_404(live_server):
    student = live_server.client("student")
    assert student.get("/action/get-document?handle=" + "0" * 32).status_code == 404


def test_unknown_action_404(live_server):
    assert live_server.client("student").post("/action/nope", json={}).status_code == 404


def test_negative_content_length_rejected(live_server, deployment):
    import http.client
    import ssl

    context = ssl.create_default_context(cafile=str(deployment / "server" / "tls.cert.pem"))
    context.check_hostname = False
    context.load_cert_chain(
        str(deployment / "identities" / "student.cert.pem"),
        str(deployment / "identities" / "student.key.pem"),
    )
    host, port = live_server.handle.base_url.removeprefix("https://").split(":")
    connection = http.client.HTTPSConnection(host, int(port), context=context, timeout=10)
    try:
        connection.putrequest("POST", "/action/set-permission")
        connection.putheader("Content-Length", "-5")
        connection.endheaders()
        response = connection.getresponse()
        assert response.status == 400
    finally:
        connection.close()


# -- persistence across restart ---------------------------------------------------

def test_state_survives_server_restart(deployment):
    from conftest import LiveServer

    first = LiveServer(deployment)
    first.handle.start()
    try:
        student = first.client("student")
        _upload(student).raise_for_status()
        student.post(
            "/action/set-permission", json={"webid": first.webid("hmsc"), "grant": True}
        ).raise_for_status()
    finally:
        first.close()

    second = LiveServer(deployment)
    second.handle.start()
    try:
        master = second.client("hmsc")
        response = master.get("/export/student.zip")
        assert response.status_code == 200
        documents = second.client("student").post("/action/list-documents", json={}).json()["documents"]
        assert len(documents) == 1
    finally:
        second.close()
