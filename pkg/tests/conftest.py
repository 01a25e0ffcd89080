import json
import os
import shutil

import pytest
import requests
from cryptography.hazmat.primitives.asymmetric import rsa

from webid_cas.config import ServerConfig
from webid_cas.server import ServerApp, ServerHandle
from webid_cas.workflow import prepare_workspace, provision_identity

STRANGER_WEBID = "https://idp.test/stranger#id"


@pytest.fixture(scope="session")
def key_pool():
    """Shared RSA keys; generating them once keeps the randomized suites fast."""
    return [rsa.generate_private_key(public_exponent=65537, key_size=2048) for _ in range(8)]


@pytest.fixture(scope="session")
def deployment_template(tmp_path_factory):
    """A complete deployment directory: three actors plus a TLS-admitted
    'stranger' identity that is verified but not authorized for anything."""
    root = tmp_path_factory.mktemp("deployment-template")
    config_path = prepare_workspace(root)
    identities_dir = os.path.join(root, "identities")
    paths = provision_identity("stranger", STRANGER_WEBID, identities_dir)
    with open(paths["certificate"], "rb") as fh:
        stranger_cert = fh.read()
    with open(os.path.join(root, "client-ca.pem"), "ab") as fh:
        fh.write(stranger_cert)
    with open(config_path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["known_profiles"] = {STRANGER_WEBID: os.path.join("identities", "stranger.profile.ttl")}
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(raw, fh, indent=2)
    return root


@pytest.fixture
def deployment(deployment_template, tmp_path):
    """Fresh copy of the template so tests can mutate state freely."""
    target = tmp_path / "deployment"
    shutil.copytree(deployment_template, target)
    return target


class ActorHttpClient:
    """requests wrapper bound to one identity's client certificate."""

    def __init__(self, base_url: str, deployment_dir: str, identity: str | None):
        self.base_url = base_url
        self.session = requests.Session()
        self.session.verify = os.path.join(deployment_dir, "server", "tls.cert.pem")
        if identity is not None:
            self.session.cert = (
                os.path.join(deployment_dir, "identities", f"{identity}.cert.pem"),
                os.path.join(deployment_dir, "identities", f"{identity}.key.pem"),
            )

    def get(self, path: str, **kwargs) -> requests.Response:
        return self.session.get(self.base_url + path, timeout=30, **kwargs)

    def post(self, path: str, **kwargs) -> requests.Response:
        return self.session.post(self.base_url + path, timeout=30, **kwargs)

    def close(self) -> None:
        self.session.close()


class LiveServer:
    def __init__(self, deployment_dir):
        self.deployment_dir = os.fspath(deployment_dir)
        self.config = ServerConfig.load(os.path.join(self.deployment_dir, "config.json"))
        self.app = ServerApp(self.config)
        self.handle = ServerHandle(self.app)
        self._clients: list[ActorHttpClient] = []

    def client(self, identity: str | None) -> ActorHttpClient:
        client = ActorHttpClient(self.handle.base_url, self.deployment_dir, identity)
        self._clients.append(client)
        return client

    def actor_iri(self, short_name: str) -> str:
        actor = self.config.actor_by_short_name(short_name)
        assert actor is not None
        return actor.iri

    def webid(self, short_name: str) -> str:
        actor = self.config.actor_by_short_name(short_name)
        assert actor is not None
        return actor.webid

    def close(self) -> None:
        for client in self._clients:
            client.close()
        self.handle.stop()


@pytest.fixture
def live_server(deployment):
    server = LiveServer(deployment)
    server.handle.start()
    try:
        yield server
    finally:
        server.close()
