import { ApiClient } from "./api.js";
import { renderDossierEditor, renderGuidance, renderReviewAndDecide } from "./views.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const status = document.getElementById("status");
  if (!root || !status) {
    return;
  }
  const api = new ApiClient();
  const session = await api.whoami();
  if (session === null || session.actor === null) {
    status.textContent = session === null ? "no certificate" : `unknown identity ${session.webid}`;
    renderGuidance(root);
    return;
  }
  status.textContent = `${session.actor} (${session.role}) — ${session.webid}`;
  if (session.role === "master") {
    await renderReviewAndDecide(root, api, session);
  } else {
    await renderDossierEditor(root, api, session);
  }
}

boot().catch((error) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `failed to load: ${error}`;
  }
});
