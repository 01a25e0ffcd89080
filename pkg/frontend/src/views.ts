// DOM rendering for the three actor views. Each mutation round-trips
// through the API and then reloads the affected view, so what is shown is
// always the server's state, never an optimistic local copy.

import { ApiClient, ApiError } from "./api.js";
import { attributeStatement, parseLines } from "./nt.js";
import {
  AttributeRow,
  DossierSelection,
  attributeRows,
  extractDecisions,
} from "./state.js";
import { Session } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function errorBanner(target: HTMLElement, error: unknown): void {
  const message =
    error instanceof ApiError
      ? `${error.category}: ${error.detail}`
      : String(error);
  target.prepend(el("div", { class: "error" }, message));
}

function attributeTable(rows: AttributeRow[]): HTMLElement {
  const table = el("table", { class: "attributes" });
  table.append(
    el("tr", {}, el("th", {}, "subject"), el("th", {}, "attribute"), el("th", {}, "value"))
  );
  for (const row of rows) {
    table.append(
      el(
        "tr",
        {},
        el("td", { class: "subject" }, row.subject),
        el("td", {}, row.predicate),
        el("td", {}, row.value)
      )
    );
  }
  return table;
}

export function renderGuidance(root: HTMLElement): void {
  root.replaceChildren(
    el(
      "section",
      { class: "panel" },
      el("h2", {}, "Not authenticated"),
      el(
        "p",
        {},
        "This application authenticates with a client certificate (WebID). ",
        "Your browser did not present one that the server accepts."
      ),
      el(
        "p",
        {},
        "Import your actor certificate (PKCS#12 or PEM pair) into the browser's ",
        "certificate store, restart the browser, and reload this page. The browser ",
        "will prompt for a certificate during the TLS handshake."
      )
    )
  );
}

export async function renderDossierEditor(
  root: HTMLElement,
  api: ApiClient,
  session: Session
): Promise<void> {
  const panel = el("section", { class: "panel" });
  const heading = session.role === "bachelor" ? "Dossier data" : "Dossier of application";
  panel.append(el("h2", {}, heading));

  const ownSubject = `${session.actorIri}#`;
  const [lines, documents] = await Promise.all([api.listOwnData(), api.listDocuments()]);
  const triples = parseLines(lines);
  const selection = DossierSelection.build(ownSubject, triples, documents);

  panel.append(el("h3", {}, "Attributes"), attributeTable(attributeRows(triples)));

  const addForm = el("div", { class: "row" });
  const nameInput = el("input", { placeholder: "attribute name" });
  const valueInput = el("input", { placeholder: "value" });
  const addButton = el("button", {}, "add attribute");
  addButton.addEventListener("click", async () => {
    try {
      const vocabulary = vocabularyFor(session);
      await api.insertAttribute(
        session.actorIri!,
        attributeStatement(ownSubject, vocabulary + nameInput.value.trim(), valueInput.value)
      );
      await renderDossierEditor(root, api, session);
    } catch (error) {
      errorBanner(panel, error);
    }
  });
  addForm.append(nameInput, valueInput, addButton);
  panel.append(addForm);

  panel.append(el("h3", {}, "Dossier contents (include/exclude for export)"));
  const itemList = el("ul", { class: "items" });
  for (const item of selection.list()) {
    const checkbox = el("input", { type: "checkbox" }) as HTMLInputElement;
    checkbox.checked = item.included;
    checkbox.disabled = !item.toggleable;
    checkbox.addEventListener("change", async () => {
      selection.toggle(item.id);
      try {
        await api.setExportSelection(selection.exportSubjects());
      } catch (error) {
        errorBanner(panel, error);
      }
    });
    itemList.append(el("li", {}, checkbox, ` ${item.label}`));
  }
  panel.append(itemList);

  const uploadInput = el("input", { type: "file" }) as HTMLInputElement;
  const uploadButton = el("button", {}, "upload document");
  uploadButton.addEventListener("click", async () => {
    const file = uploadInput.files?.[0];
    if (!file) {
      return;
    }
    try {
      await api.upload(file.name, file);
      await renderDossierEditor(root, api, session);
    } catch (error) {
      errorBanner(panel, error);
    }
  });
  panel.append(el("h3", {}, "Documents"), el("div", { class: "row" }, uploadInput, uploadButton));

  const grantInput = el("input", { placeholder: "WebID to grant (https://...#id)", size: "50" });
  const grantButton = el("button", {}, "grant access");
  grantButton.addEventListener("click", async () => {
    try {
      await api.setPermission(grantInput.value.trim(), true);
      await renderDossierEditor(root, api, session);
    } catch (error) {
      errorBanner(panel, error);
    }
  });
  panel.append(el("h3", {}, "Share"), el("div", { class: "row" }, grantInput, grantButton));

  if (session.role === "student") {
    const fetchButton = el("button", {}, "fetch bachelor dossier");
    fetchButton.addEventListener("click", async () => {
      try {
        const packageBlob = await api.fetchExport("hbsc");
        const summary = await api.importPackage(packageBlob);
        panel.prepend(
          el(
            "div",
            { class: "notice" },
            `imported ${summary.triples_added} statements, ${summary.files_added} files`
          )
        );
        await renderDossierEditor(root, api, session);
      } catch (error) {
        errorBanner(panel, error);
      }
    });
    panel.append(el("h3", {}, "Bachelor dossier"), fetchButton);
    panel.append(await decisionSection(api));
  }

  root.replaceChildren(panel);
}

function vocabularyFor(session: Session): string {
  const names: Record<string, string> = {
    student: "http://persemid.bfh.ch/vocab/student#",
    bachelor: "http://persemid.bfh.ch/vocab/hbsc#",
    master: "http://persemid.bfh.ch/vocab/hmsc#",
  };
  return names[session.role ?? "student"];
}

async function decisionSection(api: ApiClient): Promise<HTMLElement> {
  const section = el("section", { class: "panel" });
  section.append(el("h2", {}, "Enrollment decision"));
  const fetchButton = el("button", {}, "retrieve decision");
  const display = el("div", { class: "decision" });
  fetchButton.addEventListener("click", async () => {
    try {
      const packageBlob = await api.fetchExport("hmsc");
      await api.importPackage(packageBlob);
      const triples = parseLines(await api.listOwnData());
      const decisions = extractDecisions(triples);
      display.replaceChildren(
        decisions.length
          ? el("strong", {}, `decision: ${decisions[decisions.length - 1].decision}`)
          : "no decision recorded yet"
      );
    } catch (error) {
      errorBanner(section, error);
    }
  });
  section.append(fetchButton, display);
  return section;
}

export async function renderReviewAndDecide(
  root: HTMLElement,
  api: ApiClient,
  session: Session
): Promise<void> {
  const panel = el("section", { class: "panel" });
  panel.append(el("h2", {}, "Review application"));

  const fetchButton = el("button", {}, "fetch student dossier");
  fetchButton.addEventListener("click", async () => {
    try {
      const packageBlob = await api.fetchExport("student");
      const summary = await api.importPackage(packageBlob);
      panel.prepend(
        el(
          "div",
          { class: "notice" },
          `imported ${summary.triples_added} statements, ${summary.files_added} files`
        )
      );
      await renderReviewAndDecide(root, api, session);
    } catch (error) {
      errorBanner(panel, error);
    }
  });
  panel.append(el("div", { class: "row" }, fetchButton));

  const [lines, documents] = await Promise.all([api.listOwnData(), api.listDocuments()]);
  const triples = parseLines(lines);
  panel.append(el("h3", {}, "Dossier attributes"), attributeTable(attributeRows(triples)));

  const documentList = el("ul", { class: "items" });
  for (const doc of documents) {
    documentList.append(
      el(
        "li",
        {},
        el("a", { href: api.documentUrl(doc.handle), download: doc.file_name }, doc.file_name),
        ` (${doc.file_type}, ${doc.file_size} bytes)`
      )
    );
  }
  panel.append(el("h3", {}, "Documents"), documentList);

  const imported = triples.some(
    (t) => t.subject.kind === "iri" && !t.subject.value.startsWith(`${session.actorIri}#`)
  );
  const studentWebidInput = el("input", {
    placeholder: "student WebID (https://...#id)",
    size: "50",
  }) as HTMLInputElement;
  const decide = async (decision: "accepted" | "rejected") => {
    try {
      const studentWebid = studentWebidInput.value.trim();
      await api.recordDecision(decision, studentWebid);
      await api.setPermission(studentWebid, true);
      panel.prepend(el("div", { class: "notice" }, `decision ${decision} recorded and shared`));
    } catch (error) {
      errorBanner(panel, error);
    }
  };
  const acceptButton = el("button", {}, "accept") as HTMLButtonElement;
  const rejectButton = el("button", {}, "reject") as HTMLButtonElement;
  acceptButton.disabled = rejectButton.disabled = !imported;
  acceptButton.addEventListener("click", () => decide("accepted"));
  rejectButton.addEventListener("click", () => decide("rejected"));
  panel.append(el("h3", {}, "Decision"));
  if (!imported) {
    panel.append(el("div", { class: "notice" }, "import the student dossier before deciding"));
  }
  panel.append(el("div", { class: "row" }, studentWebidInput, acceptButton, rejectButton));

  root.replaceChildren(panel);
}
