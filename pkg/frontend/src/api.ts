// Typed client for the server's action API and exchange routes. The browser
// supplies the client certificate during the TLS handshake, so there is no
// credential handling here; a 401 simply means no usable certificate was
// presented. All authorization decisions happen server-side.

import { DocumentInfo, ImportSummary, Session } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly category: string,
    readonly detail: string
  ) {
    super(`${status} ${category}: ${detail}`);
  }
}

async function raiseFor(response: Response): Promise<Response> {
  if (response.ok) {
    return response;
  }
  let category = "error";
  let detail = response.statusText;
  try {
    const body = await response.json();
    category = body.category ?? category;
    detail = body.detail ?? body.error ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, category, detail);
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;
  private readonly base: string;

  constructor(fetchImpl?: FetchLike, base = "") {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  private async action<T>(name: string, payload: object = {}): Promise<T> {
    const response = await this.fetchImpl(`${this.base}/action/${name}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return (await raiseFor(response)).json() as Promise<T>;
  }

  /** null means unauthenticated (no certificate accepted by the server). */
  async whoami(): Promise<Session | null> {
    const response = await this.fetchImpl(`${this.base}/action/whoami`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
    if (response.status === 401) {
      return null;
    }
    const body = await (await raiseFor(response)).json();
    return {
      webid: body.webid,
      actor: body.actor,
      role: body.role,
      actorIri: body.actor_iri,
    };
  }

  async listOwnData(): Promise<string[]> {
    const body = await this.action<{ triples: string[] }>("list-own-data");
    return body.triples;
  }

  async listDocuments(): Promise<DocumentInfo[]> {
    const body = await this.action<{ documents: DocumentInfo[] }>("list-documents");
    return body.documents;
  }

  async setPermission(webid: string, grant: boolean): Promise<void> {
    await this.action("set-permission", { webid, grant });
  }

  async recordDecision(decision: "accepted" | "rejected", studentWebid: string): Promise<string> {
    const body = await this.action<{ subject: string }>("record-decision", {
      decision,
      student_webid: studentWebid,
    });
    return body.subject;
  }

  async setExportSelection(subjects: string[] | null): Promise<void> {
    await this.action("set-export-selection", { subjects });
  }

  async insertAttribute(graph: string, statement: string): Promise<number> {
    const response = await this.fetchImpl(`${this.base}/store`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ op: "insert", graph, triples: statement }),
    });
    const body = await (await raiseFor(response)).json();
    return body.inserted;
  }

  async upload(fileName: string, data: Blob): Promise<DocumentInfo> {
    const form = new FormData();
    form.append("file", data, fileName);
    const response = await this.fetchImpl(`${this.base}/upload`, {
      method: "POST",
      body: form,
    });
    const body = await (await raiseFor(response)).json();
    return body.document;
  }

  async fetchExport(owner: string): Promise<Blob> {
    const response = await this.fetchImpl(`${this.base}/export/${owner}.zip`, { method: "GET" });
    return (await raiseFor(response)).blob();
  }

  async importPackage(packageBytes: Blob): Promise<ImportSummary> {
    const response = await this.fetchImpl(`${this.base}/import`, {
      method: "POST",
      headers: { "Content-Type": "application/zip" },
      body: packageBytes,
    });
    return (await raiseFor(response)).json() as Promise<ImportSummary>;
  }

  documentUrl(handle: string): string {
    return `${this.base}/action/get-document?handle=${encodeURIComponent(handle)}`;
  }
}
