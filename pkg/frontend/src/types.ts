export type Role = "student" | "bachelor" | "master";

export interface Session {
  webid: string;
  actor: string | null;
  role: Role | null;
  actorIri: string | null;
}

export interface DocumentInfo {
  handle: string;
  file_name: string;
  file_extension: string;
  file_type: string;
  file_size: number;
  server_path: string;
}

export interface ImportSummary {
  triples_added: number;
  files_added: number;
}

export type TermKind = "iri" | "literal" | "bnode";

export interface Term {
  kind: TermKind;
  value: string;
}

export interface ParsedTriple {
  subject: Term;
  predicate: Term;
  object: Term;
}
