// Dossier selection and graph-view bookkeeping. No authorization logic
// lives here: every state transition round-trips through the action API,
// and this module only decides what to display and which subjects go into
// the export selection.

import { localName } from "./nt.js";
import { DocumentInfo, ParsedTriple } from "./types.js";

export interface DossierItem {
  id: string;
  label: string;
  subject: string;
  kind: "own" | "imported" | "document";
  included: boolean;
  toggleable: boolean;
}

export interface AttributeRow {
  subject: string;
  predicate: string;
  value: string;
}

const METADATA_LOCALS = new Set([
  "fileExtension",
  "fileHandle",
  "fileName",
  "fileServerPath",
  "fileSize",
  "fileType",
]);

export function attributeRows(triples: ParsedTriple[]): AttributeRow[] {
  const rows: AttributeRow[] = [];
  for (const t of triples) {
    if (t.subject.kind !== "iri" || t.predicate.kind !== "iri") {
      continue;
    }
    const local = localName(t.predicate.value);
    if (METADATA_LOCALS.has(local) || local === "file" || local === "type") {
      continue;
    }
    rows.push({
      subject: t.subject.value,
      predicate: local,
      value: t.object.value,
    });
  }
  rows.sort((a, b) => (a.subject + a.predicate).localeCompare(b.subject + b.predicate));
  return rows;
}

export class DossierSelection {
  private items: DossierItem[] = [];

  static build(
    ownSubject: string,
    triples: ParsedTriple[],
    documents: DocumentInfo[]
  ): DossierSelection {
    const selection = new DossierSelection();
    const documentSubjects = new Set<string>();
    for (const doc of documents) {
      for (const t of triples) {
        if (
          t.predicate.kind === "iri" &&
          localName(t.predicate.value) === "fileHandle" &&
          t.object.value === doc.handle &&
          t.subject.kind === "iri"
        ) {
          documentSubjects.add(t.subject.value);
          selection.items.push({
            id: `doc:${doc.handle}`,
            label: `${doc.file_name} (${doc.file_size} bytes)`,
            subject: t.subject.value,
            kind: "document",
            included: true,
            toggleable: true,
          });
        }
      }
    }
    const seen = new Set<string>();
    for (const t of triples) {
      if (t.subject.kind !== "iri" || documentSubjects.has(t.subject.value)) {
        continue;
      }
      if (seen.has(t.subject.value)) {
        continue;
      }
      seen.add(t.subject.value);
      const own = t.subject.value === ownSubject;
      selection.items.push({
        id: `subject:${t.subject.value}`,
        label: own ? "own attributes" : `imported: ${t.subject.value}`,
        subject: t.subject.value,
        kind: own ? "own" : "imported",
        included: true,
        // the actor's own subject is always part of the dossier
        toggleable: !own,
      });
    }
    selection.items.sort((a, b) => a.id.localeCompare(b.id));
    return selection;
  }

  list(): readonly DossierItem[] {
    return this.items;
  }

  toggle(id: string): boolean {
    const item = this.items.find((entry) => entry.id === id);
    if (!item || !item.toggleable) {
      return false;
    }
    item.included = !item.included;
    return true;
  }

  /** Subject list for set-export-selection; null when nothing is excluded. */
  exportSubjects(): string[] | null {
    if (this.items.every((item) => item.included)) {
      return null;
    }
    const subjects = new Set(
      this.items.filter((item) => item.included).map((item) => item.subject)
    );
    return [...subjects].sort();
  }
}

export interface DecisionView {
  decision: string;
  subject: string;
  decidedFor: string | null;
}

export function extractDecisions(triples: ParsedTriple[]): DecisionView[] {
  const decisions: DecisionView[] = [];
  for (const t of triples) {
    if (t.predicate.kind !== "iri" || localName(t.predicate.value) !== "decision") {
      continue;
    }
    if (t.object.kind !== "literal" || t.subject.kind !== "iri") {
      continue;
    }
    let decidedFor: string | null = null;
    for (const other of triples) {
      if (
        other.subject.kind === "iri" &&
        other.subject.value === t.subject.value &&
        other.predicate.kind === "iri" &&
        localName(other.predicate.value) === "decisionFor"
      ) {
        decidedFor = other.object.value;
      }
    }
    decisions.push({ decision: t.object.value, subject: t.subject.value, decidedFor });
  }
  decisions.sort((a, b) => a.subject.localeCompare(b.subject));
  return decisions;
}
