import { describe, expect, it } from "vitest";

import { parseLines } from "../src/nt.js";
import { DossierSelection, attributeRows, extractDecisions } from "../src/state.js";
import { DocumentInfo } from "../src/types.js";

const OWN = "https://h/actor/student#";
const IMPORTED = "https://h/actor/hbsc#";
const DOC_SUBJECT = "https://h/actor/student#" + "a".repeat(32);

const LINES = [
  `<${OWN}> <http://persemid.bfh.ch/vocab/student#name> "Dent" .`,
  `<${OWN}> <http://persemid.bfh.ch/vocab/student#webid> <https://h/webid/student#id> .`,
  `<${IMPORTED}> <http://persemid.bfh.ch/vocab/hbsc#degree> "BSc" .`,
  `<${DOC_SUBJECT}> <http://persemid.bfh.ch/vocab/student#fileHandle> "${"a".repeat(32)}" .`,
  `<${DOC_SUBJECT}> <http://persemid.bfh.ch/vocab/student#fileName> "Curriculum.pdf" .`,
  `<${OWN}> <http://persemid.bfh.ch/vocab/student#file> <${DOC_SUBJECT}> .`,
];

const DOCUMENTS: DocumentInfo[] = [
  {
    handle: "a".repeat(32),
    file_name: "Curriculum.pdf",
    file_extension: ".pdf",
    file_type: "application/pdf",
    file_size: 605660,
    server_path: "/srv/storage/student/" + "a".repeat(32) + ".pdf",
  },
];

function build(): DossierSelection {
  return DossierSelection.build(OWN, parseLines(LINES), DOCUMENTS);
}

describe("DossierSelection", () => {
  it("lists own subject, imported subjects, and documents", () => {
    const kinds = build().list().map((item) => item.kind);
    expect(kinds.sort()).toEqual(["document", "imported", "own"]);
  });

  it("own attributes are not toggleable", () => {
    const selection = build();
    const own = selection.list().find((item) => item.kind === "own")!;
    expect(own.toggleable).toBe(false);
    expect(selection.toggle(own.id)).toBe(false);
    expect(selection.exportSubjects()).toBeNull();
  });

  it("everything included means export-all (null)", () => {
    expect(build().exportSubjects()).toBeNull();
  });

  it("excluding the document drops its subject from the selection", () => {
    const selection = build();
    const doc = selection.list().find((item) => item.kind === "document")!;
    expect(selection.toggle(doc.id)).toBe(true);
    const subjects = selection.exportSubjects()!;
    expect(subjects).toContain(OWN);
    expect(subjects).toContain(IMPORTED);
    expect(subjects).not.toContain(DOC_SUBJECT);
  });

  it("toggling twice restores export-all", () => {
    const selection = build();
    const imported = selection.list().find((item) => item.kind === "imported")!;
    selection.toggle(imported.id);
    expect(selection.exportSubjects()).not.toBeNull();
    selection.toggle(imported.id);
    expect(selection.exportSubjects()).toBeNull();
  });
});

describe("attributeRows", () => {
  it("hides file metadata and type triples", () => {
    const rows = attributeRows(parseLines(LINES));
    const predicates = rows.map((row) => row.predicate);
    expect(predicates).toContain("name");
    expect(predicates).toContain("degree");
    expect(predicates).not.toContain("fileHandle");
    expect(predicates).not.toContain("file");
  });
});

describe("extractDecisions", () => {
  it("pairs decision values with their decisionFor target", () => {
    const lines = [
      `<https://h/actor/hmsc#decision-123> <http://persemid.bfh.ch/vocab/hmsc#decision> "accepted" .`,
      `<https://h/actor/hmsc#decision-123> <http://persemid.bfh.ch/vocab/hmsc#decisionFor> <https://h/webid/student#id> .`,
    ];
    expect(extractDecisions(parseLines(lines))).toEqual([
      {
        decision: "accepted",
        subject: "https://h/actor/hmsc#decision-123",
        decidedFor: "https://h/webid/student#id",
      },
    ]);
  });

  it("returns empty when no decision is present", () => {
    expect(extractDecisions(parseLines(LINES))).toEqual([]);
  });
});
