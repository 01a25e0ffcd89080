// Display-grade N-Triples line decoding. The server sends graph views as
// one N-Triples statement per line; this covers exactly that output (it is
// not a general-purpose parser).

import { ParsedTriple, Term } from "./types.js";

const LINE = new RegExp(
  String.raw`^\s*(<[^>]*>|_:\S+)\s+(<[^>]*>)\s+(<[^>]*>|_:\S+|"(?:[^"\\]|\\.)*"(?:@[A-Za-z0-9-]+|\^\^<[^>]*>)?)\s*\.\s*$`
);

const STRING_ESCAPES: Record<string, string> = {
  '"': '"',
  "\\": "\\",
  n: "\n",
  r: "\r",
  t: "\t",
  b: "\b",
  f: "\f",
};

function unescapeLiteral(raw: string): string {
  let out = "";
  for (let i = 0; i < raw.length; i += 1) {
    const ch = raw[i];
    if (ch !== "\\") {
      out += ch;
      continue;
    }
    const next = raw[i + 1];
    if (next === "u" || next === "U") {
      const width = next === "u" ? 4 : 8;
      const hex = raw.slice(i + 2, i + 2 + width);
      out += String.fromCodePoint(parseInt(hex, 16));
      i += 1 + width;
    } else if (next !== undefined && next in STRING_ESCAPES) {
      out += STRING_ESCAPES[next];
      i += 1;
    } else {
      out += next ?? "";
      i += 1;
    }
  }
  return out;
}

function decodeTerm(raw: string): Term {
  if (raw.startsWith("<")) {
    return { kind: "iri", value: raw.slice(1, -1) };
  }
  if (raw.startsWith("_:")) {
    return { kind: "bnode", value: raw.slice(2) };
  }
  const closing = raw.lastIndexOf('"');
  return { kind: "literal", value: unescapeLiteral(raw.slice(1, closing)) };
}

export function parseLine(line: string): ParsedTriple | null {
  const match = LINE.exec(line);
  if (!match) {
    return null;
  }
  return {
    subject: decodeTerm(match[1]),
    predicate: decodeTerm(match[2]),
    object: decodeTerm(match[3]),
  };
}

export function parseLines(lines: string[]): ParsedTriple[] {
  const out: ParsedTriple[] = [];
  for (const line of lines) {
    const triple = parseLine(line);
    if (triple) {
      out.push(triple);
    }
  }
  return out;
}

export function localName(iri: string): string {
  const hash = iri.lastIndexOf("#");
  if (hash >= 0) {
    return iri.slice(hash + 1);
  }
  const trimmed = iri.replace(/\/+$/, "");
  return trimmed.slice(trimmed.lastIndexOf("/") + 1);
}

// Literal objects for the insert-attribute form; strings only, escaped for
// one N-Triples statement.
export function escapeLiteral(value: string): string {
  let out = "";
  for (const ch of value) {
    if (ch === "\\" || ch === '"') {
      out += "\\" + ch;
    } else if (ch === "\n") {
      out += "\\n";
    } else if (ch === "\r") {
      out += "\\r";
    } else if (ch === "\t") {
      out += "\\t";
    } else {
      out += ch;
    }
  }
  return out;
}

export function attributeStatement(subject: string, predicate: string, value: string): string {
  return `<${subject}> <${predicate}> "${escapeLiteral(value)}" .\n`;
}
