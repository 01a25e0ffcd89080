"""Graph isomorphism and stable blank-node labeling.

Blank nodes are colored by iterative signature hashing over their incident
triples. When refinement alone separates every node, isomorphism reduces to
comparing rendered forms; otherwise remaining ties are settled by a
color-guided bijection backtracking search. Graphs here are small (hundreds
of triples), so the fallback stays cheap: fully symmetric classes succeed on
their first assignment.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

from .serialize import term_to_ntriples
from .terms import BlankNode, Term, Triple


def _hash(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def _term_key(term: Term, colors: dict[str, str]) -> str:
    if isinstance(term, BlankNode):
        return "B" + colors[term.label]
    return "G" + term_to_ntriples(term)


def _initial_colors(triples: Sequence[Triple]) -> dict[str, str]:
    labels = {t.label for tr in triples for t in (tr.subject, tr.object) if isinstance(t, BlankNode)}
    return {label: _hash("init") for label in labels}


def _refine(triples: Sequence[Triple], colors: dict[str, str]) -> dict[str, str]:
    while True:
        new_colors: dict[str, list[str]] = {label: [color] for label, color in colors.items()}
        for t in triples:
            pred = term_to_ntriples(t.predicate)
            if isinstance(t.subject, BlankNode):
                new_colors[t.subject.label].append(_hash("out", pred, _term_key(t.object, colors)))
            if isinstance(t.object, BlankNode):
                new_colors[t.object.label].append(_hash("in", pred, _term_key(t.subject, colors)))
        updated = {label: _hash(parts[0], *sorted(parts[1:])) for label, parts in new_colors.items()}
        if _groups(updated) == _groups(colors):
            return updated
        colors = updated


def _partition(colors: dict[str, str]) -> dict[str, tuple[str, ...]]:
    groups: dict[str, list[str]] = {}
    for label, color in colors.items():
        groups.setdefault(color, []).append(label)
    return {color: tuple(sorted(labels)) for color, labels in groups.items()}


def _groups(colors: dict[str, str]) -> list[tuple[str, ...]]:
    """Partition structure without the color values (they change every round)."""
    return sorted(_partition(colors).values())


def stable_labeling(triples: Sequence[Triple]) -> dict[str, str]:
    """Map blank-node labels to content-derived labels, deterministically.

    Labels come from the refined color plus the node's first-occurrence rank
    within its color class, so re-processing the same triple sequence always
    yields the same labels (the property imports rely on for idempotence).
    """
    materialized = list(triples)
    colors = _refine(materialized, _initial_colors(materialized))
    first_seen: dict[str, int] = {}
    for index, t in enumerate(materialized):
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode):
                first_seen.setdefault(term.label, index)
    out: dict[str, str] = {}
    for _, members in sorted(_partition(colors).items()):
        ranked = sorted(members, key=lambda label: first_seen[label])
        for rank, label in enumerate(ranked):
            out[label] = "c" + _hash(colors[label], str(rank))[:16]
    return out


def relabel(triples: Iterable[Triple], mapping: dict[str, str]) -> list[Triple]:
    out = []
    for t in triples:
        s = BlankNode(mapping[t.subject.label]) if isinstance(t.subject, BlankNode) else t.subject
        o = BlankNode(mapping[t.object.label]) if isinstance(t.object, BlankNode) else t.object
        out.append(Triple(s, t.predicate, o))
    return out


def _render(triples: Iterable[Triple], colors: dict[str, str]) -> list[str]:
    lines = []
    for t in triples:
        s = "B" + colors[t.subject.label] if isinstance(t.subject, BlankNode) else term_to_ntriples(t.subject)
        o = "B" + colors[t.object.label] if isinstance(t.object, BlankNode) else term_to_ntriples(t.object)
        lines.append(f"{s} {term_to_ntriples(t.predicate)} {o}")
    return sorted(lines)


def _bijection_exists(
    triples_a: frozenset[Triple],
    triples_b: frozenset[Triple],
    colors_a: dict[str, str],
    colors_b: dict[str, str],
) -> bool:
    """Backtracking search for a color-respecting blank-node bijection."""
    classes_a = _partition(colors_a)
    classes_b = _partition(colors_b)
    if set(classes_a) != set(classes_b):
        return False
    if any(len(classes_a[c]) != len(classes_b[c]) for c in classes_a):
        return False

    incident: dict[str, list[Triple]] = {}
    for t in triples_a:
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode):
                incident.setdefault(term.label, []).append(t)

    # smallest classes first keeps the branching factor low
    order = [label for _, members in sorted(classes_a.items(), key=lambda kv: (len(kv[1]), kv[0])) for label in members]
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def map_term(term: Term) -> Term | None:
        if isinstance(term, BlankNode):
            target = mapping.get(term.label)
            return BlankNode(target) if target is not None else None
        return term

    def consistent(label: str) -> bool:
        for t in incident.get(label, ()):
            s = map_term(t.subject)
            o = map_term(t.object)
            if s is None or o is None:
                continue  # other endpoint not yet mapped
            if Triple(s, t.predicate, o) not in triples_b:
                return False
        return True

    def assign(index: int) -> bool:
        if index == len(order):
            return True
        label = order[index]
        for candidate in classes_b[colors_a[label]]:
            if candidate in used:
                continue
            mapping[label] = candidate
            used.add(candidate)
            if consistent(label) and assign(index + 1):
                return True
            del mapping[label]
            used.discard(candidate)
        return False

    return assign(0)


def isomorphic(a: Iterable[Triple], b: Iterable[Triple]) -> bool:
    """True iff the two triple collections are equal up to a blank-node bijection."""
    set_a, set_b = frozenset(a), frozenset(b)
    if set_a == set_b:
        return True
    ground_a = frozenset(t for t in set_a if not _has_bnode(t))
    ground_b = frozenset(t for t in set_b if not _has_bnode(t))
    if ground_a != ground_b or len(set_a) != len(set_b):
        return False
    bnode_a = list(set_a - ground_a)
    bnode_b = list(set_b - ground_b)
    colors_a = _refine(bnode_a, _initial_colors(bnode_a))
    colors_b = _refine(bnode_b, _initial_colors(bnode_b))
    if sorted(colors_a.values()) != sorted(colors_b.values()):
        return False
    if len(set(colors_a.values())) == len(colors_a):
        # refinement separated every node: rendered forms decide exactly
        return _render(bnode_a, colors_a) == _render(bnode_b, colors_b)
    return _bijection_exists(frozenset(bnode_a), frozenset(bnode_b), colors_a, colors_b)


def _has_bnode(t: Triple) -> bool:
    return isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode)
