"""In-memory quad store with named graphs and N-Quads file persistence.

One lock serializes mutations per store; every public call is atomic, so a
concurrent reader never observes a partially applied update. Persistence is
write-temp-then-rename, one N-Quads file per dataset.
"""

from __future__ import annotations

import os
import tempfile
import threading
from typing import Iterable, Sequence

from .. import opslog
from ..errors import UnknownActorError
from .parse import parse_nquads, validate_graph_name
from .serialize import serialize_nquads
from .terms import IRI, Literal, Quad, Term, Triple


class QuadStore:
    """Map from graph IRI to a duplicate-free set of triples."""

    def __init__(self) -> None:
        self._graphs: dict[str, set[Triple]] = {}
        self._lock = threading.RLock()

    # -- graph management ---------------------------------------------------

    def create_graph(self, graph: str) -> None:
        validate_graph_name(graph)
        with self._lock:
            self._graphs.setdefault(graph, set())

    def has_graph(self, graph: str) -> bool:
        with self._lock:
            return graph in self._graphs

    def graph_names(self) -> list[str]:
        with self._lock:
            return sorted(self._graphs)

    def triples(self, graph: str) -> frozenset[Triple]:
        """Snapshot of one graph's triples."""
        with self._lock:
            if graph not in self._graphs:
                raise UnknownActorError(f"no such graph <{graph}>")
            return frozenset(self._graphs[graph])

    # -- mutation -----------------------------------------------------------

    def add(self, graph: str, triples: Iterable[Triple]) -> int:
        """Insert triples; returns the number newly added (set semantics)."""
        validate_graph_name(graph)
        with self._lock:
            target = self._graphs.setdefault(graph, set())
            before = len(target)
            target.update(triples)
            return len(target) - before

    def remove(self, graph: str, triples: Iterable[Triple]) -> int:
        with self._lock:
            if graph not in self._graphs:
                raise UnknownActorError(f"no such graph <{graph}>")
            target = self._graphs[graph]
            before = len(target)
            target.difference_update(triples)
            return before - len(target)

    def copy_triples(self, from_graph: str | None, selection: Iterable[Triple], to_graph: str) -> int:
        """Copy a selection of triples into ``to_graph``, deduplicated.

        ``from_graph`` names the source graph when the selection was taken
        from this store; pass None for externally supplied selections (e.g.
        an import). The source graph is never modified either way.
        """
        opslog.note("rdf.copy_triples")
        selection = list(selection)
        with self._lock:
            if from_graph is not None and from_graph not in self._graphs:
                raise UnknownActorError(f"no such graph <{from_graph}>")
            return self.add(to_graph, selection)

    # -- query --------------------------------------------------------------

    def match_pattern(
        self,
        graph: str | None = None,
        subject: Term | None = None,
        predicate: Term | None = None,
        obj: Term | None = None,
    ) -> list[Quad]:
        """All quads matching the bound positions; None is a wildcard."""
        opslog.note("rdf.match_pattern")
        with self._lock:
            if graph is not None:
                names: Sequence[str] = (graph,) if graph in self._graphs else ()
            else:
                names = tuple(self._graphs)
            found = []
            for name in names:
                for t in self._graphs[name]:
                    if subject is not None and t.subject != subject:
                        continue
                    if predicate is not None and t.predicate != predicate:
                        continue
                    if obj is not None and t.object != obj:
                        continue
                    found.append(Quad(name, t))
            return found

    # -- persistence ----------------------------------------------------------

    def save(self, path: str | os.PathLike[str]) -> None:
        """Write the dataset as sorted N-Quads, atomically."""
        path = os.fspath(path)
        with self._lock:
            quads = [Quad(g, t) for g in sorted(self._graphs) for t in self._graphs[g]]
            empty_graphs = sorted(g for g in self._graphs if not self._graphs[g])
        text = serialize_nquads(sorted(quads, key=lambda q: (q.graph, _sort_key(q.triple))))
        header = "".join(f"# graph <{g}>\n" for g in empty_graphs)
        directory = os.path.dirname(path) or "."
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dataset-", suffix=".nq")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(header)
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | os.PathLike[str]) -> "QuadStore":
        store = cls()
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        for line in text.splitlines():
            if line.startswith("# graph <") and line.endswith(">"):
                store.create_graph(line[len("# graph <"):-1])
        for quad in parse_nquads(text):
            validate_graph_name(quad.graph)
            store.add(quad.graph, [quad.triple])
        return store


def _sort_key(t: Triple) -> tuple[str, str, str, str]:
    def term_key(term: Term) -> str:
        if isinstance(term, IRI):
            return "I" + term.value
        if isinstance(term, Literal):
            return "L" + term.lexical + "\x00" + term.datatype.value + "\x00" + (term.language or "")
        return "B" + term.label

    return (term_key(t.subject), t.predicate.value, term_key(t.object), "")
