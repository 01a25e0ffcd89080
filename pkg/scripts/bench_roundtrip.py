#!/usr/bin/env python3
"""Measure parser/serializer round-trip throughput over random graphs."""

import argparse
import random
import sys
import time

sys.path.insert(0, "tests")
import graphgen  # noqa: E402

from webid_cas.rdf import isomorphic, parse_document, serialize_document  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--graphs", type=int, default=200)
    parser.add_argument("--max-triples", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    graphs = [graphgen.random_graph(rng, args.max_triples) for _ in range(args.graphs)]
    total_triples = sum(len(g) for g in graphs)

    for syntax in ("ntriples", "turtle"):
        started = time.monotonic()
        for graph in graphs:
            text = serialize_document(graph, syntax)
            assert isomorphic(parse_document(text, syntax=syntax), graph)
        elapsed = time.monotonic() - started
        rate = total_triples / elapsed if elapsed else float("inf")
        print(f"{syntax:9s} {args.graphs} graphs / {total_triples} triples "
              f"in {elapsed:.2f}s ({rate:,.0f} triples/s round-trip)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
