"""Property tests: serialize/parse round trips over random graphs."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from webid_cas.rdf import isomorphic, parse_document, serialize_document

import graphgen
import sample_data as corpus

CORPUS = [
    (corpus.STUDENT_RECORD_TTL, corpus.STUDENT_IRI),
    (corpus.FILE_METADATA_TTL, None),
    (corpus.FOAF_PROFILE_TTL, corpus.PROFILE_BASE),
]


def test_corpus_double_round_trip():
    for text, base in CORPUS:
        original = parse_document(text, base=base)
        for syntax in ("ntriples", "turtle"):
            once = parse_document(serialize_document(original, syntax), syntax=syntax)
            twice = parse_document(serialize_document(once, syntax), syntax=syntax)
            assert isomorphic(twice, original)


@settings(max_examples=120, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), syntax=st.sampled_from(["ntriples", "turtle"]))
def test_random_graph_round_trip(seed, syntax):
    graph = graphgen.random_graph(random.Random(seed), max_triples=120)
    text = serialize_document(graph, syntax)
    assert isomorphic(parse_document(text, syntax=syntax), graph)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_turtle_with_prefixes_round_trip(seed):
    graph = graphgen.random_graph(random.Random(seed), max_triples=60)
    prefixes = {"a": "http://alpha.test/", "b": "http://beta.test/", "g": "http://gamma.test/"}
    text = serialize_document(graph, "turtle", prefixes=prefixes)
    assert isomorphic(parse_document(text), graph)
