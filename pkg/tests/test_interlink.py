"""Interlinking: the three linking methods and their symmetry."""

import random

from webid_cas.webid import check_interlink

from webid_fixtures import DictFetcher, cert_info_for, profile_doc

URI_A = "https://a.test/webid#id"
URI_B = "https://b.test/webid#id"
URI_SHARED = "https://shared.test/webid#id"
DOC_A = "https://a.test/webid"
DOC_B = "https://b.test/webid"
DOC_SHARED = "https://shared.test/webid"


def test_method_1_shared_key_pair(key_pool):
    key = key_pool[0]
    cert_1 = cert_info_for(key, "first", [URI_A])
    cert_2 = cert_info_for(key, "second", [URI_B])
    result = check_interlink(cert_1, cert_2, DictFetcher({}))
    assert result.linked and result.method == 1
    assert check_interlink(cert_2, cert_1, DictFetcher({})).method == 1


def test_method_2_shared_profile(key_pool):
    key_1, key_2 = key_pool[0], key_pool[1]
    cert_1 = cert_info_for(key_1, "first", [URI_SHARED])
    cert_2 = cert_info_for(key_2, "second", [URI_SHARED])
    fetcher = DictFetcher({DOC_SHARED: profile_doc(URI_SHARED, [key_1, key_2])})
    result = check_interlink(cert_1, cert_2, fetcher)
    assert result.method == 2
    assert check_interlink(cert_2, cert_1, fetcher).method == 2


def test_method_2_requires_both_keys_published(key_pool):
    key_1, key_2 = key_pool[0], key_pool[1]
    cert_1 = cert_info_for(key_1, "first", [URI_SHARED])
    cert_2 = cert_info_for(key_2, "second", [URI_SHARED])
    fetcher = DictFetcher({DOC_SHARED: profile_doc(URI_SHARED, [key_1])})
    assert not check_interlink(cert_1, cert_2, fetcher).linked


def test_method_3_mutual_links(key_pool):
    key_1, key_2 = key_pool[2], key_pool[3]
    cert_1 = cert_info_for(key_1, "first", [URI_A])
    cert_2 = cert_info_for(key_2, "second", [URI_B])
    fetcher = DictFetcher(
        {
            DOC_A: profile_doc(URI_A, [key_1], links=[URI_B]),
            DOC_B: profile_doc(URI_B, [key_2], links=[URI_A]),
        }
    )
    result = check_interlink(cert_1, cert_2, fetcher)
    assert result.method == 3
    assert check_interlink(cert_2, cert_1, fetcher).method == 3


def test_method_3_unidirectional_is_not_linked(key_pool):
    key_1, key_2 = key_pool[2], key_pool[3]
    cert_1 = cert_info_for(key_1, "first", [URI_A])
    cert_2 = cert_info_for(key_2, "second", [URI_B])
    fetcher = DictFetcher(
        {
            DOC_A: profile_doc(URI_A, [key_1], links=[URI_B]),
            DOC_B: profile_doc(URI_B, [key_2]),
        }
    )
    assert not check_interlink(cert_1, cert_2, fetcher).linked
    assert not check_interlink(cert_2, cert_1, fetcher).linked


def test_method_1_wins_over_later_methods(key_pool):
    # same key pair AND shared profile: the lowest-numbered method is reported
    key = key_pool[4]
    cert_1 = cert_info_for(key, "first", [URI_SHARED])
    cert_2 = cert_info_for(key, "second", [URI_SHARED])
    fetcher = DictFetcher({DOC_SHARED: profile_doc(URI_SHARED, [key])})
    assert check_interlink(cert_1, cert_2, fetcher).method == 1


def test_fetch_failure_disables_only_that_method(key_pool):
    # shared SAN but unreachable profile: method 2 inapplicable, method 3
    # still reachable through each certificate's own second SAN entry
    key_1, key_2 = key_pool[5], key_pool[6]
    cert_1 = cert_info_for(key_1, "first", [URI_SHARED, URI_A])
    cert_2 = cert_info_for(key_2, "second", [URI_SHARED, URI_B])
    fetcher = DictFetcher(
        {
            DOC_A: profile_doc(URI_A, [key_1], links=[URI_B]),
            DOC_B: profile_doc(URI_B, [key_2], links=[URI_A]),
        }
    )
    result = check_interlink(cert_1, cert_2, fetcher)
    assert result.method == 3


def test_unrelated_certificates_not_linked(key_pool):
    cert_1 = cert_info_for(key_pool[0], "first", [URI_A])
    cert_2 = cert_info_for(key_pool[1], "second", [URI_B])
    fetcher = DictFetcher(
        {DOC_A: profile_doc(URI_A, [key_pool[0]]), DOC_B: profile_doc(URI_B, [key_pool[1]])}
    )
    assert check_interlink(cert_1, cert_2, fetcher).linked is False


def test_symmetry_over_randomized_pairs(key_pool):
    rng = random.Random(42)
    for _ in range(20):
        kind = rng.choice(["m1", "m2", "m3", "none"])
        key_1, key_2 = rng.sample(key_pool, 2)
        docs = {}
        if kind == "m1":
            cert_1 = cert_info_for(key_1, "x", [URI_A])
            cert_2 = cert_info_for(key_1, "y", [URI_B])
        elif kind == "m2":
            cert_1 = cert_info_for(key_1, "x", [URI_SHARED])
            cert_2 = cert_info_for(key_2, "y", [URI_SHARED])
            docs[DOC_SHARED] = profile_doc(URI_SHARED, [key_1, key_2])
        elif kind == "m3":
            cert_1 = cert_info_for(key_1, "x", [URI_A])
            cert_2 = cert_info_for(key_2, "y", [URI_B])
            docs[DOC_A] = profile_doc(URI_A, [key_1], links=[URI_B])
            docs[DOC_B] = profile_doc(URI_B, [key_2], links=[URI_A])
        else:
            cert_1 = cert_info_for(key_1, "x", [URI_A])
            cert_2 = cert_info_for(key_2, "y", [URI_B])
            docs[DOC_A] = profile_doc(URI_A, [key_1])
            docs[DOC_B] = profile_doc(URI_B, [key_2])
        fetcher = DictFetcher(docs)
        forward = check_interlink(cert_1, cert_2, fetcher)
        backward = check_interlink(cert_2, cert_1, fetcher)
        assert forward == backward, kind
        assert forward.linked == (kind != "none")
