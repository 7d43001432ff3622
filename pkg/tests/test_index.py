import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from acer.corpus import SourceDocument, corpus_from_texts
from acer.errors import IndexBuildError
from acer.index import build_index, load_index, save_index, search, term_stats

from oracles import dense_cosine_ranking, random_documents


def _docs(*bodies):
    return [SourceDocument(f"d{i}", " ".join(b), list(b), []) for i, b in enumerate(bodies)]


def test_idf_and_weights():
    idx = build_index(_docs(["alpha", "beta"], ["alpha"], ["gamma"]))
    assert idx.idf("alpha") == pytest.approx(math.log(3 / 2))
    assert idx.idf("gamma") == pytest.approx(math.log(3))
    assert idx.idf("unseen") == pytest.approx(math.log(4))
    assert term_stats(idx, "alpha") == (2, math.log(1.5), 2)


def test_search_ranks_by_cosine():
    idx = build_index(_docs(["alpha", "beta"], ["alpha", "alpha", "gamma"], ["gamma"]))
    hits = search(idx, ["beta"], 10)
    assert [d for d, _ in hits] == ["d0"]
    assert search(idx, ["unknown"], 10) == []


def test_search_tie_break_by_id():
    idx = build_index(_docs(["gamma"], ["alpha"], ["alpha"]))
    assert [d for d, _ in search(idx, ["alpha"], 10)] == ["d1", "d2"]


def test_search_k_must_be_positive():
    idx = build_index(_docs(["alpha"]))
    with pytest.raises(ValueError):
        search(idx, ["alpha"], 0)


def test_empty_and_duplicate_corpora_rejected():
    with pytest.raises(IndexBuildError):
        build_index([])
    with pytest.raises(IndexBuildError):
        build_index([SourceDocument("a", "", ["x"]), SourceDocument("a", "", ["y"])])


def test_original_tokens_are_indexed():
    corpus = corpus_from_texts({"A.java": "void resolveEntry() {}", "B.java": "int resolve;"})
    idx = build_index(corpus)
    assert idx.df["resolveentry"] == 1
    assert [d for d, _ in search(idx, ["resolveentry"], 5)] == ["A.java"]


def test_save_load_round_trip_is_byte_stable(tmp_path, mini_index):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_index(mini_index, a)
    loaded = load_index(a)
    save_index(loaded, b)
    assert a.read_bytes() == b.read_bytes()
    assert loaded.postings == mini_index.postings
    q = ["source", "lookup", "variables"]
    assert search(loaded, q, 5) == search(mini_index, q, 5)


def test_load_rejects_foreign_and_tampered_files(tmp_path, mini_index):
    bad = tmp_path / "bad.json"
    bad.write_text('{"magic": "nope"}')
    with pytest.raises(IndexBuildError):
        load_index(bad)
    path = tmp_path / "idx.json"
    save_index(mini_index, path)
    payload = json.loads(path.read_text())
    payload["doc_count"] += 1
    path.write_text(json.dumps(payload))
    with pytest.raises(IndexBuildError):
        load_index(path)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_search_matches_dense_oracle(seed):
    rng = random.Random(seed)
    docs = random_documents(rng)
    idx = build_index(docs)
    vocab = sorted({t for d in docs for t in d.body_terms}) or ["none"]
    query = [rng.choice(vocab) for _ in range(rng.randint(1, 5))] + ["zzunknown"]
    got = search(idx, query, len(docs))
    want = dense_cosine_ranking(docs, query)
    assert [d for d, _ in got] == [d for d, _ in want]
    for (_, s1), (_, s2) in zip(got, want):
        assert abs(s1 - s2) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_search_scores_bounded_and_order_free(seed):
    rng = random.Random(seed)
    docs = random_documents(rng)
    idx = build_index(docs)
    vocab = sorted({t for d in docs for t in d.body_terms}) or ["none"]
    query = [rng.choice(vocab) for _ in range(4)]
    hits = search(idx, query, 50)
    assert all(0 < s <= 1 + 1e-12 for _, s in hits)
    assert search(idx, list(reversed(query)), 50) == hits
