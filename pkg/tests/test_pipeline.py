import json
import math

import numpy as np
import pytest

from acer.corpus import corpus_from_texts
from acer.errors import EmptyQueryError
from acer.index import build_index, search
from acer.learner import EnsembleConfig, train
from acer.pipeline import (
    ReformulatedQuery,
    ReformulationRequest,
    baseline_reformulation,
    expansion_weights,
    get_qr_candidate,
    preprocess_query,
    reformulate,
    reselect,
)
from acer.extract import SignatureTokens

QUERY = "Debbugger Source Lookup does not work with variables"


def test_preprocess_query_appends_structured_tokens():
    assert preprocess_query("sourceLookup fails") == ["source", "lookup", "fails", "sourcelookup"]


def test_request_validation():
    with pytest.raises(ValueError):
        ReformulationRequest("x", feedback_size=0)


def test_candidate_from_tokens():
    tokens = SignatureTokens("msig", [("getChatRoomBots", "a"), ("chatRoomName", "a")])
    cand = get_qr_candidate(tokens, 2, exclude=["bots"])
    assert cand.kind == "msig"
    assert len(cand.terms) == 2 and "bots" not in cand.terms
    assert cand.terms[0] in ("chat", "room")
    empty = get_qr_candidate(SignatureTokens("fsig"), 5)
    assert empty.terms == [] and empty.flagged


def test_pass_through_returns_every_candidate(mini_index):
    result = reformulate(QUERY, mini_index)
    assert result.chosen_kind is None
    assert result.final_terms == result.initial_terms
    assert [c.kind for c in result.candidates] == ["msig", "fsig", "comb", "baseline"]
    for c in result.candidates[:3]:
        assert len(c.terms) <= 10
        assert not set(c.terms) & set(result.initial_terms)
        assert c.query[: len(result.initial_terms)] == result.initial_terms
    assert result.feedback[0] == "org/example/debug/sourcelookup/VariableSourceContainer.java"


def test_reformulation_is_deterministic(mini_index):
    a = reformulate(QUERY, mini_index).to_record()
    b = reformulate(QUERY, mini_index).to_record()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_msig_candidates_skip_body_only_identifiers(mini_index):
    for q in (QUERY, "frobnicate retries", "Watch expression never returns"):
        result = reformulate(q, mini_index)
        assert not any("frobnicate" in t for t in result.candidate("msig").terms)


def test_empty_query(mini_index):
    with pytest.raises(EmptyQueryError):
        reformulate("the of and", mini_index)


def test_no_feedback_falls_back_to_repetition(mini_index):
    result = reformulate("zebra giraffe", mini_index, train((np.zeros((4, 18)), np.ones(4)), EnsembleConfig(1)))
    assert result.feedback == []
    assert result.chosen_kind == "baseline"
    assert result.final_terms == ["zebra", "giraffe", "zebra", "giraffe"]
    assert result.warnings


def _toy_model():
    X = np.zeros((8, 18))
    y = np.zeros(8)
    for i in range(8):
        X[i, 14 + i % 4] = 1.0
        y[i] = float(i % 4 == 2)  # comb is best
    return train((X, y), EnsembleConfig(3), seed=0)


def test_selection_and_reselection_from_record(mini_index):
    model = _toy_model()
    result = reformulate(QUERY, mini_index, model)
    assert result.chosen_kind == "comb"
    assert result.final_terms == result.candidate("comb").query
    record = json.loads(json.dumps(result.to_record()))
    assert reselect(ReformulatedQuery.from_record(record), model) == "comb"


def _bodies():
    texts = {
        "a.java": "alpha beta beta gamma",
        "b.java": "alpha delta",
        "c.java": "gamma epsilon",
        "d.java": "zeta eta theta",
    }
    return build_index(corpus_from_texts(texts))


def test_tf_and_tfidf_weights():
    idx = _bodies()
    fb = [idx.documents["a.java"], idx.documents["b.java"]]
    tf = expansion_weights("tf", fb, idx)
    assert tf == {"alpha": 2.0, "beta": 2.0, "delta": 1.0, "gamma": 1.0}
    tfidf = expansion_weights("tfidf", fb, idx)
    assert tfidf["beta"] == pytest.approx(2 * math.log(4))
    assert tfidf["alpha"] == pytest.approx(2 * math.log(2))


def test_rsv_weights_against_formula():
    idx = _bodies()
    fb = [idx.documents["a.java"], idx.documents["b.java"]]
    w = expansion_weights("rsv", fb, idx)
    N, R = 4, 2

    def rsv(r, n):
        rw = math.log(((r + .5) / (R - r + .5)) / ((n - r + .5) / (N - n - R + r + .5)))
        return rw * (r / R - (n - r) / (N - R))

    assert w["alpha"] == pytest.approx(rsv(2, 2))
    assert w["beta"] == pytest.approx(rsv(1, 1))
    assert w["gamma"] == pytest.approx(rsv(1, 2))


def test_rocchio_is_centroid_of_unit_vectors():
    idx = _bodies()
    fb = [idx.documents["a.java"], idx.documents["b.java"]]
    w = expansion_weights("rocchio", fb, idx)
    va, vb = idx.doc_vector("a.java"), idx.doc_vector("b.java")
    assert w["alpha"] == pytest.approx((va["alpha"] + vb["alpha"]) / 2)
    assert w["beta"] == pytest.approx(va["beta"] / 2)


def test_baseline_scopes_and_errors(mini_index):
    terms = baseline_reformulation(QUERY, mini_index, "tf", k=5)
    assert len(terms) == 5
    assert not set(terms) & set(preprocess_query(QUERY))
    msig = baseline_reformulation(QUERY, mini_index, "tf", k=50, scope="msig")
    assert not any("frobnicate" in t for t in msig)
    with pytest.raises(ValueError):
        expansion_weights("bm25", [], mini_index)
    with pytest.raises(ValueError):
        expansion_weights("rsv", [], mini_index, scope="msig")
    assert expansion_weights("tf", [], mini_index) == {}


def test_repeated_query_ranks_like_the_original(mini_index):
    q = preprocess_query(QUERY)
    assert [d for d, _ in search(mini_index, q, 20)] == [d for d, _ in search(mini_index, q + q, 20)]
