import math

import pytest
from hypothesis import given, strategies as st

from acer.corpus import SourceDocument
from acer.errors import EmptyQueryError
from acer.index import build_index
from acer.quality import METRIC_NAMES, QualityVector, compute_quality_metrics, pmi, term_coherence

L = math.log


@pytest.fixture(scope="module")
def tiny():
    docs = [
        SourceDocument("d0", "", ["alpha", "beta"]),
        SourceDocument("d1", "", ["alpha", "alpha", "gamma"]),
        SourceDocument("d2", "", ["gamma"]),
    ]
    return build_index(docs)


def test_metric_names():
    assert len(METRIC_NAMES) == 14
    with pytest.raises(ValueError):
        QualityVector((1.0, 2.0))


def test_hand_computed_vector(tiny):
    q = compute_quality_metrics(["alpha", "beta"], tiny)
    idf_a, idf_b = L(3 / 2), L(3)
    assert q["avg_idf"] == pytest.approx((idf_a + idf_b) / 2)
    assert q["max_idf"] == pytest.approx(idf_b)
    assert q["dev_idf"] == pytest.approx((idf_b - idf_a) / 2)
    assert q["avg_ictf"] == pytest.approx((L(6 / 3) + L(6 / 1)) / 2)
    assert q["max_ictf"] == pytest.approx(L(6))
    assert q["query_scope"] == pytest.approx(2 / 3)
    # p(t|q) = 1/2 for both; p(alpha|C) = 3/6, p(beta|C) = 1/6
    assert q["scs"] == pytest.approx(0.5 * L(0.5 / 0.5) + 0.5 * L(0.5 / (1 / 6)))
    scq_a, scq_b = (1 + L(3)) * idf_a, (1 + L(1)) * idf_b
    assert q["avg_scq"] == pytest.approx((scq_a + scq_b) / 2)
    assert q["max_scq"] == pytest.approx(max(scq_a, scq_b))
    assert q["sum_scq"] == pytest.approx(scq_a + scq_b)
    # pmi(alpha, beta) = ln(P(a,b) / (P(a) P(b))) = ln((1/3) / ((2/3)(1/3)))
    assert q["avg_pmi"] == pytest.approx(L(1.5))
    assert q["max_pmi"] == pytest.approx(L(1.5))
    # alpha occurs in d0 and d1; beta in one document only (coherence 0)
    d0 = [idf_a, idf_b]
    d1 = [(1 + L(2)) * idf_a, 0.0, L(1.5)]
    cos = d0[0] * d1[0] / (math.hypot(*d0) * math.hypot(d1[0], d1[2]))
    assert q["avg_coherence"] == pytest.approx(cos / 2)


def test_out_of_vocabulary_terms(tiny):
    q = compute_quality_metrics(["zeta"], tiny)
    assert q["avg_idf"] == pytest.approx(L(4))
    assert q["avg_ictf"] == pytest.approx(L(7))
    assert q["query_scope"] == 0.0
    assert q["scs"] == pytest.approx(L(1 / (1 / 7)))
    assert q["sum_scq"] == 0.0
    assert q["avg_pmi"] == 0.0 and q["avg_coherence"] == 0.0


def test_pmi_without_co_occurrence(tiny):
    assert pmi(tiny, "beta", "gamma") == pytest.approx(-L(3))


def test_coherence_needs_two_documents(tiny):
    assert term_coherence(tiny, "beta") == 0.0
    assert term_coherence(tiny, "missing") == 0.0


def test_empty_query_rejected(tiny):
    with pytest.raises(EmptyQueryError):
        compute_quality_metrics([], tiny)


@given(st.permutations(["alpha", "beta", "gamma", "alpha", "zeta"]))
def test_permutation_invariance(terms):
    docs = [
        SourceDocument("d0", "", ["alpha", "beta"]),
        SourceDocument("d1", "", ["alpha", "alpha", "gamma"]),
        SourceDocument("d2", "", ["gamma"]),
    ]
    idx = build_index(docs)
    base = compute_quality_metrics(["alpha", "alpha", "beta", "gamma", "zeta"], idx)
    assert compute_quality_metrics(terms, idx).values == base.values


def test_vector_accessors(tiny):
    q = compute_quality_metrics(["alpha"], tiny, kind="msig")
    assert q.kind == "msig"
    assert list(q.as_dict()) == list(METRIC_NAMES)
    assert q.as_array().shape == (14,)
