"""Pre-retrieval query quality metrics.

Four properties of a query with respect to the indexed corpus: specificity
(IDF, ICTF, query scope, simplified clarity), similarity to the collection
(SCQ), coherency of the documents each term occurs in, and relatedness of
term pairs (pointwise mutual information over document co-occurrence).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyQueryError
from .index import Index, doc_weight

METRIC_NAMES: tuple[str, ...] = (
    "avg_idf", "max_idf", "dev_idf",
    "avg_ictf", "max_ictf", "dev_ictf",
    "query_scope", "scs",
    "avg_scq", "max_scq", "sum_scq",
    "avg_coherence",
    "avg_pmi", "max_pmi",
)

COHERENCE_TOP_DOCS = 10


@dataclass(frozen=True)
class QualityVector:
    values: tuple[float, ...]
    kind: str = ""

    def __post_init__(self):
        if len(self.values) != len(METRIC_NAMES):
            raise ValueError(f"expected {len(METRIC_NAMES)} metric values, got {len(self.values)}")

    def __getitem__(self, name: str) -> float:
        return self.values[METRIC_NAMES.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(METRIC_NAMES, self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def ictf(index: Index, term: str) -> float:
    c = index.ctf.get(term, 0)
    if c == 0:
        return math.log(index.total_terms + 1)
    return math.log(index.total_terms / c)


def scq(index: Index, term: str) -> float:
    c = index.ctf.get(term, 0)
    if c == 0:
        return 0.0
    return (1.0 + math.log(c)) * index.idf(term)


def term_coherence(index: Index, term: str) -> float:
    """Mean pairwise cosine among the top documents containing ``term``.

    Documents are ranked by the term's TF-IDF weight in them. Fewer than two
    documents give 0.
    """
    posting = index.postings.get(term)
    if not posting or len(posting) < 2:
        return 0.0
    idf = index.idf(term)
    top = sorted(posting, key=lambda p: (-doc_weight(p[1], idf), p[0]))[:COHERENCE_TOP_DOCS]
    vectors = [index.doc_vector(d) for d, _ in top]
    sims = []
    for a, b in combinations(vectors, 2):
        if len(a) > len(b):
            a, b = b, a
        sims.append(math.fsum(w * b[t] for t, w in a.items() if t in b))
    return math.fsum(sims) / len(sims)


def pmi(index: Index, t1: str, t2: str) -> float:
    n = index.doc_count
    d1, d2 = index.docs_containing(t1), index.docs_containing(t2)
    joint = len(d1 & d2)
    if joint == 0:
        return -math.log(n)
    return math.log((joint / n) / ((len(d1) / n) * (len(d2) / n)))


def _stats(xs: Sequence[float]) -> tuple[float, float, float]:
    arr = np.asarray(xs, dtype=float)
    return float(arr.mean()), float(arr.max()), float(arr.std())


def compute_quality_metrics(query_terms: Iterable[str], index: Index, kind: str = "") -> QualityVector:
    """Metric vector over the query term multiset; term order does not matter."""
    terms = sorted(query_terms)
    if not terms:
        raise EmptyQueryError("cannot compute quality metrics of an empty query")
    counts = Counter(terms)
    distinct = sorted(counts)

    avg_idf, max_idf, dev_idf = _stats([index.idf(t) for t in terms])
    avg_ictf, max_ictf, dev_ictf = _stats([ictf(index, t) for t in terms])

    hit = set()
    for t in distinct:
        hit |= index.docs_containing(t)
    scope = len(hit) / index.doc_count

    total = index.total_terms
    clarity = []
    for t in distinct:
        p_q = counts[t] / len(terms)
        c = index.ctf.get(t, 0)
        p_c = c / total if c else 1.0 / (total + 1)
        clarity.append(p_q * math.log(p_q / p_c))
    scs = math.fsum(clarity)

    scqs = [scq(index, t) for t in terms]
    avg_scq, max_scq, _ = _stats(scqs)
    sum_scq = math.fsum(scqs)

    coherence = math.fsum(term_coherence(index, t) for t in terms) / len(terms)

    if len(distinct) < 2:
        avg_pmi = max_pmi = 0.0
    else:
        pmis = [pmi(index, a, b) for a, b in combinations(distinct, 2)]
        avg_pmi, max_pmi = math.fsum(pmis) / len(pmis), max(pmis)

    return QualityVector((avg_idf, max_idf, dev_idf, avg_ictf, max_ictf, dev_ictf, scope, scs,
                          avg_scq, max_scq, sum_scq, coherence, avg_pmi, max_pmi), kind)
