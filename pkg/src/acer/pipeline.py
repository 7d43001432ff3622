"""End-to-end query reformulation and the term-weighting baselines.

``reformulate`` runs the whole chain for one query: preprocessing,
pseudo-relevance feedback, signature token mining, one CodeRank candidate
per signature kind, quality metrics for all candidates and the baseline,
and model-based selection of the best one.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import PreprocessOptions, original_tokens, preprocess_text, token_terms
from .errors import EmptyQueryError
from .extract import KINDS, SignatureTokens, collect_candidate_tokens
from .graph import RankParams, build_term_graph, code_rank, ranked_terms
from .index import Index, search
from .learner import Ensemble, combine, repeat_terms, select_best
from .quality import METRIC_NAMES, QualityVector, compute_quality_metrics

log = logging.getLogger(__name__)

BASELINE_METHODS = ("tf", "tfidf", "rocchio", "rsv")
SCOPES = ("all", "msig", "fsig", "comb")
ROCCHIO_BETA = 1.0
RSV_SMOOTHING = 0.5


@dataclass(frozen=True)
class ReformulationRequest:
    query: str
    feedback_size: int = 10
    reformulation_size: int = 10
    sources: tuple[str, ...] = KINDS
    query_id: str = ""

    def __post_init__(self):
        if self.feedback_size < 1 or self.reformulation_size < 1:
            raise ValueError("feedback_size and reformulation_size must be >= 1")


@dataclass
class ReformulationCandidate:
    kind: str
    terms: list[str]
    query: list[str] = field(default_factory=list)
    quality: QualityVector | None = None
    probability: float | None = None
    flagged: bool = False
    scores: dict[str, float] = field(default_factory=dict)


@dataclass
class ReformulatedQuery:
    query_id: str
    initial_terms: list[str]
    final_terms: list[str]
    chosen_kind: str | None
    candidates: list[ReformulationCandidate]
    feedback: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def candidate(self, kind: str) -> ReformulationCandidate:
        for c in self.candidates:
            if c.kind == kind:
                return c
        raise KeyError(kind)

    def to_record(self) -> dict:
        return {
            "query_id": self.query_id,
            "initial_terms": self.initial_terms,
            "chosen_kind": self.chosen_kind,
            "final_terms": self.final_terms,
            "feedback": self.feedback,
            "warnings": self.warnings,
            "candidates": [
                {
                    "kind": c.kind,
                    "terms": c.terms,
                    "probability": c.probability,
                    "flagged": c.flagged,
                    "quality": None if c.quality is None else c.quality.as_dict(),
                }
                for c in self.candidates
            ],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ReformulatedQuery":
        cands = []
        for c in rec["candidates"]:
            q = c.get("quality")
            quality = None if q is None else QualityVector(tuple(q[m] for m in METRIC_NAMES), c["kind"])
            cands.append(ReformulationCandidate(c["kind"], list(c["terms"]), quality=quality,
                                                probability=c.get("probability"), flagged=c.get("flagged", False)))
        return cls(rec.get("query_id", ""), list(rec["initial_terms"]), list(rec["final_terms"]),
                   rec.get("chosen_kind"), cands, list(rec.get("feedback", [])), list(rec.get("warnings", [])))


def preprocess_query(text: str, opts: PreprocessOptions | None = None,
                     lexicon: frozenset[str] | None = None) -> list[str]:
    """Query terms: split terms followed by the original structured tokens."""
    return preprocess_text(text, opts, lexicon) + original_tokens(text, opts, lexicon)


def get_qr_candidate(token_set: SignatureTokens, k: int, opts: PreprocessOptions | None = None,
                     lexicon: frozenset[str] | None = None, params: RankParams | None = None,
                     exclude: Iterable[str] = ()) -> ReformulationCandidate:
    """Top-``k`` CodeRank terms of the graph built from ``token_set``."""
    params = params or RankParams()
    graph = build_term_graph(token_set, opts, lexicon, window=params.window)
    ranking = ranked_terms(code_rank(graph, params))
    skip = set(exclude)
    picked = [(t, s) for t, s in ranking if t not in skip][:k]
    return ReformulationCandidate(
        kind=token_set.kind,
        terms=[t for t, _ in picked],
        flagged=not token_set.tokens,
        scores=dict(picked),
    )


def _feedback_documents(index: Index, q_pp: Sequence[str], k: int):
    hits = search(index, q_pp, k)
    return [index.documents[d] for d, _ in hits]


def reformulate(request: ReformulationRequest | str, index: Index, ensemble: Ensemble | None = None,
                params: RankParams | None = None) -> ReformulatedQuery:
    """Suggest a reformulation of the request's query.

    Without an ensemble all candidates are returned and none is chosen
    (``chosen_kind`` is None and the final query is the preprocessed one).
    """
    if isinstance(request, str):
        request = ReformulationRequest(request)
    opts, lexicon = index.options, index.lexicon
    q_pp = preprocess_query(request.query, opts, lexicon)
    if not q_pp:
        raise EmptyQueryError(f"query {request.query!r} is empty after preprocessing")

    feedback = _feedback_documents(index, q_pp, request.feedback_size)
    warnings = []
    if not feedback:
        warnings.append("no feedback documents; falling back to term repetition")
        log.warning("query %r: no feedback documents", request.query_id or request.query)

    candidates = []
    for kind in request.sources:
        tokens = collect_candidate_tokens(feedback, kind, opts, lexicon)
        cand = get_qr_candidate(tokens, request.reformulation_size, opts, lexicon, params, exclude=q_pp)
        cand.query = combine(q_pp, cand.terms)
        candidates.append(cand)
    candidates.append(ReformulationCandidate("baseline", [], list(q_pp)))
    for cand in candidates:
        cand.quality = compute_quality_metrics(cand.query, index, cand.kind)

    result = ReformulatedQuery(request.query_id, list(q_pp), list(q_pp), None, candidates,
                               [d.id for d in feedback], warnings)
    if not feedback:
        result.chosen_kind = "baseline"
        result.final_terms = repeat_terms(q_pp)
        return result
    if ensemble is not None:
        selection = select_best(candidates, ensemble, q_pp)
        for cand in candidates:
            cand.probability = selection.probabilities.get(cand.kind)
        result.chosen_kind = selection.kind
        result.final_terms = selection.terms
    return result


def reselect(record: ReformulatedQuery, ensemble: Ensemble) -> str:
    """Re-run selection from an audit record alone."""
    if record.warnings and not record.feedback:
        return "baseline"
    return select_best(record.candidates, ensemble, record.initial_terms).kind


# ---------------------------------------------------------------- baselines

def _scoped_counts(feedback, scope: str, opts: PreprocessOptions,
                   lexicon: frozenset[str] | None) -> list[Counter]:
    """Per-document term counts from whole bodies or from one signature kind."""
    out = []
    for doc in sorted(feedback, key=lambda d: d.id):
        if scope == "all":
            out.append(Counter(doc.body_terms))
        else:
            tokens = collect_candidate_tokens([doc], scope, opts, lexicon)
            c: Counter = Counter()
            for tok in tokens.token_list():
                c.update(token_terms(tok, opts, lexicon))
            out.append(c)
    return out


def expansion_weights(method: str, feedback, index: Index, scope: str = "all") -> dict[str, float]:
    """Term weights over the feedback documents for one baseline method.

    tf: summed frequency. tfidf: summed tf * idf. rocchio: beta times the
    centroid of the unit TF-IDF document vectors. rsv: Robertson selection
    value ``w * (r/R - (n - r)/(N - R))`` with the add-0.5 relevance weight
    ``w = ln(((r+.5)/(R-r+.5)) / ((n-r+.5)/(N-n-R+r+.5)))``.
    """
    if method not in BASELINE_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {BASELINE_METHODS}")
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    if method in ("rocchio", "rsv") and scope != "all":
        raise ValueError(f"{method} only supports the 'all' scope")
    feedback = list(feedback)
    if not feedback:
        return {}
    counts = _scoped_counts(feedback, scope, index.options, index.lexicon)
    vocab = sorted(set().union(*counts))

    if method == "tf":
        return {t: float(sum(c[t] for c in counts)) for t in vocab}
    if method == "tfidf":
        return {t: sum(c[t] for c in counts) * index.idf(t) for t in vocab}
    if method == "rocchio":
        weights: dict[str, list[float]] = {}
        for doc in feedback:
            vec = index.doc_vector(doc.id)
            for t in set(doc.body_terms):
                if t in vec:
                    weights.setdefault(t, []).append(vec[t])
        return {t: ROCCHIO_BETA * math.fsum(ws) / len(feedback) for t, ws in sorted(weights.items())}

    n_docs, n_rel = index.doc_count, len(feedback)
    a = RSV_SMOOTHING
    out = {}
    for t in vocab:
        r = sum(1 for c in counts if c[t])
        n = index.df.get(t, r)
        w = math.log(((r + a) / (n_rel - r + a)) / ((n - r + a) / (n_docs - n - n_rel + r + a)))
        q = (n - r) / (n_docs - n_rel) if n_docs > n_rel else 0.0
        out[t] = w * (r / n_rel - q)
    return out


def baseline_reformulation(query: str, index: Index, method: str, feedback_size: int = 10,
                           k: int = 10, scope: str = "all", feedback=None) -> list[str]:
    """Top-``k`` expansion terms (not already in the query) for a baseline method.

    ``feedback`` may pass precomputed feedback documents for the query.
    """
    q_pp = preprocess_query(query, index.options, index.lexicon)
    if not q_pp:
        raise EmptyQueryError(f"query {query!r} is empty after preprocessing")
    if feedback is None:
        feedback = _feedback_documents(index, q_pp, feedback_size)
    weights = expansion_weights(method, feedback, index, scope)
    skip = set(q_pp)
    ranked = sorted((t for t, w in weights.items() if w > 0 and t not in skip),
                    key=lambda t: (-weights[t], t))
    return ranked[:k]
