"""Term co-occurrence graphs and CodeRank term weighting.

Each structured token contributes its split terms as vertices and links
adjacent terms with a bidirectional edge. CodeRank is the damped
PageRank recurrence over that graph::

    S(v) = (1 - psi) + psi * sum(S(u) / |Out(u)| for u in In(v))
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import PreprocessOptions, token_terms
from .extract import SignatureTokens


@dataclass(frozen=True)
class RankParams:
    damping: float = 0.85
    base_score: float = 0.25
    epsilon: float = 1e-4
    max_iterations: int = 100
    window: int = 2

    def __post_init__(self):
        if not 0.0 <= self.damping <= 1.0:
            raise ValueError("damping must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.window < 2:
            raise ValueError("window must be >= 2")


@dataclass
class TermGraph:
    """Undirected term graph; every edge counts as one in-link and one out-link."""

    adjacency: dict[str, set[str]] = field(default_factory=dict)

    @property
    def vertices(self) -> list[str]:
        return sorted(self.adjacency)

    def add_vertex(self, term: str) -> None:
        self.adjacency.setdefault(term, set())

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            return
        self.add_vertex(a)
        self.add_vertex(b)
        self.adjacency[a].add(b)
        self.adjacency[b].add(a)

    def edges(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, nbrs in self.adjacency.items() for b in nbrs if a < b)

    def in_links(self, term: str) -> set[str]:
        return self.adjacency[term]

    def out_links(self, term: str) -> set[str]:
        return self.adjacency[term]

    def __len__(self) -> int:
        return len(self.adjacency)

    def __contains__(self, term: str) -> bool:
        return term in self.adjacency


@dataclass
class CodeRankScores:
    scores: dict[str, float]
    iterations_used: int
    converged: bool


def build_term_graph(tokens: SignatureTokens | Iterable[str],
                     opts: PreprocessOptions | None = None,
                     lexicon: frozenset[str] | None = None,
                     window: int = 2) -> TermGraph:
    """Link terms that fall within ``window`` positions inside one token.

    Terms that fail the preprocessing filters are dropped before adjacency
    is decided. Edges never cross token boundaries.
    """
    opts = opts or PreprocessOptions()
    raw = tokens.token_list() if isinstance(tokens, SignatureTokens) else list(tokens)
    graph = TermGraph()
    for token in raw:
        terms = token_terms(token, opts, lexicon)
        for i, term in enumerate(terms):
            graph.add_vertex(term)
            for j in range(i + 1, min(i + window, len(terms))):
                graph.add_edge(term, terms[j])
    return graph


def code_rank(graph: TermGraph, params: RankParams | None = None) -> CodeRankScores:
    """Synchronous CodeRank iteration from a uniform base score.

    Iteration stops once the largest per-vertex change, scaled by
    ``psi / (1 - psi)``, falls below ``epsilon``. That product bounds how
    far the current scores can still be from the fixed point.
    """
    params = params or RankParams()
    psi = params.damping
    vertices = graph.vertices
    if not vertices:
        return CodeRankScores({}, 0, True)
    degree = {v: len(graph.out_links(v)) for v in vertices}
    neighbours = {v: sorted(graph.in_links(v)) for v in vertices}
    scores = {v: params.base_score for v in vertices}
    tail = math.inf if psi >= 1.0 else psi / (1.0 - psi)

    for it in range(1, params.max_iterations + 1):
        new = {
            v: (1.0 - psi) + psi * math.fsum(scores[u] / degree[u] for u in neighbours[v])
            for v in vertices
        }
        delta = max(abs(new[v] - scores[v]) for v in vertices)
        scores = new
        if delta == 0.0 or delta * tail < params.epsilon:
            return CodeRankScores(scores, it, True)
    return CodeRankScores(scores, params.max_iterations, False)


def normalize_scores(scores: dict[str, float]) -> dict[str, float]:
    """Min-max scale scores into [0, 1]; a constant score map becomes all ones."""
    if not scores:
        return {}
    lo, hi = min(scores.values()), max(scores.values())
    if hi == lo:
        return {t: 1.0 for t in scores}
    return {t: (s - lo) / (hi - lo) for t, s in scores.items()}


def ranked_terms(scores: CodeRankScores | dict[str, float]) -> list[tuple[str, float]]:
    """All terms with normalized scores, best first, ties broken alphabetically."""
    raw = scores.scores if isinstance(scores, CodeRankScores) else scores
    norm = normalize_scores(raw)
    order = sorted(raw, key=lambda t: (-raw[t], t))
    return [(t, norm[t]) for t in order]


def top_k_terms(scores: CodeRankScores | dict[str, float], k: int,
                exclude: Iterable[str] = ()) -> list[str]:
    if k < 1:
        raise ValueError("k must be positive")
    skip = set(exclude)
    out = []
    for term, _ in ranked_terms(scores):
        if term in skip:
            continue
        out.append(term)
        if len(out) == k:
            break
    return out


def dump_graph(graph: TermGraph, scores: CodeRankScores | None = None) -> str:
    """JSON text with vertices, their scores and the edge list."""
    payload = {
        "vertices": [
            {"term": v, "degree": len(graph.adjacency[v]),
             "score": None if scores is None else scores.scores.get(v)}
            for v in graph.vertices
        ],
        "edges": [list(e) for e in graph.edges()],
    }
    if scores is not None:
        payload["iterations"] = scores.iterations_used
        payload["converged"] = scores.converged
    return json.dumps(payload, indent=2, sort_keys=True)
