"""Inverted index with TF-IDF cosine ranking.

Document term weight is ``(1 + ln tf) * idf``, query term weight is
``tf * idf`` and ``idf = ln(N / df)``. Scores are cosine similarities.
Dot products and norms are summed with ``math.fsum`` so that the score of
a document does not depend on the order terms were visited.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .corpus import Corpus, PreprocessOptions, SourceDocument
from .errors import IndexBuildError

MAGIC = "ACER-INDEX"
SCHEMA_VERSION = 1


class TermStats(NamedTuple):
    df: int
    idf: float
    ctf: int


@dataclass
class Index:
    postings: dict[str, list[tuple[str, int]]]
    doc_count: int
    doc_norms: dict[str, float]
    df: dict[str, int]
    documents: dict[str, SourceDocument]
    options: PreprocessOptions = field(default_factory=PreprocessOptions)
    lexicon: frozenset[str] | None = None
    ctf: dict[str, int] = field(default_factory=dict)
    total_terms: int = 0
    doc_tf: dict[str, dict[str, int]] = field(default_factory=dict)
    _vectors: dict[str, dict[str, float]] = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.doc_count

    def idf(self, term: str) -> float:
        df = self.df.get(term, 0)
        if df == 0:
            return math.log(self.doc_count + 1)
        return math.log(self.doc_count / df)

    def doc_ids(self) -> list[str]:
        return sorted(self.documents)

    def doc_vector(self, doc_id: str) -> dict[str, float]:
        """Unit-length TF-IDF vector of a document (empty if its norm is zero)."""
        vec = self._vectors.get(doc_id)
        if vec is None:
            norm = self.doc_norms[doc_id]
            vec = {}
            if norm > 0:
                for term, tf in self.doc_tf[doc_id].items():
                    w = doc_weight(tf, self.idf(term))
                    if w:
                        vec[term] = w / norm
            self._vectors[doc_id] = vec
        return vec

    def docs_containing(self, term: str) -> set[str]:
        return {d for d, _ in self.postings.get(term, ())}


def doc_weight(tf: int, idf: float) -> float:
    return (1.0 + math.log(tf)) * idf


def indexed_terms(doc: SourceDocument) -> list[str]:
    """Split terms plus original structured tokens of a document."""
    return list(doc.body_terms) + list(doc.original_tokens)


def build_index(corpus: Corpus | Iterable[SourceDocument],
                lexicon: frozenset[str] | None = None) -> Index:
    docs = list(corpus)
    if not docs:
        raise IndexBuildError("cannot build an index over an empty corpus")
    opts = corpus.options if isinstance(corpus, Corpus) else PreprocessOptions()
    by_id: dict[str, SourceDocument] = {}
    for d in docs:
        if d.id in by_id:
            raise IndexBuildError(f"duplicate document id {d.id!r}")
        by_id[d.id] = d

    doc_tf = {d.id: dict(Counter(indexed_terms(d))) for d in docs}
    postings: dict[str, list[tuple[str, int]]] = {}
    ctf: Counter[str] = Counter()
    for doc_id in sorted(doc_tf):
        for term, tf in sorted(doc_tf[doc_id].items()):
            postings.setdefault(term, []).append((doc_id, tf))
            ctf[term] += tf
    df = {t: len(p) for t, p in postings.items()}
    n = len(docs)
    norms = {}
    for doc_id, tfs in doc_tf.items():
        norms[doc_id] = math.sqrt(math.fsum(doc_weight(tf, math.log(n / df[t])) ** 2
                                            for t, tf in tfs.items()))
    return Index(
        postings=postings,
        doc_count=n,
        doc_norms=norms,
        df=df,
        documents=by_id,
        options=opts,
        lexicon=lexicon,
        ctf=dict(ctf),
        total_terms=sum(ctf.values()),
        doc_tf=doc_tf,
    )


def term_stats(index: Index, term: str) -> TermStats:
    return TermStats(index.df.get(term, 0), index.idf(term), index.ctf.get(term, 0))


def search(index: Index, query_terms: Iterable[str], k: int) -> list[tuple[str, float]]:
    """Top-``k`` documents by cosine similarity, ties broken by ascending id.

    Unknown query terms are ignored; documents scoring zero are not returned.
    """
    if k < 1:
        raise ValueError("k must be positive")
    qtf = Counter(t for t in query_terms if t in index.df)
    qw = {t: tf * index.idf(t) for t, tf in qtf.items()}
    qw = {t: w for t, w in qw.items() if w}
    if not qw:
        return []
    qnorm = math.sqrt(math.fsum(w * w for w in qw.values()))

    products: dict[str, list[float]] = {}
    for term, w in qw.items():
        idf = index.idf(term)
        for doc_id, tf in index.postings[term]:
            products.setdefault(doc_id, []).append(w * doc_weight(tf, idf))

    scored = []
    for doc_id, prods in products.items():
        dnorm = index.doc_norms[doc_id]
        if dnorm <= 0:
            continue
        score = math.fsum(prods) / (qnorm * dnorm)
        if score > 0:
            scored.append((doc_id, score))
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored[:k]


def save_index(index: Index, path: str | Path) -> None:
    """Write the index as self-describing JSON; output is byte-stable."""
    payload = {
        "magic": MAGIC,
        "version": SCHEMA_VERSION,
        "options": {
            "stemming": index.options.stemming,
            "min_term_length": index.options.min_term_length,
            "keep_original_tokens": index.options.keep_original_tokens,
            "stopwords_path": index.options.stopwords_path,
            "keywords_path": index.options.keywords_path,
        },
        "lexicon": sorted(index.lexicon) if index.lexicon is not None else None,
        "doc_count": index.doc_count,
        "documents": [
            {"id": d.id, "raw": d.raw, "body_terms": d.body_terms,
             "original_tokens": d.original_tokens}
            for d in (index.documents[i] for i in index.doc_ids())
        ],
        "postings": {t: [[d, tf] for d, tf in p] for t, p in sorted(index.postings.items())},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=0) + "\n", encoding="utf-8")


def load_index(path: str | Path) -> Index:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IndexBuildError(f"cannot read index file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MAGIC:
        raise IndexBuildError(f"{path} is not an index file")
    if payload.get("version") != SCHEMA_VERSION:
        raise IndexBuildError(f"unsupported index schema version {payload.get('version')}")
    opts = PreprocessOptions(**payload["options"])
    docs = [SourceDocument(d["id"], d["raw"], d["body_terms"], d["original_tokens"])
            for d in payload["documents"]]
    lexicon = frozenset(payload["lexicon"]) if payload["lexicon"] is not None else None
    index = build_index(Corpus(documents=docs, options=opts), lexicon=lexicon)
    stored = {t: [(d, tf) for d, tf in p] for t, p in payload["postings"].items()}
    if stored != index.postings or payload["doc_count"] != index.doc_count:
        raise IndexBuildError(f"index file {path} is inconsistent with its documents")
    return index
