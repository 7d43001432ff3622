"""Corpus loading and text preprocessing.

Raw source text becomes a list of terms via: token scan, identifier
splitting (camel case, snake case, digit boundaries and an optional
frequency lexicon for same-case tokens), lowercasing, stopword and
language keyword removal, a minimum length filter and optional stemming.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorpusError

log = logging.getLogger(__name__)

_RAW_TOKEN = re.compile(r"[A-Za-z0-9_]+")
_CHUNK = re.compile(r"[A-Za-z0-9]+")
_PIECE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")

LEXICON_MIN_WORD = 3


@dataclass(frozen=True)
class PreprocessOptions:
    stemming: bool = False
    min_term_length: int = 3
    keep_original_tokens: bool = True
    stopwords_path: str | None = None
    keywords_path: str | None = None

    def __post_init__(self):
        if self.min_term_length < 1:
            raise ValueError("min_term_length must be >= 1")

    @property
    def stopwords(self) -> frozenset[str]:
        return _word_list(self.stopwords_path, "stopwords.txt")

    @property
    def keywords(self) -> frozenset[str]:
        return _word_list(self.keywords_path, "java_keywords.txt")


@dataclass
class SourceDocument:
    id: str
    raw: str
    body_terms: list[str]
    original_tokens: list[str] = field(default_factory=list)


@dataclass
class Corpus:
    """Documents ordered by id, plus the files that could not be read."""

    documents: list[SourceDocument] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    options: PreprocessOptions = field(default_factory=PreprocessOptions)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[SourceDocument]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> SourceDocument:
        return self.documents[i]

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]


@lru_cache(maxsize=None)
def _word_list(path: str | None, bundled: str) -> frozenset[str]:
    if path is None:
        text = resources.files("acer").joinpath("data").joinpath(bundled).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=1)
def _stemmer():
    import snowballstemmer

    return snowballstemmer.stemmer("english")


def _lexicon_split(piece: str, lexicon: frozenset[str]) -> list[str]:
    # greedy longest known prefix; the piece stays whole unless fully covered
    low = piece.lower()
    if low in lexicon or len(low) < 2 * LEXICON_MIN_WORD:
        return [piece]
    out, i = [], 0
    while i < len(low):
        for j in range(len(low), i + LEXICON_MIN_WORD - 1, -1):
            if low[i:j] in lexicon:
                out.append(piece[i:j])
                i = j
                break
        else:
            return [piece]
    return out


def split_token(token: str, lexicon: frozenset[str] | None = None) -> list[str]:
    """Split an identifier into its constituent words.

    >>> split_token("resolveRuntimeClasspathEntry")
    ['resolve', 'Runtime', 'Classpath', 'Entry']
    >>> split_token("XMLParser")
    ['XML', 'Parser']
    """
    pieces = []
    for chunk in _CHUNK.findall(token):
        for piece in _PIECE.findall(chunk):
            if lexicon and piece.isalpha() and (piece.islower() or piece.isupper()):
                pieces.extend(_lexicon_split(piece, lexicon))
            else:
                pieces.append(piece)
    return pieces


def normalize_piece(piece: str, opts: PreprocessOptions) -> str | None:
    """Lowercase and filter one split piece; None when it is dropped."""
    if not piece.isalpha():
        return None
    term = piece.lower()
    if len(term) < opts.min_term_length or term in opts.stopwords or term in opts.keywords:
        return None
    if opts.stemming:
        term = _stemmer().stemWord(term)
    return term


def token_terms(token: str, opts: PreprocessOptions, lexicon: frozenset[str] | None = None) -> list[str]:
    """Valid terms of a single token, in order."""
    terms = []
    for piece in split_token(token, lexicon):
        term = normalize_piece(piece, opts)
        if term is not None:
            terms.append(term)
    return terms


def is_structured(token: str, opts: PreprocessOptions | None = None,
                  lexicon: frozenset[str] | None = None) -> bool:
    """A token is structured when it splits into two or more valid terms."""
    return len(token_terms(token, opts or PreprocessOptions(), lexicon)) >= 2


def raw_tokens(raw: str) -> list[str]:
    return _RAW_TOKEN.findall(raw)


def preprocess_text(raw: str, opts: PreprocessOptions | None = None,
                    lexicon: frozenset[str] | None = None) -> list[str]:
    opts = opts or PreprocessOptions()
    terms: list[str] = []
    for token in raw_tokens(raw):
        terms.extend(token_terms(token, opts, lexicon))
    return terms


def original_tokens(raw: str, opts: PreprocessOptions | None = None,
                    lexicon: frozenset[str] | None = None) -> list[str]:
    """Lowercased structured tokens of ``raw``, kept for indexing next to their splits."""
    opts = opts or PreprocessOptions()
    if not opts.keep_original_tokens:
        return []
    return [t.lower() for t in raw_tokens(raw) if is_structured(t, opts, lexicon)]


def build_lexicon(texts: Iterable[str], min_count: int = 2) -> frozenset[str]:
    """Frequent words mined from camel/snake splits, used to split same-case tokens."""
    counts: Counter[str] = Counter()
    for raw in texts:
        for token in raw_tokens(raw):
            pieces = split_token(token)
            if len(pieces) < 2:
                continue
            counts.update(p.lower() for p in pieces if p.isalpha() and len(p) >= LEXICON_MIN_WORD)
    return frozenset(w for w, c in counts.items() if c >= min_count)


def make_document(doc_id: str, raw: str, opts: PreprocessOptions,
                  lexicon: frozenset[str] | None = None) -> SourceDocument:
    return SourceDocument(
        id=doc_id,
        raw=raw,
        body_terms=preprocess_text(raw, opts, lexicon),
        original_tokens=original_tokens(raw, opts, lexicon),
    )


def load_corpus(root: str | Path, opts: PreprocessOptions | None = None,
                extensions: Iterable[str] = (".java",),
                lexicon: frozenset[str] | None = None) -> Corpus:
    """Load every matching file under ``root`` as one document.

    Document ids are POSIX paths relative to ``root``. Files that cannot be
    read are skipped and listed in ``Corpus.skipped``.
    """
    opts = opts or PreprocessOptions()
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root is not a readable directory: {root}")
    exts = tuple(e.lower() for e in extensions)
    try:
        paths = sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in exts)
    except OSError as exc:
        raise CorpusError(f"cannot scan corpus root {root}: {exc}") from exc

    corpus = Corpus(options=opts)
    for path in sorted(paths, key=lambda p: p.relative_to(root).as_posix()):
        doc_id = path.relative_to(root).as_posix()
        try:
            raw = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", doc_id, exc)
            corpus.skipped.append((doc_id, str(exc)))
            continue
        corpus.documents.append(make_document(doc_id, raw, opts, lexicon))
    return corpus


def corpus_from_texts(texts: dict[str, str], opts: PreprocessOptions | None = None,
                      lexicon: frozenset[str] | None = None) -> Corpus:
    """Build a corpus from an in-memory ``{id: raw text}`` mapping."""
    opts = opts or PreprocessOptions()
    docs = [make_document(i, texts[i], opts, lexicon) for i in sorted(texts)]
    return Corpus(documents=docs, options=opts)
