"""Method and field signature extraction from Java source.

A light scanner blanks comments and literals, tracks brace nesting to find
class-member level declarations, and matches member headers against
regular expressions. Annotations and generic type arguments are removed
before matching, so tokens never come from them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Literal

from .corpus import PreprocessOptions, SourceDocument, is_structured, raw_tokens

Kind = Literal["msig", "fsig", "comb"]
KINDS: tuple[str, ...] = ("msig", "fsig", "comb")

_MODIFIERS = (r"(?:(?:public|protected|private|static|final|abstract|synchronized|native|"
              r"strictfp|default|transient|volatile)\s+)*")
_TYPE = r"[\w$]+(?:\s*\.\s*[\w$]+)*(?:\s*\[\s*\])*"
_METHOD = re.compile(
    r"^\s*(" + _MODIFIERS + r"(?:" + _TYPE + r"\s+)?[\w$]+\s*\((?:[^()]*)\))",
    re.S,
)
_FIELD = re.compile(
    r"^\s*(" + _MODIFIERS + _TYPE + r")\s+([\w$]+(?:\s*\[\s*\])*(?:\s*,\s*[\w$]+(?:\s*\[\s*\])*)*)\s*$",
    re.S,
)
_TYPE_DECL = re.compile(r"(?:^|[\s;}])(?:@\s*interface|class|interface|enum|record)\s+[\w$]+")
_ANNOTATION = re.compile(r"@\s*[\w$.]+(?:\s*\([^()]*\))?")
_GENERIC = re.compile(r"<[^<>]*>")
_PARENS = re.compile(r"\([^()]*\)")
_NOT_METHOD_NAMES = frozenset({"if", "for", "while", "switch", "catch", "synchronized", "return",
                               "new", "throw", "else", "try", "do"})


def blank_comments_and_literals(src: str) -> str:
    """Replace comments and string/char literals with spaces, keeping offsets and newlines."""
    out = list(src)
    i, n = 0, len(src)

    def blank(a: int, b: int) -> None:
        for j in range(a, min(b, n)):
            if out[j] != "\n":
                out[j] = " "

    while i < n:
        c = src[i]
        if src.startswith("//", i):
            j = src.find("\n", i)
            j = n if j < 0 else j
            blank(i, j)
            i = j
        elif src.startswith("/*", i):
            j = src.find("*/", i + 2)
            j = n if j < 0 else j + 2
            blank(i, j)
            i = j
        elif src.startswith('"""', i):
            j = src.find('"""', i + 3)
            j = n if j < 0 else j + 3
            blank(i + 1, j - 1)
            i = j
        elif c in "\"'":
            j = i + 1
            while j < n and src[j] != c and src[j] != "\n":
                j += 2 if src[j] == "\\" else 1
            blank(i + 1, j)
            i = j + 1
        else:
            i += 1
    return "".join(out)


def _clean_header(header: str) -> str:
    header = _ANNOTATION.sub(" ", header)
    prev = None
    while prev != header:
        prev, header = header, _GENERIC.sub(" ", header)
    return header


def _normalize(text: str) -> str:
    return " ".join(text.split())


@dataclass
class _Member:
    pos: int
    kind: str
    signature: str


def _method_signature(header: str) -> str | None:
    m = _METHOD.match(header)
    if not m:
        return None
    sig = m.group(1)
    name = re.search(r"([\w$]+)\s*\($", sig[: sig.index("(") + 1])
    if name is None or name.group(1) in _NOT_METHOD_NAMES:
        return None
    return _normalize(sig)


def _field_signature(header: str) -> str | None:
    decl, prev = header, None
    while prev != decl:
        prev, decl = decl, _PARENS.sub(" ", decl)
    # keep declarator names only: "int a = f(x), b" -> "int a, b"
    decl = ",".join(part.split("=", 1)[0] for part in decl.split(","))
    m = _FIELD.match(decl)
    if not m:
        return None
    return _normalize(m.group(1) + " " + m.group(2))


def scan_members(raw: str) -> list[_Member]:
    """Member-level method and field declarations in source order."""
    src = blank_comments_and_literals(raw)
    members: list[_Member] = []
    # stack entries: True for a type body (members live here), False otherwise
    stack: list[bool] = []
    start = 0
    skip_to_semicolon = False

    def member_level() -> bool:
        return not stack or stack[-1]

    for i, c in enumerate(src):
        if c not in "{};":
            continue
        if not member_level():
            if c == "{":
                stack.append(False)
            elif c == "}":
                stack.pop()
                if member_level():
                    start = i + 1
            continue

        header = src[start:i]
        if c == "{":
            if skip_to_semicolon:
                stack.append(False)
                continue
            if _TYPE_DECL.search(header):
                stack.append(True)
            else:
                cleaned = _clean_header(header)
                sig = _method_signature(cleaned)
                if sig is not None:
                    members.append(_Member(start + len(header) - len(header.lstrip()), "msig", sig))
                elif "=" in cleaned:
                    sig = _field_signature(cleaned)
                    if sig is not None:
                        members.append(_Member(start + len(header) - len(header.lstrip()), "fsig", sig))
                    skip_to_semicolon = True
                stack.append(False)
            start = i + 1
        elif c == ";":
            if not skip_to_semicolon:
                cleaned = _clean_header(header)
                paren = cleaned.find("(")
                eq = cleaned.find("=")
                pos = start + len(header) - len(header.lstrip())
                if paren >= 0 and (eq < 0 or paren < eq):
                    sig = _method_signature(cleaned)
                    if sig is not None:
                        members.append(_Member(pos, "msig", sig))
                else:
                    sig = _field_signature(cleaned)
                    if sig is not None:
                        members.append(_Member(pos, "fsig", sig))
            skip_to_semicolon = False
            start = i + 1
        else:  # "}"
            if stack:
                stack.pop()
            skip_to_semicolon = False
            start = i + 1
    return members


def extract_method_signatures(doc: SourceDocument | str) -> list[str]:
    raw = doc.raw if isinstance(doc, SourceDocument) else doc
    return [m.signature for m in scan_members(raw) if m.kind == "msig"]


def extract_field_signatures(doc: SourceDocument | str) -> list[str]:
    raw = doc.raw if isinstance(doc, SourceDocument) else doc
    return [m.signature for m in scan_members(raw) if m.kind == "fsig"]


@dataclass
class SignatureTokens:
    """Structured tokens mined from one signature kind, with their source documents."""

    kind: str
    tokens: list[tuple[str, str]] = field(default_factory=list)  # (token, doc id)

    def __len__(self) -> int:
        return len(self.tokens)

    def token_list(self) -> list[str]:
        return [t for t, _ in self.tokens]


def collect_candidate_tokens(feedback_docs: Iterable[SourceDocument], kind: str,
                             opts: PreprocessOptions | None = None,
                             lexicon: frozenset[str] | None = None) -> SignatureTokens:
    """Union of structured signature tokens over feedback documents.

    Output order is (doc id, source position) regardless of the order of
    ``feedback_docs``; duplicates are kept.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown signature kind {kind!r}; expected one of {KINDS}")
    wanted = {"msig"} if kind == "msig" else {"fsig"} if kind == "fsig" else {"msig", "fsig"}
    opts = opts or PreprocessOptions()
    out = SignatureTokens(kind)
    for doc in sorted(feedback_docs, key=lambda d: d.id):
        for member in scan_members(doc.raw):
            if member.kind not in wanted:
                continue
            for token in raw_tokens(member.signature):
                if is_structured(token, opts, lexicon):
                    out.tokens.append((token, doc.id))
    return out
