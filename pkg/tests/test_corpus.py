import re

import pytest
from hypothesis import given, strategies as st

from acer.corpus import (
    PreprocessOptions,
    build_lexicon,
    corpus_from_texts,
    is_structured,
    load_corpus,
    original_tokens,
    preprocess_text,
    split_token,
)
from acer.errors import CorpusError


@pytest.mark.parametrize("token, pieces", [
    ("resolveRuntimeClasspathEntry", ["resolve", "Runtime", "Classpath", "Entry"]),
    ("getChatRoomBots", ["get", "Chat", "Room", "Bots"]),
    ("reverse_traversal", ["reverse", "traversal"]),
    ("XMLParser", ["XML", "Parser"]),
    ("parseHTTPResponse2", ["parse", "HTTP", "Response", "2"]),
    ("MAX_VALUE", ["MAX", "VALUE"]),
    ("x", ["x"]),
    ("", []),
])
def test_split_token(token, pieces):
    assert split_token(token) == pieces


def test_lexicon_splits_same_case_tokens():
    lexicon = frozenset({"decimal", "type", "message"})
    assert split_token("DECIMALTYPE", lexicon) == ["DECIMAL", "TYPE"]
    assert split_token("messagetype", lexicon) == ["message", "type"]
    # not fully covered: stays whole
    assert split_token("DECIMALXTYPE", lexicon) == ["DECIMALXTYPE"]


@given(st.text(alphabet="abcXYZ019_", max_size=20))
def test_split_concatenation(token):
    assert "".join(split_token(token)) == re.sub(r"[^A-Za-z0-9]", "", token)


@given(st.text(alphabet="abcdeXYZ", max_size=16))
def test_lexicon_split_concatenation(token):
    lexicon = frozenset({"abc", "cde", "xyz", "bcd"})
    assert "".join(split_token(token, lexicon)) == token


def test_preprocess_filters_stopwords_keywords_and_short_terms():
    text = "public static int getValue(String id) { return theValue; } // it is a test"
    assert preprocess_text(text) == ["get", "value", "string", "value", "test"]


def test_original_tokens_keep_structured_identifiers():
    text = "IRuntimeClasspathEntry entry = resolveRuntimeClasspathEntry(id);"
    assert original_tokens(text) == ["iruntimeclasspathentry", "resolveruntimeclasspathentry"]
    assert original_tokens(text, PreprocessOptions(keep_original_tokens=False)) == []


def test_is_structured():
    assert is_structured("getChatRoomBots")
    assert not is_structured("entry")
    # "getId": "id" is too short, one valid term
    assert not is_structured("getId")


def test_stemming_option():
    opts = PreprocessOptions(stemming=True)
    assert preprocess_text("runningTests", opts) == ["run", "test"]


def test_custom_word_lists(tmp_path):
    stop = tmp_path / "stop.txt"
    stop.write_text("source\n")
    opts = PreprocessOptions(stopwords_path=str(stop))
    assert preprocess_text("sourceLookup the", opts) == ["lookup", "the"]


def test_build_lexicon():
    lex = build_lexicon(["messageType otherMessage", "TypeMessage"])
    assert {"message", "type"} <= lex
    assert "other" not in lex


def test_load_corpus_uses_relative_sorted_ids(tmp_path):
    (tmp_path / "b").mkdir()
    (tmp_path / "b" / "Zed.java").write_text("class Zed { int alphaBeta; }")
    (tmp_path / "A.java").write_text("class A { void runTask() {} }")
    (tmp_path / "notes.txt").write_text("ignored")
    corpus = load_corpus(tmp_path)
    assert corpus.ids() == ["A.java", "b/Zed.java"]
    assert corpus[1].body_terms == ["zed", "alpha", "beta"]
    assert corpus[1].original_tokens == ["alphabeta"]


def test_load_corpus_missing_root(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "missing")


def test_corpus_from_texts_orders_by_id():
    corpus = corpus_from_texts({"b": "beta", "a": "alpha"})
    assert corpus.ids() == ["a", "b"]
