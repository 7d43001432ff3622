"""
Searching a corpus and reformulating a query
============================================

Index a small Java project, run a bug report title as a query and look at
the reformulation candidates mined from method and field signatures of the
top results.
"""

from pathlib import Path

from acer.corpus import load_corpus
from acer.index import build_index, search
from acer.pipeline import baseline_reformulation, preprocess_query, reformulate

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "mini_corpus"

index = build_index(load_corpus(CORPUS))
print(f"{index.doc_count} documents, {len(index.postings)} terms")

# %%
# The initial query is the report title after preprocessing.
title = "Required projects missing at launch"
query = preprocess_query(title)
for doc_id, score in search(index, query, 5):
    print(f"  {score:.3f}  {doc_id}")

# %%
# Without a trained model every candidate is returned and none is chosen.
result = reformulate(title, index)
for cand in result.candidates:
    print(f"{cand.kind:9} {cand.terms}")

# %%
# Each candidate is the initial query plus its expansion terms. Compare the
# rank of the file that was actually changed.
target = "org/example/debug/classpath/RuntimeClasspathResolver.java"
for cand in result.candidates:
    ranked = [d for d, _ in search(index, cand.query, 20)]
    print(f"{cand.kind:9} rank {ranked.index(target) + 1 if target in ranked else '-'}")

# %%
# Classic expansion methods over the same feedback documents.
for method in ("tf", "tfidf", "rocchio", "rsv"):
    print(f"{method:8}", baseline_reformulation(title, index, method, k=5))
