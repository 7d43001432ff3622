"""
Training the candidate selector and evaluating it
=================================================

For each change request we measure how well every candidate query ranks
the changed files, label the best one, and train a bootstrap ensemble of
decision trees on the candidates' quality metrics. The evaluation then
compares every technique against the unmodified title query.
"""

import tempfile
from pathlib import Path

from acer.corpus import load_corpus
from acer.evaluation import EvalSettings, evaluate, ingest_dataset, training_rows, write_reports
from acer.index import build_index
from acer.learner import cross_validate, train

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

index = build_index(load_corpus(FIXTURES / "mini_corpus"))

# %%
# Requests with stack traces or without goldset files in the corpus are dropped.
dropped = []
requests = ingest_dataset(FIXTURES / "mini_dataset.jsonl", index.doc_ids(), dropped)
print("kept:", [r.id for r in requests], "dropped:", dropped)

# %%
# One labelled row per (request, candidate kind).
settings = EvalSettings(easy_cutoff=1)
rows = training_rows(requests, index, settings)
for r in rows:
    print(f"{r.query_id} {r.kind:9} QE={r.qe} best={r.label}")

model = train(rows, seed=7)
print("grouped cross-validation:", cross_validate(rows, seed=7, folds=5))

# %%
# Evaluate the trained selector next to the classic expansion methods.
result = evaluate(requests, index, ["acer", "tf", "rocchio", "rsv"], {"*": model}, settings)
with tempfile.TemporaryDirectory() as tmp:
    report = write_reports(result, tmp, settings)
    print(report.read_text())
