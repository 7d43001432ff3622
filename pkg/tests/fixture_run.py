"""Runs the fixture corpus through ``index``, ``train`` and ``evaluate``.

``python3 tests/fixture_run.py`` rewrites tests/golden/ after an
intentional change in output.
"""

import sys
from pathlib import Path

from acer.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
REPORT_FILES = ("report.txt", "outcomes.tsv", "retrieval.tsv", "runs.tsv", "summary.json", "audit.jsonl")


def run_fixture(workdir: Path) -> Path:
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    index, model, out = workdir / "index.json", workdir / "model.json", workdir / "report"
    config = str(FIXTURES / "mini.ini")
    dataset = str(FIXTURES / "mini_dataset.jsonl")
    steps = [
        ["index", str(FIXTURES / "mini_corpus"), "-o", str(index)],
        ["train", "--config", config, "-d", dataset, "-i", str(index), "-o", str(model)],
        ["evaluate", "--config", config, "-d", dataset, "-i", str(index), "-m", str(model), "-o", str(out)],
    ]
    for argv in steps:
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"acer {argv[0]} exited with {code}")
    return out


if __name__ == "__main__":
    import shutil
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        out = run_fixture(Path(tmp))
        GOLDEN.mkdir(exist_ok=True)
        for name in REPORT_FILES:
            shutil.copyfile(out / name, GOLDEN / name)
    print(f"golden report written to {GOLDEN}", file=sys.stderr)
