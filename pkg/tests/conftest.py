import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acer.corpus import load_corpus  # noqa: E402
from acer.index import build_index  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def mini_index():
    return build_index(load_corpus(FIXTURES / "mini_corpus"))


@pytest.fixture(scope="session")
def mini_dataset_path():
    return FIXTURES / "mini_dataset.jsonl"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
