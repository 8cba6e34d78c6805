import hashlib
import os
from pathlib import Path

import pytest

from openlearner import datasets
from openlearner.datasets import ColumnMapping, DatasetFile, DatasetManifest

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLE = FIXTURES / "peek_sample"
GOLDEN = Path(__file__).parent / "golden"


def sample_manifest(cache_dir) -> DatasetManifest:
    """file:// manifest over the checked-in PEEK-layout sample."""
    sums = {}
    for line in (SAMPLE / "SHA256SUMS").read_text().splitlines():
        digest, name = line.split()
        sums[name] = digest
    roles = {"train.csv": "train", "test.csv": "test", "titles.csv": "titles"}
    files = [
        DatasetFile(name, (SAMPLE / name).resolve().as_uri(), sums[name], role)
        for name, role in roles.items()
    ]
    return DatasetManifest("peek-sample", files, Path(cache_dir))


@pytest.fixture(scope="session")
def sample_data():
    titles = datasets.read_titles(SAMPLE / "titles.csv")
    train = datasets.parse(SAMPLE / "train.csv", titles=titles)
    test = datasets.parse(SAMPLE / "test.csv", titles=titles)
    return train.streams, test.streams


@pytest.fixture
def toy_csv():
    return FIXTURES / "toy.csv"


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def assert_golden(name: str, text: str) -> None:
    """Compare against tests/golden/<name>; UPDATE_GOLDEN=1 rewrites the file."""
    path = GOLDEN / name
    if os.environ.get("UPDATE_GOLDEN"):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        return
    assert path.exists(), f"missing golden file {path}; run with UPDATE_GOLDEN=1 to create it"
    assert text == path.read_text(), f"{name} differs from its golden file"


@pytest.fixture(scope="session")
def fixture_learners(sample_data):
    """The three longest test streams run through INK with default params."""
    from openlearner.harness import run_sequential
    from openlearner.learning import make_classifier

    _, test = sample_data
    ids = sorted(test, key=lambda lid: (-len(test[lid]), lid))[:3]
    out = {}
    for lid in sorted(ids):
        _, history, learner = run_sequential(make_classifier("ink"), test[lid], learner_id=lid)
        out[lid] = (learner, history)
    return out


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
