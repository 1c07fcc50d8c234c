from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
MNIST_DIR = ROOT / "data" / "mnist5k"
MNIST_IMAGES = MNIST_DIR / "images-idx3-ubyte.gz"
MNIST_LABELS = MNIST_DIR / "labels-idx1-ubyte.gz"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def mnist():
    from tisvm.data import load_idx

    if not MNIST_IMAGES.exists():
        pytest.skip("bundled MNIST subset missing")
    return load_idx(MNIST_IMAGES, MNIST_LABELS)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Record one acceptance line; printed immediately and again in the terminal summary."""

    def _record(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
