import numpy as np
import pytest

from twophoton.elements import from_matrix
from twophoton.fock import ModeId

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish unitary: QR of a complex Gaussian with the R-diagonal phases removed."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_element(rng: np.random.Generator, modes, size: int | None = None):
    modes = list(modes)
    size = size or int(rng.integers(1, len(modes) + 1))
    chosen = sorted(rng.choice(len(modes), size=size, replace=False))
    sub = [modes[i] for i in chosen]
    return from_matrix(random_unitary(rng, size), sub, name=f"random{size}")


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def ports():
    return [ModeId(p) for p in (1, 2, 3, 4)]


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""

    def record(label: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))
