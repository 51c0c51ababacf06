from functools import reduce

import numpy as np
import pytest

from qitekit.pauli import PauliString, PauliSum
from qitekit.statevec import StateVector

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Independent dense oracle: literal Kronecker product, qubit 0 leftmost."""
    return reduce(np.kron, [PAULI[s] for s in label])


def kron_sum(h: PauliSum) -> np.ndarray:
    return sum(c * kron_label(p.to_label()) for c, p in h.terms())


def tfim_dense(n, j=1.0, g=1.0):
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n - 1):
        h -= j * kron_label("I" * i + "ZZ" + "I" * (n - i - 2))
    for i in range(n):
        h += g * kron_label("I" * i + "X" + "I" * (n - i - 1))
    return h


def random_state(rng, n) -> StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(v / np.linalg.norm(v), n)


def random_two_local(rng, n) -> PauliSum:
    """Random Hermitian sum of all strings on neighbouring pairs."""
    terms = []
    for k in range(n - 1):
        for a in "IXYZ":
            for b in "IXYZ":
                if a == b == "I":
                    continue
                word = "I" * k + a + b + "I" * (n - k - 2)
                terms.append((rng.normal(), PauliString.from_label(word)))
    return PauliSum(n, terms, hermitian=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICTS: list[str] = []


class Criterion:
    """Collects named checks for one acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    def failures(self):
        return [c for c in self.checks if not c[1]]

    def close(self):
        bad = self.failures()
        status = "PASS" if not bad else "FAIL"
        detail = "; ".join(
            ("ok " if ok else "FAILED ") + (f"{n}: {d}" if d else n)
            for n, ok, d in self.checks
        )
        line = f"criterion {self.number} [{self.title}]: {status} ({detail})"
        _VERDICTS.append(line)
        print(line)
        assert not bad, line


@pytest.fixture
def criterion():
    made = []

    def make(number, title):
        made.append(Criterion(number, title))
        return made[-1]

    return make


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
