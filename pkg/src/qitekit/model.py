"""Hamiltonians, Trotter pieces and the exact reference solutions."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import eigh_smallest, hermitian_expm
from .pauli import MAX_MATRIX_QUBITS, PauliString, PauliSum, pauli_to_matrix
from .statevec import StateVector, expectation, fidelity, normalize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TfimParams:
    """Open transverse-field Ising chain ``H = -J sum Z_i Z_{i+1} + g sum X_i``."""

    n: int
    j: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the chain needs at least two qubits")
        if not (np.isfinite(self.j) and np.isfinite(self.g)):
            raise ValueError("J and g must be finite")


@dataclass(frozen=True)
class TrotterPiece:
    h: PauliSum
    support: tuple[int, ...]
    domain: tuple[int, ...]

    def __post_init__(self):
        if not set(self.support) <= set(self.domain):
            raise ValueError(f"support {self.support} not inside domain {self.domain}")


@dataclass
class GroundTruth:
    e_gs: float
    gs_basis: list[StateVector]
    degeneracy_tol: float = 1e-8
    spectrum: np.ndarray | None = field(default=None, repr=False)

    @property
    def degeneracy(self) -> int:
        return len(self.gs_basis)

    def single(self) -> "GroundTruth":
        """Same ground energy with only the first basis vector as reference."""
        return GroundTruth(self.e_gs, self.gs_basis[:1], self.degeneracy_tol, self.spectrum)

    def fidelity(self, state: StateVector) -> float:
        return fidelity(state, self.gs_basis)


def build_tfim(p: TfimParams) -> PauliSum:
    terms = []
    for i in range(p.n - 1):
        zz = PauliString(0, (1 << i) | (1 << (i + 1)), p.n)
        terms.append((-p.j, zz))
    for i in range(p.n):
        terms.append((p.g, PauliString.single("X", i, p.n)))
    return PauliSum(p.n, terms, hermitian=True)


def domain_window(support: Sequence[int], d: int, n: int) -> tuple[int, ...]:
    """Contiguous window of ``min(d, n)`` qubits centred on ``support``.

    The window is shifted inward at the chain ends; it never wraps.
    """
    lo, hi = min(support), max(support)
    size = max(min(d, n), hi - lo + 1)
    start = lo - (size - (hi - lo + 1)) // 2
    start = min(max(start, 0), n - size)
    return tuple(range(start, start + size))


def trotterize(h: PauliSum, d: int) -> list[TrotterPiece]:
    """Split a Hermitian sum into nearest-neighbour pieces.

    Terms supported on ``{k, k+1}`` go to piece ``k``.  A single-qubit term
    on an interior qubit is split evenly between its two neighbouring pieces;
    on an end qubit it goes whole to the only adjacent piece.  Terms spanning
    more than two qubits each become their own piece.  The pieces sum to
    ``h`` exactly.
    """
    if d < 2:
        raise ValueError("domain size must be at least 2")
    n = h.n_qubits
    if n < 2:
        return [TrotterPiece(h, h.support or (0,), tuple(range(n)))]
    buckets: list[list] = [[] for _ in range(n - 1)]
    extra: dict[tuple[int, ...], list] = {}
    for c, p in h.terms():
        sup = p.support
        if not sup:
            buckets[0].append((c, p))
        elif len(sup) == 1:
            q = sup[0]
            adjacent = [k for k in (q - 1, q) if 0 <= k < n - 1]
            share = c / len(adjacent)
            for k in adjacent:
                buckets[k].append((share, p))
        elif len(sup) == 2 and sup[1] == sup[0] + 1:
            buckets[sup[0]].append((c, p))
        else:
            span = tuple(range(sup[0], sup[-1] + 1))
            extra.setdefault(span, []).append((c, p))
    pieces = []
    for k, terms in enumerate(buckets):
        if terms:
            support = (k, k + 1)
            pieces.append(
                TrotterPiece(PauliSum(n, terms, hermitian=True), support,
                             domain_window(support, d, n))
            )
    for span, terms in extra.items():
        pieces.append(
            TrotterPiece(PauliSum(n, terms, hermitian=True), span,
                         domain_window(span, d, n))
        )
    return pieces


def trotterize_tfim(p: TfimParams, d: int) -> list[TrotterPiece]:
    return trotterize(build_tfim(p), d)


def single_piece(h: PauliSum) -> list[TrotterPiece]:
    """The whole Hamiltonian as one piece on the full register (no Trotter split)."""
    everything = tuple(range(h.n_qubits))
    return [TrotterPiece(h, h.support or everything, everything)]


def exact_ground(h: PauliSum, degeneracy_tol: float = 1e-8) -> GroundTruth:
    if h.n_qubits > MAX_MATRIX_QUBITS:
        raise ValueError(
            f"exact diagonalisation limited to {MAX_MATRIX_QUBITS} qubits"
        )
    w, vecs = eigh_smallest(pauli_to_matrix(h))
    e_gs = float(w[0])
    basis = [
        StateVector(vecs[k], h.n_qubits)
        for k in range(len(w))
        if w[k] <= e_gs + degeneracy_tol
    ]
    return GroundTruth(e_gs, basis, degeneracy_tol, w)


def exact_ite_evolve(
    h: PauliSum, psi0: StateVector, dtau: float, steps: int,
    ground: GroundTruth | None = None,
) -> list[tuple[float, StateVector, float]]:
    """Normalised ``exp(-beta H) |psi0>`` sampled at ``beta = m * dtau``.

    Returns ``(beta, state, energy)`` for ``m = 0 .. steps``.
    """
    if h.n_qubits > MAX_MATRIX_QUBITS:
        raise ValueError(f"exact ITE limited to {MAX_MATRIX_QUBITS} qubits")
    if ground is not None:
        overlap = np.sqrt(ground.fidelity(psi0))
        if overlap < 1e-8:
            log.warning("initial state has overlap %.2e with the ground space", overlap)
    prop = hermitian_expm(pauli_to_matrix(h), -dtau)
    state, _ = normalize(psi0)
    out = [(0.0, state, expectation(state, h).real)]
    for m in range(1, steps + 1):
        state, _ = normalize(StateVector(prop @ state.amplitudes, state.n_qubits))
        out.append((m * dtau, state, expectation(state, h).real))
    return out


def hamiltonian_to_text(h: PauliSum) -> str:
    """One ``coefficient word`` line per term, e.g. ``-1.0 ZZIIIIII``."""
    lines = []
    for c, p in h.terms():
        c = c.real if h.hermitian else c
        lines.append(f"{c!r} {p.to_label()}")
    return "\n".join(lines) + "\n"


def hamiltonian_from_text(text: str) -> PauliSum:
    """Parse the ``coefficient word`` format; ``#`` starts a comment."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'coefficient word', got {raw!r}")
        try:
            coeff = float(parts[0])
            p = PauliString.from_label(parts[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if n is None:
            n = p.n_qubits
        elif p.n_qubits != n:
            raise ValueError(f"line {lineno}: word length {p.n_qubits}, expected {n}")
        terms.append((coeff, p))
    if n is None:
        raise ValueError("no Hamiltonian terms found")
    return PauliSum(n, terms, hermitian=True)
