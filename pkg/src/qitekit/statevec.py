"""Dense state-vector simulation.

Amplitude index convention: qubit 0 is the most significant bit, matching
the leftmost tensor factor in :mod:`qitekit.pauli`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import PauliString, PauliSum, parity_signs, reverse_bits_array

MAX_QUBITS = 24
NORM_TOL = 1e-10

_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} "
                f"qubits, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(np.log2(amps.size)))
        return cls(amps, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self) -> int:
        return self.amplitudes.size


def _check_pair(a: StateVector, b: StateVector):
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def init_basis_state(n: int, bits: str | None = None, max_qubits: int = MAX_QUBITS):
    """Computational basis state; ``bits[0]`` is qubit 0.  Defaults to all zeros."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > max_qubits:
        raise ValueError(f"{n} qubits exceeds the memory guard of {max_qubits}")
    bits = "0" * n if bits is None else bits
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError(f"bitstring {bits!r} does not describe {n} qubits")
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps, n)


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    """``p |state>`` via index permutation and per-amplitude signs."""
    if p.n_qubits != state.n_qubits:
        raise ValueError(f"size mismatch: {p.n_qubits} vs {state.n_qubits} qubits")
    xi, zi = p.index_masks()
    idx = np.arange(len(state), dtype=np.int64)
    src = idx ^ xi
    signs = parity_signs(src & zi)
    phase = _PHASES[(p.phase_exp + bin(p.x_mask & p.z_mask).count("1")) % 4]
    return StateVector(phase * signs * state.amplitudes[src], state.n_qubits)


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_pair(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: StateVector, op: PauliSum | PauliString) -> complex:
    if isinstance(op, PauliString):
        return inner(state, apply_pauli(state, op))
    if op.n_qubits != state.n_qubits:
        raise ValueError(f"size mismatch: {op.n_qubits} vs {state.n_qubits} qubits")
    total = 0j
    for c, p in op.terms():
        total += c * inner(state, apply_pauli(state, p))
    if op.hermitian:
        return complex(total.real, 0.0) if abs(total.imag) <= 1e-12 else total
    return total


def apply_sum(state: StateVector, op: PauliSum) -> StateVector:
    """``op |state>`` for a Pauli sum, without building a matrix."""
    out = np.zeros_like(state.amplitudes)
    for c, p in op.terms():
        out += c * apply_pauli(state, p).amplitudes
    return StateVector(out, state.n_qubits)


def pauli_overlaps(
    bra: StateVector,
    ket: StateVector,
    x: np.ndarray,
    z: np.ndarray,
    chunk: int = 1 << 22,
) -> np.ndarray:
    """``<bra| sigma_k |ket>`` for many phase-free strings at once.

    ``x`` and ``z`` hold qubit-convention masks on the full register.  Work is
    split so that at most ``chunk`` amplitudes are materialised at a time.
    """
    _check_pair(bra, ket)
    n = ket.n_qubits
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    xi = reverse_bits_array(x, n)
    zi = reverse_bits_array(z, n)
    own = _PHASES[np.bitwise_count(x & z) % 4]
    idx = np.arange(len(ket), dtype=np.int64)
    b = bra.amplitudes.conj()
    k = ket.amplitudes
    out = np.empty(x.size, dtype=complex)
    step = max(1, chunk // len(ket))
    for s in range(0, x.size, step):
        src = idx[None, :] ^ xi[s : s + step, None]
        signs = parity_signs(src & zi[s : s + step, None])
        out[s : s + step] = (signs * k[src]) @ b
    return out * own


def _check_domain(domain: Sequence[int], n: int):
    if len(set(domain)) != len(domain):
        raise ValueError(f"duplicate qubits in domain {list(domain)}")
    if any(q < 0 or q >= n for q in domain):
        raise ValueError(f"domain {list(domain)} out of range for {n} qubits")


def apply_dense_on_domain(
    state: StateVector, m: np.ndarray, domain: Sequence[int]
) -> StateVector:
    """Apply a ``2**D x 2**D`` matrix to the ordered ``domain`` qubits.

    ``domain[0]`` is the most significant bit of the matrix index.
    """
    domain = list(domain)
    n = state.n_qubits
    _check_domain(domain, n)
    d = len(domain)
    m = np.asarray(m)
    if m.shape != (1 << d, 1 << d):
        raise ValueError(f"matrix shape {m.shape} does not act on {d} qubits")
    psi = state.amplitudes.reshape([2] * n)
    rest = [q for q in range(n) if q not in domain]
    psi = np.transpose(psi, domain + rest).reshape(1 << d, -1)
    psi = (m @ psi).reshape([2] * n)
    psi = np.transpose(psi, np.argsort(domain + rest))
    return StateVector(psi.reshape(-1), n)


def normalize(state: StateVector) -> tuple[StateVector, float]:
    nrm = state.norm()
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return StateVector(state.amplitudes / nrm, state.n_qubits), nrm


def fidelity(state: StateVector, reference_basis: Sequence[StateVector]) -> float:
    """Weight of ``state`` in the span of an orthonormal reference basis."""
    refs = np.array([r.amplitudes for r in reference_basis])
    if refs.ndim != 2 or refs.shape[1] != len(state):
        raise ValueError("reference basis does not match the state size")
    gram = refs.conj() @ refs.T
    if np.max(np.abs(gram - np.eye(len(refs)))) > NORM_TOL:
        raise ValueError("reference basis is not orthonormal")
    return float(np.sum(np.abs(refs.conj() @ state.amplitudes) ** 2))


def dump_amplitudes(state: StateVector, path) -> None:
    """Raw little-endian float64 (re, im) pairs in index order, for debugging."""
    state.amplitudes.astype("<c16").tofile(path)


def load_amplitudes(path) -> StateVector:
    return StateVector.from_array(np.fromfile(path, dtype="<c16"))
