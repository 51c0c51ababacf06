"""Quantum imaginary time evolution with local unitary fits.

Each imaginary-time step sweeps the Trotter pieces in order.  For a piece
``h`` acting inside a domain of ``D`` qubits, the unitary ``exp(-i A dtau)``
is chosen so that ``-i A |phi>`` best matches the finite difference of the
normalised step ``exp(-h dtau)|phi> / c``.  With ``A = sum_I a_I sigma_I``
over the Pauli strings of the domain this is the linear system
``(S + S^T) a = -b``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .model import GroundTruth, TrotterPiece, single_piece, trotterize
from .numerics import hermitian_expm, lstsq_psd
from .pauli import (
    PauliString,
    PauliSum,
    enumerate_strings,
    local_sum_matrix,
    pauli_to_matrix,
    product_table,
)
from .statevec import (
    StateVector,
    apply_dense_on_domain,
    expectation,
    inner,
    pauli_overlaps,
)

log = logging.getLogger(__name__)

IMAG_TOL = 1e-10
_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


@dataclass(frozen=True)
class QiteConfig:
    dtau: float = 0.25
    steps: int = 40
    domain_size: int = 2
    rcond: float = 1e-8
    include_identity: bool = False
    record_fidelity: bool = True
    # False runs the whole Hamiltonian as one piece on the full register.
    trotterize: bool = True

    def __post_init__(self):
        if not self.dtau > 0:
            raise ValueError("dtau must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.domain_size < 2:
            raise ValueError("domain_size must be at least 2")
        if not 0 < self.rcond < 1:
            raise ValueError("rcond must lie in (0, 1)")


@dataclass
class PieceRecord:
    support: tuple[int, ...]
    domain: tuple[int, ...]
    c: float
    a: np.ndarray = field(repr=False)
    residual: float
    basis_size: int


@dataclass
class QiteStepReport:
    step: int
    beta: float
    energy: float
    fidelity: float | None
    norm_error: float
    pieces: list[PieceRecord] = field(default_factory=list, repr=False)

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.pieces), default=0.0)


@dataclass
class QiteTrajectory:
    config: QiteConfig
    reports: list[QiteStepReport]
    state: StateVector = field(repr=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.reports])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([np.nan if r.fidelity is None else r.fidelity
                         for r in self.reports])

    @property
    def betas(self) -> np.ndarray:
        return np.array([r.beta for r in self.reports])


@dataclass(frozen=True)
class _LocalBasis:
    """Strings of a ``D``-qubit domain as local masks, with their product table."""

    size: int
    x: np.ndarray
    z: np.ndarray
    prod_code: np.ndarray
    prod_phase: np.ndarray

    @classmethod
    def from_local(cls, x, z, size: int) -> "_LocalBasis":
        dtype = np.uint16 if size <= 8 else np.int64
        x = np.asarray(x, dtype=dtype)
        z = np.asarray(z, dtype=dtype)
        xp, zp, ph = product_table(x, z)
        code = (xp.astype(np.int64) << size) | zp
        return cls(size, x, z, code.astype(np.int32 if size <= 15 else np.int64), ph)

    def __len__(self) -> int:
        return self.x.size


@lru_cache(maxsize=8)
def _domain_basis(size: int, include_identity: bool) -> _LocalBasis:
    strings = enumerate_strings(range(size), size, include_identity)
    return _LocalBasis.from_local(
        [p.x_mask for p in strings], [p.z_mask for p in strings], size
    )


def _embed_masks(local: np.ndarray, domain: Sequence[int]) -> np.ndarray:
    local = np.asarray(local, dtype=np.int64)
    out = np.zeros_like(local)
    for k, q in enumerate(domain):
        out |= ((local >> k) & 1) << q
    return out


def _all_expectations(state: StateVector, domain: Sequence[int]) -> np.ndarray:
    """``<sigma>`` for all ``4**D`` strings on ``domain``, indexed by ``x << D | z``."""
    d = len(domain)
    codes = np.arange(1 << (2 * d), dtype=np.int64)
    xg = _embed_masks(codes >> d, domain)
    zg = _embed_masks(codes & ((1 << d) - 1), domain)
    return pauli_overlaps(state, state, xg, zg)


def _s_matrix(state: StateVector, domain: Sequence[int], lb: _LocalBasis):
    table = _all_expectations(state, domain)
    return _PHASES[lb.prod_phase] * table[lb.prod_code]


def _basis_domain(basis: Sequence[PauliString]) -> tuple[int, ...]:
    m = 0
    for p in basis:
        m |= p.x_mask | p.z_mask
    return tuple(q for q in range(basis[0].n_qubits) if (m >> q) & 1) or (0,)


def compute_S(state: StateVector, basis: Sequence[PauliString]) -> np.ndarray:
    """``S[I, J] = <phi| sigma_I sigma_J |phi>`` from symplectic products."""
    if not basis:
        raise ValueError("empty basis")
    if basis[0].n_qubits != state.n_qubits:
        raise ValueError("basis and state act on different qubit counts")
    domain = _basis_domain(basis)
    local = [p.restrict(domain) for p in basis]
    if any(p.phase_exp for p in local):
        raise ValueError("basis strings must be phase free")
    lb = _LocalBasis.from_local(
        [p.x_mask for p in local], [p.z_mask for p in local], len(domain)
    )
    return _s_matrix(state, domain, lb)


def _piece_ops(h: PauliSum, domain: Sequence[int]) -> np.ndarray:
    return pauli_to_matrix(h.restrict(domain))


def compute_c(
    state: StateVector, h: PauliSum, dtau: float, domain: Sequence[int] | None = None
) -> float:
    """``sqrt(<phi| exp(-2 dtau h) |phi>)``, the norm of one imaginary-time step."""
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    domain = tuple(domain) if domain is not None else (h.support or (0,))
    prop = hermitian_expm(_piece_ops(h, domain), -2 * dtau)
    c2 = inner(state, apply_dense_on_domain(state, prop, domain)).real
    if not c2 > 0:
        raise ValueError(f"non-positive norm radicand {c2:.3e}; is h Hermitian?")
    return float(np.sqrt(c2))


def _b_vector(state, step_state, x, z, dtau, c):
    fwd = pauli_overlaps(step_state, state, x, z)  # <phi| e sigma |phi>
    bwd = pauli_overlaps(state, step_state, x, z)  # <phi| sigma e |phi>
    b = 1j / (c * dtau) * (fwd - bwd)
    worst = np.max(np.abs(b.imag)) if b.size else 0.0
    if worst > IMAG_TOL:
        raise ValueError(f"b has imaginary residue {worst:.3e}")
    return b.real


def compute_b(
    state: StateVector,
    basis: Sequence[PauliString],
    h: PauliSum,
    dtau: float,
    c: float,
    domain: Sequence[int] | None = None,
) -> np.ndarray:
    """``b_I = i/(c dtau) <phi| e sigma_I - sigma_I e |phi>`` with ``e = exp(-dtau h)``."""
    domain = tuple(domain) if domain is not None else (h.support or (0,))
    prop = hermitian_expm(_piece_ops(h, domain), -dtau)
    step_state = apply_dense_on_domain(state, prop, domain)
    x = np.array([p.x_mask for p in basis], dtype=np.int64)
    z = np.array([p.z_mask for p in basis], dtype=np.int64)
    return _b_vector(state, step_state, x, z, dtau, c)


def solve_a(S: np.ndarray, b: np.ndarray, rcond: float = 1e-8) -> tuple[np.ndarray, float]:
    """Minimum-norm solution of ``(S + S^T) a = -b`` and its residual norm.

    The transpose is the plain one; for Hermitian strings ``S + S^T`` is
    ``2 Re S`` and the imaginary remainder is only rounding.
    """
    S = np.asarray(S)
    b = np.asarray(b, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or b.shape != (S.shape[0],):
        raise ValueError(f"incompatible shapes {S.shape} and {b.shape}")
    full = S + S.T
    if np.iscomplexobj(full):
        worst = np.max(np.abs(full.imag)) if full.size else 0.0
        if worst > IMAG_TOL:
            raise ValueError(f"S + S^T has imaginary residue {worst:.3e}")
        full = full.real
    a = lstsq_psd(full, -b, rcond)
    residual = float(np.linalg.norm(full @ a + b))
    return a, residual


def _evolve_piece(state: StateVector, piece: TrotterPiece, cfg: QiteConfig):
    domain = piece.domain
    d = len(domain)
    lb = _domain_basis(d, cfg.include_identity)
    h_local = _piece_ops(piece.h, domain)

    S = _s_matrix(state, domain, lb)
    c2 = inner(
        state, apply_dense_on_domain(state, hermitian_expm(h_local, -2 * cfg.dtau), domain)
    ).real
    if not c2 > 0:
        raise ValueError(f"non-positive norm radicand {c2:.3e}")
    c = float(np.sqrt(c2))
    step_state = apply_dense_on_domain(state, hermitian_expm(h_local, -cfg.dtau), domain)
    b = _b_vector(
        state, step_state, _embed_masks(lb.x, domain), _embed_masks(lb.z, domain),
        cfg.dtau, c,
    )
    a, residual = solve_a(S, b, cfg.rcond)
    gen = local_sum_matrix(a, lb.x, lb.z, d)
    unitary = hermitian_expm(gen, -1j * cfg.dtau)
    new = apply_dense_on_domain(state, unitary, domain)
    rec = PieceRecord(piece.support, domain, c, a, residual, len(lb))
    log.debug(
        "piece %s domain %s: c=%.6f |a|max=%.3e residual=%.3e",
        piece.support, domain, c, np.max(np.abs(a), initial=0.0), residual,
    )
    return new, rec


def qite_step(
    state: StateVector, pieces: Sequence[TrotterPiece], cfg: QiteConfig
) -> tuple[StateVector, list[PieceRecord]]:
    """One imaginary-time step: a unitary fit per piece, in the given order."""
    records = []
    for piece in pieces:
        state, rec = _evolve_piece(state, piece, cfg)
        records.append(rec)
    return state, records


def pieces_for(h: PauliSum, cfg: QiteConfig) -> list[TrotterPiece]:
    return trotterize(h, cfg.domain_size) if cfg.trotterize else single_piece(h)


def run_qite(
    h: PauliSum,
    psi0: StateVector,
    cfg: QiteConfig,
    ground: GroundTruth | None = None,
    pieces: Sequence[TrotterPiece] | None = None,
) -> QiteTrajectory:
    """Iterate :func:`qite_step`; report 0 is the initial state at beta = 0."""
    pieces = list(pieces) if pieces is not None else pieces_for(h, cfg)
    fid = ground is not None and cfg.record_fidelity

    def report(m, state, recs):
        return QiteStepReport(
            step=m,
            beta=m * cfg.dtau,
            energy=expectation(state, h).real,
            fidelity=ground.fidelity(state) if fid else None,
            norm_error=abs(state.norm() - 1.0),
            pieces=recs,
        )

    state = psi0
    reports = [report(0, state, [])]
    for m in range(1, cfg.steps + 1):
        state, recs = qite_step(state, pieces, cfg)
        reports.append(report(m, state, recs))
        log.info("qite D=%d step %d: E=%.10f", cfg.domain_size, m, reports[-1].energy)
    return QiteTrajectory(cfg, reports, state)
