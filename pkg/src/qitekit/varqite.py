"""Variational imaginary time evolution on a layered rotation ansatz.

The parameters follow ``M theta_dot = -V`` and are advanced with explicit
Euler steps ``theta <- theta - eta * M^+ V``, where

    M_ij = Re[<d_i psi|d_j psi> + <d_i psi|psi><psi|d_j psi>]
    V_i  = Re <d_i psi| H |psi>

Rotations use the half-angle convention ``R_P(t) = exp(-i t P / 2)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import GroundTruth
from .numerics import lstsq_psd
from .pauli import PauliSum
from .statevec import StateVector, apply_sum, expectation

log = logging.getLogger(__name__)

_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_GENERATORS = {"ry": -0.5j * _Y, "rz": -0.5j * _Z}


def _rotation(kind: str, t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise ValueError(f"not a parameterised rotation: {kind!r}")


@dataclass(frozen=True)
class Gate:
    kind: str  # "ry", "rz" or "cnot"
    qubits: tuple[int, ...]
    param: int | None = None


@dataclass(frozen=True)
class Ansatz:
    """Ordered gate list acting on ``|0...0>``.

    :meth:`ladder` builds the repeated block of an ``Ry`` layer, an ``Rz``
    layer and a CNOT chain ``0->1->...->n-1``.
    """

    n: int
    gates: tuple[Gate, ...]
    reps: int | None = None

    def __post_init__(self):
        used = sorted(g.param for g in self.gates if g.param is not None)
        if used != list(range(len(used))):
            raise ValueError("parameter indices must be 0..P-1, each used once")
        for g in self.gates:
            if g.kind in _GENERATORS:
                if len(g.qubits) != 1 or g.param is None:
                    raise ValueError(f"bad rotation gate {g}")
            elif g.kind == "cnot":
                if len(g.qubits) != 2 or g.qubits[0] == g.qubits[1] or g.param is not None:
                    raise ValueError(f"bad CNOT gate {g}")
            else:
                raise ValueError(f"unknown gate kind {g.kind!r}")
            if any(q < 0 or q >= self.n for q in g.qubits):
                raise ValueError(f"gate {g} outside {self.n} qubits")

    @classmethod
    def ladder(cls, n: int, reps: int = 2) -> "Ansatz":
        if n < 1 or reps < 1:
            raise ValueError("need n >= 1 and reps >= 1")
        gates = []
        p = 0
        for _ in range(reps):
            for kind in ("ry", "rz"):
                for q in range(n):
                    gates.append(Gate(kind, (q,), p))
                    p += 1
            gates.extend(Gate("cnot", (q, q + 1)) for q in range(n - 1))
        return cls(n, tuple(gates), reps)

    @property
    def n_params(self) -> int:
        return sum(g.param is not None for g in self.gates)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "gates": [
                [g.kind, list(g.qubits)] + ([g.param] if g.param is not None else [])
                for g in self.gates
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ansatz":
        gates = tuple(
            Gate(item[0], tuple(item[1]), item[2] if len(item) > 2 else None)
            for item in d["gates"]
        )
        return cls(int(d["n"]), gates, d.get("reps"))


def _apply_1q(psi: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape(1 << q, 2, 1 << (n - q - 1))
    return np.einsum("ab,ibj->iaj", m, t).reshape(-1)


def _apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    t = psi.reshape([2] * n).copy()
    sel = [slice(None)] * n
    sel[control] = 1
    sub = t[tuple(sel)]
    axis = target - (target > control)
    t[tuple(sel)] = np.flip(sub, axis=axis)
    return t.reshape(-1)


def _apply_gate(psi: np.ndarray, g: Gate, theta: np.ndarray, n: int) -> np.ndarray:
    if g.kind == "cnot":
        return _apply_cnot(psi, g.qubits[0], g.qubits[1], n)
    return _apply_1q(psi, _rotation(g.kind, theta[g.param]), g.qubits[0], n)


def _check_theta(a: Ansatz, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (a.n_params,):
        raise ValueError(f"expected {a.n_params} parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    return theta


def prepare_state(a: Ansatz, theta) -> StateVector:
    theta = _check_theta(a, theta)
    psi = np.zeros(1 << a.n, dtype=complex)
    psi[0] = 1.0
    for g in a.gates:
        psi = _apply_gate(psi, g, theta, a.n)
    return StateVector(psi, a.n)


def tangent_states(a: Ansatz, theta) -> np.ndarray:
    """Rows ``|d psi / d theta_i>`` (unnormalised), ordered by parameter index.

    Each row inserts the generator ``-i P / 2`` right after its rotation and
    replays the rest of the circuit.
    """
    theta = _check_theta(a, theta)
    psi = np.zeros(1 << a.n, dtype=complex)
    psi[0] = 1.0
    out = np.empty((a.n_params, 1 << a.n), dtype=complex)
    for k, g in enumerate(a.gates):
        psi = _apply_gate(psi, g, theta, a.n)
        if g.param is None:
            continue
        d = _apply_1q(psi, _GENERATORS[g.kind], g.qubits[0], a.n)
        for later in a.gates[k + 1 :]:
            d = _apply_gate(d, later, theta, a.n)
        out[g.param] = d
    return out


def compute_M(tangents: np.ndarray, psi: StateVector, second_term: bool = True):
    tangents = np.asarray(tangents)
    if tangents.ndim != 2 or tangents.shape[1] != len(psi):
        raise ValueError("tangent vectors do not match the state size")
    m = tangents.conj() @ tangents.T
    if second_term:
        ov = tangents.conj() @ psi.amplitudes  # <d_i psi|psi>
        m = m + np.outer(ov, ov.conj())
    m = m.real
    return 0.5 * (m + m.T)


def compute_V(tangents: np.ndarray, psi: StateVector, h: PauliSum) -> np.ndarray:
    tangents = np.asarray(tangents)
    if tangents.ndim != 2 or tangents.shape[1] != len(psi):
        raise ValueError("tangent vectors do not match the state size")
    if h.n_qubits != psi.n_qubits:
        raise ValueError("Hamiltonian and state sizes differ")
    return (tangents.conj() @ apply_sum(psi, h).amplitudes).real


def energy(a: Ansatz, theta, h: PauliSum) -> float:
    return expectation(prepare_state(a, theta), h).real


def parameter_shift_V(a: Ansatz, theta, h: PauliSum) -> np.ndarray:
    """``V`` from two energy evaluations per parameter at ``theta_i +- pi/2``."""
    theta = _check_theta(a, theta)
    kinds = {g.param: g.kind for g in a.gates if g.param is not None}
    if any(k not in _GENERATORS for k in kinds.values()):
        raise ValueError("parameter shift needs Pauli-rotation gates")
    v = np.empty(a.n_params)
    for i in range(a.n_params):
        shift = np.zeros_like(theta)
        shift[i] = np.pi / 2
        grad = (energy(a, theta + shift, h) - energy(a, theta - shift, h)) / 2
        v[i] = grad / 2
    return v


@dataclass(frozen=True)
class VarQiteConfig:
    eta: float = 0.05
    steps: int = 200
    m_second_term: bool = True
    m_regularization: float = 1e-6
    v_method: str = "analytic"
    theta0: float = math.pi / 3
    rcond: float = 1e-8
    # Run stops early once ||V|| drops below this.
    v_tol: float = 1e-8
    record_fidelity: bool = True

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.m_regularization < 0:
            raise ValueError("regularisation must be non-negative")
        if self.v_method not in ("analytic", "parameter-shift"):
            raise ValueError(f"unknown v_method {self.v_method!r}")
        if not 0 < self.rcond < 1:
            raise ValueError("rcond must lie in (0, 1)")

    def initial_theta(self, a: Ansatz) -> np.ndarray:
        return np.full(a.n_params, float(self.theta0))


@dataclass
class StepDiagnostics:
    energy: float
    v_norm: float
    m_condition: float
    v: np.ndarray = field(repr=False)


def _m_and_v(theta, a, h, cfg):
    psi = prepare_state(a, theta)
    tangents = tangent_states(a, theta)
    m = compute_M(tangents, psi, cfg.m_second_term)
    if cfg.v_method == "analytic":
        v = compute_V(tangents, psi, h)
    else:
        v = parameter_shift_V(a, theta, h)
    return psi, m, v


def varqite_step(theta, a: Ansatz, h: PauliSum, cfg: VarQiteConfig):
    """One Euler step ``theta - eta * (M + lambda I)^+ V``."""
    theta = _check_theta(a, theta)
    psi, m, v = _m_and_v(theta, a, h, cfg)
    reg = m + cfg.m_regularization * np.eye(len(theta))
    x = lstsq_psd(reg, v, cfg.rcond)
    diag = StepDiagnostics(
        energy=expectation(psi, h).real,
        v_norm=float(np.linalg.norm(v)),
        m_condition=float(np.linalg.cond(reg)),
        v=v,
    )
    return theta - cfg.eta * x, diag


@dataclass
class VarQiteRecord:
    step: int
    beta: float
    energy: float
    fidelity: float | None
    v_norm: float


@dataclass
class VarQiteTrajectory:
    config: VarQiteConfig
    ansatz: Ansatz
    records: list[VarQiteRecord]
    theta: np.ndarray
    converged: bool

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([np.nan if r.fidelity is None else r.fidelity
                         for r in self.records])

    @property
    def v_norms(self) -> np.ndarray:
        return np.array([r.v_norm for r in self.records])


def run_varqite(
    h: PauliSum,
    a: Ansatz,
    cfg: VarQiteConfig,
    ground: GroundTruth | None = None,
    theta0: Sequence[float] | None = None,
) -> VarQiteTrajectory:
    """Record ``(beta, E, F, ||V||)`` at every ``theta_t``, ``t = 0 .. steps``."""
    if a.n != h.n_qubits:
        raise ValueError("ansatz and Hamiltonian sizes differ")
    theta = cfg.initial_theta(a) if theta0 is None else _check_theta(a, theta0)
    fid = ground is not None and cfg.record_fidelity
    records = []
    converged = False
    for t in range(cfg.steps + 1):
        new, diag = varqite_step(theta, a, h, cfg)
        f = ground.fidelity(prepare_state(a, theta)) if fid else None
        records.append(VarQiteRecord(t, t * cfg.eta, diag.energy, f, diag.v_norm))
        log.info("varqite step %d: E=%.10f |V|=%.3e", t, diag.energy, diag.v_norm)
        if diag.v_norm < cfg.v_tol:
            converged = True
            break
        if t < cfg.steps:
            theta = new
    return VarQiteTrajectory(cfg, a, records, theta, converged)
