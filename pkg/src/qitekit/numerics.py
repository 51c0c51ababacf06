"""Dense linear algebra shared by the solvers."""
from __future__ import annotations

from typing import Callable

import numpy as np

HERMITIAN_TOL = 1e-10
MAX_DIM = 1 << 12


def _check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL):
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {h.shape[0]} exceeds the dense limit {MAX_DIM}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def hermitian_expm(h: np.ndarray, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` through its eigendecomposition."""
    _check_hermitian(h)
    w, q = np.linalg.eigh(h)
    return (q * np.exp(scale * w)) @ q.conj().T


def lstsq_psd(a: np.ndarray, b: np.ndarray, rcond: float = 1e-8) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a x = b`` for symmetric ``a``.

    Singular values of a symmetric matrix are the moduli of its eigenvalues,
    so the pseudo-inverse is built from ``eigh`` and every eigenpair with
    ``|lambda| <= rcond * max|lambda|`` is discarded.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not 0 < rcond < 1:
        raise ValueError("rcond must lie in (0, 1)")
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in least-squares input")
    if a.size and np.max(np.abs(a - a.T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(a)
    wmax = np.max(np.abs(w)) if w.size else 0.0
    if wmax == 0:
        return np.zeros_like(b)
    keep = np.abs(w) > rcond * wmax
    return v[:, keep] @ ((v[:, keep].T @ b) / w[keep])


def eigh_smallest(h: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Full spectrum in ascending order and the matching eigenvectors."""
    _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return w, [v[:, k] for k in range(v.shape[1])]


def finite_diff(
    f: Callable[[np.ndarray], float], x, eps: float = 1e-5
) -> np.ndarray:
    """Central differences ``(f(x + eps e_i) - f(x - eps e_i)) / (2 eps)``.

    ``f`` may also return an array, in which case row ``i`` of the result is
    the derivative along coordinate ``i``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rows = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        fp, fm = np.asarray(f(x + e)), np.asarray(f(x - e))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise ValueError(f"non-finite function value along coordinate {i}")
        rows.append((fp - fm) / (2 * eps))
    return np.array(rows)
