"""Pauli strings and real-weighted Pauli sums in symplectic form.

A string on ``n`` qubits is stored as two integer bitmasks plus a power of
``i``.  Bit ``q`` of ``x_mask``/``z_mask`` refers to qubit ``q``; qubit 0 is
the leftmost tensor factor, so in the amplitude index of a state vector it is
the most significant bit.  The stored operator is

    i**phase_exp * P_0 (x) P_1 (x) ... (x) P_{n-1}

where each ``P_q`` is the literal single-qubit matrix selected by the bit pair
(x, z): I=(0,0), X=(1,0), Y=(1,1), Z=(0,1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_MATRIX_QUBITS = 12

_SYMBOL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_SYMBOL = {v: k for k, v in _SYMBOL_BITS.items()}
_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """A single Pauli string ``i**phase_exp * P_0 (x) ... (x) P_{n-1}``."""

    x_mask: int
    z_mask: int
    n_qubits: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"masks exceed {self.n_qubits} qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_label(cls, label: str, phase_exp: int = 0) -> "PauliString":
        """Build from a word such as ``"XIZY"`` (qubit 0 first)."""
        x = z = 0
        for q, s in enumerate(label.upper()):
            try:
                bx, bz = _SYMBOL_BITS[s]
            except KeyError:
                raise ValueError(f"bad Pauli symbol {s!r} in {label!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(x, z, len(label), phase_exp)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(0, 0, n_qubits)

    @classmethod
    def single(cls, symbol: str, qubit: int, n_qubits: int) -> "PauliString":
        bx, bz = _SYMBOL_BITS[symbol.upper()]
        return cls(bx << qubit, bz << qubit, n_qubits)

    def to_label(self) -> str:
        return "".join(
            _BITS_SYMBOL[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)]
            for q in range(self.n_qubits)
        )

    @property
    def phase(self) -> complex:
        return complex(_PHASES[self.phase_exp])

    @property
    def key(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    def index_masks(self) -> tuple[int, int]:
        """Masks in amplitude-index bit order (qubit 0 = most significant bit)."""
        return _reverse_bits(self.x_mask, self.n_qubits), _reverse_bits(
            self.z_mask, self.n_qubits
        )

    def restrict(self, domain: Sequence[int]) -> "PauliString":
        """Re-express on ``len(domain)`` qubits; local qubit k is ``domain[k]``."""
        dom_mask = sum(1 << q for q in domain)
        if (self.x_mask | self.z_mask) & ~dom_mask:
            raise ValueError(f"{self.to_label()} is not supported on {list(domain)}")
        x = z = 0
        for k, q in enumerate(domain):
            x |= ((self.x_mask >> q) & 1) << k
            z |= ((self.z_mask >> q) & 1) << k
        return PauliString(x, z, len(domain), self.phase_exp)

    def embed(self, domain: Sequence[int], n_qubits: int) -> "PauliString":
        """Inverse of :meth:`restrict`."""
        if len(domain) != self.n_qubits:
            raise ValueError("domain length does not match string size")
        x = z = 0
        for k, q in enumerate(domain):
            x |= ((self.x_mask >> k) & 1) << q
            z |= ((self.z_mask >> k) & 1) << q
        return PauliString(x, z, n_qubits, self.phase_exp)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        prefix = ("", "i", "-", "-i")[self.phase_exp]
        return prefix + self.to_label()


def _reverse_bits(v: int, n: int) -> int:
    out = 0
    for q in range(n):
        if (v >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p @ q`` with the phase folded into ``phase_exp``.

    Writing each literal factor as ``i**(x*z) X**x Z**z`` and commuting
    ``Z**z1`` past ``X**x2`` gives the phase
    ``xz(p) + xz(q) + 2*|z_p & x_q| - xz(r)`` (mod 4).
    """
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"qubit count mismatch: {p.n_qubits} vs {q.n_qubits}")
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    phase = (
        p.phase_exp
        + q.phase_exp
        + _popcount(p.x_mask & p.z_mask)
        + _popcount(q.x_mask & q.z_mask)
        + 2 * _popcount(p.z_mask & q.x_mask)
        - _popcount(x & z)
    )
    return PauliString(x, z, p.n_qubits, phase)


def product_table(
    x: np.ndarray, z: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All pairwise products of phase-free strings given as mask arrays.

    Vectorised form of :func:`pauli_mul`.  Returns ``(x_prod, z_prod, phase)``
    as ``(K, K)`` arrays so that ``sigma_I sigma_J = i**phase[I, J] *
    sigma(x_prod[I, J], z_prod[I, J])``.
    """
    # Keeps the caller's integer dtype so small local masks stay compact.
    x = np.asarray(x)
    z = np.asarray(z)
    xp = x[:, None] ^ x[None, :]
    zp = z[:, None] ^ z[None, :]
    own = np.bitwise_count(x & z).astype(np.int16)
    phase = own[:, None] + own[None, :]
    phase += 2 * np.bitwise_count(z[:, None] & x[None, :]).astype(np.int16)
    phase -= np.bitwise_count(xp & zp)
    return xp, zp, (phase % 4).astype(np.int8)


def enumerate_strings(
    domain: Sequence[int], n_qubits: int, include_identity: bool = True
) -> list[PauliString]:
    """Every string supported on ``domain``, identity elsewhere.

    Order is lexicographic over the per-qubit symbols with I < X < Y < Z and
    ``domain[0]`` as the most significant position.
    """
    domain = list(domain)
    if not domain:
        raise ValueError("domain must not be empty")
    if len(set(domain)) != len(domain):
        raise ValueError(f"duplicate qubit indices in domain {domain}")
    if any(q < 0 or q >= n_qubits for q in domain):
        raise ValueError(f"domain {domain} out of range for {n_qubits} qubits")
    out = []
    for word in itertools.product("IXYZ", repeat=len(domain)):
        if not include_identity and all(s == "I" for s in word):
            continue
        x = z = 0
        for q, s in zip(domain, word):
            bx, bz = _SYMBOL_BITS[s]
            x |= bx << q
            z |= bz << q
        out.append(PauliString(x, z, n_qubits))
    return out


class PauliSum:
    """Linear combination of Pauli strings with merged, phase-free terms.

    Phases of incoming strings are folded into their coefficients, duplicate
    strings are merged and exact zeros dropped.  With ``hermitian=True`` the
    coefficients must be real within ``1e-12`` and are stored as floats.
    """

    HERMITIAN_TOL = 1e-12

    def __init__(
        self,
        n_qubits: int,
        terms: Iterable[tuple[complex, PauliString]] = (),
        hermitian: bool = False,
    ):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self.hermitian = hermitian
        merged: dict[tuple[int, int], complex] = {}
        for coeff, p in terms:
            if p.n_qubits != n_qubits:
                raise ValueError(
                    f"term {p} has {p.n_qubits} qubits, expected {n_qubits}"
                )
            merged[p.key] = merged.get(p.key, 0.0) + complex(coeff) * p.phase
        self._terms: dict[tuple[int, int], complex] = {}
        for key, c in merged.items():
            if c == 0:
                continue
            if hermitian:
                if abs(c.imag) > self.HERMITIAN_TOL:
                    raise ValueError(
                        f"non-real coefficient {c} on "
                        f"{PauliString(*key, n_qubits).to_label()} in hermitian sum"
                    )
                c = c.real
            self._terms[key] = c

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[complex, str]], hermitian: bool = True
    ) -> "PauliSum":
        """Convenience constructor from ``(coefficient, label)`` pairs."""
        terms = [(c, PauliString.from_label(w)) for c, w in terms]
        if not terms:
            raise ValueError("need at least one term to infer the qubit count")
        return cls(terms[0][1].n_qubits, terms, hermitian=hermitian)

    def terms(self) -> list[tuple[complex, PauliString]]:
        return [
            (c, PauliString(x, z, self.n_qubits)) for (x, z), c in self._terms.items()
        ]

    def coefficient(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return self._terms.get(p.key, 0.0) * np.conj(p.phase)

    def canonical(self) -> "PauliSum":
        return PauliSum(self.n_qubits, self.terms(), hermitian=self.hermitian)

    @property
    def support(self) -> tuple[int, ...]:
        m = 0
        for x, z in self._terms:
            m |= x | z
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    def restrict(self, domain: Sequence[int]) -> "PauliSum":
        return PauliSum(
            len(domain),
            [(c, p.restrict(domain)) for c, p in self.terms()],
            hermitian=self.hermitian,
        )

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum(
            self.n_qubits,
            self.terms() + other.terms(),
            hermitian=self.hermitian and other.hermitian,
        )

    def __mul__(self, scalar) -> "PauliSum":
        scalar = complex(scalar)
        herm = self.hermitian and scalar.imag == 0
        return PauliSum(
            self.n_qubits, [(c * scalar, p) for c, p in self.terms()], hermitian=herm
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{p.to_label()}" for c, p in self.terms())
        return f"PauliSum({self.n_qubits}, {body or '0'})"


def _string_matrix(p: PauliString) -> np.ndarray:
    n = p.n_qubits
    dim = 1 << n
    xi, zi = p.index_masks()
    rows = np.arange(dim, dtype=np.int64)
    cols = rows ^ xi
    signs = parity_signs(cols & zi)
    m = np.zeros((dim, dim), dtype=complex)
    m[rows, cols] = _PHASES[(p.phase_exp + _popcount(p.x_mask & p.z_mask)) % 4] * signs
    return m


def pauli_to_matrix(op: PauliString | PauliSum) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a string or sum (``n <= 12``)."""
    if op.n_qubits > MAX_MATRIX_QUBITS:
        raise ValueError(
            f"refusing to build a dense matrix on {op.n_qubits} qubits "
            f"(limit {MAX_MATRIX_QUBITS})"
        )
    if isinstance(op, PauliString):
        return _string_matrix(op)
    dim = 1 << op.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    for c, p in op.terms():
        m += c * _string_matrix(p)
    return m


def local_sum_matrix(coeffs: np.ndarray, x: np.ndarray, z: np.ndarray, n: int):
    """Dense matrix of ``sum_k coeffs[k] * sigma(x[k], z[k])`` on ``n`` qubits.

    Masks use the qubit-bit convention of :class:`PauliString` and the
    strings are phase free.  Vectorised over terms; used to assemble the QITE
    generator on a domain.
    """
    if n > MAX_MATRIX_QUBITS:
        raise ValueError(f"refusing to build a dense matrix on {n} qubits")
    dim = 1 << n
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    xi = reverse_bits_array(x, n)
    zi = reverse_bits_array(z, n)
    rows = np.arange(dim, dtype=np.int64)
    cols = rows[None, :] ^ xi[:, None]
    signs = parity_signs(cols & zi[:, None])
    vals = (
        np.asarray(coeffs)[:, None]
        * _PHASES[np.bitwise_count(x & z) % 4][:, None]
        * signs
    )
    m = np.zeros((dim, dim), dtype=complex)
    np.add.at(m, (np.broadcast_to(rows, cols.shape), cols), vals)
    return m


def parity_signs(v: np.ndarray) -> np.ndarray:
    """``(-1)**popcount(v)`` elementwise, as floats."""
    return np.where(np.bitwise_count(v) & 1, -1.0, 1.0)


def reverse_bits_array(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros_like(v)
    for q in range(n):
        out |= ((v >> q) & 1) << (n - 1 - q)
    return out
