import numpy as np
import pytest

from qitekit.model import TfimParams, build_tfim
from qitekit.pauli import PauliString, PauliSum, enumerate_strings
from qitekit.statevec import (
    StateVector,
    apply_dense_on_domain,
    apply_pauli,
    apply_sum,
    dump_amplitudes,
    expectation,
    fidelity,
    init_basis_state,
    inner,
    load_amplitudes,
    normalize,
    pauli_overlaps,
)

from conftest import kron_label, kron_sum, random_state

S2 = 1 / np.sqrt(2)


def sv(*amps):
    return StateVector.from_array(np.array(amps, dtype=complex))


def test_basis_states():
    np.testing.assert_array_equal(init_basis_state(1, "0").amplitudes, [1, 0])
    e0 = init_basis_state(8, "00000000")
    assert len(e0) == 256 and e0.amplitudes[0] == 1 and e0.norm() == 1
    np.testing.assert_array_equal(init_basis_state(2, "01").amplitudes, [0, 1, 0, 0])


def test_basis_state_guards():
    with pytest.raises(ValueError):
        init_basis_state(25)
    with pytest.raises(ValueError):
        init_basis_state(2, "011")


def test_single_qubit_paulis():
    zero = init_basis_state(1)
    np.testing.assert_allclose(apply_pauli(zero, PauliString.from_label("X")).amplitudes, [0, 1])
    np.testing.assert_allclose(apply_pauli(zero, PauliString.from_label("Y")).amplitudes, [0, 1j])
    plus = sv(S2, S2)
    np.testing.assert_allclose(
        apply_pauli(plus, PauliString.from_label("Z")).amplitudes, [S2, -S2]
    )


def test_inner_examples():
    psi = sv(S2, 1j * S2)
    assert inner(psi, psi) == pytest.approx(1.0)
    assert inner(init_basis_state(1, "0"), init_basis_state(1, "1")) == 0
    assert inner(init_basis_state(1, "0"), psi) == pytest.approx(S2)
    # conjugate-linear in the bra
    assert inner(psi, init_basis_state(1, "1")) == pytest.approx(-1j * S2)


def test_expectation_examples():
    assert expectation(init_basis_state(1), PauliString.from_label("Z")) == 1
    assert expectation(sv(S2, S2), PauliString.from_label("X")) == pytest.approx(1)
    h = build_tfim(TfimParams(2, 1.0, 1.0))
    assert expectation(init_basis_state(2), h) == pytest.approx(-1.0, abs=1e-15)


def test_dense_domain_examples(rng):
    psi = random_state(rng, 3)
    out = apply_dense_on_domain(psi, np.eye(4), [2, 0])
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes)
    flipped = apply_dense_on_domain(init_basis_state(2), kron_label("X"), [1])
    np.testing.assert_allclose(flipped.amplitudes, init_basis_state(2, "01").amplitudes)


def _random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _perm_oracle(m, domain, n):
    """Full-space matrix of ``m`` on ``domain`` built entry by entry."""
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in domain]
    bit = lambda i, q: (i >> (n - 1 - q)) & 1
    for r in range(dim):
        for c in range(dim):
            if any(bit(r, q) != bit(c, q) for q in rest):
                continue
            rl = int("".join(str(bit(r, q)) for q in domain), 2)
            cl = int("".join(str(bit(c, q)) for q in domain), 2)
            full[r, c] = m[rl, cl]
    return full


def test_dense_domain_matches_kron(rng):
    u = _random_unitary(rng, 4)
    psi = random_state(rng, 3)
    out = apply_dense_on_domain(psi, u, [0, 1])
    np.testing.assert_allclose(out.amplitudes, np.kron(u, np.eye(2)) @ psi.amplitudes, atol=1e-12)
    # non-contiguous and reversed domains
    for domain in ([2, 0], [1, 2], [2, 1]):
        out = apply_dense_on_domain(psi, u, domain)
        ref = _perm_oracle(u, domain, 3) @ psi.amplitudes
        np.testing.assert_allclose(out.amplitudes, ref, atol=1e-12)


def test_dense_domain_preserves_inner_products(rng):
    u = _random_unitary(rng, 8)
    a, b = random_state(rng, 5), random_state(rng, 5)
    ua = apply_dense_on_domain(a, u, [4, 1, 2])
    ub = apply_dense_on_domain(b, u, [4, 1, 2])
    assert abs(ua.norm() - 1) < 1e-10
    assert abs(inner(ua, ub) - inner(a, b)) < 1e-10


def test_dense_domain_errors(rng):
    psi = random_state(rng, 2)
    with pytest.raises(ValueError):
        apply_dense_on_domain(psi, np.eye(2), [2])
    with pytest.raises(ValueError):
        apply_dense_on_domain(psi, np.eye(2), [0, 1])


def test_normalize_examples():
    out, nrm = normalize(sv(2, 0))
    np.testing.assert_allclose(out.amplitudes, [1, 0])
    assert nrm == 2.0
    out, nrm = normalize(sv(1, 1))
    np.testing.assert_allclose(out.amplitudes, [S2, S2])
    assert nrm == pytest.approx(np.sqrt(2))
    unit = init_basis_state(1)
    assert normalize(unit)[1] == 1.0
    with pytest.raises(ValueError):
        normalize(sv(0, 0))


def test_fidelity_examples():
    zero, one = init_basis_state(1, "0"), init_basis_state(1, "1")
    assert fidelity(zero, [zero]) == pytest.approx(1.0)
    assert fidelity(zero, [one]) == 0.0
    assert fidelity(zero, [sv(S2, S2)]) == pytest.approx(0.5)
    assert fidelity(sv(S2, S2), [zero, one]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fidelity(zero, [zero, zero])


def test_dense_oracle_agreement_small(rng):
    for n in (1, 2, 3):
        psi = random_state(rng, n)
        for p in enumerate_strings(range(n), n):
            ref = kron_label(p.to_label()) @ psi.amplitudes
            np.testing.assert_allclose(apply_pauli(psi, p).amplitudes, ref, atol=1e-12)
            # Hermitian strings are involutions
            twice = apply_pauli(apply_pauli(psi, p), p)
            np.testing.assert_allclose(twice.amplitudes, psi.amplitudes, atol=1e-12)
        h = PauliSum(n, [(rng.normal(), p) for p in enumerate_strings(range(n), n)],
                     hermitian=True)
        ref = psi.amplitudes.conj() @ kron_sum(h) @ psi.amplitudes
        assert abs(expectation(psi, h) - ref) < 1e-12
        np.testing.assert_allclose(
            apply_sum(psi, h).amplitudes, kron_sum(h) @ psi.amplitudes, atol=1e-12
        )


def test_expectation_global_phase_invariant(rng):
    psi = random_state(rng, 4)
    h = build_tfim(TfimParams(4, 0.3, 1.7))
    rotated = StateVector(np.exp(1j * rng.uniform(0, 2 * np.pi)) * psi.amplitudes, 4)
    assert abs(expectation(psi, h) - expectation(rotated, h)) < 1e-12
    assert abs(expectation(psi, h).imag) == 0


def test_pauli_overlaps_batch(rng):
    a, b = random_state(rng, 3), random_state(rng, 3)
    strings = enumerate_strings(range(3), 3)
    got = pauli_overlaps(a, b, [p.x_mask for p in strings], [p.z_mask for p in strings],
                         chunk=16)
    ref = [a.amplitudes.conj() @ kron_label(p.to_label()) @ b.amplitudes for p in strings]
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_amplitude_dump_round_trip(tmp_path, rng):
    psi = random_state(rng, 3)
    dump_amplitudes(psi, tmp_path / "psi.bin")
    raw = np.fromfile(tmp_path / "psi.bin", dtype="<f8")
    np.testing.assert_array_equal(raw[0::2], psi.amplitudes.real)
    np.testing.assert_array_equal(load_amplitudes(tmp_path / "psi.bin").amplitudes, psi.amplitudes)
