import numpy as np
import pytest
from scipy.linalg import expm

from qitekit.numerics import eigh_smallest, finite_diff, hermitian_expm, lstsq_psd

from conftest import kron_label, tfim_dense

X = kron_label("X")
Z = kron_label("Z")


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def test_expm_examples():
    np.testing.assert_allclose(hermitian_expm(X, 0.0), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(hermitian_expm(X, -1j * np.pi / 2), -1j * X, atol=1e-15)
    out = hermitian_expm(Z, -0.25) @ np.array([1, 0])
    np.testing.assert_allclose(out / np.linalg.norm(out), [1, 0])


def test_expm_against_scipy(rng):
    h = random_hermitian(rng, 16)
    for scale in (-0.3, -0.3j, 0.7 + 0.2j):
        np.testing.assert_allclose(hermitian_expm(h, scale), expm(scale * h), atol=1e-11)


def test_expm_unitary_and_positive(rng):
    h = random_hermitian(rng, 32)
    u = hermitian_expm(h, -0.25j)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(32), atol=1e-10)
    p = hermitian_expm(h, -0.25)
    np.testing.assert_allclose(p, p.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(p).min() > 0


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_expm(np.array([[0, 1], [0, 0]]), 1.0)


def test_lstsq_examples():
    b = np.array([0.3, -2.0, 5.0])
    np.testing.assert_allclose(lstsq_psd(np.eye(3), b), b)
    np.testing.assert_array_equal(lstsq_psd(np.zeros((3, 3)), b), np.zeros(3))
    x = lstsq_psd(np.diag([1.0, 1e-12]), np.array([1.0, 1.0]), rcond=1e-8)
    np.testing.assert_allclose(x, [1.0, 0.0])


def test_lstsq_matches_pinv(rng):
    a = rng.normal(size=(6, 3))
    a = a @ a.T
    b = rng.normal(size=6)
    np.testing.assert_allclose(lstsq_psd(a, b), np.linalg.pinv(a, rcond=1e-8) @ b, atol=1e-10)


def test_lstsq_residual_is_minimal(rng):
    a = rng.normal(size=(8, 4))
    a = a @ a.T
    b = rng.normal(size=8)
    best = np.linalg.norm(a @ lstsq_psd(a, b) - b)
    assert best <= np.linalg.norm(b) + 1e-12
    for _ in range(10):
        assert best <= np.linalg.norm(a @ rng.normal(size=8) - b) + 1e-12


def test_lstsq_errors():
    with pytest.raises(ValueError):
        lstsq_psd(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        lstsq_psd(np.eye(2), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        lstsq_psd(np.eye(2), np.ones(2), rcond=1.5)


def test_eigh_examples():
    w, v = eigh_smallest(Z)
    np.testing.assert_allclose(w, [-1, 1])
    w, _ = eigh_smallest(tfim_dense(2))
    assert w[0] == pytest.approx(-2.2360680, abs=1e-7)
    w, _ = eigh_smallest(tfim_dense(8, 1.0, 0.0))
    assert w[0] == pytest.approx(-7.0)
    assert w[1] == pytest.approx(-7.0)
    assert w[2] > -7.0 + 1.0


def test_eigh_reconstruction(rng):
    h = random_hermitian(rng, 64)
    w, vecs = eigh_smallest(h)
    q = np.array(vecs).T
    assert np.max(np.abs(q @ np.diag(w) @ q.conj().T - h)) <= 1e-9
    np.testing.assert_allclose(q.conj().T @ q, np.eye(64), atol=1e-10)
    assert np.all(np.diff(w) >= 0)


def test_finite_diff_examples():
    assert finite_diff(lambda x: x[0] ** 2, [3.0], 1e-4)[0] == pytest.approx(6.0, abs=1e-6)
    np.testing.assert_array_equal(finite_diff(lambda x: 4.0, [1.0, 2.0]), [0.0, 0.0])
    d = finite_diff(lambda t: np.cos(t[0]), [np.pi / 3], 1e-4)[0]
    assert d == pytest.approx(-np.sin(np.pi / 3), abs=1e-6)
    with pytest.raises(ValueError):
        finite_diff(lambda x: np.inf, [0.0])
    with pytest.raises(ValueError):
        finite_diff(lambda x: 0.0, [0.0], eps=0)
