import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakzq import hermitian as H


def test_diagonal_sorted():
    w, v = H.eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_pauli_x():
    w, v = H.eigh([[0, 1], [1, 0]])
    assert np.allclose(w, [-1, 1], atol=1e-15)


def test_phase_fixed_eigenvectors():
    rng = np.random.default_rng(3)
    _, v = H.eigh(H.random_hermitian(rng, 4))
    for k in range(4):
        first = v[np.flatnonzero(np.abs(v[:, k]) > 1e-12)[0], k]
        assert abs(first.imag) < 1e-15 and first.real > 0


def test_hermitize_symmetrizes():
    m = np.array([[1, 2 + 1e-15j], [2, 3]])
    h = H.hermitize(m)
    assert np.allclose(h, h.conj().T, atol=0)


def test_rejects_nonsquare():
    with pytest.raises(ValueError):
        H.eigh(np.zeros((2, 3)))


def test_reconstruction_bulk():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        m = H.random_hermitian(rng, n, scale=float(rng.uniform(0.1, 10)))
        w, v = H.eigh(m)
        assert H.reconstruction_error(m, w, v) <= 1e-10 * (1 + np.linalg.norm(m))
        assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
        assert np.all(np.diff(w) >= 0)


@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_matches_lapack(seed, n):
    m = H.random_hermitian(np.random.default_rng(seed), n)
    assert np.allclose(H.eigvalsh(m), np.linalg.eigvalsh(m), atol=1e-12)


@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_trace_and_det_identities(seed, n):
    m = H.random_hermitian(np.random.default_rng(seed), n)
    w = H.eigvalsh(m)
    assert abs(H.trace(m) - w.sum()) <= 1e-10 * (1 + np.abs(w).sum())
    assert abs(H.det(m) - np.prod(w)) <= 1e-8 * max(1e-300, abs(np.prod(w))) + 1e-13


def test_degenerate_spectrum():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    m = q @ np.diag([1.0, 1.0, 2.0, 2.0]) @ q.conj().T
    w, v = H.eigh(m)
    assert np.allclose(w, [1, 1, 2, 2], atol=1e-13)
    assert H.reconstruction_error(m, w, v) < 1e-13


def test_range_01_zero_matrix():
    ok, margin = H.is_range_01(np.zeros((3, 3)))
    assert ok and margin == 0


def test_range_01_projection():
    v = np.array([1, 1j, 0]) / np.sqrt(2)
    p = np.outer(np.conj(v), v)
    ok, margin = H.is_range_01(p)
    assert ok
    assert np.allclose(H.eigvalsh(p), [0, 0, 1], atol=1e-15)


def test_range_01_rejects():
    assert not H.is_range_01(np.diag([-0.1, 0.5]))[0]
    assert not H.is_range_01(np.diag([0.5, 1.1]))[0]
    assert H.is_range_01(np.diag([-1e-9, 1 + 1e-9]))[0]


def test_psd():
    assert H.is_psd(np.diag([0.0, 2.0]))[0]
    assert not H.is_psd(np.diag([-1e-6, 2.0]))[0]


def test_invert_identity():
    assert np.allclose(H.invert(np.eye(3)), np.eye(3))


def test_invert_random_pd():
    rng = np.random.default_rng(7)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = g @ g.conj().T + 0.1 * np.eye(4)
    assert np.allclose(m @ H.invert(m), np.eye(4), atol=1e-10)


def test_invert_singular():
    with pytest.raises(H.SingularMatrixError):
        H.invert(np.diag([1.0, 0.0]))
