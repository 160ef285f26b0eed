"""Small dense Hermitian linear algebra.

Eigenvalues come from cyclic complex Jacobi rotations; the matrices in this
package are at most 6x6 so the O(n^3) sweep cost is irrelevant and the
method's accuracy on tiny eigenvalues is an advantage.
"""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    pass


class SingularMatrixError(ValueError):
    pass


def hermitize(m) -> np.ndarray:
    """Return (m + m*)/2 as a complex array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.conj().T)


def eigh(m, tol: float = 1e-15, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(w, V)`` with ``w`` ascending and ``V`` unitary such that
    ``m @ V == V @ diag(w)``.  Each eigenvector is phase-fixed so its first
    non-negligible component is real and positive.
    """
    a = hermitize(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n > 1 and scale > 0:
        for _ in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off <= tol * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    _rotate(a, v, p, q, scale)
        else:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for k in range(n):
        col = v[:, k]
        big = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if big.size:
            ph = col[big[0]] / abs(col[big[0]])
            v[:, k] = col / ph
    return w, v


def _rotate(a, v, p, q, scale):
    apq = a[p, q]
    mag = abs(apq)
    if mag <= 1e-300 or mag <= 1e-18 * scale:
        a[p, q] = a[q, p] = 0.0
        return
    phase = apq / mag
    app, aqq = a[p, p].real, a[q, q].real
    theta = (aqq - app) / (2.0 * mag)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # phase to make a[p,q] real, then a real rotation
    j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
    idx = [p, q]
    a[:, idx] = a[:, idx] @ j
    a[idx, :] = j.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ j


def eigvalsh(m) -> np.ndarray:
    return eigh(m)[0]


def is_range_01(m, tol: float = 1e-8) -> tuple[bool, float]:
    """Whether all eigenvalues lie in [0, 1] up to ``tol``; margin is min(l_min, 1 - l_max)."""
    w = eigvalsh(m)
    margin = float(min(w[0], 1.0 - w[-1]))
    return bool(margin >= -tol), margin


def is_psd(m, tol: float = 1e-10) -> tuple[bool, float]:
    w = eigvalsh(m)
    return bool(w[0] >= -tol), float(w[0])


def trace(m) -> float:
    return float(np.trace(hermitize(m)).real)


def det(m) -> complex:
    return complex(np.linalg.det(np.asarray(m, dtype=complex)))


def invert(m, min_det: float = 1e-12) -> np.ndarray:
    """Inverse of a square matrix with an explicit singularity guard."""
    m = np.asarray(m, dtype=complex)
    d = det(m)
    if abs(d) <= min_det:
        raise SingularMatrixError(f"|det| = {abs(d):.3e} <= {min_det:g}")
    return np.linalg.inv(m)


def reconstruction_error(m, w, v) -> float:
    m = hermitize(m)
    return float(np.linalg.norm(v @ np.diag(w) @ v.conj().T - m))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * hermitize(g)
