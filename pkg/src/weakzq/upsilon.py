"""Hermitian matrix fields used in weak Z(q) certification.

Convention: a field value ``Y`` is an n x n matrix with ``Y[k, j]`` the
coefficient Upsilon^{conj(k) j}.  Tangency reads ``Y @ grad == 0`` and the
contraction against the complex Hessian ``H[j, k] = rho_{j conj(k)}`` is
``trace(Y @ H)``.  In an orthonormal frame with tangent rows ``F`` the same
field has frame matrix ``F @ Y @ F^*``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import domain as dom
from . import hermitian

Evaluator = Callable[[np.ndarray], np.ndarray]


class FieldDomainError(ValueError):
    """Field evaluated outside its region of definition."""


def _always(z) -> bool:
    return True


@dataclass(frozen=True)
class HermitianField:
    evaluator: Evaluator
    label: str
    n: int
    valid: Callable[[np.ndarray], bool] = _always

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ValueError(f"expected a point in C^{self.n}, got shape {z.shape}")
        if not self.valid(z):
            raise FieldDomainError(f"{self.label} is not defined at {z}")
        return hermitian.hermitize(self.evaluator(z))

    def frame_matrix(self, z, tangents: np.ndarray) -> np.ndarray:
        return hermitian.hermitize(tangents @ self(z) @ tangents.conj().T)


def frame_to_ambient(y_frame: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    return tangents.conj().T @ y_frame @ tangents


def chi(t):
    """Smooth step: 0 for t <= 0, 1 for t >= 1, and chi(t) + chi(1 - t) = 1."""
    t = np.asarray(t, dtype=float)

    def h(s):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)

    a, b = h(t), h(1.0 - t)
    out = a / (a + b)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# simple fields


def upsilon_zero(n: int) -> HermitianField:
    return HermitianField(lambda z: np.zeros((n, n), dtype=complex), "zero", n)


def upsilon_quadric(n: int, p: int) -> HermitianField:
    """Projection delta_jk - conj(z_k) z_j / |z|_-^2 on the coordinates p+1..n."""
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")

    def ev(z):
        w = z[p:]
        m = float(np.sum(abs(w) ** 2))
        y = np.zeros((n, n), dtype=complex)
        y[p:, p:] = np.eye(n - p) - np.outer(np.conj(w), w) / m
        return y

    def valid(z):
        return float(np.sum(abs(z[p:]) ** 2)) > 0

    return HermitianField(ev, f"quadric_projection({n},{p})", n, valid)


# ---------------------------------------------------------------------------
# the corrected graph domain in C^3


def lam(y):
    """1 - (150 y^2 - 100) / (y^10 + 100 y^8)."""
    y = np.asarray(y, dtype=float)
    return 1.0 - (150 * y**2 - 100) / (y**10 + 100 * y**8)


def graph_partials(spec: dom.DomainSpec, z):
    """(rho_1, rho_2, |d rho|) for a graph over z3."""
    g = spec.grad_at(z)
    r1, r2 = complex(g[0]), complex(g[1])
    D = float(np.sqrt(1 + 4 * abs(r1) ** 2 + 4 * abs(r2) ** 2))
    return r1, r2, D


def upsilon1_block(r1: complex, r2: complex, D: float, lam_value: float) -> np.ndarray:
    return (4 * lam_value / D**2) * np.array([[abs(r2) ** 2, -r1 * np.conj(r2)],
                                              [-np.conj(r1) * r2, abs(r1) ** 2]])


def upsilon1(spec: dom.DomainSpec, Y1: float) -> HermitianField:
    """Rank-one field 4 lam |d rho|^-2 [[|r2|^2, -r1 r2*], [-r1* r2, |r1|^2]] in the z1, z2 block."""
    _check_c3_graph(spec)

    def ev(z):
        y = z[0].imag
        lv = float(lam(y))
        if not 0 < lv < 1:
            raise FieldDomainError(f"lambda = {lv:.6g} outside (0, 1) at Im z1 = {y:g}")
        r1, r2, D = graph_partials(spec, z)
        out = np.zeros((3, 3), dtype=complex)
        out[:2, :2] = upsilon1_block(r1, r2, D, lv)
        return out

    def valid(z):
        return abs(z[0].imag) >= Y1

    return HermitianField(ev, f"upsilon1(Y1={Y1:g})", 3, valid)


def frame_block(r1: complex, r2: complex, D: float) -> np.ndarray:
    """The 2x2 matrix U of z1, z2 components of the tangent frame."""
    w = np.array([np.conj(r2), -np.conj(r1)])
    return (np.eye(2) + 4 * np.outer(w, np.conj(w)) / (D + 1)) / D


def frame_block_inverse(r1: complex, r2: complex, D: float) -> np.ndarray:
    """U^-1 = D (I - P_w) + P_w, from the spectral form of U (eigenvalues 1/D and 1)."""
    w = np.array([np.conj(r2), -np.conj(r1)])
    w2 = float(np.sum(abs(w) ** 2))
    if w2 == 0:
        return D * np.eye(2, dtype=complex)
    P = np.outer(w, np.conj(w)) / w2
    return D * (np.eye(2) - P) + P


def upsilon2_frame(r1: complex, r2: complex, D: float, y: float, method: str = "closed") -> np.ndarray:
    """I - c^-1 U^-1 diag(2, 3y^2) U^-1 with c = 2(1+4|r1|^2) + 3y^2(1+4|r2|^2)."""
    if method == "closed":
        Ui = frame_block_inverse(r1, r2, D)
    elif method == "invert":
        Ui = hermitian.invert(frame_block(r1, r2, D))
    else:
        raise ValueError(f"unknown method {method!r}")
    c = 2 * (1 + 4 * abs(r1) ** 2) + 3 * y**2 * (1 + 4 * abs(r2) ** 2)
    return np.eye(2) - Ui @ np.diag([2.0, 3 * y**2]) @ Ui / c


def upsilon2(spec: dom.DomainSpec, method: str = "closed") -> HermitianField:
    """Trace-one field built in the closed-form frame and lifted to ambient coordinates."""
    _check_c3_graph(spec)

    def ev(z):
        g = spec.grad_at(z)
        r1, r2 = complex(g[0]), complex(g[1])
        D = float(np.sqrt(1 + 4 * abs(r1) ** 2 + 4 * abs(r2) ** 2))
        tangents = dom.graph_frame_c3(g)[:2]
        return frame_to_ambient(upsilon2_frame(r1, r2, D, z[0].imag, method), tangents)

    return HermitianField(ev, f"upsilon2({method})", 3)


@dataclass(frozen=True)
class PatchParams:
    R0: float = 3.0
    R1: float = 6.0
    R2: float = 6.0
    Y1: float = 15.0
    Y2: float = 30.0

    def validate(self):
        if not (self.R2 == self.R1 > self.R0 > 0 and self.Y2 > self.Y1 > 0):
            raise ValueError(f"need R2 = R1 > R0 > 0 and Y2 > Y1 > 0, got {self}")


def patch_weights(z, pp: PatchParams) -> tuple[float, float]:
    """Cutoff weights multiplying upsilon1 and upsilon2."""
    y2 = z[0].imag ** 2
    r2 = z[0].real ** 2 + abs(z[1]) ** 2
    s = (y2 - pp.Y1**2) / (pp.Y2**2 - pp.Y1**2)
    w1 = chi(s) * chi((pp.R1**2 - r2) / (pp.R1**2 - pp.R0**2))
    w2 = chi(1.0 - s) * chi((pp.R2**2 - r2) / (pp.R2**2 - pp.R0**2))
    return float(w1), float(w2)


def upsilon_patched(spec: dom.DomainSpec, params: PatchParams | None = None) -> HermitianField:
    params = params or PatchParams()
    params.validate()
    f1, f2 = upsilon1(spec, params.Y1), upsilon2(spec)

    def ev(z):
        w1, w2 = patch_weights(z, params)
        out = np.zeros((3, 3), dtype=complex)
        if w1 > 0:
            out += w1 * f1.evaluator(z)
        if w2 > 0:
            out += w2 * f2.evaluator(z)
        return out

    return HermitianField(ev, f"patched({params})", 3)


def _check_c3_graph(spec: dom.DomainSpec):
    if spec.n != 3 or spec.graph_var != 2:
        raise ValueError("construction needs a graph domain over z3 in C^3")


# ---------------------------------------------------------------------------
# choosing Y1


def lambda_bracket_ok(y) -> np.ndarray:
    """100 y^-8 < 1 - lambda < 200 y^-8."""
    y = np.asarray(y, dtype=float)
    gap = 1.0 - lam(y)
    return (100 * y**-8.0 < gap) & (gap < 200 * y**-8.0)


def _levi_trace_margin(spec, field, z) -> float:
    bp = dom.frame_at(spec, z)
    yf = field.frame_matrix(z, bp.tangents)
    return float(np.sum(bp.mu[:2]) - np.trace(yf @ bp.levi).real)


@lru_cache(maxsize=8)
def choose_Y1(R1: float = 6.0, start: int = 2, stop: int = 200, tol: float = 1e-8,
              n_y: int = 40, n_r: int = 5) -> int:
    """Smallest integer Y1 with the lambda bracket on [Y1, 10 Y1] and c_ii(upsilon1) >= -tol.

    The positivity check runs on a grid with x^2 + |z2|^2 <= R1^2 and
    Y1 <= |y| <= 10 Y1, on both signs of y.
    """
    spec = dom.prop52()
    for Y1 in range(start, stop + 1):
        ys = np.linspace(Y1, 10 * Y1, 4 * n_y)
        if not lambda_bracket_ok(ys).all():
            continue
        f1 = upsilon1(spec, Y1)
        ok = True
        rs = np.linspace(-R1, R1, n_r)
        for y in np.concatenate([np.linspace(Y1, 10 * Y1, n_y), -np.linspace(Y1, 10 * Y1, n_y // 3)]):
            for x, a, b in itertools.product(rs, rs, rs):
                if x * x + a * a + b * b > R1**2:
                    continue
                z = np.array([x + 1j * y, a + 1j * b, 0.0])
                z[2] = 1j * spec.rho_at(z)
                if _levi_trace_margin(spec, f1, z) < -tol:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return Y1
    raise RuntimeError(f"no admissible Y1 in [{start}, {stop}]")


def default_patch_params(R0: float = 3.0) -> PatchParams:
    R1 = 2 * R0
    Y1 = float(choose_Y1(R1))
    return PatchParams(R0=R0, R1=R1, R2=R1, Y1=Y1, Y2=2 * Y1)


# ---------------------------------------------------------------------------
# extension off the boundary


SIGN_CASES = ("q_minus_trace_positive", "q_minus_trace_negative")


def extend_upsilon(field: HermitianField, spec: dom.DomainSpec, eps: float,
                   sign_case: str = "q_minus_trace_positive") -> HermitianField:
    """psi(p) Y(pi(p)), plus (1 - psi(p)) I when q - trace < 0.

    pi is the foot-point projection and psi = 1 within distance eps of the
    boundary, 0 beyond 2 eps.
    """
    if sign_case not in SIGN_CASES:
        raise ValueError(f"sign_case must be one of {SIGN_CASES}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = field.n
    add_identity = sign_case == "q_minus_trace_negative"

    def ev(p):
        delta, foot, _ = dom.signed_distance(spec, p)
        psi = float(chi((2 * eps - abs(delta)) / eps))
        out = psi * field(foot) if psi > 0 else np.zeros((n, n), dtype=complex)
        if add_identity:
            out = out + (1 - psi) * np.eye(n)
        return out

    return HermitianField(ev, f"extended({field.label}, eps={eps:g}, {sign_case})", n)


def extended_gradient(spec: dom.DomainSpec, p) -> np.ndarray:
    """Complex gradient d(delta)/dz_j of the signed distance at p."""
    _, _, nu = dom.signed_distance(spec, p)
    return np.conj(nu) / 2
