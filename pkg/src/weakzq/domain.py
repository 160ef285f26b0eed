"""Boundary geometry of domains {rho < 0} with polynomial defining functions."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import hermitian
from .wirtinger import PolyRC, complex_hessian, d_z, evaluate, from_real_poly, gradient, magnitude

NORMALIZATIONS = ("raw", "unit_gradient")
BOUNDARY_TOL = 1e-9
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class DegenerateBoundaryError(ValueError):
    pass


class FootPointError(RuntimeError):
    pass


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """Domain {rho < 0} in C^n.

    ``graph_var`` marks a boundary written as a graph,
    ``rho = -Im z_g + (terms free of z_g)``; it is verified on construction.
    """

    rho: PolyRC
    graph_var: int | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.rho.real_valued:
            raise ValueError("defining function must be real valued")
        if self.graph_var is not None and not _is_graph(self.rho, self.graph_var):
            raise ValueError(f"rho is not of the form -Im z_{self.graph_var + 1} + rest")

    @property
    def n(self) -> int:
        return self.rho.n

    @cached_property
    def grad_polys(self) -> list[PolyRC]:
        return gradient(self.rho)

    @cached_property
    def hess_polys(self) -> list[list[PolyRC]]:
        return complex_hessian(self.rho)

    def rho_at(self, z) -> np.ndarray:
        return np.real(evaluate(self.rho, z))

    def rho_scale(self, z) -> np.ndarray:
        return np.maximum(1.0, magnitude(self.rho, z))

    def grad_at(self, z) -> np.ndarray:
        """(rho_1, ..., rho_n) with rho_j = d rho / d z_j; shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        return np.stack([np.asarray(evaluate(g, z)) for g in self.grad_polys], axis=-1)

    def hess_at(self, z) -> np.ndarray:
        """Matrix H[j, k] = d^2 rho / dz_j dconj(z_k); shape (..., n, n)."""
        z = np.asarray(z, dtype=complex)
        rows = [np.stack([np.asarray(evaluate(h, z)) for h in row], axis=-1) for row in self.hess_polys]
        return np.stack(rows, axis=-2)

    def contains(self, z) -> np.ndarray:
        return self.rho_at(z) < 0


def _is_graph(rho: PolyRC, g: int) -> bool:
    n = rho.n
    e = tuple(1 if k == g else 0 for k in range(n))
    zero = (0,) * n
    for (a, b), c in rho:
        if a[g] or b[g]:
            if (a, b) == (e, zero):
                if abs(c - 0.5j) > 1e-12:
                    return False
            elif (a, b) == (zero, e):
                if abs(c + 0.5j) > 1e-12:
                    return False
            else:
                return False
    return abs(rho.coeff(e, zero) - 0.5j) <= 1e-12


@dataclass
class BoundaryPointData:
    z: np.ndarray
    rho_value: float
    grad: np.ndarray
    grad_norm: float
    hessian: np.ndarray
    frame: np.ndarray
    levi: np.ndarray
    mu: np.ndarray
    normalization: str = "raw"

    @property
    def tangents(self) -> np.ndarray:
        return self.frame[:-1]

    @property
    def normal(self) -> np.ndarray:
        return self.frame[-1]

    @property
    def hessian_normalized(self) -> np.ndarray:
        return self.hessian / _norm_factor(self.grad_norm, self.normalization)


@dataclass
class BoundarySample:
    points: list[BoundaryPointData]
    dropped: int = 0
    seeds: int = 0

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]


def _norm_factor(grad_norm: float, normalization: str) -> float:
    if normalization == "raw":
        return 1.0
    if normalization == "unit_gradient":
        return grad_norm
    raise ValueError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")


# ---------------------------------------------------------------------------
# frames and the Levi form


def unit_normal(grad: np.ndarray) -> np.ndarray:
    """Unit complex normal conj(grad)/|grad|; as a real vector it is the outward normal."""
    return np.conj(grad) / np.linalg.norm(grad)


def tangential_frame(grad: np.ndarray, seed_order: Sequence[int] | None = None) -> np.ndarray:
    """Orthonormal rows spanning {v : sum_j v_j rho_j = 0}, by pivoted Gram-Schmidt."""
    n = len(grad)
    nu = unit_normal(grad)
    order = list(range(n)) if seed_order is None else list(seed_order)
    cands = [np.eye(n, dtype=complex)[k] for k in order]
    basis = [nu]
    out = []
    for _ in range(n - 1):
        best, best_norm = None, -1.0
        for i, c in enumerate(cands):
            r = c - sum(np.vdot(b, c) * b for b in basis)
            nr = np.linalg.norm(r)
            if nr > best_norm + 1e-12:
                best, best_norm = i, nr
        c = cands.pop(best)
        for _ in range(2):
            c = c - sum(np.vdot(b, c) * b for b in basis)
        c = c / np.linalg.norm(c)
        basis.append(c)
        out.append(c)
    return np.array(out).reshape(n - 1, n)


def graph_frame_c3(grad: np.ndarray) -> np.ndarray:
    """Closed-form frame (u1, u2, u3) for graphs over z3 in C^3; u3 is the normal.

    Uses |drho|^2 = 1 + 4|rho_1|^2 + 4|rho_2|^2, valid when rho_3 = i/2.
    """
    r1, r2 = grad[0], grad[1]
    D = np.sqrt(1 + 4 * abs(r1) ** 2 + 4 * abs(r2) ** 2)
    u1 = np.array([1 + 4 * abs(r2) ** 2 / (D + 1), -4 * r1 * np.conj(r2) / (D + 1), 2j * r1]) / D
    u2 = np.array([-4 * np.conj(r1) * r2 / (D + 1), 1 + 4 * abs(r1) ** 2 / (D + 1), 2j * r2]) / D
    u3 = np.array([2 * np.conj(r1), 2 * np.conj(r2), -1j]) / D
    return np.array([u1, u2, u3])


def levi_matrix(frame_tangents: np.ndarray, hess: np.ndarray, factor: float = 1.0) -> np.ndarray:
    """L[j, k] = sum u_j^l H[l, m] conj(u_k^m) / factor."""
    F = frame_tangents
    return hermitian.hermitize(F @ hess @ F.conj().T / factor)


def point_data(spec: DomainSpec, z, grad, hess, normalization="raw", seed_order=None) -> BoundaryPointData:
    z = np.asarray(z, dtype=complex)
    gnorm = 2.0 * float(np.linalg.norm(grad))
    if gnorm < 1e-10:
        raise DegenerateBoundaryError(f"vanishing gradient at {z}")
    if spec.n == 3 and spec.graph_var == 2 and seed_order is None:
        frame = graph_frame_c3(grad)
    else:
        frame = np.vstack([tangential_frame(grad, seed_order), unit_normal(grad)[None, :]])
    levi = levi_matrix(frame[:-1], hess, _norm_factor(gnorm, normalization))
    mu = hermitian.eigvalsh(levi) if spec.n > 1 else np.zeros(0)
    return BoundaryPointData(z=z, rho_value=float(spec.rho_at(z)), grad=np.asarray(grad), grad_norm=gnorm,
                             hessian=np.asarray(hess), frame=frame, levi=levi, mu=mu,
                             normalization=normalization)


def frame_at(spec: DomainSpec, z, normalization: str = "raw", seed_order=None,
             boundary_tol: float = BOUNDARY_TOL) -> BoundaryPointData:
    """Gradient, Hessian, frame and Levi spectrum at a boundary point.

    ``normalization="raw"`` uses the Hessian of rho itself; ``"unit_gradient"``
    divides by |grad rho| (the Levi form of rho/|grad rho|).
    """
    _norm_factor(1.0, normalization)
    z = np.asarray(z, dtype=complex)
    r = spec.rho_at(z)
    if abs(r) > boundary_tol * spec.rho_scale(z):
        raise ValueError(f"point is not on the boundary: rho = {r:.3e}")
    return point_data(spec, z, spec.grad_at(z), spec.hess_at(z), normalization, seed_order)


# ---------------------------------------------------------------------------
# sampling


def _grid(window, counts) -> np.ndarray:
    window = np.asarray(window, dtype=float)
    axes = []
    for (lo, hi), m in zip(window, counts):
        if m < 1:
            raise ValueError("counts must be >= 1")
        if m == 1:
            axes.append(np.array([(lo + hi) / 2]))
        else:
            if not hi > lo:
                raise ValueError("degenerate window axis")
            axes.append(np.linspace(lo, hi, m))
    pts = np.array(list(itertools.product(*axes)))
    return pts[:, 0::2] + 1j * pts[:, 1::2]


def newton_project(spec: DomainSpec, z, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER):
    """Project points onto {rho = 0} by z <- z - rho grad/|grad|^2 (real gradient).

    Returns ``(points, converged_mask)`` for a batch of shape (m, n).
    """
    z = np.array(z, dtype=complex, ndmin=2)
    ok = np.zeros(len(z), dtype=bool)
    for _ in range(max_iter + 1):
        r = spec.rho_at(z)
        ok = np.abs(r) <= tol * spec.rho_scale(z)
        if ok.all():
            break
        g = spec.grad_at(z)
        g2 = np.sum(np.abs(g) ** 2, axis=-1)
        bad = g2 < 1e-24
        step = np.where((~ok & ~bad)[:, None], r[:, None] * np.conj(g) / (2 * np.where(bad, 1, g2))[:, None], 0)
        z = z - step
    finite = np.all(np.isfinite(z), axis=-1)
    return z, ok & finite


def boundary_points(spec: DomainSpec, window, counts) -> tuple[np.ndarray, int]:
    """Boundary points (array (m, n)) from a tensor grid over ``window``.

    ``window`` lists (lo, hi) for each real axis x1, y1, ..., xn, yn.  For
    graph domains the axis Im z_g is solved for exactly; otherwise the grid
    seeds are Newton-projected and failures are dropped.
    """
    window = np.asarray(window, dtype=float)
    if window.shape != (2 * spec.n, 2) or len(counts) != 2 * spec.n:
        raise ValueError(f"window needs {2 * spec.n} (lo, hi) rows and counts")
    counts = list(counts)
    if spec.graph_var is not None:
        g = spec.graph_var
        counts[2 * g + 1] = 1
        window = window.copy()
        window[2 * g + 1] = (0.0, 0.0)
        z = _grid(window, counts)
        z[:, g] = z[:, g].real + 1j * spec.rho_at(z)
        dropped = 0
    else:
        seeds = _grid(window, counts)
        z, ok = newton_project(spec, seeds)
        dropped = int((~ok).sum())
        z = z[ok]
    if len(z) == 0:
        raise EmptySampleError("no boundary points found in window")
    return z, dropped


def boundary_sample(spec: DomainSpec, window, counts, normalization: str = "raw") -> BoundarySample:
    z, dropped = boundary_points(spec, window, counts)
    grads, hess = spec.grad_at(z), spec.hess_at(z)
    pts = [point_data(spec, z[i], grads[i], hess[i], normalization) for i in range(len(z))]
    return BoundarySample(points=pts, dropped=dropped, seeds=len(z) + dropped)


def sample_from_points(spec: DomainSpec, z, normalization: str = "raw") -> BoundarySample:
    z = np.array(z, dtype=complex, ndmin=2)
    grads, hess = spec.grad_at(z), spec.hess_at(z)
    return BoundarySample([point_data(spec, z[i], grads[i], hess[i], normalization) for i in range(len(z))])


def write_points_csv(sample: Sequence[BoundaryPointData], path) -> Path:
    """Columns: Re/Im of each coordinate, |grad rho|, then mu_1..mu_{n-1}."""
    path = Path(path)
    pts = list(sample)
    if not pts:
        raise EmptySampleError("nothing to write")
    n = len(pts[0].z)
    header = [f"{p}{j + 1}" for j in range(n) for p in ("re_z", "im_z")] + ["grad_norm"]
    header += [f"mu{k + 1}" for k in range(n - 1)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for p in pts:
            row = [v for c in p.z for v in (repr(float(c.real)), repr(float(c.imag)))]
            row += [repr(float(p.grad_norm))] + [repr(float(m)) for m in p.mu]
            w.writerow(row)
    return path


# ---------------------------------------------------------------------------
# signed distance


def _real_dot(a, b) -> float:
    return float(np.real(np.vdot(b, a)))


def signed_distance(spec: DomainSpec, p, eps_reach: float | None = None, tol: float = 1e-10,
                    max_iter: int = 500):
    """Signed distance to the boundary, negative inside, with its foot point.

    Returns ``(delta, foot, normal)`` where ``normal`` is the unit outward
    normal at the foot, so that ``p = foot + delta * normal``.
    """
    p = np.asarray(p, dtype=complex)
    foot, ok = newton_project(spec, p[None, :])
    if not ok[0]:
        raise FootPointError("initial projection failed")
    f = foot[0]
    for _ in range(max_iter):
        nu = unit_normal(spec.grad_at(f))
        d = p - f
        dn = _real_dot(d, nu)
        tang = d - dn * nu
        if np.linalg.norm(tang) <= tol * (1.0 + np.linalg.norm(d)):
            break
        nxt, ok = newton_project(spec, (f + tang)[None, :])
        if not ok[0]:
            raise FootPointError("projection failed during foot-point iteration")
        f = nxt[0]
    else:
        raise FootPointError("foot-point iteration did not converge; point may be beyond the reach")
    delta = dn
    if eps_reach is not None and abs(delta) > eps_reach:
        raise FootPointError(f"|delta| = {abs(delta):.3g} exceeds reach window {eps_reach:g}")
    return delta, f, nu


# ---------------------------------------------------------------------------
# the quadric |z|_+^2 - |z|_-^2 + 1


def levi_eigenvector_check(spec: DomainSpec, z, p: int | None = None) -> float:
    """Residual of the explicit Levi eigenvector on the quadric |z|_+^2 - |z|_-^2 + 1.

    v = (|z|_-^2 z_1..z_p, |z|_+^2 z_{p+1}..z_n) is tangential and satisfies
    v^T H = ((|z|_-^2 - |z|_+^2)/|z|^2) v + (2|z|_-^2|z|_+^2/|z|^2) conj(grad).
    """
    p = spec.params.get("p") if p is None else p
    if p is None:
        raise ValueError("quadric split index p is required")
    z = np.asarray(z, dtype=complex)
    plus, minus = float(np.sum(abs(z[:p]) ** 2)), float(np.sum(abs(z[p:]) ** 2))
    tot = plus + minus
    if tot == 0:
        raise ValueError("v is undefined at z = 0")
    v = np.concatenate([minus * z[:p], plus * z[p:]])
    grad, hess = spec.grad_at(z), spec.hess_at(z)
    tangency = abs(np.sum(v * grad))
    lhs = v @ hess
    rhs = (minus - plus) / tot * v + 2 * minus * plus / tot * np.conj(grad)
    return float(max(tangency, np.max(np.abs(lhs - rhs))))


# ---------------------------------------------------------------------------
# built-in domains


P_TEXT = "2*x1*(x2^2 + y2^2) - x1*y1^4"
Q_TEXT = ("(x1^2 + x2^2 + y2^2)^3/3 + (x1^2 + x2^2 + y2^2)^2*y1^2 - x1^6/60 + x1^4*y1^2/4"
          " - x1^2*y1^4/4 + y1^6/60")


def quadric(n: int, p: int) -> DomainSpec:
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    rho = PolyRC.norm_sq(n, range(p)) - PolyRC.norm_sq(n, range(p, n)) + 1.0
    return DomainSpec(rho, name=f"quadric({n},{p})", params={"n": n, "p": p})


def ball(n: int) -> DomainSpec:
    return DomainSpec(PolyRC.norm_sq(n) - 1.0, name=f"ball({n})", params={"n": n})


def heisenberg(n: int = 2) -> DomainSpec:
    """{Im z_n > |z_1|^2 + ... + |z_{n-1}|^2}."""
    rho = PolyRC.norm_sq(n, range(n - 1)) - PolyRC.yvar(n, n - 1)
    return DomainSpec(rho, graph_var=n - 1, name=f"heisenberg({n})", params={"n": n})


def model_strip(n: int) -> DomainSpec:
    """sum (Re z_j)^2 < 1."""
    rho = sum((PolyRC.xvar(n, j) ** 2 for j in range(n)), PolyRC(n)) - 1.0
    return DomainSpec(rho, name=f"model_section4({n})", params={"n": n})


def prop52(corrected: bool = True) -> DomainSpec:
    """-Im z3 + P(z1, z2) (+ Q(z1, z2) when ``corrected``) in C^3."""
    text = P_TEXT + (" + " + Q_TEXT if corrected else "")
    rho = from_real_poly(text, 3) - PolyRC.yvar(3, 2)
    name = "prop52" if corrected else "prop52_uncorrected"
    return DomainSpec(rho, graph_var=2, name=name, params={"P": P_TEXT, "Q": Q_TEXT if corrected else None})


def custom(text: str, n: int, graph_var: int | None = None) -> DomainSpec:
    return DomainSpec(from_real_poly(text, n), graph_var=graph_var, name="custom", params={"text": text})


BUILTINS = {
    "quadric": ("|z|_+^2 - |z|_-^2 + 1 with |z|_+^2 = |z_1|^2+...+|z_p|^2; parameters n, p",
                "nondegenerate quadric; Levi spectrum -1 (n-p-1 times), 1 (p-1 times), (1+2|z|_+^2)^-1"),
    "prop52": ("-Im z3 + P(z1,z2) + Q(z1,z2), P = " + P_TEXT + ", Q = " + Q_TEXT,
               "corrected graph domain in C^3 satisfying weak Z(2); Levi form vanishes on x=z2=0"),
    "prop52_uncorrected": ("-Im z3 + " + P_TEXT,
                           "graph domain without correction; no uniformly C^2 defining function"),
    "ball": ("|z|^2 - 1; parameter n", "unit ball"),
    "heisenberg": ("|z_1|^2 + ... + |z_{n-1}|^2 - Im z_n; parameter n (default 2)",
                   "half-space bounded by the Heisenberg group, {Im z_n > |z'|^2}"),
    "model_section4": ("(Re z_1)^2 + ... + (Re z_n)^2 - 1; parameter n",
                       "strictly pseudoconvex tube domain used for unweighted estimates"),
}


def builtin(name: str, **params) -> DomainSpec:
    if name == "quadric":
        return quadric(int(params.get("n", 3)), int(params.get("p", 1)))
    if name == "prop52":
        return prop52(True)
    if name == "prop52_uncorrected":
        return prop52(False)
    if name == "ball":
        return ball(int(params.get("n", 2)))
    if name == "heisenberg":
        return heisenberg(int(params.get("n", 2)))
    if name == "model_section4":
        return model_strip(int(params.get("n", 2)))
    raise KeyError(f"unknown builtin domain {name!r}; known: {sorted(BUILTINS)}")
