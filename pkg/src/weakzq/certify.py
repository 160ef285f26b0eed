"""Weak Z(q) certification, growth evidence for defining functions, and dehomogenization.

Everything here samples finitely many points; reports over unbounded sets
are labeled as numerical evidence rather than proof.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from . import domain as dom
from . import hermitian
from .upsilon import HermitianField
from .wirtinger import PolyRC, d_real, d_z, evaluate

DEFAULT_TOL = 1e-8
DEFAULT_THETA_MIN = 1e-3
TANGENCY_TOL = 1e-9
EVIDENCE_LABEL = "numerical evidence on sampled windows, not a proof"


@dataclass
class PointRecord:
    z: list
    mu: list
    trace_upsilon: float
    c_i: float
    c_ii: float
    c_ii_direct: float
    c_iii: float
    tangency: float
    failed: list = field(default_factory=list)


@dataclass
class CertReport:
    domain: str
    domain_hash: str
    field: str
    q: int
    tol: float
    theta_min: float
    normalization: str
    points: list[PointRecord]
    dropped: int = 0
    version: str = __version__

    @property
    def min_c_i(self) -> float:
        return min(p.c_i for p in self.points)

    @property
    def min_c_ii(self) -> float:
        return min(p.c_ii for p in self.points)

    @property
    def min_c_iii(self) -> float:
        return min(p.c_iii for p in self.points)

    @property
    def max_tangency(self) -> float:
        return max(p.tangency for p in self.points)

    @property
    def max_route_gap(self) -> float:
        """Largest disagreement between the frame and ambient routes for c_ii."""
        return max(abs(p.c_ii - p.c_ii_direct) for p in self.points)

    @property
    def failures(self) -> list[int]:
        return [i for i, p in enumerate(self.points) if p.failed]

    @property
    def failed_conditions(self) -> list[str]:
        return sorted({c for p in self.points for c in p.failed})

    @property
    def passed(self) -> bool:
        return not self.failures

    def aggregate(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "failed_conditions": self.failed_conditions,
            "n_points": len(self.points),
            "n_failures": len(self.failures),
            "dropped": self.dropped,
            "min_c_i": self.min_c_i,
            "min_c_ii": self.min_c_ii,
            "inf_c_iii": self.min_c_iii,
            "max_tangency": self.max_tangency,
            "max_route_gap": self.max_route_gap,
            "label": EVIDENCE_LABEL,
        }

    def to_dict(self, include_points: bool = True) -> dict:
        out = {
            "version": self.version,
            "domain": self.domain,
            "domain_hash": self.domain_hash,
            "field": self.field,
            "q": self.q,
            "tol": self.tol,
            "theta_min": self.theta_min,
            "normalization": self.normalization,
            "aggregate": self.aggregate(),
        }
        if include_points:
            out["points"] = [asdict(p) for p in self.points]
        return out

    def to_json(self, include_points: bool = True) -> str:
        return json.dumps(self.to_dict(include_points), sort_keys=True, indent=2)


def _zlist(z) -> list:
    return [[float(c.real), float(c.imag)] for c in z]


def point_margins(bp: dom.BoundaryPointData, Y: np.ndarray, q: int):
    """(c_i, c_ii via frame, c_ii via ambient trace, c_iii, tangency, trace Y)."""
    _, c_i = hermitian.is_range_01(Y)
    tr = hermitian.trace(Y)
    yf = hermitian.hermitize(bp.tangents @ Y @ bp.tangents.conj().T)
    mu_sum = float(np.sum(bp.mu[:q]))
    c_ii = mu_sum - float(np.trace(yf @ bp.levi).real)
    c_ii_direct = mu_sum - float(np.trace(Y @ bp.hessian_normalized).real)
    tangency = float(np.linalg.norm(Y @ bp.grad) / np.linalg.norm(bp.grad))
    return c_i, c_ii, c_ii_direct, abs(q - tr), tangency, tr


def check_weak_zq(spec: dom.DomainSpec, field: HermitianField, q: int, sample,
                  tol: float = DEFAULT_TOL, theta_min: float = DEFAULT_THETA_MIN) -> CertReport:
    """Evaluate conditions (i)-(iii) and tangency at every sampled boundary point.

    A point fails "i" if an eigenvalue of Y leaves [-tol, 1 + tol], "ii" if
    mu_1 + ... + mu_q - sum Y^{kj} rho_{jk} < -tol, "iii" if |q - tr Y| <
    theta_min and "tangency" if |Y grad| / |grad| > 1e-9.
    """
    n = spec.n
    if not 1 <= q <= n - 1:
        raise ValueError(f"q must lie in [1, {n - 1}]")
    if field.n != n:
        raise ValueError(f"field dimension {field.n} does not match domain dimension {n}")
    pts = list(sample)
    if not pts:
        raise dom.EmptySampleError("empty sample")
    records = []
    normalization = pts[0].normalization
    for bp in pts:
        if len(bp.z) != n:
            raise ValueError("sample point has the wrong dimension")
        if abs(spec.rho_at(bp.z)) > dom.BOUNDARY_TOL * spec.rho_scale(bp.z):
            raise ValueError(f"sample point {bp.z} is not on the boundary")
        Y = field(bp.z)
        c_i, c_ii, c_ii_d, c_iii, tang, tr = point_margins(bp, Y, q)
        failed = []
        if c_i < -tol:
            failed.append("i")
        if c_ii < -tol:
            failed.append("ii")
        if c_iii < theta_min:
            failed.append("iii")
        if tang > TANGENCY_TOL:
            failed.append("tangency")
        records.append(PointRecord(_zlist(bp.z), [float(m) for m in bp.mu], tr, c_i, c_ii, c_ii_d,
                                   c_iii, tang, failed))
    dropped = getattr(sample, "dropped", 0)
    return CertReport(spec.name, spec.rho.symbolic_hash(), field.label, q, tol, theta_min,
                      normalization, records, dropped)


# ---------------------------------------------------------------------------
# the set K0 = {x = 0, z2 = 0} on the corrected graph domain


@dataclass
class K0Report:
    n_points: int
    max_offdiag: float
    max_forced_residual: float
    unit_eigs_at_zero: list[int]
    unit_eigs_off_zero: list[int]
    min_gap_off_zero: float
    tol: float

    @property
    def identities_hold(self) -> bool:
        return self.max_offdiag <= self.tol and self.max_forced_residual <= self.tol

    def to_dict(self) -> dict:
        return asdict(self) | {"identities_hold": self.identities_hold}


def check_k0_negative_result(spec: dom.DomainSpec, field: HermitianField, ys: Sequence[float],
                             tol: float = 1e-8, unit_tol: float = 1e-9) -> K0Report:
    """Check the identities forced on {x = 0, z2 = 0} and count eigenvalues equal to one.

    In frame coordinates the field must satisfy Y^{2 1} = 0 and
    (-3y^2 / (1 + 4|rho_1|^2)) (1 - Y^{1 1}) + 2 (1 - Y^{2 2}) = 0.
    ``unit_eigs_*`` count eigenvalues within ``unit_tol`` of 1; the gap is
    the distance of the spectrum to 1.
    """
    if spec.n != 3 or spec.graph_var != 2:
        raise ValueError("needs a graph domain over z3 in C^3")
    max_off = max_forced = 0.0
    at_zero, off_zero, gaps = [], [], []
    for y in ys:
        z = np.array([1j * y, 0.0, 0.0])
        z[2] = 1j * spec.rho_at(z)
        bp = dom.frame_at(spec, z)
        r1 = bp.grad[0]
        yf = field.frame_matrix(z, bp.tangents)
        max_off = max(max_off, abs(yf[1, 0]))
        forced = -3 * y**2 / (1 + 4 * abs(r1) ** 2) * (1 - yf[0, 0].real) + 2 * (1 - yf[1, 1].real)
        max_forced = max(max_forced, abs(forced))
        w = hermitian.eigvalsh(field(z))
        count = int(np.sum(np.abs(w - 1) <= unit_tol))
        if y == 0:
            at_zero.append(count)
        else:
            off_zero.append(count)
            gaps.append(float(np.min(np.abs(w - 1))))
    return K0Report(len(ys), float(max_off), float(max_forced), at_zero, off_zero,
                    min(gaps) if gaps else math.inf, tol)


# ---------------------------------------------------------------------------
# growth of derivatives along the boundary


def real_derivative_norms(p: PolyRC, z, k: int) -> np.ndarray:
    """Frobenius norm of the full tensor of k-th real partial derivatives at points z."""
    z = np.array(z, dtype=complex, ndmin=2)
    dim = 2 * p.n
    total = np.zeros(len(z))
    for combo in itertools.combinations_with_replacement(range(dim), k):
        q = p
        for ax in combo:
            q = d_real(q, ax)
            if q.is_zero():
                break
        if q.is_zero():
            continue
        mult = math.factorial(k)
        for ax in set(combo):
            mult //= math.factorial(combo.count(ax))
        total += mult * np.abs(np.asarray(evaluate(q, z))) ** 2
    return np.sqrt(total)


def gradient_norms(spec: dom.DomainSpec, z) -> np.ndarray:
    return 2.0 * np.linalg.norm(spec.grad_at(z), axis=-1)


def _slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class GrowthReport:
    windows: list[float]
    orders: list[int]
    max_ratio: dict
    exponents: dict
    grad_windows: list[float]
    min_grad: list[float]
    grad_exponent: float
    label: str = EVIDENCE_LABEL

    def variation(self, k: int) -> float:
        """Relative change of the max ratio between the last two windows."""
        a, b = self.max_ratio[k][-2], self.max_ratio[k][-1]
        if a == b:
            return 0.0
        return abs(b - a) / max(abs(a), abs(b))

    def to_dict(self) -> dict:
        return {"windows": self.windows, "orders": self.orders,
                "max_ratio": {str(k): v for k, v in self.max_ratio.items()},
                "exponents": {str(k): v for k, v in self.exponents.items()},
                "variation_last_two": {str(k): self.variation(k) for k in self.orders},
                "grad_windows": self.grad_windows, "min_grad": self.min_grad,
                "grad_exponent": self.grad_exponent, "label": self.label}


def uniform_cm_evidence(spec: dom.DomainSpec, orders: Sequence[int] = (2, 3), L0: float = 1.0,
                        n_windows: int = 4, counts_per_axis: int = 7, weighted: bool = True,
                        shell_points: int = 400, seed: int = 0) -> GrowthReport:
    """Max of |grad^k rho| / |grad rho| * (|x|^2 + 1)^(k/2 - 1) over boundary windows.

    Windows are the boxes [-L, L] on every free real axis with L = L0 * 2^i.
    Also fits the growth exponent of min |grad rho| over spheres of radius L
    in the free coordinates, measured against |z'|^2.
    """
    windows = [L0 * 2.0**i for i in range(n_windows)]
    n = spec.n
    max_ratio = {k: [] for k in orders}
    for L in windows:
        box = [(-L, L)] * (2 * n)
        z, _ = dom.boundary_points(spec, box, [counts_per_axis] * (2 * n))
        if spec.graph_var is None:
            z = z[np.max(np.abs(np.concatenate([z.real, z.imag], axis=1)), axis=1) <= L * (1 + 1e-9)]
        g = gradient_norms(spec, z)
        x2 = np.sum(np.abs(_free(spec, z)) ** 2, axis=-1)
        for k in orders:
            r = real_derivative_norms(spec.rho, z, k) / g
            if weighted:
                r = r * (x2 + 1) ** (k / 2 - 1)
            max_ratio[k].append(float(np.max(r)))
    exponents = {}
    for k in orders:
        v = np.array(max_ratio[k])
        exponents[k] = _slope(windows, v) if np.all(v > 0) else 0.0
    dirs = _directions(spec, shell_points, seed)
    min_grad = [float(np.min(gradient_norms(spec, _shell(spec, L * dirs)))) for L in windows]
    return GrowthReport(windows, list(orders), max_ratio, exponents, windows, min_grad,
                        _slope(np.square(windows), min_grad))


def _free(spec, z):
    if spec.graph_var is None:
        return z
    return np.delete(z, spec.graph_var, axis=-1)


def _directions(spec: dom.DomainSpec, m: int, seed: int) -> np.ndarray:
    """Unit vectors in the free coordinates: the coordinate axes plus m random ones."""
    free = spec.n if spec.graph_var is None else spec.n - 1
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(m, free)) + 1j * rng.normal(size=(m, free))
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return np.concatenate([np.eye(free), 1j * np.eye(free), v])


def _shell(spec: dom.DomainSpec, v: np.ndarray) -> np.ndarray:
    """Boundary points over the free coordinates v (graph) or projected from v."""
    if spec.graph_var is None:
        z, ok = dom.newton_project(spec, v)
        return z[ok]
    g = spec.graph_var
    z = np.insert(v, g, 0.0, axis=1)
    z[:, g] = 1j * spec.rho_at(z)
    return z


# ---------------------------------------------------------------------------
# dehomogenization


@dataclass
class HomogenizationReport:
    degree: int
    euler_residual: float
    identity_residual: float
    residual_hash: str
    c0: float
    min_bound_ratio: float
    min_weak_bound_ratio: float
    n_points: int

    @property
    def ok(self) -> bool:
        return (self.euler_residual == 0 and self.identity_residual == 0
                and self.min_bound_ratio >= 1 - 1e-9 and self.min_weak_bound_ratio >= 1 - 1e-9)

    def to_dict(self) -> dict:
        return asdict(self) | {"ok": self.ok}


def _total_degrees(p: PolyRC) -> set[int]:
    return {sum(a) + sum(b) for (a, b), _ in p}


def real_gradient(p: PolyRC) -> list[PolyRC]:
    """Gradient of a real-variable polynomial (conjugate-free PolyRC)."""
    return [d_z(p, j) for j in range(p.n)]


def euler_residual(p: PolyRC, degree: int) -> PolyRC:
    """sum_i x_i d_i p - degree * p as a polynomial."""
    out = -degree * p
    for j, gj in enumerate(real_gradient(p)):
        out = out + PolyRC.zvar(p.n, j) * gj
    return out


def random_homogeneous(rng: np.random.Generator, m: int, degree: int, n_terms: int = 8) -> PolyRC:
    """Random real homogeneous polynomial of the given degree in m real variables."""
    exps = [e for e in itertools.product(range(degree + 1), repeat=m) if sum(e) == degree]
    pick = rng.choice(len(exps), size=min(n_terms, len(exps)), replace=False)
    zero = (0,) * m
    return PolyRC(m, {(exps[i], zero): float(rng.normal()) for i in pick})


def real_boundary_points(rho: PolyRC, L: float, counts: int, tol: float = 1e-12,
                         max_iter: int = 50) -> np.ndarray:
    """Newton-project a grid in [-L, L]^m onto {rho = 0} for a real-variable polynomial."""
    m = rho.n
    axes = [np.linspace(-L, L, counts)] * m
    x = np.array(list(itertools.product(*axes)), dtype=float)
    grads = real_gradient(rho)
    ok = np.zeros(len(x), bool)
    for _ in range(max_iter + 1):
        r = np.real(evaluate(rho, x.astype(complex)))
        ok = np.abs(r) <= tol * np.maximum(1, np.abs(x).max(axis=1) ** max(_total_degrees(rho) | {1}))
        if ok.all():
            break
        g = np.stack([np.real(evaluate(gj, x.astype(complex))) for gj in grads], axis=-1)
        g2 = np.sum(g * g, axis=-1)
        step = np.where((~ok & (g2 > 1e-24))[:, None], r[:, None] * g / np.where(g2 > 1e-24, g2, 1)[:, None], 0)
        x = x - step
    good = ok & np.all(np.isfinite(x), axis=1)
    return x[good]


def dehomogenize_and_check(rho_tilde: PolyRC, L: float = 3.0, counts: int | None = None) -> tuple[PolyRC, HomogenizationReport]:
    """rho(x) = rho_tilde(x, 1) with symbolic and sampled checks.

    ``rho_tilde`` is a real-variable polynomial in m + 1 variables, homogeneous
    of degree d.  The symbolic identity checked is
    x . grad rho(x) + (d rho_tilde / d x_{m+1})(x, 1) - d rho(x) == 0,
    which on the boundary reads x . grad rho = -d rho_tilde/d x_{m+1}.  The
    sampled bounds are |grad rho|^2 >= C0^2 (|x|^2 + 1)^(d - 2) and the weaker
    |grad rho|^2 >= C0^2 / (|x|^2 + 1)^2, with C0 the least |grad rho_tilde|
    over the sampled boundary points mapped to the unit sphere.
    """
    if not rho_tilde.is_holomorphic():
        raise ValueError("expected a real-variable polynomial")
    degs = _total_degrees(rho_tilde)
    if len(degs) != 1:
        raise ValueError(f"not homogeneous: total degrees {sorted(degs)}")
    d = degs.pop()
    euler = euler_residual(rho_tilde, d)
    m = rho_tilde.n - 1
    rho = rho_tilde.fix_variable(m, 1.0)
    last = d_z(rho_tilde, m).fix_variable(m, 1.0)
    ident = euler_residual(rho, d) + last
    if counts is None:
        counts = max(3, int(20000 ** (1 / m)))
    x = real_boundary_points(rho, L, counts)
    if len(x) == 0:
        raise dom.EmptySampleError("no real boundary points found")
    xc = x.astype(complex)
    grad = np.stack([np.real(evaluate(g, xc)) for g in real_gradient(rho)], axis=-1)
    gn2 = np.sum(grad**2, axis=-1)
    y = np.concatenate([x, np.ones((len(x), 1))], axis=1)
    y = y / np.linalg.norm(y, axis=1, keepdims=True)
    gt = np.stack([np.real(evaluate(g, y.astype(complex))) for g in real_gradient(rho_tilde)], axis=-1)
    c0 = float(np.min(np.linalg.norm(gt, axis=1)))
    x2 = np.sum(x**2, axis=1)
    if c0 > 0:
        strong = gn2 / (c0**2 * (x2 + 1) ** (d - 2))
        weak = gn2 * (x2 + 1) ** 2 / c0**2
    else:  # singular boundary point: both bounds are vacuous
        strong = weak = np.full(len(x), np.inf)
    rep = HomogenizationReport(d, _max_abs_coeff(euler), _max_abs_coeff(ident), ident.symbolic_hash(),
                               c0, float(strong.min()), float(weak.min()), len(x))
    return rho, rep


def _max_abs_coeff(p: PolyRC) -> float:
    return max((abs(c) for _, c in p), default=0.0)


def homogeneous_quadric(n: int, p: int) -> PolyRC:
    """|x_+|^2 - |x_-|^2 + t^2 on R^{2n+1}, in real pairs (Re z_j, Im z_j) then t."""
    m = 2 * n + 1
    out = PolyRC(m)
    for j in range(2 * n):
        sq = PolyRC.zvar(m, j) ** 2
        out = out + (sq if j < 2 * p else -sq)
    return out + PolyRC.zvar(m, m - 1) ** 2


def dehomogenized_domain(rho_tilde: PolyRC, name: str = "dehomogenized") -> dom.DomainSpec:
    """Turn rho_tilde(x, 1) on R^{2n} into a DomainSpec on C^n."""
    from .wirtinger import real_to_complex

    rho = rho_tilde.fix_variable(rho_tilde.n - 1, 1.0)
    return dom.DomainSpec(real_to_complex(rho), name=name)


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]
