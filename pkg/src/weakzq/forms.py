"""Compactly supported (0,q)-forms, the operators dbar and its weighted adjoint, and
quadrature checks of the identities relating them.

Coefficients live on a ball B(c, r) and are written in local coordinates
w = (z - c)/r as  sum_k g_k(w) (1 - |w|^2)^k  with polynomial g_k and k >= 4,
so every derivative stays in the same closed form and vanishes to third order
on the sphere.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import domain as dom
from .upsilon import chi
from .wirtinger import PolyRC, complex_hessian, d_z, d_zbar, evaluate

MIN_BUMP_POWER = 4
MAX_QUAD_DIM = 3


class ContainmentError(ValueError):
    """Form support is not inside the quadrature box or the domain."""


# ---------------------------------------------------------------------------
# multi-index combinatorics


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 when entries repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def epsilon(upper: Sequence[int], lower: Sequence[int]) -> int:
    """Generalized Kronecker sign: sign of the permutation taking ``upper`` to ``lower``."""
    if sorted(upper) != sorted(lower) or len(set(upper)) != len(upper):
        return 0
    pos = {v: i for i, v in enumerate(lower)}
    return perm_sign([pos[v] for v in upper])


@dataclass(frozen=True)
class MultiIndexAlg:
    """Increasing multi-indices of length q in {0..n-1} and the table eps^{jI}_J."""

    n: int
    q: int

    def __post_init__(self):
        if not 0 <= self.q <= self.n:
            raise ValueError("need 0 <= q <= n")

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(self.n), self.q))

    def wedge(self, j: int, I: tuple[int, ...]) -> tuple[tuple[int, ...] | None, int]:
        """(J, eps^{jI}_J) with J the sorted union, or (None, 0) when j is in I."""
        if j in I:
            return None, 0
        # moving j past the entries of I that are smaller than it
        J = tuple(sorted(I + (j,)))
        return J, (-1) ** sum(1 for i in I if i < j)

    def table(self) -> dict:
        out = {}
        for I in self.indices:
            for j in range(self.n):
                J, s = self.wedge(j, I)
                if s:
                    out[(j, I)] = (J, s)
        return out


# ---------------------------------------------------------------------------
# coefficient functions


class BumpPoly:
    """sum_k g_k(w) (1 - |w|^2)^k for |w| < 1, and 0 outside."""

    def __init__(self, n: int, terms: dict[int, PolyRC] | None = None):
        self.n = n
        self.terms = {k: p for k, p in (terms or {}).items() if not p.is_zero()}
        if any(k < 0 for k in self.terms):
            raise ValueError("negative bump power")

    @classmethod
    def zero(cls, n):
        return cls(n)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def min_power(self) -> int:
        return min(self.terms, default=MIN_BUMP_POWER)

    def __add__(self, other: "BumpPoly") -> "BumpPoly":
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return BumpPoly(self.n, out)

    def __neg__(self):
        return BumpPoly(self.n, {k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BumpPoly":
        return BumpPoly(self.n, {k: p * c for k, p in self.terms.items()})

    def mul_poly(self, g: PolyRC) -> "BumpPoly":
        return BumpPoly(self.n, {k: p * g for k, p in self.terms.items()})

    def d_wbar(self, j: int) -> "BumpPoly":
        # d/dconj(w_j) (1 - |w|^2)^k = -k w_j (1 - |w|^2)^(k-1)
        wj = PolyRC.zvar(self.n, j)
        out = BumpPoly(self.n)
        for k, p in self.terms.items():
            out = out + BumpPoly(self.n, {k: d_zbar(p, j)})
            if k:
                out = out + BumpPoly(self.n, {k - 1: p * wj * (-k)})
        return out

    def d_w(self, j: int) -> "BumpPoly":
        wj = PolyRC.zbar(self.n, j)
        out = BumpPoly(self.n)
        for k, p in self.terms.items():
            out = out + BumpPoly(self.n, {k: d_z(p, j)})
            if k:
                out = out + BumpPoly(self.n, {k - 1: p * wj * (-k)})
        return out

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        b = 1.0 - np.sum(np.abs(w) ** 2, axis=-1)
        inside = b > 0
        bb = np.where(inside, b, 0.0)
        acc = np.zeros(w.shape[:-1], dtype=complex)
        for k, p in self.terms.items():
            acc = acc + np.asarray(evaluate(p, w)) * bb**k
        return np.where(inside, acc, 0.0)


@dataclass(frozen=True)
class TestForm:
    """(0,q)-form sum_J f_J dzbar_J supported in the ball B(center, radius)."""

    __test__ = False  # keep pytest from collecting this class

    n: int
    q: int
    coeffs: dict  # increasing multi-index -> BumpPoly in local coordinates
    center: np.ndarray = field(default=None)
    radius: float = 1.0

    def __post_init__(self):
        c = np.zeros(self.n, complex) if self.center is None else np.asarray(self.center, complex)
        object.__setattr__(self, "center", c)
        alg = MultiIndexAlg(self.n, self.q)
        valid = set(alg.indices)
        for J, b in self.coeffs.items():
            if J not in valid:
                raise ValueError(f"{J} is not an increasing multi-index of length {self.q}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def coeff(self, J) -> BumpPoly:
        return self.coeffs.get(tuple(J), BumpPoly(self.n))

    def local(self, z) -> np.ndarray:
        return (np.asarray(z, dtype=complex) - self.center) / self.radius

    def __call__(self, z) -> dict:
        w = self.local(z)
        return {J: b(w) for J, b in self.coeffs.items()}

    def with_coeffs(self, q: int, coeffs: dict) -> "TestForm":
        coeffs = {J: b for J, b in coeffs.items() if not b.is_zero()}
        return TestForm(self.n, q, coeffs, self.center, self.radius)

    def scaled(self, c: complex) -> "TestForm":
        return self.with_coeffs(self.q, {J: b.scale(c) for J, b in self.coeffs.items()})

    def moved(self, center, radius: float, factor: float = 1.0) -> "TestForm":
        """Same local coefficients (times ``factor``) on the ball B(center, radius)."""
        coeffs = {J: b.scale(factor) for J, b in self.coeffs.items()}
        return TestForm(self.n, self.q, coeffs, np.asarray(center, complex), radius)

    def d_zbar(self, J, j: int) -> BumpPoly:
        return self.coeff(J).d_wbar(j).scale(1.0 / self.radius)

    def d_z(self, J, j: int) -> BumpPoly:
        return self.coeff(J).d_w(j).scale(1.0 / self.radius)

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.coeffs.values())


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSpec:
    """phi = t |z|^2 ("gauss") or phi = 2t sum (Re z_j)^2 ("model")."""

    t: float = 0.0
    form: str = "gauss"

    def __post_init__(self):
        if self.form not in ("gauss", "model"):
            raise ValueError(f"unknown weight form {self.form!r}")

    def shape_poly(self, n: int) -> PolyRC:
        """phi / t as a polynomial in z."""
        if self.form == "gauss":
            return PolyRC.norm_sq(n)
        return 2 * sum((PolyRC.xvar(n, j) ** 2 for j in range(n)), PolyRC(n))

    def phi_poly(self, n: int) -> PolyRC:
        return self.shape_poly(n) * self.t

    def shape_partials_local(self, n: int, center, radius: float) -> list[PolyRC]:
        """d(phi/t)/dz_j as polynomials in the local coordinate w = (z - c)/r."""
        subs = [PolyRC.zvar(n, j) * radius + complex(center[j]) for j in range(n)]
        return [d_z(self.shape_poly(n), j).compose(subs) for j in range(n)]

    def hessian_residual(self, n: int) -> float:
        """Largest coefficient of phi_{j kbar} - t delta_jk; zero when the standing assumption holds."""
        H = complex_hessian(self.phi_poly(n))
        worst = 0.0
        for j in range(n):
            for k in range(n):
                diff = H[j][k] - (self.t if j == k else 0.0)
                worst = max(worst, max((abs(c) for _, c in diff), default=0.0))
        return worst


# ---------------------------------------------------------------------------
# operators


def dbar(f: TestForm) -> TestForm:
    """(dbar f)_K = sum eps^{kJ}_K d f_J / dconj(z_k)."""
    if f.q >= f.n:
        raise ValueError("dbar of an (n)-form is zero by degree; q must be < n")
    alg = MultiIndexAlg(f.n, f.q)
    out: dict = {}
    for (k, J), (K, s) in alg.table().items():
        if J not in f.coeffs:
            continue
        term = f.d_zbar(J, k).scale(s)
        out[K] = out[K] + term if K in out else term
    return f.with_coeffs(f.q + 1, out)


@dataclass(frozen=True)
class AdjointParts:
    """dbar*_t g = A + t B as forms of degree q."""

    A: TestForm
    B: TestForm

    def at(self, t: float) -> TestForm:
        coeffs = {}
        for J in set(self.A.coeffs) | set(self.B.coeffs):
            coeffs[J] = self.A.coeff(J) + self.B.coeff(J).scale(t)
        return self.A.with_coeffs(self.A.q, coeffs)


def dbar_star_parts(g: TestForm, weight_form: str = "gauss") -> AdjointParts:
    """Split dbar*_phi g = -sum_J sum_j (d/dz_j - phi_j) g_{jJ} dzbar_J into A + t B."""
    if g.q < 1:
        raise ValueError("adjoint needs a form of degree >= 1")
    alg = MultiIndexAlg(g.n, g.q - 1)
    psi = WeightSpec(1.0, weight_form).shape_partials_local(g.n, g.center, g.radius)
    A: dict = {}
    B: dict = {}
    for (j, J), (K, s) in alg.table().items():
        if K not in g.coeffs:
            continue
        a = g.d_z(K, j).scale(-s)
        b = g.coeff(K).mul_poly(psi[j]).scale(s)
        A[J] = A[J] + a if J in A else a
        B[J] = B[J] + b if J in B else b
    return AdjointParts(g.with_coeffs(g.q - 1, A), g.with_coeffs(g.q - 1, B))


def dbar_star(g: TestForm, weight: WeightSpec) -> TestForm:
    return dbar_star_parts(g, weight.form).at(weight.t)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadSpec:
    """Tensor midpoint rule with ``N`` nodes per real axis on the box center +- half_width."""

    N: int = 32
    chunk: int = 1 << 18

    def nodes_1d(self) -> np.ndarray:
        return -1.0 + (2 * np.arange(self.N) + 1) / self.N


def _ball_points(n: int, quad: QuadSpec):
    """Midpoint nodes of [-1, 1]^{2n} inside the open unit ball, in chunks of local coordinates."""
    if n > MAX_QUAD_DIM:
        raise ValueError(f"quadrature is limited to n <= {MAX_QUAD_DIM}")
    x = quad.nodes_1d()
    x2 = x * x
    # iterate over the leading 2n-2 axes, take the last complex coordinate as a full 2-D slab
    slab_re, slab_im = np.meshgrid(x, x, indexing="ij")
    slab = (slab_re + 1j * slab_im).ravel()
    slab_r2 = (slab_re**2 + slab_im**2).ravel()
    buf, size = [], 0
    for lead in itertools.product(range(quad.N), repeat=2 * n - 2):
        lead = np.array(lead, dtype=int)
        r2 = float(np.sum(x2[lead]))
        if r2 >= 1:
            continue
        keep = slab_r2 < 1 - r2
        if not keep.any():
            continue
        head = x[lead[0::2]] + 1j * x[lead[1::2]]
        pts = np.empty((int(keep.sum()), n), dtype=complex)
        pts[:, :n - 1] = head
        pts[:, n - 1] = slab[keep]
        buf.append(pts)
        size += len(pts)
        if size >= quad.chunk:
            yield np.concatenate(buf)
            buf, size = [], 0
    if buf:
        yield np.concatenate(buf)


def _cell_volume(n: int, quad: QuadSpec, radius: float) -> float:
    return (2.0 * radius / quad.N) ** (2 * n)


def _check_support(forms: Iterable[TestForm], center, radius):
    for f in forms:
        gap = np.linalg.norm(f.center - center) + f.radius
        if gap > radius * (1 + 1e-12):
            raise ContainmentError("form support is not inside the quadrature ball")


@dataclass
class _Integrands:
    """Pointwise quantities for a form f of degree q, independent of t."""

    f: TestForm
    weight_form: str
    alg_q: list
    df: TestForm | None
    parts: AdjointParts | None
    grads: list  # (J, j, BumpPoly) for d f_J / d zbar_j

    @classmethod
    def build(cls, f: TestForm, weight_form: str):
        df = dbar(f) if f.q < f.n else None
        parts = dbar_star_parts(f, weight_form) if f.q >= 1 else None
        grads = [(J, j, f.d_zbar(J, j)) for J in f.coeffs for j in range(f.n)]
        return cls(f, weight_form, MultiIndexAlg(f.n, f.q).indices, df, parts, grads)


def _sq(form: TestForm | None, w) -> np.ndarray:
    if form is None:
        return np.zeros(len(w))
    acc = np.zeros(len(w))
    for b in form.coeffs.values():
        acc += np.abs(b(w)) ** 2
    return acc


def _inner(a: TestForm, b: TestForm, w) -> np.ndarray:
    acc = np.zeros(len(w), complex)
    for J, ba in a.coeffs.items():
        if J in b.coeffs:
            acc += ba(w) * np.conj(b.coeffs[J](w))
    return acc


@dataclass
class NormSet:
    """Weighted squared norms at one t (with optional refinement error estimates)."""

    t: float
    f: float
    dbar: float
    dbar_star: float
    grad: float
    errors: dict = field(default_factory=dict)

    @property
    def lhs(self) -> float:
        return self.dbar + self.dbar_star

    def rhs(self, q: int) -> float:
        return self.grad + q * self.t * self.f


def norm_sets(f: TestForm, ts: Sequence[float], weight_form: str = "gauss",
              quad: QuadSpec = QuadSpec()) -> list[NormSet]:
    """||f||^2, ||dbar f||^2, ||dbar*_t f||^2 and sum ||df_J/dzbar_j||^2, weighted by exp(-phi_t).

    One pass over the grid serves every t: dbar*_t f = A + t B and the weight
    is exp(-t psi), so only t-free pointwise quantities are tabulated.
    """
    ig = _Integrands.build(f, weight_form)
    shape = WeightSpec(1.0, weight_form).shape_poly(f.n)
    ts = [float(t) for t in ts]
    sums = np.zeros((len(ts), 4))
    for w in _ball_points(f.n, quad):
        z = f.center + f.radius * w
        psi = np.real(evaluate(shape, z))
        wt = np.exp(-np.outer(ts, psi))
        ff = _sq(f, w)
        dd = _sq(ig.df, w)
        gg = np.zeros(len(w))
        for _, _, b in ig.grads:
            gg += np.abs(b(w)) ** 2
        if ig.parts is not None:
            aa = _sq(ig.parts.A, w)
            bb = _sq(ig.parts.B, w)
            ab = np.real(_inner(ig.parts.A, ig.parts.B, w))
            star = aa[None, :] + 2 * np.outer(ts, ab) + np.outer(np.square(ts), bb)
        else:
            star = np.zeros((len(ts), len(w)))
        sums[:, 0] += wt @ ff
        sums[:, 1] += wt @ dd
        sums[:, 2] += np.sum(wt * star, axis=1)
        sums[:, 3] += wt @ gg
    sums *= _cell_volume(f.n, quad, f.radius)
    return [NormSet(t, *map(float, s)) for t, s in zip(ts, sums)]


def weighted_norms(f: TestForm, weight: WeightSpec, quad: QuadSpec = QuadSpec()) -> NormSet:
    """Norms at quad.N, with errors estimated against the half-resolution grid."""
    fine = norm_sets(f, [weight.t], weight.form, quad)[0]
    coarse = norm_sets(f, [weight.t], weight.form, QuadSpec(max(quad.N // 2, 2), quad.chunk))[0]
    fine.errors = {k: abs(getattr(fine, k) - getattr(coarse, k)) for k in ("f", "dbar", "dbar_star", "grad")}
    return fine


def inner_product(a: TestForm, b: TestForm, weight: WeightSpec, quad: QuadSpec = QuadSpec(),
                  center=None, radius: float | None = None) -> complex:
    """(a, b)_phi over a ball containing both supports (default: the support of a)."""
    if a.q != b.q or a.n != b.n:
        raise ValueError("forms must have the same bidegree")
    center = a.center if center is None else np.asarray(center, complex)
    radius = a.radius if radius is None else radius
    _check_support([a, b], center, radius)
    phi = weight.phi_poly(a.n)
    total = 0j
    for w in _ball_points(a.n, quad):
        z = center + radius * w
        wt = np.exp(-np.real(evaluate(phi, z)))
        acc = np.zeros(len(w), complex)
        for J, ba in a.coeffs.items():
            if J in b.coeffs:
                acc += ba(a.local(z)) * np.conj(b.coeffs[J](b.local(z)))
        total += np.sum(wt * acc)
    return total * _cell_volume(a.n, quad, radius)


@dataclass
class AdjointReport:
    lhs: complex
    rhs: complex
    residual: float
    residual_coarse: float

    @property
    def ratio(self) -> float:
        return self.residual_coarse / self.residual if self.residual > 0 else math.inf


def adjointness_check(u: TestForm, g: TestForm, weight: WeightSpec, quad: QuadSpec = QuadSpec(),
                      center=None, radius: float | None = None) -> AdjointReport:
    """|(dbar u, g)_phi - (u, dbar*_phi g)_phi| at N and N/2 nodes per axis."""
    if g.q != u.q + 1:
        raise ValueError("g must have degree q + 1")
    center = u.center if center is None else center
    radius = u.radius if radius is None else radius
    du, sg = dbar(u), dbar_star(g, weight)
    out = []
    for qs in (quad, QuadSpec(max(quad.N // 2, 2), quad.chunk)):
        a = inner_product(du, g, weight, qs, center, radius) if not du.is_zero() else 0j
        b = inner_product(u, sg, weight, qs, center, radius) if not sg.is_zero() else 0j
        out.append((a, b))
    (a, b), (a2, b2) = out
    scale = max(abs(a), abs(b), 1e-300)
    return AdjointReport(a, b, abs(a - b) / scale, abs(a2 - b2) / max(abs(a2), abs(b2), 1e-300))


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class MKHReport:
    t: float
    q: int
    levels: list[int]
    lhs: list[float]
    rhs: list[float]
    residuals: list[float]

    @property
    def residual(self) -> float:
        return self.residuals[-1]

    @property
    def ratio(self) -> float:
        return self.residuals[-2] / self.residuals[-1] if self.residuals[-1] > 0 else math.inf

    def to_dict(self) -> dict:
        return {"t": self.t, "q": self.q, "levels": self.levels, "lhs": self.lhs, "rhs": self.rhs,
                "residuals": self.residuals, "ratio": self.ratio}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def mkh_check(f: TestForm, ts: Sequence[float] | float, weight_form: str = "gauss",
              levels: Sequence[int] = (16, 32)) -> list[MKHReport]:
    """Residual of ||dbar f||^2 + ||dbar* f||^2 = sum ||df_J/dzbar_j||^2 + q t ||f||^2.

    The forms are supported inside the domain so the boundary term is absent.
    Returns one report per t holding the relative residual at each grid level.
    """
    ts = [ts] if np.isscalar(ts) else list(ts)
    per_level = [norm_sets(f, ts, weight_form, QuadSpec(N)) for N in levels]
    reports = []
    for i, t in enumerate(ts):
        sets = [lvl[i] for lvl in per_level]
        lhs = [s.lhs for s in sets]
        rhs = [s.rhs(f.q) for s in sets]
        reports.append(MKHReport(float(t), f.q, list(levels), lhs, rhs,
                                 [_rel(a, b) for a, b in zip(lhs, rhs)]))
    return reports


def basic_estimate_check(f: TestForm, weight: WeightSpec, quad: QuadSpec = QuadSpec()) -> tuple[float, NormSet]:
    """Margin ||dbar f||^2 + ||dbar* f||^2 - q t ||f||^2 (equal to the gradient term)."""
    if weight.t <= 0:
        raise ValueError("the basic estimate needs t > 0")
    s = norm_sets(f, [weight.t], weight.form, quad)[0]
    return s.lhs - f.q * weight.t * s.f, s


# ---------------------------------------------------------------------------
# scaling


@dataclass
class ScalingRow:
    R: float
    center: list
    norm: float
    dbar_norm: float
    dbar_star_norm: float

    @property
    def quotient(self) -> float:
        return (self.dbar_norm + self.dbar_star_norm) / self.norm


def heisenberg_center(R: float) -> np.ndarray:
    return np.array([0.0, 1j * (2 * R**2 + R)])


def check_ball_inside(spec: dom.DomainSpec, center, radius: float, n_dirs: int = 2000, seed: int = 0):
    """Sample the closed ball (center, radial shells and the sphere) and require rho < 0."""
    rng = np.random.default_rng(seed)
    n = spec.n
    v = rng.normal(size=(n_dirs, n)) + 1j * rng.normal(size=(n_dirs, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = [np.asarray(center, complex)[None, :]]
    for s in (0.25, 0.5, 0.75, 1.0):
        pts.append(center + s * radius * v)
    pts = np.concatenate(pts)
    r = spec.rho_at(pts)
    if np.any(r >= 0):
        raise ContainmentError(f"ball of radius {radius} at {center} leaves the domain")


def scaling_demo(spec: dom.DomainSpec, u1: TestForm, radii: Sequence[float] = (1, 2, 4),
                 centers: Callable[[float], np.ndarray] = heisenberg_center,
                 quad: QuadSpec = QuadSpec()) -> list[ScalingRow]:
    """Rayleigh-type quotients of u_R = R^-n u_1((z - z_R)/R) at t = 0."""
    rows = []
    for R in radii:
        c = centers(R)
        check_ball_inside(spec, c, R)
        uR = u1.moved(c, R, factor=R ** (-u1.n))
        s = norm_sets(uR, [0.0], "gauss", quad)[0]
        rows.append(ScalingRow(float(R), [[float(v.real), float(v.imag)] for v in c],
                               math.sqrt(s.f), math.sqrt(s.dbar), math.sqrt(s.dbar_star)))
    return rows


# ---------------------------------------------------------------------------
# the model weight on sum (Re z_j)^2 < 1


@dataclass
class ModelWeightReport:
    t: float
    hessian_residual: float
    sup_phi: float
    bound: float
    n_samples: int

    @property
    def ok(self) -> bool:
        return self.hessian_residual == 0 and self.sup_phi <= self.bound + 1e-9

    def to_dict(self) -> dict:
        return {"t": self.t, "hessian_residual": self.hessian_residual, "sup_phi": self.sup_phi,
                "bound": self.bound, "n_samples": self.n_samples, "ok": self.ok}


def model_weight_checks(t: float, n: int = 2, counts: int = 21, seed: int = 0) -> ModelWeightReport:
    """phi = 2t sum (Re z_j)^2: exact complex Hessian t I, and sup over the closed domain <= 2t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    w = WeightSpec(t, "model")
    spec = dom.model_strip(n)
    rng = np.random.default_rng(seed)
    axes = [np.linspace(-1, 1, counts)] * n
    x = np.array(list(itertools.product(*axes)))
    x = x[np.sum(x * x, axis=1) <= 1]
    # rescale the outer shell onto the boundary so the sup is attained
    r = np.sqrt(np.sum(x * x, axis=1))
    outer = r > 1 - 2.0 / counts
    x[outer] /= r[outer, None]
    y = rng.uniform(-10, 10, size=x.shape)
    z = x + 1j * y
    if np.any(spec.rho_at(z) > 1e-12):
        raise AssertionError("sample left the closed domain")
    phi = np.real(evaluate(w.phi_poly(n), z))
    return ModelWeightReport(t, w.hessian_residual(n), float(np.max(np.abs(phi))), 2 * t, len(z))


# ---------------------------------------------------------------------------
# construction helpers


def random_test_form(rng: np.random.Generator, n: int, q: int, degree: int = 2, n_terms: int = 4,
                     powers: Sequence[int] = (4, 5), center=None, radius: float = 1.0) -> TestForm:
    """Random form whose coefficients have random polynomial factors of total degree <= degree."""
    from .wirtinger import random_poly

    coeffs = {}
    for J in MultiIndexAlg(n, q).indices:
        terms = {k: random_poly(rng, n, degree, n_terms) for k in powers}
        coeffs[J] = BumpPoly(n, terms)
    return TestForm(n, q, coeffs, center, radius)


def bump_form(n: int, q: int, J=None, g: PolyRC | None = None, power: int = MIN_BUMP_POWER,
              center=None, radius: float = 1.0) -> TestForm:
    """Single coefficient g(w) (1 - |w|^2)^power on multi-index J."""
    J = tuple(range(q)) if J is None else tuple(J)
    g = PolyRC.constant(n, 1.0) if g is None else g
    return TestForm(n, q, {J: BumpPoly(n, {power: g})}, center, radius)


def truncation_cutoff(r: float) -> Callable[[np.ndarray], np.ndarray]:
    """z -> chi(((r + 1)^2 - |z|^2) / (2r + 1)): 1 on |z| <= r, 0 for |z| >= r + 1."""
    def cut(z):
        z2 = np.sum(np.abs(np.asarray(z, complex)) ** 2, axis=-1)
        return chi(((r + 1) ** 2 - z2) / (2 * r + 1))
    return cut


def truncate_form(f: TestForm, r: float) -> Callable[[np.ndarray], dict]:
    """Coefficient evaluator of chi_r f; smooth but no longer in closed polynomial-bump form."""
    cut = truncation_cutoff(r)

    def ev(z):
        c = cut(z)
        return {J: c * v for J, v in f(z).items()}

    return ev
