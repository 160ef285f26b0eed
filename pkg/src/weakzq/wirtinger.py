"""Polynomials in z and conj(z) with exact Wirtinger differentiation.

A polynomial on C^n is stored as a map from exponent pairs ``(a, b)`` to
complex coefficients, the monomial being ``z^a * conj(z)^b``.  Indices are
0-based throughout: ``d_z(p, 0)`` is the derivative in the first variable.

The same container doubles as a polynomial in *real* variables: a
polynomial with every ``b == 0`` is an ordinary polynomial in ``z`` and
``d_z`` is then the ordinary partial derivative.  ``certify`` uses this for
homogeneous polynomials on R^{m}.
"""
from __future__ import annotations

import ast
import hashlib
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DEGREE = 12
DROP_TOL = 1e-14

Exponent = tuple[tuple[int, ...], tuple[int, ...]]


class DegreeError(ValueError):
    pass


class PolyParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.col = col


class PolyRC:
    """Polynomial in z_1..z_n and their conjugates with complex coefficients."""

    def __init__(self, n: int, terms: Mapping[Exponent, complex] | None = None):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n
        clean: dict[Exponent, complex] = {}
        for (a, b), c in (terms or {}).items():
            a, b = tuple(int(v) for v in a), tuple(int(v) for v in b)
            if len(a) != n or len(b) != n:
                raise ValueError(f"exponent length mismatch for n={n}: {(a, b)}")
            if min(a + b, default=0) < 0:
                raise ValueError("negative exponent")
            c = complex(c)
            if abs(c) < DROP_TOL:
                continue
            if sum(a) + sum(b) > MAX_DEGREE:
                raise DegreeError(f"degree {sum(a) + sum(b)} exceeds cap {MAX_DEGREE}")
            clean[(a, b)] = c
        self._terms = clean

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, n: int, c: complex) -> "PolyRC":
        zero = (0,) * n
        return cls(n, {(zero, zero): c})

    @classmethod
    def zvar(cls, n: int, j: int) -> "PolyRC":
        _check_index(n, j)
        a = tuple(1 if k == j else 0 for k in range(n))
        return cls(n, {(a, (0,) * n): 1.0})

    @classmethod
    def zbar(cls, n: int, j: int) -> "PolyRC":
        _check_index(n, j)
        b = tuple(1 if k == j else 0 for k in range(n))
        return cls(n, {((0,) * n, b): 1.0})

    @classmethod
    def xvar(cls, n: int, j: int) -> "PolyRC":
        """Re z_j."""
        return (cls.zvar(n, j) + cls.zbar(n, j)) * 0.5

    @classmethod
    def yvar(cls, n: int, j: int) -> "PolyRC":
        """Im z_j."""
        return (cls.zvar(n, j) - cls.zbar(n, j)) * (-0.5j)

    @classmethod
    def norm_sq(cls, n: int, idx: Iterable[int] | None = None) -> "PolyRC":
        idx = range(n) if idx is None else idx
        out = cls(n)
        for j in idx:
            out = out + cls.zvar(n, j) * cls.zbar(n, j)
        return out

    # container protocol ---------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, complex]:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coeff(self, a: Sequence[int], b: Sequence[int]) -> complex:
        return self._terms.get((tuple(a), tuple(b)), 0j)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self._terms), default=0)

    @cached_property
    def real_valued(self) -> bool:
        """True when coeff(a, b) == conj(coeff(b, a)) for every term."""
        scale = max((abs(c) for c in self._terms.values()), default=0.0)
        for (a, b), c in self._terms.items():
            if abs(c - self.coeff(b, a).conjugate()) > 1e-12 * max(scale, 1.0):
                return False
        return True

    def is_holomorphic(self) -> bool:
        return all(not any(b) for a, b in self._terms)

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{_mono_str(a, b)}" for (a, b), c in sorted(self._terms.items()))
        return f"PolyRC(n={self.n}, {body or '0'})"

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "PolyRC":
        if isinstance(other, PolyRC):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch {self.n} != {other.n}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return PolyRC.constant(self.n, complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0j) + c
        return PolyRC(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyRC(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return PolyRC(self.n, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, complex] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (_addt(a1, a2), _addt(b1, b2))
                if sum(key[0]) + sum(key[1]) > MAX_DEGREE:
                    raise DegreeError(f"product degree exceeds cap {MAX_DEGREE}")
                out[key] = out.get(key, 0j) + c1 * c2
        return PolyRC(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, float, complex, np.number)):
            return NotImplemented
        return self * (1.0 / other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = PolyRC.constant(self.n, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def conj(self) -> "PolyRC":
        return PolyRC(self.n, {(b, a): c.conjugate() for (a, b), c in self._terms.items()})

    def equals(self, other: "PolyRC", tol: float = 1e-12) -> bool:
        return all(abs(c) <= tol for _, c in (self - other))

    def max_coeff_diff(self, other: "PolyRC") -> float:
        return max((abs(c) for _, c in (self - other)), default=0.0)

    # substitution -----------------------------------------------------------
    def compose(self, subs: Sequence["PolyRC"]) -> "PolyRC":
        """Substitute z_j -> subs[j] (and conj(z_j) -> conj(subs[j]))."""
        if len(subs) != self.n:
            raise ValueError("need one substitution per variable")
        m = subs[0].n
        conj_subs = [s.conj() for s in subs]
        out = PolyRC(m)
        for (a, b), c in self._terms.items():
            term = PolyRC.constant(m, c)
            for j in range(self.n):
                if a[j]:
                    term = term * subs[j] ** a[j]
                if b[j]:
                    term = term * conj_subs[j] ** b[j]
            out = out + term
        return out

    def fix_variable(self, j: int, value: complex) -> "PolyRC":
        """Set z_j = value and drop that variable (n -> n-1)."""
        _check_index(self.n, j)
        if self.n == 1:
            raise ValueError("cannot drop the only variable")
        value = complex(value)
        out: dict[Exponent, complex] = {}
        for (a, b), c in self._terms.items():
            c = c * value ** a[j] * value.conjugate() ** b[j]
            key = (a[:j] + a[j + 1:], b[:j] + b[j + 1:])
            out[key] = out.get(key, 0j) + c
        return PolyRC(self.n - 1, out)

    # evaluation -------------------------------------------------------------
    @cached_property
    def _compiled(self):
        keys = list(self._terms)
        A = np.array([k[0] for k in keys], dtype=int).reshape(len(keys), self.n)
        B = np.array([k[1] for k in keys], dtype=int).reshape(len(keys), self.n)
        C = np.array([self._terms[k] for k in keys], dtype=complex)
        return A, B, C

    def __call__(self, z) -> complex | np.ndarray:
        return evaluate(self, z)

    def symbolic_hash(self) -> str:
        items = sorted((a, b, round(c.real, 12) + 0.0, round(c.imag, 12) + 0.0)
                       for (a, b), c in self._terms.items())
        return hashlib.sha256(repr((self.n, items)).encode()).hexdigest()[:16]


def _addt(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _check_index(n, j):
    if not 0 <= j < n:
        raise IndexError(f"variable index {j} out of range for n={n}")


def _mono_str(a, b):
    parts = [f"z{j + 1}^{e}" for j, e in enumerate(a) if e] + [f"zb{j + 1}^{e}" for j, e in enumerate(b) if e]
    return "*".join(parts) or "1"


# ---------------------------------------------------------------------------
# differentiation


def d_z(p: PolyRC, j: int) -> PolyRC:
    """Wirtinger derivative d/dz_j."""
    _check_index(p.n, j)
    out = {}
    for (a, b), c in p:
        if a[j]:
            a2 = a[:j] + (a[j] - 1,) + a[j + 1:]
            out[(a2, b)] = c * a[j]
    return PolyRC(p.n, out)


def d_zbar(p: PolyRC, j: int) -> PolyRC:
    """Wirtinger derivative d/dconj(z_j)."""
    _check_index(p.n, j)
    out = {}
    for (a, b), c in p:
        if b[j]:
            b2 = b[:j] + (b[j] - 1,) + b[j + 1:]
            out[(a, b2)] = c * b[j]
    return PolyRC(p.n, out)


def d_real(p: PolyRC, axis: int) -> PolyRC:
    """Partial derivative along real axis ``axis`` of (x_1, y_1, ..., x_n, y_n)."""
    j, is_y = divmod(axis, 2)
    if is_y:
        return (d_z(p, j) - d_zbar(p, j)) * 1j
    return d_z(p, j) + d_zbar(p, j)


def gradient(p: PolyRC) -> list[PolyRC]:
    return [d_z(p, j) for j in range(p.n)]


def complex_hessian(p: PolyRC) -> list[list[PolyRC]]:
    """Entry [j][k] is d^2 p / dz_j dconj(z_k)."""
    return [[d_zbar(d_z(p, j), k) for k in range(p.n)] for j in range(p.n)]


# ---------------------------------------------------------------------------
# evaluation


def evaluate(p: PolyRC, z) -> complex | np.ndarray:
    """Evaluate at one point (shape (n,)) or a batch (shape (..., n))."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != p.n:
        raise ValueError(f"point dimension {z.shape[-1]} != {p.n}")
    single = z.ndim == 1
    if not len(p):
        return 0j if single else np.zeros(z.shape[:-1], dtype=complex)
    A, B, C = p._compiled
    zc = np.conj(z)
    top = max(int(A.max()), int(B.max()))
    # power tables: pw[j][e] = z_j**e
    pw = [[None] * (top + 1) for _ in range(p.n)]
    pwc = [[None] * (top + 1) for _ in range(p.n)]
    for j in range(p.n):
        need_a, need_b = set(A[:, j].tolist()), set(B[:, j].tolist())
        cur, curc = np.ones(z.shape[:-1], dtype=complex), np.ones(z.shape[:-1], dtype=complex)
        for e in range(top + 1):
            if e:
                cur = cur * z[..., j]
                curc = curc * zc[..., j]
            if e in need_a:
                pw[j][e] = cur
            if e in need_b:
                pwc[j][e] = curc
    acc = np.zeros(z.shape[:-1], dtype=complex)
    for t in range(len(C)):
        term = C[t]
        for j in range(p.n):
            if A[t, j]:
                term = term * pw[j][A[t, j]]
            if B[t, j]:
                term = term * pwc[j][B[t, j]]
        acc = acc + term
    return complex(acc) if single else acc


def magnitude(p: PolyRC, z) -> float | np.ndarray:
    """Sum of |monomial| values; the natural rounding scale of ``evaluate``."""
    mags = PolyRC(p.n, {k: abs(c) for k, c in p})
    zr = np.abs(np.asarray(z, dtype=complex))
    out = evaluate(mags, zr)
    return out.real if isinstance(out, np.ndarray) else out.real


# ---------------------------------------------------------------------------
# real-coordinate entry


def from_real_poly(expr, n: int) -> PolyRC:
    """Polynomial in x_j = Re z_j, y_j = Im z_j given as text, e.g. ``"x1^2 + y1^2"``.

    Operators ``+ - * ^`` (``**`` also accepted), parentheses, integer and
    decimal literals, and division by a literal.  Variables are x1..xn,
    y1..yn.  The result is real valued by construction.
    """
    if isinstance(expr, PolyRC):
        return expr
    return parse_real_poly(str(expr), n)


def parse_real_poly(text: str, n: int) -> PolyRC:
    src = text.replace("^", "**").strip() or "0"
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise PolyParseError(f"cannot parse polynomial: {exc.msg}", exc.lineno, exc.offset) from None
    names = {}
    for j in range(n):
        names[f"x{j + 1}"] = PolyRC.xvar(n, j)
        names[f"y{j + 1}"] = PolyRC.yvar(n, j)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return PolyRC.constant(n, float(node.value))
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise PolyParseError(f"unknown variable {node.id!r}", node.lineno, node.col_offset + 1)
            return names[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0):
                    raise PolyParseError("exponent must be a non-negative integer literal", node.lineno, node.col_offset + 1)
                return walk(node.left) ** exp.value
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.degree != 0:
                    raise PolyParseError("division only by a constant", node.lineno, node.col_offset + 1)
                return left / right.coeff((0,) * n, (0,) * n)
        raise PolyParseError(f"unsupported syntax: {type(node).__name__}",
                             getattr(node, "lineno", None), getattr(node, "col_offset", -1) + 1)

    return walk(tree)


def real_to_complex(p: PolyRC) -> PolyRC:
    """Reinterpret a real-variable polynomial in (x1, y1, ..., xn, yn) on C^n."""
    if p.n % 2:
        raise ValueError("need an even number of real variables")
    if not p.is_holomorphic():
        raise ValueError("expected a real-variable polynomial (no conjugate exponents)")
    m = p.n // 2
    subs = []
    for j in range(m):
        subs += [PolyRC.xvar(m, j), PolyRC.yvar(m, j)]
    return p.compose(subs)


def random_poly(rng: np.random.Generator, n: int, degree: int, n_terms: int = 8,
                real: bool = False, holomorphic_only: bool = False) -> PolyRC:
    """Random polynomial with ``n_terms`` monomials of total degree <= ``degree``."""
    exps = []
    for a in product(range(degree + 1), repeat=n):
        for b in ([(0,) * n] if holomorphic_only else product(range(degree + 1), repeat=n)):
            if sum(a) + sum(b) <= degree:
                exps.append((tuple(a), tuple(b)))
    pick = rng.choice(len(exps), size=min(n_terms, len(exps)), replace=False)
    terms = {}
    for i in pick:
        c = rng.normal() + (0 if holomorphic_only and real else 1j * rng.normal())
        terms[exps[i]] = c
    p = PolyRC(n, terms)
    if real:
        p = (p + p.conj()) * 0.5 if not holomorphic_only else PolyRC(n, {k: c.real for k, c in p})
    return p
