import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakzq import domain as dom
from weakzq.wirtinger import (DegreeError, PolyParseError, PolyRC, d_real, d_z, d_zbar, evaluate,
                              from_real_poly, parse_real_poly, random_poly, real_to_complex)

P_TEXT = "2*x1*(x2^2 + y2^2) - x1*y1^4"


def fd_dz(p, z, j, h=1e-5):
    """Central difference of (d/dx_j - i d/dy_j)/2."""
    e = np.zeros(len(z), complex)
    e[j] = h
    dx = (evaluate(p, z + e) - evaluate(p, z - e)) / (2 * h)
    dy = (evaluate(p, z + 1j * e) - evaluate(p, z - 1j * e)) / (2 * h)
    return 0.5 * (dx - 1j * dy)


def fd_dzbar(p, z, j, h=1e-5):
    e = np.zeros(len(z), complex)
    e[j] = h
    dx = (evaluate(p, z + e) - evaluate(p, z - e)) / (2 * h)
    dy = (evaluate(p, z + 1j * e) - evaluate(p, z - 1j * e)) / (2 * h)
    return 0.5 * (dx + 1j * dy)


def real_eval(text, z):
    """Oracle: evaluate a real-coordinate expression with plain floats."""
    env = {}
    for j, c in enumerate(z):
        env[f"x{j + 1}"], env[f"y{j + 1}"] = c.real, c.imag
    return eval(text.replace("^", "**"), {}, env)


def test_dz_of_norm_square():
    p = PolyRC.norm_sq(1)
    assert d_z(p, 0).equals(PolyRC.zbar(1, 0))
    assert d_zbar(p, 0).equals(PolyRC.zvar(1, 0))


def test_derivative_of_constant_is_zero():
    assert d_z(PolyRC.constant(2, 5.0), 1).is_zero()
    assert d_zbar(PolyRC.constant(2, 5.0), 0).is_zero()


def test_index_out_of_range():
    with pytest.raises(IndexError):
        d_z(PolyRC.norm_sq(2), 2)


def test_dz2_of_p_closed_form():
    P = from_real_poly(P_TEXT, 2)
    expected = PolyRC.zbar(2, 1) * (PolyRC.zvar(2, 0) + PolyRC.zbar(2, 0))
    assert d_z(P, 1).equals(expected)


@pytest.mark.parametrize("text", [P_TEXT, dom.Q_TEXT])
def test_derivatives_match_finite_differences(text, rng):
    p = from_real_poly(text, 2)
    for _ in range(20):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        for j in range(2):
            for exact, fd in ((d_z(p, j), fd_dz), (d_zbar(p, j), fd_dzbar)):
                e = evaluate(exact, z)
                assert abs(fd(p, z, j) - e) <= 1e-6 * max(1.0, abs(e))


def test_reality_identity_for_real_polys():
    Q = from_real_poly(dom.Q_TEXT, 2)
    assert Q.real_valued
    for j in range(2):
        assert d_zbar(Q, j).equals(d_z(Q, j).conj())


def test_from_real_poly_examples():
    assert from_real_poly("x1^2 + y1^2", 1).equals(PolyRC.norm_sq(1))
    assert from_real_poly("0", 2).is_zero()
    P = from_real_poly(P_TEXT, 2)
    z = np.array([1 + 1j, 1.0])
    assert real_eval(P_TEXT, z) == pytest.approx(1.0)
    assert evaluate(P, z) == pytest.approx(1.0, abs=1e-14)


def test_eval_examples():
    quad = PolyRC.norm_sq(2, [0]) - PolyRC.norm_sq(2, [1]) + 1.0
    assert evaluate(quad, np.array([0, 1.0])) == 0
    p = random_poly(np.random.default_rng(0), 2, 3) + 7.0
    assert evaluate(p, np.zeros(2)) == pytest.approx(p.coeff((0, 0), (0, 0)))
    assert evaluate(dom.prop52().rho, np.zeros(3)) == 0


def test_batch_eval_matches_pointwise(rng):
    p = random_poly(rng, 3, 4, 10)
    z = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    batch = evaluate(p, z)
    assert np.allclose(batch, [evaluate(p, zz) for zz in z], rtol=1e-14, atol=1e-14)


def test_real_partials():
    p = from_real_poly("x1^2*y2 + 3*y1", 2)
    assert d_real(p, 0).equals(from_real_poly("2*x1*y2", 2))
    assert d_real(p, 1).equals(from_real_poly("3", 2))
    assert d_real(p, 3).equals(from_real_poly("x1^2", 2))


def test_degree_cap():
    z = PolyRC.zvar(1, 0)
    assert (z**12).degree == 12
    with pytest.raises(DegreeError):
        z**13
    with pytest.raises(DegreeError):
        (z**7) * (z**6)


def test_tiny_coefficients_dropped():
    p = PolyRC(1, {((1,), (0,)): 1e-15, ((0,), (0,)): 1.0})
    assert len(p) == 1


@pytest.mark.parametrize("text,col", [("x1 +* y1", 5), ("x3 + 1", 1), ("sin(x1)", 1)])
def test_parse_errors_report_position(text, col):
    with pytest.raises(PolyParseError) as err:
        parse_real_poly(text, 2)
    assert err.value.line == 1
    assert err.value.col is not None


def test_parse_decimal_and_division():
    p = parse_real_poly("0.5*x1 + y1/4", 1)
    assert evaluate(p, np.array([2 + 4j])) == pytest.approx(2.0)


def test_real_to_complex_roundtrip():
    # u^2 + v^2 with (u, v) = (Re z, Im z)
    r = PolyRC(2, {((2, 0), (0, 0)): 1.0, ((0, 2), (0, 0)): 1.0})
    assert real_to_complex(r).equals(PolyRC.norm_sq(1))


def test_fix_variable_and_compose():
    p = from_real_poly("x1*x2 + y2", 2)
    fixed = p.fix_variable(1, 2.0 + 0j)
    assert fixed.n == 1
    assert evaluate(fixed, np.array([3.0 + 0j])) == pytest.approx(6.0)


def test_symbolic_hash_stable():
    a = from_real_poly(P_TEXT, 2)
    b = from_real_poly("-x1*y1^4 + 2*x1*x2^2 + 2*x1*y2^2", 2)
    assert a.symbolic_hash() == b.symbolic_hash()


poly_seeds = st.integers(min_value=0, max_value=2**31 - 1)


@given(poly_seeds)
def test_mixed_partials_commute(seed):
    rng = np.random.default_rng(seed)
    p = random_poly(rng, 3, 5, 10)
    for j in range(3):
        for k in range(3):
            assert d_z(d_zbar(p, k), j).equals(d_zbar(d_z(p, j), k))


@given(poly_seeds)
def test_real_valued_evaluates_real(seed):
    rng = np.random.default_rng(seed)
    p = random_poly(rng, 2, 6, 10, real=True)
    assert p.real_valued
    z = rng.uniform(-1, 1, size=(100, 2)) + 1j * rng.uniform(-1, 1, size=(100, 2))
    assert np.max(np.abs(np.imag(evaluate(p, z)))) <= 1e-13


@given(poly_seeds)
def test_finite_difference_consistency(seed):
    rng = np.random.default_rng(seed)
    p = random_poly(rng, 2, 6, 8)
    r = rng.uniform(0, 1, 2) ** 0.5
    z = r * np.exp(2j * np.pi * rng.uniform(size=2)) / np.sqrt(2)
    for j in range(2):
        e = evaluate(d_z(p, j), z)
        assert abs(fd_dz(p, z, j) - e) <= 1e-5 * (1 + abs(e))


@given(poly_seeds)
def test_leibniz_rule(seed):
    rng = np.random.default_rng(seed)
    a, b = random_poly(rng, 2, 3, 5), random_poly(rng, 2, 3, 5)
    for j in range(2):
        assert d_z(a * b, j).equals(d_z(a, j) * b + a * d_z(b, j), tol=1e-10)
        assert d_zbar(a * b, j).equals(d_zbar(a, j) * b + a * d_zbar(b, j), tol=1e-10)


@given(poly_seeds)
def test_conjugation_swaps_derivatives(seed):
    p = random_poly(np.random.default_rng(seed), 2, 4, 6)
    for j in range(2):
        assert d_zbar(p, j).conj().equals(d_z(p.conj(), j))
