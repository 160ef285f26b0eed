import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakzq import domain as dom
from weakzq import hermitian as H
from weakzq import upsilon as U

GRAPH = dom.prop52()
PARAMS = U.PatchParams(R0=3.0, R1=6.0, R2=6.0, Y1=15.0, Y2=30.0)


def graph_point(x, y, z2, re3=0.0):
    z = np.array([x + 1j * y, z2, re3], dtype=complex)
    z[2] = re3 + 1j * GRAPH.rho_at(z)
    return z


def random_graph_points(rng, m, r_max=6.0, y_range=(-60, 60)):
    out = []
    for _ in range(m):
        v = rng.normal(size=3)
        v *= rng.uniform(0, r_max) / np.linalg.norm(v)
        out.append(graph_point(v[0], rng.uniform(*y_range), v[1] + 1j * v[2]))
    return out


def test_chi_step():
    assert U.chi(-1.0) == 0 and U.chi(0.0) == 0
    assert U.chi(1.0) == 1 and U.chi(2.0) == 1
    assert U.chi(0.5) == pytest.approx(0.5)


@given(st.floats(-2, 3))
def test_chi_symmetry(t):
    assert U.chi(t) + U.chi(1 - t) == pytest.approx(1.0, abs=1e-15)


def test_zero_field():
    f = U.upsilon_zero(3)
    y = f(np.array([1, 2j, 3]))
    assert np.all(y == 0)
    assert H.trace(y) == 0


def test_field_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        U.upsilon_zero(3)(np.zeros(2))


def test_zero_field_on_strictly_pseudoconvex_region():
    rng = np.random.default_rng(2)
    for z in random_graph_points(rng, 300, r_max=8.0):
        r = np.hypot(z[0].real, abs(z[1]))
        if r < PARAMS.R0:
            continue
        bp = dom.frame_at(GRAPH, z)
        scale = 1 + np.abs(bp.mu).max()
        assert bp.mu[0] >= -1e-12 * scale
        assert bp.mu.sum() > 0


def test_quadric_projection_example():
    f = U.upsilon_quadric(3, 1)
    y = f(np.array([1, 0, np.sqrt(2)]))
    assert H.trace(y) == pytest.approx(1.0)
    assert H.eigvalsh(y) == pytest.approx([0, 0, 1], abs=1e-14)


def test_quadric_projection_invalid_point():
    with pytest.raises(U.FieldDomainError):
        U.upsilon_quadric(3, 1)(np.array([1.0, 0, 0]))


@pytest.mark.parametrize("n,p", [(3, 1), (4, 1), (4, 2), (5, 2)])
def test_quadric_projection_identities(n, p):
    spec = dom.quadric(n, p)
    f = U.upsilon_quadric(n, p)
    rng = np.random.default_rng(n * 10 + p)
    z, ok = dom.newton_project(spec, rng.normal(size=(50, n)) + 1j * rng.normal(size=(50, n)))
    for zz in z[ok]:
        y = f(zz)
        hess = spec.hess_at(zz)
        assert np.abs(y @ y - y).max() <= 1e-10
        assert np.abs(y @ hess + y).max() <= 1e-10
        assert H.trace(y) == pytest.approx(n - p - 1)
        assert np.abs(y @ spec.grad_at(zz)).max() <= 1e-9 * np.linalg.norm(spec.grad_at(zz))


def test_upsilon1_det_and_trace():
    rng = np.random.default_rng(4)
    f = U.upsilon1(GRAPH, 15.0)
    pts = random_graph_points(rng, 100, y_range=(15, 150))
    for z in pts:
        y = f(z)
        assert abs(H.det(y[:2, :2])) <= 1e-12
        r1, r2, D = U.graph_partials(GRAPH, z)
        tr = 4 * U.lam(z[0].imag) * (abs(r1) ** 2 + abs(r2) ** 2) / D**2
        assert H.trace(y) == pytest.approx(tr, abs=1e-12)
        ok, margin = H.is_range_01(y)
        # rank one: spectrum {0, 0, tr} with 0 < tr < 1, so the margin is exactly 0
        assert ok and abs(margin) <= 1e-15
        assert H.eigvalsh(y) == pytest.approx([0, 0, tr], abs=1e-12)
        assert 0 < tr < 1


def test_lambda_bracket_on_scan_range():
    ys = np.linspace(15, 150, 5000)
    assert U.lambda_bracket_ok(ys).all()
    assert U.lambda_bracket_ok(-ys).all()
    assert not U.lambda_bracket_ok(np.array([10.0]))[0]


def test_upsilon1_outside_region():
    f = U.upsilon1(GRAPH, 15.0)
    with pytest.raises(U.FieldDomainError):
        f(graph_point(0, 5, 0))
    with pytest.raises(U.FieldDomainError):
        # lambda > 1 when y^2 < 2/3
        f.evaluator(graph_point(0, 0.5, 0))


def test_upsilon2_trace_and_range():
    rng = np.random.default_rng(5)
    f = U.upsilon2(GRAPH)
    for z in random_graph_points(rng, 100, r_max=8.0):
        y = f(z)
        assert H.trace(y) == pytest.approx(1.0, abs=1e-12)
        assert H.is_psd(np.eye(3) - y - np.outer(np.conj(ev3 := dom.unit_normal(GRAPH.grad_at(z))), ev3),
                        tol=1e-10)[0]
        assert H.is_range_01(y, tol=1e-10)[0]


def test_upsilon2_at_origin():
    assert np.allclose(U.upsilon2(GRAPH)(np.zeros(3)), np.diag([0, 1, 0]), atol=1e-15)


def test_upsilon2_closed_form_matches_inversion():
    rng = np.random.default_rng(6)
    a, b = U.upsilon2(GRAPH), U.upsilon2(GRAPH, method="invert")
    for z in random_graph_points(rng, 50, r_max=4.0, y_range=(-10, 10)):
        assert np.abs(a(z) - b(z)).max() <= 1e-9


def test_frame_block_determinant_and_inverse_square():
    rng = np.random.default_rng(7)
    for z in random_graph_points(rng, 100, r_max=4.0, y_range=(-20, 20)):
        r1, r2, D = U.graph_partials(GRAPH, z)
        u = U.frame_block(r1, r2, D)
        assert abs(H.det(u) * D - 1) <= 1e-10
        assert np.allclose(u, dom.graph_frame_c3(GRAPH.grad_at(z))[:2, :2], atol=1e-15)
        ui = H.invert(u)
        expected = np.array([[1 + 4 * abs(r1) ** 2, 4 * r1 * np.conj(r2)],
                             [4 * np.conj(r1) * r2, 1 + 4 * abs(r2) ** 2]])
        assert np.allclose(ui @ ui.conj().T, expected, rtol=1e-9, atol=1e-9)


def test_fields_hermitian_and_tangent():
    rng = np.random.default_rng(8)
    fields = [U.upsilon1(GRAPH, 15.0), U.upsilon2(GRAPH), U.upsilon_patched(GRAPH, PARAMS)]
    pts = random_graph_points(rng, 1000, r_max=8.0, y_range=(-70, 70))
    for f in fields:
        for z in pts:
            if not f.valid(z):
                continue
            y = f(z)
            assert np.abs(y - y.conj().T).max() <= 1e-12
            g = GRAPH.grad_at(z)
            assert np.linalg.norm(y @ g) <= 1e-9 * np.linalg.norm(g)


def test_patched_reductions():
    f = U.upsilon_patched(GRAPH, PARAMS)
    far = graph_point(np.sqrt(2) * PARAMS.R1, 3.0, 0)
    assert np.all(f(far) == 0)
    for z in (graph_point(1.0, 0.0, 0.5j), graph_point(0, 10.0, 1.0), graph_point(2.0, -15.0, 0)):
        assert np.allclose(f(z), U.upsilon2(GRAPH)(z), atol=1e-15)
    for z in (graph_point(1.0, 30.0, 0.5), graph_point(0, -45.0, 2.0j)):
        assert np.allclose(f(z), U.upsilon1(GRAPH, PARAMS.Y1)(z), atol=1e-15)


def test_patched_eigenvalues_on_grid():
    f = U.upsilon_patched(GRAPH, PARAMS)
    worst = np.inf
    for x in np.linspace(-7, 7, 10):
        for y in np.linspace(-40, 40, 25):
            for a in np.linspace(-5, 5, 8):
                for b in np.linspace(-5, 5, 5):
                    worst = min(worst, H.is_range_01(f(graph_point(x, y, a + 1j * b)))[1])
    assert worst >= -1e-10


def test_patched_continuity():
    f = U.upsilon_patched(GRAPH, PARAMS)
    rng = np.random.default_rng(9)
    for z in random_graph_points(rng, 200, r_max=7.0, y_range=(-35, 35)):
        dz = 1e-6 * (rng.normal(size=2) + 1j * rng.normal(size=2)) / np.sqrt(8)
        z2 = graph_point(z[0].real + dz[0].real, z[0].imag + dz[0].imag, z[1] + dz[1])
        assert np.linalg.norm(f(z) - f(z2)) <= 1e-4


def test_patch_params_validation():
    with pytest.raises(ValueError):
        U.upsilon_patched(GRAPH, U.PatchParams(R0=3, R1=6, R2=7, Y1=15, Y2=30))
    with pytest.raises(ValueError):
        U.upsilon_patched(GRAPH, U.PatchParams(R0=3, R1=6, R2=6, Y1=30, Y2=15))


def test_choose_y1_scan():
    Y1 = U.choose_Y1()
    assert Y1 == 15
    assert U.default_patch_params() == PARAMS


def test_extension_restricts_to_boundary():
    spec = dom.quadric(3, 1)
    base = U.upsilon_quadric(3, 1)
    ext = U.extend_upsilon(base, spec, 0.1)
    z = np.array([1, 0, np.sqrt(2)])
    assert np.allclose(ext(z), base(z), atol=1e-12)


@pytest.mark.parametrize("case,expected", [("q_minus_trace_positive", 0.0), ("q_minus_trace_negative", 1.0)])
def test_extension_far_from_boundary(case, expected):
    spec = dom.ball(2)
    base = U.upsilon_zero(2)
    ext = U.extend_upsilon(base, spec, 0.1, case)
    assert np.allclose(ext(np.array([0.7, 0])), expected * np.eye(2))


def test_extension_near_quadric():
    spec = dom.quadric(3, 1)
    eps = 0.1
    ext = U.extend_upsilon(U.upsilon_quadric(3, 1), spec, eps)
    foot = np.array([1, 0, np.sqrt(2)])
    nu = dom.unit_normal(spec.grad_at(foot))
    for sign in (-1, 1):
        p = foot + sign * eps / 2 * nu
        y = ext(p)
        assert H.is_range_01(y, tol=1e-12)[0]
        grad_delta = U.extended_gradient(spec, p)
        assert np.linalg.norm(y @ grad_delta) <= 1e-8


def test_extension_bad_sign_case():
    with pytest.raises(ValueError):
        U.extend_upsilon(U.upsilon_zero(2), dom.ball(2), 0.1, "positive")
