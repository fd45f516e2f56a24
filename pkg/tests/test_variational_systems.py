import cmath

import numpy as np
import pytest

from pvi_holonomy.analytic_paths import Path, continue_sqrt, integrate_form, ode_continue
from pvi_holonomy.elliptic_curve import Periods, default_basepoint, reference_branch
from pvi_holonomy.pvi_model import derive_parameters, eval_polys
from pvi_holonomy.variational_systems import (
    TriangularE2,
    build_e1,
    build_e2,
    closed_form_T,
    closed_form_X,
    mon1_coordinates,
    triangularize,
)

C = 0.5
PARAMS = derive_parameters(1 / 3, 1 / 5, 1 / 7, 1 / 2)
rng = np.random.default_rng(7)
SAMPLES = rng.normal(size=6) + 1j * rng.normal(size=6)


def test_e1_coefficients():
    e1 = build_e1(C)
    assert abs(1e-7 * e1.a(1e-7) - 0.5) < 1e-6
    for lam in SAMPLES:
        E = lam * (lam - 1) * (lam - C)
        assert abs(e1.b(lam) * 2 * E - C * (C - 1)) < 1e-12
        m = e1.matrix(lam)
        assert m[0, 0] == 0 and m[1, 0] == 0


def test_degenerate_c():
    with pytest.raises(ValueError):
        build_e1(0)


def _path_and_branch():
    p = default_basepoint(C)
    path = Path.polyline([p, 0.3 + 0.3j, 0.8 + 0.2j])
    return p, path, reference_branch(C, p)


def test_closed_form_X_basics():
    p, path, br = _path_and_branch()
    X0 = closed_form_X(C, p, p, br)
    assert np.allclose(X0, [[0, 1], [br.y, 0]])
    X = closed_form_X(C, p, path.end, br, path)
    end = continue_sqrt(br, path)
    assert abs(np.linalg.det(X) + end.y) < 1e-12
    # Wronskian: det X(lam)/det X(p) = exp int a
    a = integrate_form(lambda lam, y: build_e1(C).a(lam), path).value
    assert abs(np.linalg.det(X) / np.linalg.det(X0) - cmath.exp(a)) < 1e-9


def test_closed_form_X_solves_e1():
    p, path, br = _path_and_branch()
    X0 = closed_form_X(C, p, p, br)
    X = closed_form_X(C, p, path.end, br, path)
    Xode = ode_continue(build_e1(C).matrix, path, X0)
    assert np.max(np.abs(X - Xode)) < 1e-9


def test_closed_form_T_algebra():
    P = Periods(-0.927 - 0.927j, -0.927 + 0j)
    T = {k: v.matrix for k, v in closed_form_T(C, P).items()}
    for m in T.values():
        assert np.array_equal(m @ m, np.eye(2))
    assert np.allclose(T["T0"] @ T["T1"], [[1, 0], [P.pi1, 1]])
    w = T["T1"] @ T["Tc"] @ T["T0"] @ T["T1"] @ T["T1"]
    pcoord = mon1_coordinates(w, P)
    assert pcoord[2] == -1
    # word product in (p, q, sign) arithmetic
    a = mon1_coordinates(T["T1"] @ T["Tc"], P)
    b = mon1_coordinates(T["T0"] @ T["T1"], P)
    ab = mon1_coordinates(T["T1"] @ T["Tc"] @ T["T0"] @ T["T1"], P)
    assert ab == (a[0] + a[2] * b[0], a[1] + a[2] * b[1], a[2] * b[2])


def test_mon1_rejects_off_lattice():
    P = Periods(1 + 0j, 1j)
    with pytest.raises(ValueError):
        mon1_coordinates(np.array([[-1, 0], [0.5, 1]]), P)


def test_e2_coefficients():
    e2 = build_e2(C, PARAMS)
    e1 = build_e1(C)
    for lam in SAMPLES:
        k = e2.coefficients(lam)
        E, F, _, _ = eval_polys(C, lam, PARAMS)
        assert abs(k["f"] * 4 * E**2 + C * (C - 1) * F) < 1e-10 * max(1, abs(F))
        m = e2.matrix(lam)
        assert abs(m[2, 3] - e1.b(lam)) < 1e-13 and abs(m[3, 3] - 2 * e1.a(lam)) < 1e-13
        assert np.allclose(m[:2, :2], e1.matrix(lam))


def test_e2_quadratic_rows():
    # (u1, v1) = (xi1 eta1, xi1^2) from an E1 solution solves rows 3-4
    p, path, br = _path_and_branch()
    e1, e2 = build_e1(C), build_e2(C, PARAMS)
    s = np.linspace(0, 1, 7)[1:-1]
    seg = path.segments[1]
    start = ode_continue(e1.matrix, Path(path.segments[:1]), np.array([[0.3], [0.7]]))
    for si in s:
        sub = Path.line(seg.start, seg.point(si))
        x = ode_continue(e1.matrix, sub, start)[:, 0]
        lam = complex(seg.point(si))
        eta, xi = x
        deta, dxi = e1.matrix(lam) @ x
        u, v = xi * eta, xi * xi
        du, dv = dxi * eta + xi * deta, 2 * xi * dxi
        rows = e2.matrix(lam)[2:, 2:] @ np.array([u, v])
        assert abs(du - rows[0]) < 1e-9 and abs(dv - rows[1]) < 1e-9


def test_triangular_forms():
    tri = triangularize(build_e2(C, PARAMS))
    for lam in SAMPLES:
        y = complex(np.sqrt(lam * (lam - 1) * (lam - C)))
        assert tri.forms[(2, 3)](lam, y) == tri.forms[(0, 1)](lam, y)
        J = tri.matrix(lam, y)
        assert np.all(np.tril(J) == 0)
        assert np.allclose(np.linalg.matrix_power(J, 4), 0)


def test_triangular_gauge_solves_linear2():
    p, path, br = _path_and_branch()
    e2 = build_e2(C, PARAMS)
    tri = triangularize(e2)
    W = ode_continue(e2.matrix, path, np.eye(4))
    end = continue_sqrt(br, path)
    Z = TriangularE2.gauge(path.end, end.y, C) @ W @ np.linalg.inv(TriangularE2.gauge(p, br.y, C))
    Zt = ode_continue(tri.matrix, path, np.eye(4), branch=br)
    assert np.max(np.abs(Z - Zt)) < 1e-9
