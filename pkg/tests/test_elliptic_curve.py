import math

import numpy as np
import pytest

from pvi_holonomy.analytic_paths import ArcSegment, Loop, Path, QuadratureError
from pvi_holonomy.elliptic_curve import (
    CurveForm,
    EllipticCurve,
    Periods,
    ResidueError,
    agm_period_oracle,
    complete_k,
    default_basepoint,
    fundamental_periods,
    generator_loops,
    holomorphic_form,
    legendre_pairing,
    lift_loop,
    make_cycle,
    period_of_form,
    reference_branch,
    residues_on_curve,
)
from pvi_holonomy.analytic_paths import GeometryError


def test_complete_k_known_value():
    # K(1/2) = Gamma(1/4)^2 / (4 sqrt(pi))
    assert complete_k(0.5) == pytest.approx(math.gamma(0.25) ** 2 / (4 * math.sqrt(math.pi)), rel=1e-15)


def test_period_agm_oracle():
    P = fundamental_periods(0.5)
    assert abs(P.pi1 - agm_period_oracle(0.5)) < 1e-10
    assert abs(P.tau.imag) > 0.1


@pytest.mark.parametrize("c", [2, 1 + 1j, -0.7 + 0.3j])
def test_doubled_depth(c):
    a = fundamental_periods(c)
    b = fundamental_periods(c, min_panels=2)
    assert abs(a.pi1 - b.pi1) < 1e-11 and abs(a.pi2 - b.pi2) < 1e-11


def test_deformation_invariance():
    c = 0.5
    a = fundamental_periods(c)
    b = fundamental_periods(c, basepoint=0.2j, radius_factor=0.25)
    assert abs(a.pi1 - b.pi1) < 1e-10 and abs(a.pi2 - b.pi2) < 1e-10


def test_degenerate_curve():
    with pytest.raises(GeometryError):
        EllipticCurve(1)
    with pytest.raises(GeometryError):
        Periods(1 + 0j, 2 + 0j)


def test_contractible_loop_gives_zero():
    c = 0.5
    p = default_basepoint(c)
    loop = Path((ArcSegment(p - 0.05, 0.05, 0.0, 2 * math.pi),))
    br = reference_branch(c, loop.start)
    from pvi_holonomy.analytic_paths import integrate_form
    assert abs(integrate_form(holomorphic_form(c), loop, br).value) < 1e-13


def test_exact_form_over_cycle():
    curve = EllipticCurve(0.5)
    dh = CurveForm(lambda lam, y: 0.5 / (lam - 0.5) ** 2, "dh")
    for cid in ("cycle01", "cycle0c"):
        assert abs(period_of_form(curve, dh, make_cycle(curve, cid))) < 1e-10


def test_period_of_form_matches_fundamental():
    curve = EllipticCurve(2)
    P = fundamental_periods(2)
    val = period_of_form(curve, holomorphic_form(2), make_cycle(curve, "cycle01"))
    assert abs(val - P.pi1) < 1e-13


def test_residue_guard():
    curve = EllipticCurve(0.5)
    fake = CurveForm(lambda lam, y: 1 / lam, "dlog", residue_free=True)
    with pytest.raises(ResidueError):
        period_of_form(curve, fake, make_cycle(curve, "cycle01"))
    res = residues_on_curve(curve, holomorphic_form(0.5))
    assert max(abs(v) for v in res.values()) < 1e-12


def test_lift_closure():
    c = 0.5
    curve = EllipticCurve(c)
    loops = generator_loops(c)
    assert not lift_loop(curve, loops["0"]).closes
    assert lift_loop(curve, loops["0"].then(loops["1"])).closes
    for lp in loops.values():
        assert lift_loop(curve, lp.then(lp)).closes


def test_legendre_pairing_oriented():
    values = [legendre_pairing(c).normalized for c in (0.5, 2, 1 + 1j)]
    for v in values:
        assert abs(v - 2j * math.pi) < 1e-8
    # the pairing itself moves with c
    raw = [legendre_pairing(c).raw for c in (0.5, 2)]
    assert abs(raw[0] - raw[1]) > 1


def test_default_basepoint_clear_of_real_segment():
    assert default_basepoint(0.5) == pytest.approx(0.125j)
    assert default_basepoint(2) == pytest.approx(0.25j)
