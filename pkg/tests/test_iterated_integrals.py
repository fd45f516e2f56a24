import numpy as np
import pytest

from pvi_holonomy.analytic_paths import BranchError, Path, integrate_form
from pvi_holonomy.elliptic_curve import (
    EllipticCurve,
    default_basepoint,
    generator_loops,
    lift_loop,
    make_cycle,
    reference_branch,
)
from pvi_holonomy.iterated_integrals import (
    FormWord,
    Signature,
    chen_concatenate,
    e2_monodromy_iterated,
    elliptic_reduction,
    h_function,
    iterated_integral,
    iterated_integral_ode,
    path_signature,
    reduce_exact,
    y_matrix,
)
from pvi_holonomy.analytic_paths import ode_continue
from pvi_holonomy.pvi_model import derive_parameters
from pvi_holonomy.variational_systems import build_e2, triangularize

C = 0.5
PARAMS = derive_parameters(1 / 3, 1 / 5, 1 / 7, 1 / 2)
TRI = triangularize(build_e2(C, PARAMS))
CURVE = EllipticCurve(C)


def random_form(rng):
    poles = 3 + rng.normal(size=2) + 1j * rng.normal(size=2)
    res = rng.normal(size=2) + 1j * rng.normal(size=2)
    poly = rng.normal(size=2) + 1j * rng.normal(size=2)
    return lambda lam, y: res[0] / (lam - poles[0]) + res[1] / (lam - poles[1]) + poly[0] + poly[1] * lam


def random_path(rng, n=3):
    pts = rng.uniform(-1, 1, size=n) + 1j * rng.uniform(-1, 1, size=n)
    return Path.polyline(list(pts))


def test_length_one_matches_integrate_form():
    f = lambda lam, y: 1 / (lam + 3)  # noqa: E731
    path = Path.line(0, 1 + 1j)
    assert abs(iterated_integral([f], path) - integrate_form(f, path).value) < 1e-15


def test_dlam_dlam():
    one = lambda lam, y: 1 + 0 * lam  # noqa: E731
    assert abs(iterated_integral([one, one], Path.line(0, 1)) - 0.5) < 1e-14
    assert abs(iterated_integral([one, one, one], Path.line(0, 1)) - 1 / 6) < 1e-14


def test_word_length_bounds():
    with pytest.raises(ValueError):
        FormWord(())
    with pytest.raises(ValueError):
        FormWord((1, 2, 3, 4))


def test_shuffle_identity_random():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(30):
        f, g = random_form(rng), random_form(rng)
        sig, _ = path_signature([f, g], random_path(rng))
        worst = max(worst, abs(sig.s2[0, 1] + sig.s2[1, 0] - sig.s1[0] * sig.s1[1]))
    assert worst < 1e-10


def test_nesting_convention_matches_ode_oracle():
    rng = np.random.default_rng(5)
    forms = [random_form(rng) for _ in range(3)]
    path = random_path(rng, 4)
    sig, _ = path_signature(forms, path)
    for word in ((0, 1), (1, 0), (2, 0, 1), (0, 0, 2)):
        direct = iterated_integral_ode([forms[i] for i in word], path)
        assert abs(sig.word(word) - direct) < 1e-9


def test_chen_matches_direct_on_split_path():
    rng = np.random.default_rng(9)
    forms = [random_form(rng) for _ in range(3)]
    a = Path.polyline([0, 0.5j, 0.5 + 0.5j])
    b = Path.polyline([0.5 + 0.5j, 0.9, -0.3 - 0.4j])
    sa, _ = path_signature(forms, a)
    sb, _ = path_signature(forms, b)
    whole, _ = path_signature(forms, a + b)
    assert chen_concatenate(sa, sb).max_diff(whole) < 1e-12
    for word in ((1,), (2, 0), (0, 1, 2)):
        direct = iterated_integral_ode([forms[i] for i in word], a + b)
        assert abs(chen_concatenate(sa, sb).word(word) - direct) < 1e-9


def test_chen_with_constant_path():
    rng = np.random.default_rng(2)
    forms = [random_form(rng) for _ in range(2)]
    s, _ = path_signature(forms, random_path(rng))
    assert chen_concatenate(s, Signature.identity(2)).max_diff(s) == 0
    assert chen_concatenate(Signature.identity(2), s).max_diff(s) == 0


def test_y_matrix_identity_and_shape():
    p = default_basepoint(C)
    br = reference_branch(C, p)
    assert np.array_equal(y_matrix(TRI, Path(()), br).matrix, np.eye(4))
    path = Path.polyline([p, 0.3 + 0.3j, 0.8 + 0.2j])
    Y = y_matrix(TRI, path, br).matrix
    assert np.all(np.diag(Y) == 1) and np.all(np.tril(Y, -1) == 0)
    Yode = ode_continue(TRI.matrix, path, np.eye(4), branch=br)
    assert np.max(np.abs(Y - Yode)) < 1e-8


def test_reduce_exact():
    p = default_basepoint(C)
    br = reference_branch(C, p)
    path = Path.polyline([p, 0.3 + 0.3j, 0.8 + 0.2j, 0.9 - 0.3j])
    rec = reduce_exact(TRI, TRI.forms[(0, 1)], path, br)
    assert abs(rec.difference) < 1e-10
    zero = reduce_exact(TRI, lambda lam, y: 0 * lam, path, br)
    assert zero.lhs == 0 and zero.rhs == 0


def test_omega23_is_dh():
    h = h_function(C)
    rng = np.random.default_rng(4)
    for lam in rng.normal(size=5) + 1j * rng.normal(size=5):
        step = 1e-5
        dh = (h(lam + step) - h(lam - step)) / (2 * step)
        assert abs(TRI.forms[(1, 2)](lam, None) - dh) < 1e-9


def _lifted(cid):
    cy = make_cycle(CURVE, cid)
    return cy, lift_loop(CURVE, cy.loop, cy.branch)


def test_iterated_monodromy_requires_closed_lift():
    loops = generator_loops(C)
    lf = lift_loop(CURVE, loops["0"])
    with pytest.raises(BranchError):
        e2_monodromy_iterated(TRI, lf)


def test_contractible_and_commutator():
    a, la = _lifted("cycle01")
    b, lb = _lifted("cycle0c")
    back = a.loop.then(a.loop.inverse())
    assert np.max(np.abs(e2_monodromy_iterated(TRI, lift_loop(CURVE, back, a.branch)) - np.eye(4))) < 1e-9
    comm = a.loop.then(b.loop).then(a.loop.inverse()).then(b.loop.inverse())
    M = e2_monodromy_iterated(TRI, lift_loop(CURVE, comm, a.branch))
    assert np.max(np.abs(M - np.eye(4))) < 1e-6
    # homomorphism on closed lifts
    Ma, Mb = e2_monodromy_iterated(TRI, la), e2_monodromy_iterated(TRI, lb)
    Mab = e2_monodromy_iterated(TRI, lift_loop(CURVE, a.loop.then(b.loop), a.branch))
    assert np.max(np.abs(Mb @ Ma - Mab)) < 1e-7
    Mode = ode_continue(TRI.matrix, a.loop.path, np.eye(4), branch=a.branch)
    assert np.max(np.abs(Mode - Ma)) < 1e-7


@pytest.mark.parametrize("cid", ["cycle01", "cycle0c"])
def test_elliptic_reduction(cid):
    _, lf = _lifted(cid)
    for pred in elliptic_reduction(TRI, lf).values():
        assert pred.deviation < 1e-6


@pytest.mark.parametrize("c", [0.5, 2, 1 + 1j])
def test_omega_bar_period(c):
    curve = EllipticCurve(c)
    tri = triangularize(build_e2(c, PARAMS))
    co = tri.system.coefficients
    h = h_function(c)

    def bar(lam, y):
        k = co(lam)
        return (-2 * h(lam) * k["b"] + k["d"] - k["g"]) * y

    for cid in ("cycle01", "cycle0c"):
        cy = make_cycle(curve, cid)
        lhs = integrate_form(bar, cy.loop.path, cy.branch).value
        first = integrate_form(lambda lam, y: 1 / y, cy.loop.path, cy.branch).value
        assert abs(lhs - (1 - 2 * c) / 2 * first) < 1e-8
