import cmath

import numpy as np
import pytest

from pvi_holonomy.analytic_paths import ArcSegment, Loop, Path
from pvi_holonomy.elliptic_curve import fundamental_periods, generator_loops
from pvi_holonomy.monodromy_engine import (
    LinearSystemOnSphere,
    MonodromyRep,
    check_virtual_commutativity,
    deviation_from_identity,
    e1_on_sphere,
    e1_normalized_generators,
    e2_on_sphere,
    monodromy_representation,
    numeric_monodromy,
    sample_words,
    to_right_normalization,
    trace_integral,
    triangular_e2_on_sphere,
)
from pvi_holonomy.pvi_model import derive_parameters

C = 0.5
PARAMS = derive_parameters(1 / 3, 1 / 5, 1 / 7, 1 / 2)
E1 = e1_on_sphere(C)


@pytest.fixture(scope="module")
def e1_rep():
    return monodromy_representation(E1)


@pytest.fixture(scope="module")
def e2_rep():
    return monodromy_representation(e2_on_sphere(C, PARAMS))


def test_contractible_loop():
    p = 0.3 + 0.4j
    loop = Loop(Path((ArcSegment(p - 0.1, 0.1, 0.0, 2 * np.pi),)), p)
    assert deviation_from_identity(numeric_monodromy(E1, loop)) < 1e-10


def test_there_and_back(e1_rep):
    lp = e1_rep.loops["1"]
    M = numeric_monodromy(E1, lp.then(lp.inverse()))
    assert deviation_from_identity(M) < 1e-10


def test_squares_and_infinity(e1_rep):
    for m in e1_rep.matrices.values():
        assert deviation_from_identity(m @ m) < 1e-8
    assert deviation_from_identity(np.linalg.matrix_power(e1_rep.word("01c"), 2)) < 1e-8
    twice = e1_rep.loops["0"].then(e1_rep.loops["0"])
    assert deviation_from_identity(numeric_monodromy(E1, twice)) < 1e-8


def test_determinant_law(e1_rep):
    for key, lp in e1_rep.loops.items():
        det = np.linalg.det(e1_rep.matrices[key])
        assert abs(det - cmath.exp(trace_integral(E1, lp))) < 1e-9
        assert abs(det + 1) < 1e-9


def test_commutator_of_even_loops(e1_rep):
    L = e1_rep.loops
    a, b = L["0"].then(L["1"]), L["0"].then(L["c"])
    comm = a.then(b).then(a.inverse()).then(b.inverse())
    assert deviation_from_identity(numeric_monodromy(E1, comm)) < 1e-8


def test_right_normalization_basics():
    X = np.array([[1, 2], [3, 5]], dtype=complex)
    assert np.allclose(to_right_normalization(np.eye(2), X), np.eye(2))
    M = np.array([[2, 1], [0.5, -1]], dtype=complex)
    T = to_right_normalization(M, X)
    assert abs(np.trace(T) - np.trace(M)) < 1e-12
    assert abs(np.linalg.det(T) - np.linalg.det(M)) < 1e-12
    with pytest.raises(np.linalg.LinAlgError):
        to_right_normalization(M, np.zeros((2, 2)))


@pytest.mark.parametrize("c", [0.5, 2, 1 + 1j])
def test_closed_form_generators(c):
    P = fundamental_periods(c)
    T = e1_normalized_generators(c)
    assert np.allclose(T["T0"], [[-1, 0], [0, 1]], atol=1e-7)
    assert np.allclose(T["T1"], [[-1, 0], [P.pi1, 1]], atol=1e-7)
    assert np.allclose(T["Tc"], [[-1, 0], [P.pi2, 1]], atol=1e-7)


def test_alpha0_tends_to_zero_like_sqrt_p():
    vals = []
    radii = (1 / 8, 1 / 32, 1 / 128)
    P = fundamental_periods(C)
    for rho in radii:
        T = e1_normalized_generators(C, basepoint=1j * rho, limit=False)
        vals.append(abs(T["T0"][1, 0]))
        assert abs(T["T1"][1, 0] - T["T0"][1, 0] - P.pi1) < 1e-9
    assert vals[0] > vals[1] > vals[2]
    ratios = [vals[i] / vals[i + 1] for i in range(2)]
    assert all(abs(r - 2) < 0.15 for r in ratios)


def test_basepoint_independence(e1_rep):
    other = monodromy_representation(E1, basepoint=-0.2 + 0.3j)
    for word in ("0", "01", "1c0c", "01c01"):
        assert abs(np.trace(e1_rep.word(word)) - np.trace(other.word(word))) < 1e-8


def test_e2_rep(e2_rep):
    for m in e2_rep.matrices.values():
        assert deviation_from_identity(m @ m) < 1e-6
    assert np.allclose(e2_rep.matrices["0"][:2, :2],
                       monodromy_representation(E1).matrices["0"], atol=1e-9)


def test_triangular_rep_is_conjugate(e2_rep):
    tri = monodromy_representation(triangular_e2_on_sphere(C, PARAMS))
    for k in tri.matrices:
        assert abs(np.trace(tri.matrices[k] @ tri.matrices[k]) - 4) < 1e-6


def test_virtual_commutativity(e1_rep, e2_rep):
    r1 = check_virtual_commutativity(e1_rep, 12, 200, seed=0, tol=1e-7)
    assert r1.passed and r1.witness is None
    r2 = check_virtual_commutativity(e2_rep, 8, 100, seed=0, tol=1e-5)
    assert r2.passed
    again = check_virtual_commutativity(e2_rep, 8, 100, seed=0, tol=1e-5)
    assert again == r2


def test_free_group_control():
    A = np.array([[1, 1], [0, 1]], dtype=complex)
    B = np.array([[1, 0], [1, 1]], dtype=complex)
    rep = MonodromyRep(0j, {}, {"a": A, "b": B})
    r = check_virtual_commutativity(rep, 6, 50, seed=1, tol=1e-7)
    assert not r.passed and r.witness is not None


def test_word_sampling():
    pairs = sample_words("01c", 8, 50, seed=3)
    assert all(len(u) % 2 == 0 and len(v) % 2 == 0 and 2 <= len(u) <= 8 for u, v in pairs)
    assert pairs == sample_words("01c", 8, 50, seed=3)
    odd = sample_words("01c", 7, 20, seed=3, parity="odd")
    assert all(len(u) % 2 == 1 for u, _ in odd)


def test_generic_system_without_c():
    sys_ = LinearSystemOnSphere((0j, 1 + 0j, 2 + 0j), 1, lambda lam, y: np.array([[0.25 / lam]]))
    rep = monodromy_representation(sys_, basepoint=1 + 1j)
    assert abs(rep.matrices["0"][0, 0] - 1j) < 1e-10
    assert abs(rep.matrices["1"][0, 0] - 1) < 1e-10
