import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvi_holonomy.elliptic_curve import Periods
from pvi_holonomy.orbifold_group import (
    IDENTITY,
    RELATORS,
    NormalForm,
    affine_oracle,
    insert_relator,
    kernel_commutator,
    kernel_commutators_random,
    parity,
    realize,
    reduce,
    relation_invariance_exhaustive,
    relation_invariance_random,
)
from pvi_holonomy.variational_systems import closed_form_T

words = st.text(alphabet="abc", max_size=16)
P = Periods(-0.927 - 0.927j, -0.927 + 0j)


def test_examples():
    assert reduce("aa") == IDENTITY
    assert reduce("abcabc") == IDENTITY
    assert reduce("ab") == NormalForm(-1, 0, 1) == affine_oracle("ab")
    assert parity("") == 0 and parity("abc") == 1
    assert kernel_commutator("ab", "ac").is_identity
    assert kernel_commutator("abca", "abca").is_identity


def test_bad_input():
    with pytest.raises(ValueError):
        reduce("abd")
    with pytest.raises(ValueError):
        kernel_commutator("a", "bc")
    with pytest.raises(ValueError):
        NormalForm(0, 0, 2)


@settings(max_examples=300, deadline=None)
@given(words)
def test_matches_affine_oracle(w):
    assert reduce(w) == affine_oracle(w)
    assert reduce(w).parity == parity(w)


@settings(max_examples=300, deadline=None)
@given(words, words)
def test_homomorphism(u, v):
    assert reduce(u + v) == reduce(u) * reduce(v)
    Mu, Mv = realize(reduce(u), P), realize(reduce(v), P)
    assert np.allclose(realize(reduce(u + v), P), Mu @ Mv, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(words, st.sampled_from(RELATORS), st.integers(0, 16))
def test_relator_insertion(w, rel, pos):
    pos = min(pos, len(w))
    assert reduce(insert_relator(w, rel, pos)) == reduce(w)
    assert parity(insert_relator(w, rel, pos)) == parity(w)


def test_relation_invariance_small_exhaustive():
    rep = relation_invariance_exhaustive(6)
    assert rep.passed and rep.words == sum(3**n for n in range(7))


def test_even_image_is_commutative_and_index_two():
    evens = {reduce("".join(w)) for n in (0, 2, 4, 6) for w in itertools.product("abc", repeat=n)}
    assert all(g.eps == 1 for g in evens)
    for g, h in itertools.product(list(evens)[:30], repeat=2):
        assert g * h == h * g
    odd = reduce("a")
    assert all((odd * g).eps == -1 for g in evens)


def test_inverse_and_letters_involutive():
    for ch in "abc":
        assert reduce(ch) * reduce(ch) == IDENTITY
    g = reduce("abcab")
    assert g * g.inverse() == IDENTITY


def test_realize_matches_closed_form():
    T = closed_form_T(0.5, P)
    for ch, key in zip("abc", ("T0", "T1", "Tc")):
        assert np.array_equal(realize(reduce(ch), P), T[key].matrix)


def test_random_checks():
    assert relation_invariance_random(500, seed=2).passed
    assert kernel_commutators_random(200, seed=2).passed
