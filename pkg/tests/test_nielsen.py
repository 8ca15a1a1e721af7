"""Automorphisms of the free group and their two coefficient actions."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autfplus.nielsen import (
    act_coeff,
    basis_vector,
    compose,
    det_int,
    from_images,
    identity_aut,
    induced_matrix,
    is_special,
    monomial_aut,
    monomial_letter_perm,
    nielsen_aut,
)
from autfplus.words import inverse, multiply, reduce_word

N = 4


def matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def rand_aut(rng, n=N):
    s = identity_aut(n)
    for _ in range(rng.randrange(1, 6)):
        a = rng.randrange(1, n + 1)
        b = rng.choice([x for x in range(1, n + 1) if x != a])
        s = s.compose(nielsen_aut(n, a, rng.choice([b, -b])))
    return s


def test_nielsen_images():
    e = nielsen_aut(N, 1, 2)
    assert e.apply((1,)) == (1, 2)
    assert e.apply((2,)) == (2,)
    assert e.apply((-1,)) == (-2, -1)
    assert nielsen_aut(N, 1, -2).apply((1,)) == (1, -2)
    with pytest.raises(ValueError):
        nielsen_aut(N, 1, 1)


def test_compose_reads_left_to_right():
    s, t = nielsen_aut(N, 1, 2), nielsen_aut(N, 2, 3)
    st_ = s.compose(t)
    w = (1, -2)
    assert st_.apply(w) == t.apply(s.apply(w))


def test_inverse_roundtrip():
    rng = random.Random(3)
    for _ in range(50):
        s = rand_aut(rng)
        assert s.compose(s.inverse()).is_identity()
        w = tuple(rng.choice([1, -1, 2, -3, 4]) for _ in range(6))
        w = reduce_word(w)
        assert s.apply_inverse(s.apply(w)) == w


def test_apply_is_homomorphism():
    rng = random.Random(5)
    for _ in range(40):
        s = rand_aut(rng)
        u = reduce_word(tuple(rng.choice([1, 2, -2, 3, -4]) for _ in range(5)))
        v = reduce_word(tuple(rng.choice([-1, 2, 3, -3, 4]) for _ in range(5)))
        assert s.apply(multiply(u, v)) == multiply(s.apply(u), s.apply(v))
        assert s.apply(inverse(u)) == reduce_word(inverse(s.apply(u)))


def test_induced_matrix_antihomomorphism_under_left_to_right():
    # columns of the matrix list images in the abelianization, so
    # composing words left-to-right multiplies matrices right-to-left
    rng = random.Random(11)
    for _ in range(40):
        s, t = rand_aut(rng), rand_aut(rng)
        assert induced_matrix(s.compose(t)) == matmul(induced_matrix(t), induced_matrix(s))


def test_monomial_images_and_letter_perm():
    w = monomial_aut(N, 1, 2)
    assert w.apply((1,)) == (-2,)
    assert w.apply((2,)) == (1,)
    assert w.apply((3,)) == (3,)
    for c in (1, 2, -1, -2, 3, -4):
        assert w.apply((c,)) == (monomial_letter_perm(1, 2, c),)
    # the square inverts both letters of the pair
    w2 = w.compose(w)
    assert w2.apply((1,)) == (-1,) and w2.apply((2,)) == (-2,)


def test_determinants_and_specialness():
    assert det_int(induced_matrix(identity_aut(N))) == 1
    assert is_special(nielsen_aut(N, 2, -3))
    assert is_special(monomial_aut(N, 1, 2))  # signed transposition: det (-1)*(-1)
    flip = from_images(
        N,
        [(-1,), (2,), (3,), (4,)],
        [(-1,), (2,), (3,), (4,)],
    )
    assert det_int(induced_matrix(flip)) == -1
    assert not is_special(flip)


def test_coeff_action_conventions():
    e = nielsen_aut(N, 1, 2)
    # H: act by the matrix of the inverse automorphism
    assert act_coeff(e, basis_vector("H", 1, N), N).coords == (1, -1, 0, 0)
    assert act_coeff(e, basis_vector("H", 2, N), N).coords == (0, 1, 0, 0)
    # dual: act by the transpose of the matrix of the automorphism itself
    assert act_coeff(e, basis_vector("Hdual", 2, N), N).coords == (1, 1, 0, 0)
    assert act_coeff(e, basis_vector("Hdual", 1, N), N).coords == (1, 0, 0, 0)


def test_coeff_action_is_homomorphism():
    rng = random.Random(17)
    for space in ("H", "Hdual"):
        for _ in range(25):
            s, t = rand_aut(rng), rand_aut(rng)
            v = basis_vector(space, rng.randrange(1, N + 1), N)
            via_compose = act_coeff(s.compose(t), v, N)
            stepwise = act_coeff(s, act_coeff(t, v, N), N)
            assert via_compose == stepwise


def test_basis_vector_validation():
    with pytest.raises(AssertionError):
        basis_vector("bogus", 1, N)
