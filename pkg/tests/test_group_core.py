import itertools

import pytest
from hypothesis import given, settings, strategies as st

from torus_growth.errors import ResourceLimit
from torus_growth.group_core import (T_GEN, GroupElement, SPoint, bfs_distances, bfs_spheres,
                                     evaluate_word, g_inv, g_mul, identity, min_word_length,
                                     parse_word, s_equiv, s_point_to_group, spheres_csv,
                                     word_to_type_height)
from torus_growth.polynomial_core import LaurentPoly, LaurentTuple

LETTERS = [(0, 1), (0, -1), (1, 1), (1, -1), (T_GEN, 1), (T_GEN, -1)]


def brute_spheres(setup, radius):
    """Distinct elements reached by words of each length, shortest first."""
    gens = [(0, 1), (0, -1), (T_GEN, 1), (T_GEN, -1)]
    seen = {}
    for n in range(radius + 1):
        for w in itertools.product(gens, repeat=n):
            g = evaluate_word(w, setup)
            seen.setdefault(g, n)
    counts = [0] * (radius + 1)
    for d in seen.values():
        counts[d] += 1
    return counts


def test_bfs_agrees_with_word_enumeration(sol):
    assert bfs_spheres(sol, 5) == brute_spheres(sol, 5)


def test_sol_small_spheres(sol):
    assert bfs_spheres(sol, 4) == [1, 4, 12, 36, 100]


def test_bfs_cap():
    from conftest import SOL
    from torus_growth.matrix_algebra import prepare
    with pytest.raises(ResourceLimit) as err:
        bfs_spheres(prepare(SOL)[1], 12, cap=500)
    assert err.value.count > 500


def test_parse_word():
    assert parse_word("a1 t a2^-1 t^-1") == [(0, 1), (T_GEN, 1), (1, -1), (T_GEN, -1)]
    for bad in ["a0", "b1", "t^2"]:
        with pytest.raises(ValueError):
            parse_word(bad)


def test_type_of_word(sol):
    # a t a t^-1 : a at height 0, then a at height 1
    p = word_to_type_height([(0, 1), (T_GEN, 1), (0, 1), (T_GEN, -1)], 1)
    assert p.h == 0
    assert p.t == LaurentTuple((LaurentPoly({0: 1, 1: 1}),))
    assert min_word_length(p) == 4 and p.weight == 5


def test_s_equiv_modulo_p(sol):
    p = sol.blocks[0].to_laurent()
    t = LaurentTuple((LaurentPoly({0: 2, 3: -1}),))
    q = LaurentTuple((t[0] + p * LaurentPoly({-1: 1}),))
    assert s_equiv(SPoint(t, 2), SPoint(q, 2), sol.blocks)
    assert not s_equiv(SPoint(t, 2), SPoint(q, 1), sol.blocks)
    assert s_point_to_group(SPoint(t, 2), sol) == s_point_to_group(SPoint(q, 2), sol)


def test_spheres_csv():
    text = spheres_csv([1, 4, 12], "# x=1\n")
    assert text == "# x=1\nn,sphere,ball\n0,1,1\n1,4,5\n2,12,17\n"


elements = st.builds(lambda a, b, h: GroupElement((a, b), h),
                     st.integers(-20, 20), st.integers(-20, 20), st.integers(-4, 4))
words = st.lists(st.sampled_from(LETTERS[:2] + LETTERS[4:]), max_size=12)


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_group_axioms(sol, x, y, z):
    assert g_mul(g_mul(x, y, sol), z, sol) == g_mul(x, g_mul(y, z, sol), sol)
    assert g_mul(x, g_inv(x, sol), sol) == identity(2)
    assert g_mul(identity(2), x, sol) == x


@settings(max_examples=60, deadline=None)
@given(words)
def test_type_evaluates_to_word(sol, w):
    p = word_to_type_height(w, 1)
    assert s_point_to_group(p, sol) == evaluate_word(w, sol)
    # no word is shorter than the lower bound attached to its own type
    assert len(w) >= min_word_length(p)


@settings(max_examples=30, deadline=None)
@given(words)
def test_bfs_distance_is_at_most_word_length(sol, w):
    g = evaluate_word(w, sol)
    dist = bfs_distances(sol, min(len(w), 7))
    if len(w) <= 7:
        assert dist[(g.v, g.h)] <= len(w)
