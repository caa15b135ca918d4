import itertools
import re

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from torus_growth.errors import CoefficientOverflow
from torus_growth.language_machinery import (PAD, LambdaWord, Letter, PairLetter, RationalSeries,
                                             WeightedFSA, alphabet, build_lambda_fsa, build_r,
                                             build_r_prime, count_by_weight, growth_series, psi,
                                             psi_inverse_canonical, regular_ops)
from torus_growth.polynomial_core import IntPoly, LaurentPoly, LaurentTuple


def regex_fsa(pattern, alphabet="01"):
    """Tiny DFA for a regex: states are the word read so far, cut to 6 letters."""
    def step(s, x):
        return s + x if len(s) < 8 else None
    return WeightedFSA(list(alphabet), "", step, lambda s: re.fullmatch(pattern, s) is not None)


def all_words(n, alphabet="01"):
    for m in range(n + 1):
        for w in itertools.product(alphabet, repeat=m):
            yield "".join(w)


EVEN = WeightedFSA(["0", "1"], 0, lambda s, x: s ^ (x == "1"), lambda s: s == 0)
ENDS1 = WeightedFSA(["0", "1"], 0, lambda s, x: int(x == "1"), lambda s: s == 1)


@pytest.mark.parametrize("op,pattern", [
    ("union", lambda w: w.count("1") % 2 == 0 or w.endswith("1")),
    ("intersection", lambda w: w.count("1") % 2 == 0 and w.endswith("1")),
])
def test_boolean_ops(op, pattern):
    f = regular_ops(op, EVEN, ENDS1)
    for w in all_words(7):
        assert f.accepts(w) == pattern(w), w


def test_complement():
    f = regular_ops("complement", ENDS1)
    for w in all_words(6):
        assert f.accepts(w) == (not w.endswith("1"))


def test_concatenation_and_star_match_regex():
    cat = regular_ops("concatenation", ENDS1, EVEN)
    st_ = regular_ops("star", regex_fsa("01|1"))
    for w in all_words(7):
        ref = any(ENDS1.accepts(w[:i]) and EVEN.accepts(w[i:]) for i in range(len(w) + 1))
        assert cat.accepts(w) == ref, w
        assert st_.accepts(w) == (re.fullmatch("(01|1)*", w) is not None), w


def test_reversal_by_exploration():
    starts = regular_ops("reversal", ENDS1)
    for w in all_words(6):
        assert starts.accepts(w) == w.startswith("1")


def test_pad_pair():
    f = regular_ops("pad_pair", ENDS1, EVEN)
    pl = [PairLetter("1", "1"), PairLetter("0", "1"), PairLetter("1", PAD)]
    # left 101 ends in 1, right 11 is even
    assert f.accepts(pl)
    assert not f.accepts([PairLetter(PAD, "1"), PairLetter("1", "1")])


def test_alphabet_size():
    assert len(alphabet(1, 3)) == 21
    assert len(alphabet(2, 1)) == 27


@pytest.mark.parametrize("strict", [True, False])
def test_lambda_membership(strict):
    fsa = build_lambda_fsa(1, 1, strict)
    for m in range(1, 5):
        for letters in itertools.product(alphabet(1, 1), repeat=m):
            try:
                w = LambdaWord(letters)
                ok = w.is_strict() or not strict
            except ValueError:
                ok = False
            assert fsa.accepts(letters) == ok, letters


def test_word_shape():
    w = LambdaWord.of((1, 2), (0, -1), (2, -1), (0, -1), (3, 2), (0, 2))
    assert (w.tail_len, w.center_len, w.head_len) == (1, 3, 2)
    assert w.height == -2 and w.first_exponent() == -3
    assert not w.is_strict()
    assert w.weight == 3 + 1 + 3 + 1 + 5 + 2
    with pytest.raises(ValueError):
        LambdaWord.of((1, 2), (0, -1))
    with pytest.raises(ValueError):
        LambdaWord.of((1, 1), (0, -1), (2, -1))


def test_psi_and_overflow():
    w = LambdaWord.of((1, 2), (0, 1), (2, 1), (-1, 2))
    p = psi(w)
    assert p.h == 1
    assert p.t == LaurentTuple((LaurentPoly({-1: 1, 1: 2, 2: -1}),))
    with pytest.raises(CoefficientOverflow):
        psi_inverse_canonical(p, 1)


letter = st.builds(lambda a, b: Letter((a,), b), st.integers(-3, 3), st.sampled_from([2]))


@st.composite
def strict_words(draw):
    tail = draw(st.lists(st.integers(-3, 3), max_size=3))
    head = draw(st.lists(st.integers(-3, 3), max_size=3))
    sign = draw(st.sampled_from([1, -1]))
    center = draw(st.lists(st.integers(-3, 3), min_size=2 if sign < 0 else 1, max_size=4))
    if tail and tail[0] == 0:
        tail[0] = 1
    if head and head[-1] == 0:
        head[-1] = -2
    pairs = [(a, 2) for a in tail] + [(a, sign) for a in center] + [(a, 2) for a in head]
    return LambdaWord.of(*pairs)


@settings(max_examples=200)
@given(strict_words())
def test_psi_roundtrip_and_weight(w):
    p = psi(w)
    assert psi_inverse_canonical(p, 3) == w
    assert p.weight == w.weight


def test_rational_series_basics():
    z = sympy.Symbol("z")
    s = RationalSeries.from_polys(sympy.Poly(1 - z, z), sympy.Poly((1 - z) * (1 - 2 * z), z))
    assert s.denominator.coeffs == (1, -2)
    assert s.coefficients(6) == [1, 2, 4, 8, 16, 32]
    b = s.over_one_minus_z()
    assert b.coefficients(5) == [1, 3, 7, 15, 31]
    assert b.recurrence_residuals(b.coefficients(20), 1, 19) == [0] * 19
    sh = RationalSeries(IntPoly((0, 1)), IntPoly((1, -2))).shift_down()
    assert sh.coefficients(3) == [1, 2, 4]


def test_growth_series_matches_brute_force():
    fsa = build_lambda_fsa(1, 1, True)
    series = growth_series(fsa, check_terms=0)
    # every letter weighs at least 1, so length <= weight
    counts = [0] * 6
    for m in range(1, 6):
        for letters in itertools.product(alphabet(1, 1), repeat=m):
            wt = sum(x.weight for x in letters)
            if wt <= 5 and fsa.accepts(letters):
                counts[wt] += 1
    assert series.coefficients(6) == counts
    assert count_by_weight(fsa.explore().trim(), 5) == counts


def test_minimize_preserves_counts():
    d = build_lambda_fsa(1, 2, False).explore()
    m = d.minimize()
    assert m.nstates <= d.nstates
    assert count_by_weight(m, 12) == count_by_weight(d, 12)


def test_dump_lists_every_edge():
    d = EVEN.explore().minimize()
    rows = [line.split("\t") for line in d.dump().splitlines()]
    assert sorted(rows) == [["0", "0", "0", "1"], ["0", "1", "1", "1"],
                            ["1", "0", "1", "1"], ["1", "1", "0", "1"]]


def test_r_prime_pairs(sol):
    rp = build_r_prime(sol, 4)
    w = LambdaWord.of((1, 2), (0, 1), (2, 1))
    shifted = LambdaWord.of((2, 2), (-3, 1), (3, 1))  # adds z^-1 * p
    assert psi(shifted).t - psi(w).t == LaurentTuple((LaurentPoly({-1: 1, 0: -3, 1: 1}),))
    assert rp.accepts([PairLetter(x, y) for x, y in zip(w.letters, shifted.letters)])
    other = LambdaWord.of((2, 2), (-3, 1), (2, 1))
    assert not rp.accepts([PairLetter(x, y) for x, y in zip(w.letters, other.letters)])


def test_r_pairs_with_offset(sol):
    r = build_r(sol, 4, 2)
    w = LambdaWord.of((0, 1))
    v = LambdaWord.of((1, 1), (-3, 2), (1, 2))
    pairs = [PairLetter(w.letters[0], v.letters[0]), PairLetter(PAD, v.letters[1]),
             PairLetter(PAD, v.letters[2])]
    assert r.accepts(pairs)
    assert not build_r(sol, 4, 1).accepts(pairs)
