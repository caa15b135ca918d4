import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm, logm

from torus_growth.convexity_probe import (JordanBlock, abs_jordan, ac2_probe, ac2_probe_z2,
                                          divergence_bracket, divergence_estimate,
                                          divergence_sweep_json, equivariance_residual,
                                          lattice_embed, lemma72_bound, one_param, report_csv,
                                          sigma_tau)
from torus_growth.errors import ComponentVanishes, ThresholdNotMet
from torus_growth.group_core import T_GEN, GroupElement, evaluate_word
from torus_growth.matrix_algebra import IntMatrix

BLOCKS = [JordanBlock(1, 2.5), JordanBlock(1, 1.7, 0.9, True), JordanBlock(2, 1.3),
          JordanBlock(3, 0.6), JordanBlock(2, 1.4, 2.0, True)]


def check_conjugation(A):
    aj = abs_jordan(IntMatrix(A))
    M = np.array(A, dtype=float)
    P = aj.conjugator
    assert np.allclose(np.linalg.solve(P, M @ P), aj.flip_matrix() @ aj.J(1.0), atol=1e-9)
    return aj


def test_abs_jordan_sol():
    aj = check_conjugation(((2, 1), (1, 1)))
    g = (3 + 5 ** 0.5) / 2
    assert sorted(b.modulus for b in aj.blocks) == pytest.approx([1 / g, g])
    assert aj.sign_word == ()


def test_abs_jordan_negative_pair_becomes_rotation():
    aj = check_conjugation(((-1, 0), (0, -1)))
    (b,) = aj.blocks
    assert b.is_complex and b.angle == pytest.approx(math.pi) and b.modulus == pytest.approx(1)


def test_abs_jordan_rotation_and_flip():
    aj = check_conjugation(((0, -1), (1, 0)))
    assert aj.blocks[0].angle == pytest.approx(math.pi / 2)
    aj = check_conjugation(((-2, -1), (-1, -1)))
    assert len(aj.sign_word) == 2


def test_abs_jordan_defective():
    aj = check_conjugation(((1, 1), (0, 1)))
    assert [b.size for b in aj.blocks] == [2]


def test_one_param_closed_form():
    assert np.allclose(one_param(JordanBlock(2, 2.0), 3), [[8, 12], [0, 8]])


@pytest.mark.parametrize("block", BLOCKS, ids=repr)
def test_one_param_matches_scipy(block):
    B1 = one_param(block, 1.0)
    L = np.real(logm(B1))
    for t in (0.3, -1.2, 2.5):
        assert np.allclose(one_param(block, t), expm(t * L), atol=1e-9)


@settings(max_examples=50)
@given(st.sampled_from(BLOCKS), st.floats(-3, 3), st.floats(-3, 3))
def test_one_param_group_law(block, s, t):
    B = lambda x: one_param(block, x)
    assert np.allclose(B(0), np.eye(block.dim), atol=1e-12)
    assert np.max(np.abs(B(s + t) - B(s) @ B(t))) < 1e-9 * max(1, np.max(np.abs(B(s + t))))


@settings(max_examples=50)
@given(st.sampled_from(BLOCKS), st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_equivariance(block, t, seed):
    v = np.random.default_rng(seed).normal(size=block.dim)
    assert equivariance_residual(block, t, v) < 1e-9


def test_lemma72_single_factor_is_equality():
    b = JordanBlock(2, 1.5)
    lhs, rhs = lemma72_bound([[1.0, -2.0]], [0.7], b)
    assert lhs == pytest.approx(rhs) == pytest.approx(2.0)


def test_lemma72_random():
    rng = np.random.default_rng(1)
    for b in BLOCKS[:3]:
        for _ in range(50):
            k = rng.integers(1, 6)
            vs = rng.normal(size=(k, b.dim))
            ts = rng.uniform(0, 2, size=k)
            lhs, rhs = lemma72_bound(vs, ts, b)
            assert lhs <= rhs + 1e-9


def test_lattice_embedding_is_a_homomorphism(sol):
    emb = lattice_embed(sol)
    assert emb.residuals["conjugation"] < 1e-9 and emb.residuals["commutation"] < 1e-9
    rng = np.random.default_rng(3)
    # generator 0 is the first basis vector in both pictures
    letters = [(0, 1), (0, -1), (T_GEN, 1), (T_GEN, -1)]
    for _ in range(30):
        w = [letters[i] for i in rng.integers(0, 4, size=8)]
        g = evaluate_word(w, sol)
        img = emb.word(w)
        ref = emb.compose(emb.translation_of(g.v), emb.word([(T_GEN, 1)] * g.h
                                                            if g.h >= 0 else [(T_GEN, -1)] * -g.h))
        assert np.allclose(img.translation, ref.translation, atol=1e-9)


def test_sigma_tau_heights(sol):
    x = GroupElement((1, 0), 0)
    sigma, tau = sigma_tau(sol, 2, 3, x, x)
    assert sigma.h == -6 and tau.h == 6
    with pytest.raises(ComponentVanishes):
        sigma_tau(sol, 1, 1, GroupElement((0, 0), 0), x)
    with pytest.raises(ValueError):
        sigma_tau(sol, 1, 1, GroupElement((1, 0), 1), x)


def test_divergence_bracket_threshold(sol):
    vals = [divergence_bracket(sol, J) for J in range(1, 33)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(-1.25, abs=0.01)
    with pytest.raises(ThresholdNotMet):
        divergence_estimate(sol, 2, 1)
    g = (3 + 5 ** 0.5) / 2
    assert divergence_estimate(sol, 3, 16) == pytest.approx(g ** 6 * divergence_bracket(sol, 16))


def test_sweep_json(sol):
    import json
    rec = json.loads(divergence_sweep_json(sol, range(1, 9), range(3), {"m": 1}))
    assert rec["config"] == {"m": 1}
    assert rec["first_positive_J"] is not None and rec["brackets"]["1"] < 0
    assert set(rec["main_terms"]) == {"0", "1", "2"}


def test_z2_probe_constant():
    assert ac2_probe_z2(10).maxima == [2] * 10


def test_sol_probe_small(sol):
    rep = ac2_probe(sol, 6)
    assert rep.maxima == [2, 2, 6, 6, 7, 8]
    text = report_csv(rep, "# a=1\n")
    assert text.splitlines()[:3] == ["# a=1", "n,max_inner_distance,pairs_checked", "1,2,6"]
