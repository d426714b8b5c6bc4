import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sasakian_tw import pseudohopf as ph
from sasakian_tw.hypersurface import LevelSurface, sample_points
from sasakian_tw.model import SpaceFormParams, structure_at

PLANE = LevelSurface.from_source("x + z", 0.0)
GATED = LevelSurface.from_source("x^2 + 1.3*y^2 + 0.3*x^3", 1.0)


def test_pi_over_three_block():
    dec = ph.decompose_block(ph.block_from_theta(math.pi / 3))
    assert sorted([dec.gamma1, dec.gamma2]) == pytest.approx([-math.sqrt(3), 1 / math.sqrt(3)])
    assert dec.theta == pytest.approx(math.pi / 3)


def test_pi_over_four_block():
    dec = ph.decompose_block(ph.block_from_theta(math.pi / 4))
    assert (dec.gamma1, dec.gamma2) == pytest.approx((-1.0, 1.0))
    assert dec.beta == pytest.approx(0.0, abs=1e-15)
    assert ph.av_identity_check(dec)["av_residual"] <= 1e-12


def test_beta_at_pi_over_six():
    dec = ph.decompose_block(ph.block_from_theta(math.pi / 6))
    assert dec.beta == pytest.approx(2 / math.sqrt(3))
    assert ph.av_identity_check(dec)["beta_minus_closed_form"] <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.01, max_value=math.pi / 2 - 0.01))
def test_block_algebra(theta):
    B = ph.block_from_theta(theta)
    dec = ph.decompose_block(B)
    chk = ph.av_identity_check(dec)
    assert chk["gamma_product_plus_one"] <= 1e-9
    assert chk["beta_minus_gamma_sum"] <= 1e-9
    assert chk["a_xi_residual"] <= 1e-12
    assert np.max(np.abs(ph.reconstruct(dec.theta, dec.gamma1, dec.gamma2) - B)) <= 1e-9
    assert dec.convention == "A W1 = gamma1 W1"
    assert dec.W1 @ dec.W2 == pytest.approx(0.0, abs=1e-15)


def test_boundary_is_out_of_model():
    assert ph.decompose_block(np.diag([1.0, -2.0])).out_of_model


def test_paired_eigenvalue_example():
    assert ph.paired_eigenvalue(1.0, 0.0, -3.0) == 0.0
    with pytest.raises(ph.SingularPairing):
        ph.paired_eigenvalue(0.5, 1.0, -3.0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=-5, max_value=2),
)
def test_pairing_is_an_involution(lam, beta, c):
    try:
        lb = ph.paired_eigenvalue(lam, beta, c)
        back = ph.paired_eigenvalue(lb, beta, c)
    except ph.SingularPairing:
        return
    if abs(4 * lam - 2 * beta) < 1e-3 or abs(4 * lb - 2 * beta) < 1e-3:
        return
    assert back == pytest.approx(lam, rel=1e-7, abs=1e-7)


def test_pairing_fixture_residual_zero():
    A, phi, pairs, beta, D = ph.pairing_fixture([0.4, -1.1, 2.0], 0.6, -3.0)
    out = ph.pairing_check(A, phi, pairs, -3.0, beta, D)
    assert out["residual"] <= 1e-12 and out["pairs"] == 3


def test_pairing_skips_impure_and_singular_pairs():
    A, phi, pairs, beta, D = ph.pairing_fixture([0.4], 0.6, -3.0)
    impure = [(0.4, pairs[0][1] + np.eye(A.shape[0])[-1])]
    assert ph.pairing_check(A, phi, impure, -3.0, beta, D)["skipped_purity"] == 1
    singular = [(beta / 2, pairs[0][1])]
    assert ph.pairing_check(A, phi, singular, -3.0, beta, D)["skipped_singular"] == 1


def test_codazzi_plane_full_form():
    for p in sample_points(PLANE, 5, 0)[0]:
        out = ph.codazzi_residual(PLANE, p)
        assert out["residual"] <= 1e-10
        # the shortened right side assumes xi tangent, which fails on this plane
        assert out["residual_displayed"] > 1e-2


def test_codazzi_gated_both_forms():
    for p in sample_points(GATED, 3, 0)[0]:
        out = ph.codazzi_residual(GATED, p)
        assert out["residual"] <= 1e-10 and out["residual_displayed"] <= 1e-10


def test_codazzi_c_equals_one_branch_vanishes():
    p = np.array([0.2, 0.4, -0.1])
    st_ = structure_at(SpaceFormParams(1), p)
    rng = np.random.default_rng(0)
    X, Y, Z, V = rng.normal(size=(4, 3))
    assert ph.codazzi_displayed_rhs(X, Y, Z, V, st_, 1.0) == 0.0


def test_connection_identities():
    p = sample_points(GATED, 1, 0)[0][0]
    out = ph.connection_identities(GATED, p)
    assert out["omega_kii"] <= 1e-12 and out["omega_antisymmetry"] <= 1e-12


def test_decompose_gated_surface():
    for p in sample_points(GATED, 3, 0)[0]:
        dec = ph.decompose(GATED, p)
        assert not dec.out_of_model
        assert dec.invariance_residual == 0.0
        assert ph.av_identity_check(dec)["gamma_product_plus_one"] <= 1e-10


def test_decompose_flags_non_tangent_xi():
    p = sample_points(PLANE, 1, 0)[0][0]
    assert ph.decompose(PLANE, p).out_of_model


def test_proposition_violation_flagged():
    smp = ph.DichotomySample(h=1.0, grad_components=np.array([1.0, 0.0]), gamma_sum=0.0, biharmonic_residual=0.0)
    out = ph.dichotomy_checks([smp], 1, 1e-8)
    assert not out["consistent"] and out["samples"][0]["class"] == "xi-line"


def test_proposition_minimal_branch():
    smp = ph.DichotomySample(h=0.0, grad_components=np.array([0.0, 1.0]), gamma_sum=0.3, biharmonic_residual=0.0)
    assert ph.dichotomy_checks([smp], 1, 1e-8)["consistent"]
    empty = ph.DichotomySample(h=0.0, grad_components=np.zeros(2), gamma_sum=0.0, biharmonic_residual=0.0)
    assert ph.dichotomy_checks([empty], 1, 1e-8)["samples"][0]["verdict"] == "vacuous"
