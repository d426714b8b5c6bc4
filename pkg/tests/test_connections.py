import jax.numpy as jnp
import numpy as np
import pytest

from sasakian_tw.connections import (
    LeviCivita,
    TanakaWebsterContact,
    TanakaWebsterSasakian,
    frame_connection_coeffs,
    kcontact_check,
    levi_civita,
    parallelism_residuals,
    sasakian_check,
    torsion,
    tw_agreement,
    tw_torsion_residual,
    tw_torsion_xi_phi,
)
from sasakian_tw.diffcalc import Field, constant_field
from sasakian_tw.model import SpaceForm, frame_fields

POINTS = {1: np.array([0.3, -1.2, 0.8]), 2: np.array([0.3, -1.2, 0.8, 0.5, -0.1])}


@pytest.mark.parametrize("m", [1, 2])
def test_k_contact_and_sasakian(m):
    md = SpaceForm(m)
    assert kcontact_check(md, POINTS[m]) <= 1e-12
    assert sasakian_check(md, POINTS[m]) <= 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_tanaka_webster_parallelism_and_torsion(m):
    md = SpaceForm(m)
    tw = TanakaWebsterContact(md)
    r = parallelism_residuals(tw, POINTS[m])
    assert max(r.values()) <= 1e-12
    assert tw_torsion_residual(tw, POINTS[m]) <= 1e-12
    assert tw_torsion_xi_phi(tw, POINTS[m])["residual"] <= 1e-12
    assert tw_agreement(md, POINTS[m]) <= 1e-12


def test_levi_civita_is_not_tw_parallel_for_xi():
    md = SpaceForm(1)
    assert parallelism_residuals(LeviCivita(md), POINTS[1])["xi"] > 0.1


def test_levi_civita_is_torsion_free_on_nonconstant_fields():
    md = SpaceForm(1)
    X = Field(lambda q: jnp.array([q[1], q[2] ** 2, 1.0]))
    Y = md.frame_field(0)
    assert np.allclose(torsion(LeviCivita(md), X, Y, POINTS[1]), 0.0, atol=1e-12)


def test_wrong_deta_factor_breaks_torsion():
    md = SpaceForm(1)
    assert tw_torsion_residual(TanakaWebsterContact(md), POINTS[1], factor=1.0) > 0.5


def test_nabla_xi_is_minus_phi():
    md = SpaceForm(1)
    p = POINTS[1]
    for i in range(3):
        X = md.frame_field(i)
        v = levi_civita(md, X, md.xi_field(), p)
        assert np.allclose(v, -np.asarray(md.phi(jnp.asarray(p))) @ np.asarray(X(jnp.asarray(p))), atol=1e-12)


def test_frame_connection_coefficients_are_skew():
    md = SpaceForm(1)
    om = frame_connection_coeffs(frame_fields(md), TanakaWebsterSasakian(md).nabla, md.inner, POINTS[1])
    assert np.max(np.abs(om + om.transpose(0, 2, 1))) <= 1e-12


def test_non_orthonormal_frame_rejected():
    md = SpaceForm(1)
    fr = (constant_field([1.0, 0, 0]), constant_field([0, 1.0, 0]), constant_field([0, 0, 1.0]))
    with pytest.raises(ValueError):
        frame_connection_coeffs(fr, LeviCivita(md).nabla, md.inner, POINTS[1])
