import jax.numpy as jnp
import numpy as np
import pytest

from sasakian_tw.connections import LeviCivita
from sasakian_tw.curvature import (
    bianchi_residual,
    constants,
    corollary_bound,
    curvature_numeric,
    curvature_spaceform,
    curvature_tensor,
    k_alt,
    k_lemma,
    l_theorem,
    pair_symmetry_residual,
    sectional_curvature,
    trace_tw_curvature,
)
from sasakian_tw.hypersurface import LevelSurface, sample_points, shape_operator
from sasakian_tw.model import SpaceForm, SpaceFormParams, structure_at

P = np.array([0.4, -0.9, 1.3])


@pytest.mark.parametrize("m", [1, 2])
def test_closed_form_matches_numeric(m):
    rng = np.random.default_rng(m)
    p = rng.uniform(-1.5, 1.5, 2 * m + 1)
    params = SpaceFormParams(m)
    T = curvature_tensor(LeviCivita(SpaceForm(m)), p)
    st = structure_at(params, p)
    for _ in range(10):
        X, Y, Z = rng.normal(size=(3, 2 * m + 1))
        num = np.einsum("abcl,a,b,c->l", T, X, Y, Z)
        assert np.max(np.abs(num - curvature_spaceform(params, X, Y, Z, st))) <= 1e-10


def test_field_and_vector_paths_agree():
    md = SpaceForm(1)
    X, Y, Z = md.frame_field(0), md.frame_field(1), md.xi_field()
    q = jnp.asarray(P)
    a = curvature_numeric(LeviCivita(md), X, Y, Z, P)
    b = curvature_numeric(LeviCivita(md), np.asarray(X(q)), np.asarray(Y(q)), np.asarray(Z(q)), P)
    assert np.allclose(a, b, atol=1e-12)


def test_symmetries():
    md = SpaceForm(1)
    T = curvature_tensor(LeviCivita(md), P)
    g = np.asarray(md.metric(jnp.asarray(P)))
    assert np.max(np.abs(T + T.transpose(1, 0, 2, 3))) <= 1e-12
    assert pair_symmetry_residual(T, g) <= 1e-12
    assert bianchi_residual(T) <= 1e-12


def test_xi_sections_have_curvature_one():
    md = SpaceForm(1)
    E = np.asarray(md.frame(jnp.asarray(P)))
    assert sectional_curvature(md, P, E[:, 2], E[:, 0]) == pytest.approx(1.0, abs=1e-10)


def test_xi_y_xi_gives_minus_y():
    # R(xi, Y) xi = -Y for unit Y orthogonal to xi
    st = structure_at(SpaceFormParams(1), P)
    Y = np.asarray(SpaceForm(1).frame(jnp.asarray(P)))[:, 0]
    assert np.allclose(curvature_spaceform(SpaceFormParams(1), st.xi, Y, st.xi, st), -Y)


def test_constants_at_m1():
    assert k_lemma(1, -3.0) == 6.0
    assert k_alt(1, -3.0) == 4.0
    assert l_theorem(1, -3.0) == 4.0
    assert corollary_bound(1) == pytest.approx(0.2)
    c = constants(SpaceFormParams(1))
    assert c["l_minus_k_lemma_plus_2"] == 0.0


def test_tw_trace_vanishes_on_gated_surface():
    s = LevelSurface.from_source("x^2 + 1.3*y^2", 1.0)
    pts, _ = sample_points(s, 3, 0)
    for p in pts:
        d = shape_operator(s, p)
        tr = trace_tw_curvature(d)
        assert abs(d.h) > 1e-3
        assert tr.measured_k == pytest.approx(0.0, abs=1e-10)
