"""Curvature: numeric (any connection), closed-form space form, and the k, l constants.

Convention: ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import jax
import jax.numpy as jnp
import numpy as np

from .connections import Connection, LeviCivita, TanakaWebsterSasakian, _grid
from .diffcalc import Field, constant_field, lie_bracket_field
from .model import SpaceForm, SpaceFormParams, StructureTensors


@dataclass(frozen=True)
class CurvatureValue:
    vector: np.ndarray
    kind: str
    method: str  # "numeric" | "closed-form"


def curvature_field(conn: Connection, X: Field, Y: Field, Z: Field) -> Field:
    """The field ``q -> R(X, Y) Z`` built from nested covariant derivatives."""
    a = conn.nabla(X, conn.nabla(Y, Z))
    b = conn.nabla(Y, conn.nabla(X, Z))
    c = conn.nabla(lie_bracket_field(X, Y), Z)
    return Z.derived(lambda q: a(q) - b(q) - c(q))


@partial(jax.jit, static_argnums=0)
def _coordinate_tensor(conn: Connection, p):
    def one(a, b, c):
        return curvature_field(conn, constant_field(a), constant_field(b), constant_field(c))(p)

    return _grid(one, conn.model.dim, 3)


def curvature_tensor(conn: Connection, p) -> np.ndarray:
    """``T[a, b, c, :] = R(d_a, d_b) d_c`` in coordinate components."""
    return np.asarray(_coordinate_tensor(conn, jnp.asarray(p, dtype=jnp.float64)))


@partial(jax.jit, static_argnums=(0, 1, 2, 3))
def _field_curvature(conn, X, Y, Z, p):
    return curvature_field(conn, X, Y, Z)(p)


def curvature_numeric(conn: Connection, X, Y, Z, p) -> np.ndarray:
    """R(X, Y) Z at ``p``.

    Fields are differentiated by nesting; plain vectors are contracted against
    the coordinate curvature tensor (curvature is tensorial).
    """
    p = jnp.asarray(p, dtype=jnp.float64)
    if all(isinstance(F, Field) for F in (X, Y, Z)):
        return np.asarray(_field_curvature(conn, X, Y, Z, p))
    x, y, z = (np.asarray(F(p) if isinstance(F, Field) else F, dtype=float) for F in (X, Y, Z))
    return np.einsum("abcl,a,b,c->l", curvature_tensor(conn, p), x, y, z)


def curvature_spaceform(params: SpaceFormParams, X, Y, Z, structure: StructureTensors) -> np.ndarray:
    """Closed-form curvature of a Sasakian space form of phi-sectional curvature c."""
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    g, P, e, xi = structure.g, structure.phi, structure.eta, structure.xi
    n = g.shape[0]
    if any(v.shape != (n,) for v in (X, Y, Z)):
        raise ValueError("vector dimension does not match the structure tensors")
    c = params.c

    def ip(a, b):
        return float(a @ g @ b)

    a = (c + 3.0) / 4.0 * (ip(Y, Z) * X - ip(X, Z) * Y)
    b = (c - 1.0) / 4.0 * (
        (e @ X) * (e @ Z) * Y
        - (e @ Y) * (e @ Z) * X
        + ip(X, Z) * (e @ Y) * xi
        - ip(Y, Z) * (e @ X) * xi
        + ip(X, P @ Z) * (P @ Y)
        - ip(Y, P @ Z) * (P @ X)
        + 2.0 * ip(X, P @ Y) * (P @ Z)
    )
    return a + b


def sectional_curvature(model: SpaceForm, p, X, Y, conn: Connection | None = None) -> float:
    """g(R(X, Y) Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2) from the numeric curvature."""
    conn = conn or LeviCivita(model)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    g = np.asarray(model.metric(jnp.asarray(p, dtype=jnp.float64)))
    area = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    if area < 1e-24:
        raise ValueError("X and Y span a degenerate plane")
    R = curvature_numeric(conn, X, Y, Y, p)
    return float(R @ g @ X / area)


def pair_symmetry_residual(tensor: np.ndarray, g: np.ndarray) -> float:
    """max |g(R(a,b)c, d) - g(R(c,d)a, b)| over coordinate index quadruples."""
    Rl = np.einsum("abcl,ld->abcd", tensor, g)
    return float(np.max(np.abs(Rl - Rl.transpose(2, 3, 0, 1))))


def bianchi_residual(tensor: np.ndarray) -> float:
    """First Bianchi identity residual over coordinate index triples."""
    s = tensor + tensor.transpose(1, 2, 0, 3) + tensor.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(s)))


# -- Tanaka-Webster pieces ----------------------------------------------------


def tw_curvature_pointwise(X, H, p, model: SpaceForm | None = None, c: float = -3.0) -> np.ndarray:
    """Closed-form R*(X, H) X = R(X, H) X - 3 g(X, phi H) phi X - eta(X)^2 phi^2 H.

    This is the correction formula as it appears in the literature; the
    numeric Tanaka-Webster curvature (:func:`tw_curvature_numeric`) is the
    independent cross-check.
    """
    model = model or SpaceForm(1)
    params = SpaceFormParams(model.m, c)
    st = _structure(model, p)
    X, H = np.asarray(X, dtype=float), np.asarray(H, dtype=float)
    base = curvature_spaceform(params, X, H, X, st)
    ex = float(st.eta @ X)
    return base - 3.0 * float(X @ st.g @ (st.phi @ H)) * (st.phi @ X) - ex**2 * (st.phi @ st.phi @ H)


def tw_curvature_numeric(model: SpaceForm, X, H, p) -> np.ndarray:
    """R*(X, H) X from the numeric Tanaka-Webster connection."""
    return curvature_numeric(TanakaWebsterSasakian(model), X, H, X, p)


@dataclass(frozen=True)
class TraceResult:
    vector: np.ndarray
    measured_k: float | None
    method: str


def trace_tw_curvature(data, model: SpaceForm | None = None, method: str = "numeric", h_floor: float = 1e-10) -> TraceResult:
    """sum_alpha R*(e_alpha, H) e_alpha over the tangent frame of a surface point.

    ``data`` needs attributes ``p``, ``N``, ``h`` and ``frame`` (2m tangent
    vectors).  ``measured_k = g(trace, N) / h`` when ``|h| >= h_floor``.
    ``method="closed-form"`` uses the closed-form correction formula instead of the
    numeric connection.
    """
    p = np.asarray(data.p, dtype=float)
    model = model or SpaceForm((p.shape[0] - 1) // 2)
    H = float(data.h) * np.asarray(data.N, dtype=float)
    frame = [np.asarray(v, dtype=float) for v in data.frame]
    if method == "numeric":
        T = curvature_tensor(TanakaWebsterSasakian(model), p)
        total = sum(np.einsum("abcl,a,b,c->l", T, e, H, e) for e in frame)
    elif method == "closed-form":
        total = sum(tw_curvature_pointwise(e, H, p, model) for e in frame)
    else:
        raise ValueError(f"unknown method {method!r}")
    total = np.asarray(total, dtype=float)
    if abs(float(data.h)) < h_floor:
        return TraceResult(total, None, method)
    g = np.asarray(model.metric(jnp.asarray(p)))
    return TraceResult(total, float(total @ g @ np.asarray(data.N, dtype=float)) / float(data.h), method)


# -- constants ----------------------------------------------------------------


def k_lemma(m: int, c: float) -> float:
    return (15.0 - 6.0 * m - c * (3.0 + 2.0 * m)) / 4.0


def k_alt(m: int, c: float) -> float:
    return (7.0 - 6.0 * m - c * (2.0 * m + 3.0)) / 4.0


def l_theorem(m: int, c: float) -> float:
    return (-(2.0 * m + 3.0) * c - 6.0 * m + 7.0) / 4.0


def corollary_bound(m: int) -> float:
    return (-6.0 * m + 7.0) / (2.0 * m + 3.0)


def constants(params: SpaceFormParams) -> dict[str, float]:
    m, c = params.m, params.c
    kl, ka, l = k_lemma(m, c), k_alt(m, c), l_theorem(m, c)
    return {
        "m": m,
        "c": c,
        "k_lemma": kl,
        "k_alt": ka,
        "l": l,
        "corollary_bound": corollary_bound(m),
        "l_minus_k_lemma_plus_2": l - (kl - 2.0),
    }


def _structure(model: SpaceForm, p) -> StructureTensors:
    q = jnp.asarray(p, dtype=jnp.float64)
    return StructureTensors(
        g=np.asarray(model.metric(q)),
        phi=np.asarray(model.phi(q)),
        eta=np.asarray(model.eta(q)),
        xi=np.asarray(model.xi(q)),
    )
