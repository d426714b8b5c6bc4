"""Levi-Civita and Tanaka-Webster connections of the model, with identity checks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from .diffcalc import Field, derivative, lie_bracket_field
from .model import SpaceForm


@dataclass(frozen=True)
class Connection:
    """Base class; ``nabla(X, Y)`` returns the field ``q -> (nabla_X Y)(q)``."""

    model: SpaceForm
    kind: str = "abstract"

    def nabla(self, X: Field, Y: Field) -> Field:
        raise NotImplementedError

    def __call__(self, X: Field, Y: Field, p):
        return self.nabla(X, Y)(jnp.asarray(p, dtype=jnp.float64))


@dataclass(frozen=True)
class LeviCivita(Connection):
    kind: str = "levi-civita"

    def nabla(self, X, Y):
        G = self.model.christoffel

        def fn(q):
            x = X(q)
            return derivative(Y, q, x) + jnp.einsum("kij,i,j->k", G(q), x, Y(q))

        return Y.derived(fn)


@dataclass(frozen=True)
class TanakaWebsterContact(Connection):
    """nabla_X Y + (nabla_X eta)(Y) xi - eta(Y) nabla_X xi + eta(X) phi Y."""

    kind: str = "tanaka-webster"

    def nabla(self, X, Y):
        md = self.model
        lc = LeviCivita(md)
        xi = Y.derived(md.xi)
        eta_Y = md.eta_of(Y)
        base = lc.nabla(X, Y)
        nabla_xi = lc.nabla(X, xi)

        def fn(q):
            x, y, b = X(q), Y(q), base(q)
            e = md.eta(q)
            nabla_eta_Y = derivative(eta_Y, q, x) - e @ b
            return b + nabla_eta_Y * md.xi(q) - (e @ y) * nabla_xi(q) + (e @ x) * (md.phi(q) @ y)

        return Y.derived(fn)


@dataclass(frozen=True)
class TanakaWebsterSasakian(Connection):
    """nabla-bar_X Y + g(X, phi Y) xi + eta(Y) phi X + eta(X) phi Y."""

    kind: str = "tanaka-webster"

    def nabla(self, X, Y):
        md = self.model
        base = LeviCivita(md).nabla(X, Y)

        def fn(q):
            x, y = X(q), Y(q)
            P, e = md.phi(q), md.eta(q)
            return base(q) + md.inner(q, x, P @ y) * md.xi(q) + (e @ y) * (P @ x) + (e @ x) * (P @ y)

        return Y.derived(fn)


def levi_civita(model: SpaceForm, X: Field, Y: Field, p) -> np.ndarray:
    return np.asarray(LeviCivita(model)(X, Y, p))


def tanaka_webster_contact(model: SpaceForm, X: Field, Y: Field, p) -> np.ndarray:
    return np.asarray(TanakaWebsterContact(model)(X, Y, p))


def tanaka_webster_sasakian(model: SpaceForm, X: Field, Y: Field, p) -> np.ndarray:
    return np.asarray(TanakaWebsterSasakian(model)(X, Y, p))


def torsion(conn: Connection, X: Field, Y: Field, p):
    p = jnp.asarray(p, dtype=jnp.float64)
    return conn.nabla(X, Y)(p) - conn.nabla(Y, X)(p) - lie_bracket_field(X, Y)(p)


def _grid(fn, n: int, arity: int):
    """Evaluate ``fn`` on every tuple of unit coefficient vectors (vmapped)."""
    I = jnp.eye(n)
    if arity == 1:
        return jax.vmap(fn)(I)
    if arity == 2:
        return jax.vmap(lambda a: jax.vmap(lambda b: fn(a, b))(I))(I)
    return jax.vmap(lambda a: jax.vmap(lambda b: jax.vmap(lambda c: fn(a, b, c))(I))(I))(I)


def _frame_or_fields(model: SpaceForm, fields, arity: int, body):
    """Run ``body`` over frame-coefficient grids, or over explicit field tuples."""
    if fields is None:
        return _grid(lambda *cs: body(*(model.frame_combination(c) for c in cs)), model.dim, arity)
    fields = tuple(fields)
    if arity == 1:
        return jnp.stack([body(X) for X in fields])
    if arity == 2:
        return jnp.stack([body(X, Y) for X in fields for Y in fields])
    return jnp.stack([body(X, Y, Z) for X in fields for Y in fields for Z in fields])


@partial(jax.jit, static_argnums=(0, 2))
def _kcontact_core(model, p, fields):
    lc = LeviCivita(model)
    xi = model.xi_field()
    return _frame_or_fields(model, fields, 1, lambda X: model.norm(p, lc.nabla(X, xi)(p) + model.phi(p) @ X(p)))


def kcontact_check(model: SpaceForm, p, fields: Sequence[Field] | None = None) -> float:
    """max over X of |nabla_X xi + phi X|_g (adapted frame by default)."""
    p = jnp.asarray(p, dtype=jnp.float64)
    return float(jnp.max(_kcontact_core(model, p, _as_tuple(fields))))


def nabla_phi(conn: Connection, X: Field, Y: Field, p):
    """(nabla_X phi) Y = nabla_X (phi Y) - phi nabla_X Y."""
    md = conn.model
    phiY = Y.derived(lambda q: md.phi(q) @ Y(q))
    return conn.nabla(X, phiY)(p) - md.phi(p) @ conn.nabla(X, Y)(p)


@partial(jax.jit, static_argnums=(0, 2))
def _sasakian_core(model, p, fields):
    lc = LeviCivita(model)

    def body(X, Y):
        x, y = X(p), Y(p)
        r = nabla_phi(lc, X, Y, p) - (model.inner(p, x, y) * model.xi(p) - (model.eta(p) @ y) * x)
        return model.norm(p, r)

    return _frame_or_fields(model, fields, 2, body)


def sasakian_check(model: SpaceForm, p, fields: Sequence[Field] | None = None) -> float:
    """max over pairs of |(nabla_X phi) Y - g(X, Y) xi + eta(Y) X|_g."""
    p = jnp.asarray(p, dtype=jnp.float64)
    return float(jnp.max(_sasakian_core(model, p, _as_tuple(fields))))


@partial(jax.jit, static_argnums=(0, 2))
def _parallelism_core(conn, p, fields):
    md = conn.model
    xi = md.xi_field()

    def metric_body(X, Y, Z):
        gYZ = Y.derived(lambda q: md.inner(q, Y(q), Z(q)))
        x = X(p)
        return jnp.abs(
            derivative(gYZ, p, x) - md.inner(p, conn.nabla(X, Y)(p), Z(p)) - md.inner(p, Y(p), conn.nabla(X, Z)(p))
        )

    def eta_body(X, Y):
        return jnp.abs(derivative(md.eta_of(Y), p, X(p)) - md.eta(p) @ conn.nabla(X, Y)(p))

    r_metric = _frame_or_fields(md, fields, 3, metric_body)
    r_eta = _frame_or_fields(md, fields, 2, eta_body)
    r_xi = _frame_or_fields(md, fields, 1, lambda X: md.norm(p, conn.nabla(X, xi)(p)))
    r_phi = _frame_or_fields(md, fields, 2, lambda X, Y: md.norm(p, nabla_phi(conn, X, Y, p)))
    return tuple(jnp.max(r) for r in (r_metric, r_eta, r_xi, r_phi))


def parallelism_residuals(conn: Connection, p, fields: Sequence[Field] | None = None) -> dict[str, float]:
    """Residuals of nabla g, nabla eta, nabla xi and nabla phi."""
    p = jnp.asarray(p, dtype=jnp.float64)
    vals = _parallelism_core(conn, p, _as_tuple(fields))
    return dict(zip(("metric", "eta", "xi", "phi"), (float(v) for v in vals)))


@partial(jax.jit, static_argnums=(0, 2, 3))
def _torsion_core(conn, p, fields, factor):
    from .model import deta_unscaled

    md = conn.model

    def body(X, Y):
        r = torsion(conn, X, Y, p) - 2.0 * factor * deta_unscaled(md, X, Y, p) * md.xi(p)
        return md.norm(p, r)

    return _frame_or_fields(md, fields, 2, body)


def tw_torsion_residual(conn: Connection, p, fields: Sequence[Field] | None = None, factor: float | None = None) -> float:
    """max |T(X, Y) - 2 d eta(X, Y) xi|_g, by default under the model's d eta convention."""
    md = conn.model
    if factor is None:
        factor = md.deta_convention.factor
    p = jnp.asarray(p, dtype=jnp.float64)
    return float(jnp.max(_torsion_core(conn, p, _as_tuple(fields), float(factor))))


@partial(jax.jit, static_argnums=(0, 2))
def _torsion_xi_core(conn, p, fields):
    md = conn.model
    xi = md.xi_field()

    def body(X):
        phiX = X.derived(lambda q: md.phi(q) @ X(q))
        t_x = torsion(conn, xi, X, p)
        t_phix = torsion(conn, xi, phiX, p)
        return jnp.stack([md.norm(p, t_phix + md.phi(p) @ t_x), md.norm(p, t_x)])

    out = _frame_or_fields(md, fields, 1, body)
    return jnp.max(out[:, 0]), jnp.max(out[:, 1])


def tw_torsion_xi_phi(conn: Connection, p, fields: Sequence[Field] | None = None) -> dict[str, float]:
    """Measures T(xi, phi X) + phi T(xi, X) and the size of T(xi, X) itself."""
    p = jnp.asarray(p, dtype=jnp.float64)
    r, s = _torsion_xi_core(conn, p, _as_tuple(fields))
    return {"residual": float(r), "max_T_xi_X": float(s)}


@partial(jax.jit, static_argnums=(0, 2))
def _tw_agreement_core(model, p, fields):
    a, b = TanakaWebsterContact(model), TanakaWebsterSasakian(model)
    return _frame_or_fields(model, fields, 2, lambda X, Y: model.norm(p, a.nabla(X, Y)(p) - b.nabla(X, Y)(p)))


def tw_agreement(model: SpaceForm, p, fields: Sequence[Field] | None = None) -> float:
    """max |contact-form TW - Sasakian-form TW|_g over field pairs."""
    p = jnp.asarray(p, dtype=jnp.float64)
    return float(jnp.max(_tw_agreement_core(model, p, _as_tuple(fields))))


def _as_tuple(fields):
    return None if fields is None else tuple(fields)


def frame_connection_coeffs(
    frame: Sequence[Field],
    nabla: Callable[[Field, Field], Field],
    inner: Callable,
    p,
    tol: float = 1e-8,
) -> np.ndarray:
    """omega[i, j, k] = g(nabla_{e_i} e_j, e_k) for an orthonormal frame."""
    p = jnp.asarray(p, dtype=jnp.float64)
    vecs = [E(p) for E in frame]
    k = len(vecs)
    gram = np.array([[float(inner(p, a, b)) for b in vecs] for a in vecs])
    if np.max(np.abs(gram - np.eye(k))) > tol:
        raise ValueError("frame is not orthonormal at p")
    omega = np.zeros((k, k, k))
    for i in range(k):
        for j in range(k):
            w = nabla(frame[i], frame[j])(p)
            for l in range(k):
                omega[i, j, l] = float(inner(p, w, vecs[l]))
    return omega
