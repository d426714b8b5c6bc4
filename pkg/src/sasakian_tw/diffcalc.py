"""Fields over the global chart and their derivatives.

Two interchangeable strategies differentiate a field ``F`` at ``p`` along ``v``:

``"jet"``
    forward-mode propagation (``jax.jvp``); exact to roundoff and freely nestable.
``"fd"``
    central differences with one Richardson level,
    ``(4 D(h/2) - D(h)) / 3`` where ``D(h) = (F(p + h v) - F(p - h v)) / 2h``.

Higher derivatives along a vector *field* nest: ``X(X(f))`` differentiates the
scalar field ``q -> X(f)(q)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

jax.config.update("jax_enable_x64", True)

STRATEGIES = ("jet", "fd")
# step per derivative order, used uniformly at every nesting level
FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 5e-3}
GEOMETRY_FD_STEP = 5e-3


class DerivativeError(ArithmeticError):
    """A field evaluated to a non-finite value near the evaluation point."""


@dataclass(frozen=True)
class Field:
    """A pure map ``Point -> value`` tagged with its differentiation strategy."""

    fn: Callable
    strategy: str = "jet"
    fd_step: float = GEOMETRY_FD_STEP

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def __call__(self, p):
        return self.fn(p)

    def derived(self, fn: Callable) -> "Field":
        return replace(self, fn=fn)


ScalarField = Field
VectorField = Field


def as_field(obj, strategy: str = "jet", fd_step: float = GEOMETRY_FD_STEP) -> Field:
    if isinstance(obj, Field):
        return obj
    if callable(obj):
        return Field(obj, strategy, fd_step)
    const = jnp.asarray(obj, dtype=jnp.float64)
    return Field(lambda p: const, strategy, fd_step)


def constant_field(v, strategy: str = "jet") -> Field:
    const = jnp.asarray(v, dtype=jnp.float64)
    return Field(lambda p: const, strategy)


def _fd(F: Callable, p, v, h: float):
    def quotient(step):
        return (F(p + step * v) - F(p - step * v)) / (2.0 * step)

    return (4.0 * quotient(h / 2.0) - quotient(h)) / 3.0


def derivative(F: Field, p, v):
    """``d/dt F(p + t v)`` at ``t = 0`` using the field's strategy."""
    p = jnp.asarray(p, dtype=jnp.float64)
    v = jnp.asarray(v, dtype=jnp.float64)
    if F.strategy == "jet":
        return jax.jvp(F.fn, (p,), (v,))[1]
    return _fd(F.fn, p, v, F.fd_step)


def jacobian(F: Field, p):
    """``J[:, j] = d_j F(p)`` for a vector field, honouring the strategy."""
    p = jnp.asarray(p, dtype=jnp.float64)
    if F.strategy == "jet":
        return jax.jacfwd(F.fn)(p)
    eye = jnp.eye(p.shape[0])
    return jnp.stack([_fd(F.fn, p, eye[j], F.fd_step) for j in range(p.shape[0])], axis=-1)


def truncated(F: Field, p, order: int) -> Field:
    """Replace ``F`` by its Taylor polynomial of ``order`` (1 or 2) at ``p``.

    Any expression that differentiates ``F`` at most ``order`` times and is
    evaluated at ``p`` gives the same value, with a much smaller traced graph.
    """
    p = jnp.asarray(p, dtype=jnp.float64)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    F0 = F(p)
    J = jacobian(F, p)
    H = jacobian(F.derived(lambda q: jacobian(F, q)), p) if order == 2 else None

    def fn(q):
        d = q - p
        out = F0 + J @ d
        if H is not None:
            out = out + 0.5 * (H @ d) @ d
        return out

    return F.derived(fn)


def along(X: Field, F: Field) -> Field:
    """The field ``q -> dF_q[X(q)]`` (``X`` applied to ``F`` componentwise)."""
    return F.derived(lambda q: derivative(F, q, X(q)))


def lie_bracket_field(X: Field, Y: Field) -> Field:
    return X.derived(lambda q: derivative(Y, q, X(q)) - derivative(X, q, Y(q)))


def lie_bracket(X: Field, Y: Field, p):
    """``[X, Y] = X(Y) - Y(X)`` in coordinate components at ``p``."""
    return _finite(lie_bracket_field(X, Y)(jnp.asarray(p, dtype=jnp.float64)))


def directional_derivative(f: Field, X: Field, p, order: int = 1, strategy: str | None = None):
    """``X(X(...X(f)))`` with ``order`` nested applications, evaluated at ``p``.

    With the ``fd`` strategy every nesting level uses the step for the requested
    order so the roundoff amplification stays balanced across levels.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    strategy = strategy or f.strategy
    F = replace(as_field(f), strategy=strategy, fd_step=FD_STEPS[order])
    X = as_field(X)
    for _ in range(order):
        F = along(X, F)
    return _finite(F(jnp.asarray(p, dtype=jnp.float64)))


def line_derivative(f: Field, p, v, order: int = 1, strategy: str | None = None):
    """Order-k derivative of ``t -> f(p + t v)`` for a frozen direction ``v``."""
    return directional_derivative(f, constant_field(v), p, order, strategy)


def metric_gradient(f: Field, p, model, route: str = "frame"):
    """Riemannian gradient of ``f`` at ``p``.

    ``route="frame"`` sums ``e_i(f) e_i`` over the adapted orthonormal frame;
    ``route="coords"`` solves ``g grad f = df``.
    """
    p = jnp.asarray(p, dtype=jnp.float64)
    f = as_field(f)
    if route == "frame":
        E = model.frame(p)
        coeffs = jnp.stack([derivative(f, p, E[:, i]) for i in range(E.shape[1])])
        return _finite(E @ coeffs)
    if route == "coords":
        n = p.shape[0]
        df = jnp.stack([derivative(f, p, jnp.eye(n)[i]) for i in range(n)])
        return _finite(jnp.linalg.solve(model.metric(p), df))
    raise ValueError(f"unknown route {route!r}")


def _finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DerivativeError("non-finite derivative value")
    return arr
