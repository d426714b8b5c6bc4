"""The model Sasakian space form R^{2m+1}(-3).

Chart coordinates are ordered ``(x_1..x_m, y_1..y_m, z)``.  The structure is

    eta = (dz - sum_i y_i dx_i) / 2,     xi = 2 d/dz,
    g   = eta (x) eta + (1/4) sum_i (dx_i^2 + dy_i^2),
    phi(d/dx_i) = -d/dy_i,   phi(d/dy_i) = d/dx_i + y_i d/dz,   phi(d/dz) = 0,

with the g-orthonormal frame ``e_i = 2(d/dx_i + y_i d/dz)``, ``e_{m+i} = phi e_i
= -2 d/dy_i``, ``e_{2m+1} = xi``.  For ``m = 1`` this is the classical
Heisenberg-group model.  Other values of ``c`` are carried for closed-form
formulas only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache, partial

import jax
import jax.numpy as jnp
import numpy as np

from .diffcalc import Field, derivative, lie_bracket_field

REALIZED_C = -3.0


class DimensionError(ValueError):
    pass


class FormulaOnlyError(ValueError):
    """A realized-metric computation was requested for c != -3."""


@dataclass(frozen=True)
class SpaceFormParams:
    m: int = 1
    c: float = REALIZED_C

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m!r}")

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    @property
    def realized(self) -> bool:
        return self.c == REALIZED_C


def make_point(coords, params: SpaceFormParams | int) -> np.ndarray:
    """Validate chart coordinates and return them as a float array."""
    n = params.dim if isinstance(params, SpaceFormParams) else 2 * int(params) + 1
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or p.shape[0] != n:
        raise DimensionError(f"expected {n} coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class StructureTensors:
    g: np.ndarray
    phi: np.ndarray
    eta: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class AdaptedFrame:
    """Columns are e_1..e_{2m+1} in coordinate components."""

    vectors: np.ndarray
    frame: str = "coordinate"

    def __getitem__(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def __len__(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class FrameVector:
    """Components of a vector relative to a named frame."""

    components: np.ndarray
    frame: str


@dataclass(frozen=True)
class SpaceForm:
    """Realized model; ``phi_sign`` exists only to build broken fixtures."""

    m: int = 1
    phi_sign: float = 1.0

    @property
    def params(self) -> SpaceFormParams:
        return SpaceFormParams(self.m, REALIZED_C)

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    def eta(self, p):
        m = self.m
        return 0.5 * jnp.concatenate([-p[m : 2 * m], jnp.zeros(m), jnp.ones(1)])

    def xi(self, p):
        return jnp.zeros(self.dim).at[-1].set(2.0) + 0.0 * p[0]

    def metric(self, p):
        e = self.eta(p)
        flat = 0.25 * jnp.concatenate([jnp.ones(2 * self.m), jnp.zeros(1)])
        return jnp.outer(e, e) + jnp.diag(flat)

    def phi(self, p):
        m, n = self.m, self.dim
        P = jnp.zeros((n, n))
        for i in range(m):
            # columns are images of coordinate basis vectors
            P = P.at[m + i, i].set(-1.0)
            P = P.at[i, m + i].set(1.0)
            P = P.at[2 * m, m + i].set(p[m + i])
        return self.phi_sign * P

    def frame(self, p):
        m, n = self.m, self.dim
        E = jnp.zeros((n, n))
        for i in range(m):
            E = E.at[i, i].set(2.0)
            E = E.at[2 * m, i].set(2.0 * p[m + i])
            E = E.at[m + i, m + i].set(-2.0)
        return E.at[2 * m, 2 * m].set(2.0)

    def metric_inverse(self, p):
        """g^{-1} = E E^T for the orthonormal frame E (no linear solve)."""
        E = self.frame(p)
        return E @ E.T

    def inner(self, p, a, b):
        return a @ self.metric(p) @ b

    def norm(self, p, a):
        return jnp.sqrt(self.inner(p, a, a))

    def christoffel(self, p):
        """Gamma[k, i, j] with nabla_{d_i} d_j = Gamma[k, i, j] d_k."""
        dg = jax.jacfwd(self.metric)(p)  # dg[a, b, c] = d_c g_ab
        t = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
        return 0.5 * jnp.einsum("kl,ijl->kij", self.metric_inverse(p), t)

    # -- fields -----------------------------------------------------------

    def frame_field(self, i: int, strategy: str = "jet") -> Field:
        return Field(lambda q: self.frame(q)[:, i], strategy)

    def xi_field(self, strategy: str = "jet") -> Field:
        return Field(self.xi, strategy)

    def frame_combination(self, coeffs, strategy: str = "jet") -> Field:
        """The field ``sum_i coeffs[i] e_i`` with constant frame coefficients."""
        c = jnp.asarray(coeffs, dtype=jnp.float64)
        return Field(lambda q: self.frame(q) @ c, strategy)

    def eta_of(self, Y: Field) -> Field:
        return Y.derived(lambda q: self.eta(q) @ Y(q))

    @cached_property
    def deta_convention(self) -> "DEtaConvention":
        return select_deta_convention(self)


@lru_cache(maxsize=None)
def frame_fields(model: SpaceForm, strategy: str = "jet") -> tuple[Field, ...]:
    """Adapted frame fields e_1..e_{2m+1}; cached so jit sees stable identities."""
    return tuple(model.frame_field(i, strategy) for i in range(model.dim))


def structure_at(params: SpaceFormParams, p) -> StructureTensors:
    p = make_point(p, params)
    model = SpaceForm(params.m)
    return StructureTensors(
        g=np.asarray(model.metric(p)),
        phi=np.asarray(model.phi(p)),
        eta=np.asarray(model.eta(p)),
        xi=np.asarray(model.xi(p)),
    )


def adapted_frame_at(params: SpaceFormParams, p) -> AdaptedFrame:
    p = make_point(p, params)
    return AdaptedFrame(np.asarray(SpaceForm(params.m).frame(p)))


def to_frame(model: SpaceForm, p, v) -> FrameVector:
    E = np.asarray(model.frame(p))
    return FrameVector(np.linalg.solve(E, np.asarray(v, dtype=float)), "adapted")


def from_frame(model: SpaceForm, p, fv: FrameVector) -> np.ndarray:
    if fv.frame != "adapted":
        raise ValueError(f"expected adapted-frame components, got frame {fv.frame!r}")
    return np.asarray(model.frame(p)) @ fv.components


# -- d eta convention -------------------------------------------------------


@dataclass(frozen=True)
class DEtaConvention:
    factor: float
    residual_half: float
    residual_full: float

    @property
    def label(self) -> str:
        return "d_eta(X,Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X,Y]))" if self.factor == 0.5 else (
            "d_eta(X,Y) = X eta(Y) - Y eta(X) - eta([X,Y])"
        )

    def as_dict(self) -> dict:
        return {
            "factor": self.factor,
            "formula": self.label,
            "residual_half": self.residual_half,
            "residual_full": self.residual_full,
        }


def deta_unscaled(model: SpaceForm, X: Field, Y: Field, p):
    """``X eta(Y) - Y eta(X) - eta([X, Y])`` without a normalization factor."""
    eY, eX = model.eta_of(Y), model.eta_of(X)
    return derivative(eY, p, X(p)) - derivative(eX, p, Y(p)) - model.eta(p) @ lie_bracket_field(X, Y)(p)


def deta(model: SpaceForm, X: Field, Y: Field, p):
    return model.deta_convention.factor * deta_unscaled(model, X, Y, p)


@partial(jax.jit, static_argnums=(0, 2))
def _contact_core(model: SpaceForm, p, factor: float):
    def one(a, b):
        X, Y = model.frame_combination(a), model.frame_combination(b)
        lhs = factor * deta_unscaled(model, X, Y, p)
        return jnp.abs(lhs - model.inner(p, X(p), model.phi(p) @ Y(p)))

    I = jnp.eye(model.dim)
    return jnp.max(jax.vmap(lambda a: jax.vmap(lambda b: one(a, b))(I))(I))


def _contact_residual(model: SpaceForm, p, factor: float) -> float:
    return float(_contact_core(model, jnp.asarray(p, dtype=jnp.float64), float(factor)))


def select_deta_convention(model: SpaceForm, p_ref=None) -> DEtaConvention:
    """Pick the normalization of d eta that makes g(X, phi Y) = d eta(X, Y) hold."""
    if p_ref is None:
        p_ref = jnp.linspace(0.3, -0.7, model.dim)
    p_ref = jnp.asarray(p_ref, dtype=jnp.float64)
    half = _contact_residual(model, p_ref, 0.5)
    full = _contact_residual(model, p_ref, 1.0)
    return DEtaConvention(0.5 if half <= full else 1.0, half, full)


# -- axiom residuals --------------------------------------------------------


@partial(jax.jit, static_argnums=0)
def _axiom_core(model: SpaceForm, p):
    n, m = model.dim, model.m
    g, P, e, x = model.metric(p), model.phi(p), model.eta(p), model.xi(p)
    E = model.frame(p)
    I = jnp.eye(n)
    minors = jnp.stack([jnp.linalg.det(g[:k, :k]) for k in range(1, n + 1)])
    return {
        "phi_squared": jnp.max(jnp.abs(P @ P + I - jnp.outer(x, e))),
        "eta_xi": jnp.abs(e @ x - 1.0),
        "eta_phi": jnp.max(jnp.abs(e @ P)),
        "phi_xi": jnp.max(jnp.abs(P @ x)),
        "eta_is_g_xi": jnp.max(jnp.abs(g @ x - e)),
        "phi_compatible_metric": jnp.max(jnp.abs(P.T @ g @ P - (g - jnp.outer(e, e)))),
        "frame_orthonormal": jnp.max(jnp.abs(E.T @ g @ E - I)),
        "frame_xi": jnp.max(jnp.abs(E[:, 2 * m] - x)),
        "phi_pairing": jnp.max(
            jnp.abs(jnp.concatenate([P @ E[:, :m] - E[:, m : 2 * m], P @ E[:, m : 2 * m] + E[:, :m]]))
        ),
        # zero when every leading principal minor is positive
        "metric_positive_definite": jnp.maximum(0.0, -jnp.min(minors)) + jnp.where(jnp.min(minors) > 0, 0.0, 1.0),
    }


def axiom_residuals(model: SpaceForm, p) -> dict[str, float]:
    """Pointwise residuals of the almost-contact / contact-metric identities."""
    p = jnp.asarray(p, dtype=jnp.float64)
    out = {k: float(v) for k, v in _axiom_core(model, p).items()}
    out["contact_metric"] = _contact_residual(model, p, model.deta_convention.factor)
    return out


def leading_minors(g) -> list[float]:
    g = np.asarray(g)
    return [float(np.linalg.det(g[:k, :k])) for k in range(1, g.shape[0] + 1)]


def phi_sectional_oracle(params: SpaceFormParams, p, X) -> float:
    """Sectional curvature of span{X, phi X} from the numeric Levi-Civita curvature."""
    from .curvature import sectional_curvature

    if not params.realized:
        raise FormulaOnlyError("phi-sectional curvature needs the realized metric (c = -3)")
    p = make_point(p, params)
    model = SpaceForm(params.m)
    X = np.asarray(X, dtype=float)
    if X.shape != (params.dim,):
        raise DimensionError("X has the wrong dimension")
    nX = float(model.norm(p, X))
    if nX < 1e-14:
        raise ValueError("X must be nonzero")
    if abs(float(model.eta(p) @ X)) > 1e-12 * max(1.0, nX):
        raise ValueError("X must be orthogonal to xi (eta(X) = 0)")
    PX = np.asarray(model.phi(p) @ X)
    return sectional_curvature(model, p, X, PX)
