"""Level-set hypersurfaces ``M = f^{-1}(level)`` of the model.

Every surface quantity is defined on a neighbourhood of ``M`` by treating each
nearby level set ``f^{-1}(f(q))`` as a hypersurface.  Normal, shape operator,
mean curvature and tangent frame are therefore smooth ambient fields that can
be differentiated like any other field.

Sign conventions: ``N = orientation * grad f / |grad f|``, ``V = -phi N``,
``A X = -(nabla-bar_X N)^T``, ``h = trace(A) / 2m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, partial

import jax
import jax.numpy as jnp
import numpy as np

from . import dsl
from .connections import LeviCivita
from .diffcalc import Field, derivative, jacobian, truncated
from .model import SpaceForm

GRAD_FLOOR = 1e-8
PROJECTION_TOL = 1e-10
PROJECTION_STEPS = 50
PROJECTION_MAX_T = 10.0
PIVOT_FLOOR = 1e-6


class ProjectionError(RuntimeError):
    """Newton projection onto the level set did not converge."""


class FrameError(RuntimeError):
    """The adapted tangent frame could not be built (rank deficiency)."""


class SingularPointError(RuntimeError):
    """The defining function has (numerically) vanishing gradient."""


class TangencyError(ValueError):
    """Input vectors are not tangent to the surface."""


def _taylor_eval(data, q):
    p0, c0, c1, c2, c3, c4 = data
    d = q - p0
    return (
        c0
        + c1 @ d
        + 0.5 * d @ c2 @ d
        + jnp.einsum("ijk,i,j,k->", c3, d, d, d) / 6.0
        + jnp.einsum("ijkl,i,j,k,l->", c4, d, d, d, d) / 24.0
    )


def _taylor_differential(data, q):
    """Exact derivative of the Taylor polynomial (c2, c3, c4 are symmetric)."""
    p0, _, c1, c2, c3, c4 = data
    d = q - p0
    return c1 + c2 @ d + 0.5 * jnp.einsum("ijk,j,k->i", c3, d, d) + jnp.einsum("ijkl,j,k,l->i", c4, d, d, d) / 6.0


@lru_cache(maxsize=256)
def _taylor_fn(expr: dsl.Expr):
    f = dsl.compile_jax(expr)

    def fn(p):
        f0 = lambda q: f(q) + 0.0 * q[0]
        d1 = jax.jacfwd(f0)
        d2 = jax.jacfwd(d1)
        d3 = jax.jacfwd(d2)
        return (p, f0(p), d1(p), d2(p), d3(p), jax.jacfwd(d3)(p))

    return jax.jit(fn)


@dataclass(frozen=True)
class SurfaceGeometry:
    """Static description used as a jit key.

    With ``expr=None`` the defining function is the order-4 Taylor polynomial
    passed at call time; every quantity at the expansion point (including the
    bitension, which needs four derivatives of f) is then exact, and one
    compiled kernel serves every surface of the same dimension.
    """

    m: int
    orientation: int = 1
    strategy: str = "jet"
    expr: dsl.Expr | None = None


class Local:
    """Surface fields for one geometry, bound to optional Taylor data."""

    def __init__(self, geo: SurfaceGeometry, data=None):
        self.geo = geo
        self.data = data
        self.m = geo.m
        self.dim = 2 * geo.m + 1
        self.model = SpaceForm(geo.m)
        self.orientation = geo.orientation
        self.strategy = geo.strategy

    def f(self, q):
        if self.data is not None:
            return _taylor_eval(self.data, q)
        return dsl.compile_jax(self.geo.expr)(q) + 0.0 * q[0]

    def gradient(self, q):
        """Metric gradient g^{-1} df (jets through the DSL expression)."""
        if self.data is not None:
            df = _taylor_differential(self.data, q)
        else:
            df = jax.grad(self.f)(q)
        return self.model.metric_inverse(q) @ df

    def normal(self, q):
        gr = self.gradient(q)
        return self.orientation * gr / self.model.norm(q, gr)

    def v(self, q):
        return -self.model.phi(q) @ self.normal(q)

    def projector(self, q):
        """Matrix of the g-orthogonal projection onto the tangent space."""
        N = self.normal(q)
        return jnp.eye(self.dim) - jnp.outer(N, self.model.metric(q) @ N)

    def field(self, fn) -> Field:
        return Field(fn, self.strategy)

    def nabla_normal(self, q):
        """Columns are nabla-bar_{d_j} N."""
        J = jacobian(self.field(self.normal), q)
        return J + jnp.einsum("kij,j->ki", self.model.christoffel(q), self.normal(q))

    def shape_ambient(self, q):
        """Ambient matrix of X -> -(nabla-bar_X N)^T (meaningful on tangent X)."""
        return -self.projector(q) @ self.nabla_normal(q)

    def mean_curvature(self, q):
        return jnp.trace(self.shape_ambient(q)) / (2 * self.m)

    def xi_tangency(self, q):
        return jnp.abs(self.model.eta(q) @ self.normal(q))

    def frame(self, q, plan):
        """Orthonormal tangent frame (columns): D legs from ``plan``, then xi^T, then V."""
        md = self.model
        g = md.metric(q)
        P = self.projector(q)

        def unit(v):
            return v / jnp.sqrt(v @ g @ v)

        xh = unit(P @ md.xi(q))
        Vt = self.v(q)
        vh = unit(Vt - (Vt @ g @ xh) * xh)
        legs = []
        for k in range(2 * self.m - 2):
            c = P[:, plan[k]]
            for b in legs + [xh, vh]:
                c = c - (c @ g @ b) * b
            legs.append(unit(c))
        return jnp.stack(legs + [xh, vh], axis=1)

    def frame_field(self, alpha: int, plan) -> Field:
        return self.field(lambda q: self.frame(q, plan)[:, alpha])

    def frame_combination(self, coeffs, plan) -> Field:
        return self.field(lambda q: self.frame(q, plan) @ coeffs)


@dataclass(frozen=True)
class LevelSurface:
    expr: dsl.Expr
    level: float = 0.0
    orientation: int = 1
    m: int = 1
    strategy: str = "jet"  # strategy for derived surface fields (N, A, h, frame)

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.strategy not in ("jet", "fd"):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    @classmethod
    def from_source(cls, src: str, level: float = 0.0, orientation: int = 1, m: int = 1, strategy: str = "jet"):
        return cls(dsl.parse(src, m), float(level), orientation, m, strategy)

    @property
    def source(self) -> str:
        return dsl.to_source(self.expr)

    @property
    def model(self) -> SpaceForm:
        return SpaceForm(self.m)

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    @property
    def exact(self) -> Local:
        """Fields built from the expression itself (valid at every point)."""
        return Local(SurfaceGeometry(self.m, self.orientation, self.strategy, self.expr))

    def kernel_inputs(self, p):
        """(static geometry, dynamic Taylor data) for the compiled point kernels."""
        if self.strategy == "fd":
            # finite differences probe off the point, so keep the exact expression
            return SurfaceGeometry(self.m, self.orientation, "fd", self.expr), None
        data = _taylor_fn(self.expr)(jnp.asarray(p, dtype=jnp.float64))
        return SurfaceGeometry(self.m, self.orientation, "jet", None), data

    def __getattr__(self, name):
        # normal, v, projector, shape_ambient, ... from the exact fields
        if name in _LOCAL_API:
            return getattr(self.exact, name)
        raise AttributeError(name)

    def frame_plan(self, p) -> tuple[int, ...]:
        """Pivoted Gram-Schmidt choice of coordinate directions for the D legs."""
        loc = self.exact
        md = self.model
        q = jnp.asarray(p, dtype=jnp.float64)
        g = np.asarray(md.metric(q))
        P = np.asarray(loc.projector(q))
        xt = P @ np.asarray(md.xi(q))
        nx = np.sqrt(xt @ g @ xt)
        if nx < PIVOT_FLOOR:
            raise FrameError("xi is (numerically) normal to the surface")
        basis = [xt / nx]
        Vt = np.asarray(loc.v(q))
        Vt = Vt - (Vt @ g @ basis[0]) * basis[0]
        nv = np.sqrt(Vt @ g @ Vt)
        if nv < PIVOT_FLOOR:
            raise FrameError("V degenerates at this point")
        basis.append(Vt / nv)
        plan: list[int] = []
        remaining = list(range(self.dim))
        for _ in range(2 * self.m - 2):
            best, best_norm, best_vec = None, -1.0, None
            for j in remaining:
                c = P[:, j].copy()
                for b in basis:
                    c = c - (c @ g @ b) * b
                nc = np.sqrt(max(c @ g @ c, 0.0))
                if nc > best_norm:
                    best, best_norm, best_vec = j, nc, c
            if best_norm < PIVOT_FLOOR:
                raise FrameError("rank-deficient projected coordinate directions")
            plan.append(best)
            remaining.remove(best)
            basis.append(best_vec / best_norm)
        return tuple(plan)


_LOCAL_API = frozenset(
    {"f", "gradient", "normal", "v", "projector", "field", "nabla_normal", "shape_ambient",
     "mean_curvature", "xi_tangency", "frame", "frame_field", "frame_combination"}
)


@dataclass(frozen=True)
class HypersurfacePointData:
    p: np.ndarray
    N: np.ndarray
    V: np.ndarray
    A: np.ndarray
    h: float
    frame: np.ndarray  # rows are the 2m tangent frame vectors
    xi_tangency: float
    plan: tuple[int, ...] = ()
    extras: dict = field(default_factory=dict)

    @property
    def gated(self) -> bool:
        return self.xi_tangency <= 1e-8

    def B_norm_sq(self) -> float:
        return float(np.sum(self.A**2))


# -- projection ----------------------------------------------------------------


def _metric_gradient_np(s: LevelSurface, q: np.ndarray) -> np.ndarray:
    df = np.asarray(dsl.jet_gradient(s.expr, q))
    g = np.asarray(s.model.metric(jnp.asarray(q)))
    return np.linalg.solve(g, df)


def project_to_surface(s: LevelSurface, q) -> np.ndarray:
    """Newton iteration along the line ``q + t grad f(q)`` onto ``f = level``."""
    q = np.asarray(q, dtype=float)
    try:
        G = _metric_gradient_np(s, q)
        g = np.asarray(s.model.metric(jnp.asarray(q)))
        if np.sqrt(G @ g @ G) < GRAD_FLOOR:
            raise ProjectionError("vanishing gradient at the start point")
        t = 0.0
        for _ in range(PROJECTION_STEPS):
            jet = dsl.eval_jet(s.expr, q + t * G, 1, G)
            r = jet.value - s.level
            if abs(r) <= PROJECTION_TOL:
                return q + t * G
            slope = jet.derivative(1)
            if abs(slope) < 1e-300:
                raise ProjectionError("flat gradient line")
            t -= r / slope
            if not np.isfinite(t) or abs(t) > PROJECTION_MAX_T:
                raise ProjectionError("Newton step left the admissible range |t| <= 10")
        p = q + t * G
        if abs(dsl.evaluate(s.expr, p) - s.level) <= PROJECTION_TOL:
            return p
    except dsl.EvalError as exc:
        raise ProjectionError(f"evaluation failed: {exc}") from exc
    raise ProjectionError("no convergence within 50 Newton steps")


def sample_points(s: LevelSurface, n: int, seed: int, box: float = 1.5):
    """Project ``n`` seeded uniform box points; returns (accepted points, rejected count)."""
    rng = np.random.default_rng(seed)
    accepted, rejected = [], 0
    for q in rng.uniform(-box, box, size=(n, s.dim)):
        try:
            p = project_to_surface(s, q)
            check_regular(s, p)
            s.frame_plan(p)
        except (ProjectionError, SingularPointError, FrameError):
            rejected += 1
            continue
        accepted.append(p)
    return accepted, rejected


def check_regular(s: LevelSurface, p) -> float:
    q = jnp.asarray(p, dtype=jnp.float64)
    gr = s.gradient(q)
    n = float(s.model.norm(q, gr))
    if not np.isfinite(n) or n < GRAD_FLOOR:
        raise SingularPointError(f"|grad f|_g = {n:.3e} below {GRAD_FLOOR}")
    return n


# -- point data ----------------------------------------------------------------


def normal_and_v(s: LevelSurface, p) -> tuple[np.ndarray, np.ndarray]:
    check_regular(s, p)
    q = jnp.asarray(p, dtype=jnp.float64)
    return np.asarray(s.normal(q)), np.asarray(s.v(q))


@partial(jax.jit, static_argnums=0)
def _point_core(geo: SurfaceGeometry, q, data, plan):
    loc = Local(geo, data)
    md = loc.model
    E = loc.frame(q, plan)
    S = loc.shape_ambient(q)
    A = E.T @ md.metric(q) @ S @ E  # A[b, a] = g(A e_a, e_b)
    return {
        "N": loc.normal(q),
        "V": loc.v(q),
        "A": A,
        "h": loc.mean_curvature(q),
        "frame": E,
        "xi_tangency": loc.xi_tangency(q),
    }


def plan_array(plan) -> jnp.ndarray:
    return jnp.asarray(plan, dtype=jnp.int32).reshape(-1)


def shape_operator(s: LevelSurface, p, plan: tuple[int, ...] | None = None) -> HypersurfacePointData:
    check_regular(s, p)
    plan = s.frame_plan(p) if plan is None else tuple(plan)
    q = jnp.asarray(p, dtype=jnp.float64)
    geo, data = s.kernel_inputs(q)
    out = {k: np.asarray(v) for k, v in _point_core(geo, q, data, plan_array(plan)).items()}
    return HypersurfacePointData(
        p=np.asarray(p, dtype=float),
        N=out["N"],
        V=out["V"],
        A=out["A"],
        h=float(out["h"]),
        frame=out["frame"].T,
        xi_tangency=float(out["xi_tangency"]),
        plan=plan,
    )


def mean_curvature_divergence(s: LevelSurface, p) -> float:
    """Oracle ``h = -div(N) / 2m``; valid because det g is constant on the model."""
    q = jnp.asarray(p, dtype=jnp.float64)
    return float(-jnp.trace(jax.jacfwd(s.normal)(q)) / (2 * s.m))


def shape_in_frame(s: LevelSurface, p, vectors) -> np.ndarray:
    """A in a caller-supplied orthonormal tangent basis: ``M[b, a] = g(A v_a, v_b)``."""
    q = jnp.asarray(p, dtype=jnp.float64)
    E = np.stack([np.asarray(v, dtype=float) for v in vectors], axis=1)
    g = np.asarray(s.model.metric(q))
    return E.T @ g @ np.asarray(s.shape_ambient(q)) @ E


def plane_example_frame(p) -> tuple[np.ndarray, np.ndarray]:
    """The explicit frame E1 = -e2, E2 = (-e1 + u e3) / sqrt(1 + u^2), u = 1 + y.

    E2 is the smooth branch of sqrt(u^2/(1+u^2)) (-e1/u + e3); taking
    sqrt(u^2) = |u| instead flips E2 (and the sign of A's off-diagonal) for u < 0.
    """
    p = np.asarray(p, dtype=float)
    E = np.asarray(SpaceForm(1).frame(jnp.asarray(p)))
    u = 1.0 + p[1]
    return -E[:, 1], (-E[:, 0] + u * E[:, 2]) / np.sqrt(1.0 + u**2)


def plane_example_q(y: float) -> float:
    u = 1.0 + y
    return (1.0 - u**2) / (u**2 + 1.0)


# -- intrinsic calculus --------------------------------------------------------


def intrinsic_nabla(s: LevelSurface, X: Field, Y: Field) -> Field:
    """Tangential part of the ambient Levi-Civita derivative (Gauss formula)."""
    amb = LeviCivita(s.model).nabla(X, Y)
    return Y.derived(lambda q: s.projector(q) @ amb(q))


def intrinsic_covariant(s: LevelSurface, X: Field, Y: Field, p, tol: float = 1e-8) -> np.ndarray:
    q = jnp.asarray(p, dtype=jnp.float64)
    md = s.model
    N = s.normal(q)
    for name, F in (("X", X), ("Y", Y)):
        v = F(q)
        if abs(float(md.inner(q, v, N))) > tol * max(1.0, float(md.norm(q, v))):
            raise TangencyError(f"{name} is not tangent at p")
    return np.asarray(intrinsic_nabla(s, X, Y)(q))


def scalar_laplacian_field(loc: Local, u: Field, plan, frame_fn=None) -> Field:
    """``q -> -sum_a (e_a(e_a u) - (nabla_{e_a} e_a) u)`` (geometer's sign).

    ``frame_fn`` optionally overrides ``q -> frame matrix`` (e.g. a truncated copy).
    """
    lc = LeviCivita(loc.model)
    frame_fn = frame_fn or (lambda r: loc.frame(r, plan))

    def fn(q):
        E = frame_fn(q)
        P = loc.projector(q)

        def term(c):
            ea = loc.field(lambda r: frame_fn(r) @ c)
            eu = u.derived(lambda r: derivative(u, r, ea(r)))
            corr = P @ lc.nabla(ea, ea)(q)
            return derivative(eu, q, E @ c) - derivative(u, q, corr)

        return -jnp.sum(jax.vmap(term)(jnp.eye(2 * loc.m)))

    return u.derived(fn)


@partial(jax.jit, static_argnums=(0, 1))
def _laplacian_core(geo, u, q, data, plan):
    return scalar_laplacian_field(Local(geo, data), u, plan)(q)


def surface_scalar_laplacian(s: LevelSurface, u: Field, p, plan: tuple[int, ...] | None = None) -> float:
    """Intrinsic Laplacian of ``u`` (extended off M by the caller) at ``p``."""
    plan = s.frame_plan(p) if plan is None else plan
    q = jnp.asarray(p, dtype=jnp.float64)
    geo = SurfaceGeometry(s.m, s.orientation, s.strategy, s.expr)
    return float(_laplacian_core(geo, u, q, None, plan_array(plan)))


def intrinsic_gradient(s: LevelSurface, u: Field, q):
    """Tangential part of the ambient metric gradient of ``u``."""
    n = s.dim
    du = jnp.stack([derivative(u, q, jnp.eye(n)[i]) for i in range(n)])
    return s.projector(q) @ jnp.linalg.solve(s.model.metric(q), du)


# -- compiled frame kernels ----------------------------------------------------


@partial(jax.jit, static_argnums=0)
def _frame_kernel(geo: SurfaceGeometry, q, data, plan):
    """Connection coefficients and the Codazzi left side over frame index triples."""
    loc = Local(geo, data)
    md = loc.model
    g = md.metric(q)
    lc = LeviCivita(md)
    frame_fn = truncated(loc.field(lambda r: loc.frame(r, plan)), q, 1)
    S = truncated(loc.field(lambda r: loc.shape_ambient(r).reshape(-1)), q, 1)
    n, k = loc.dim, 2 * loc.m
    E = frame_fn(q)
    P = loc.projector(q)

    def leg(c):
        return loc.field(lambda r: frame_fn(r) @ c)

    def nabla_t(X, Y):
        return loc.field(lambda r: loc.projector(r) @ lc.nabla(X, Y)(r))

    def omega(ci, cj):
        return E.T @ g @ (P @ lc.nabla(leg(ci), leg(cj))(q))

    def nabla_A(X, Y):
        AY = loc.field(lambda r: S(r).reshape(n, n) @ Y(r))
        return P @ lc.nabla(X, AY)(q) - S(q).reshape(n, n) @ nabla_t(X, Y)(q)

    def codazzi(ca, cb):
        X, Y = leg(ca), leg(cb)
        return E.T @ g @ (nabla_A(X, Y) - nabla_A(Y, X))

    I = jnp.eye(k)
    om = jax.vmap(lambda a: jax.vmap(lambda b: omega(a, b))(I))(I)
    cod = jax.vmap(lambda a: jax.vmap(lambda b: codazzi(a, b))(I))(I)
    return {"omega": om, "codazzi_lhs": cod, "frame": E, "N": loc.normal(q), "V": loc.v(q), "g": g}


def frame_kernel(s: LevelSurface, p, plan=None) -> dict:
    """``omega[i, j, k] = g(nabla_{e_i} e_j, e_k)`` and ``L[a, b, c] = g((nabla_a A) e_b - (nabla_b A) e_a, e_c)``."""
    check_regular(s, p)
    plan = s.frame_plan(p) if plan is None else plan
    q = jnp.asarray(p, dtype=jnp.float64)
    geo, data = s.kernel_inputs(q)
    return {k: np.asarray(v) for k, v in _frame_kernel(geo, q, data, plan_array(plan)).items()}


def surface_connection_coeffs(s: LevelSurface, p, plan=None) -> np.ndarray:
    return frame_kernel(s, p, plan)["omega"]
