"""Pseudo-Hopf analysis: the span{xi, V} block of A, its angle, and related identities.

Block convention: rows/columns ordered (xi, V).  With ``A xi = -V`` the block
is ``[[0, -1], [-1, beta]]``; its eigenvector ``W1 = (cos t, sin t)`` has
eigenvalue ``gamma1 = -tan t`` and ``W2 = (-sin t, cos t)`` has ``gamma2 = cot t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curvature import curvature_spaceform
from .hypersurface import LevelSurface, frame_kernel, shape_operator
from .model import SpaceFormParams, StructureTensors, structure_at

BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class DPerpDecomposition:
    theta: float
    gamma1: float
    gamma2: float
    beta: float
    alpha: float
    invariance_residual: float
    W1: np.ndarray
    W2: np.ndarray
    block: np.ndarray
    out_of_model: bool = False
    convention: str = "A W1 = gamma1 W1"
    notes: dict = field(default_factory=dict)


def decompose_block(block, invariance_residual: float = 0.0) -> DPerpDecomposition:
    """Diagonalize a symmetric 2x2 (xi, V) block and extract theta in (0, pi/2)."""
    B = np.asarray(block, dtype=float)
    if B.shape != (2, 2):
        raise ValueError("block must be 2x2")
    Bs = 0.5 * (B + B.T)
    vals, vecs = np.linalg.eigh(Bs)
    picks = []
    for i in range(2):
        v = vecs[:, i]
        ang = math.atan2(v[1], v[0]) % math.pi
        picks.append((ang, i))
    # exactly one eigenvector angle lies in [0, pi/2) after folding
    ang, i1 = min(picks, key=lambda t: t[0] if t[0] < math.pi / 2 else math.inf)
    i2 = 1 - i1
    out = ang < BOUNDARY_TOL or abs(ang - math.pi / 2) < BOUNDARY_TOL
    theta = ang
    W1 = np.array([math.cos(theta), math.sin(theta)])
    W2 = np.array([-math.sin(theta), math.cos(theta)])
    g1, g2 = float(vals[i1]), float(vals[i2])
    notes = {}
    if not out:
        fits_plus = abs(g1 + math.tan(theta))
        fits_minus = abs(g1 - math.tan(theta))
        notes = {
            "gamma1_plus_tan": fits_plus,
            "gamma1_minus_tan": fits_minus,
            "gamma2_minus_cot": abs(g2 - 1.0 / math.tan(theta)),
        }
        convention = "A W1 = gamma1 W1" if fits_plus <= fits_minus else "A W1 = -gamma1 W1"
    else:
        convention = "out of model"
    return DPerpDecomposition(
        theta=theta,
        gamma1=g1,
        gamma2=g2,
        beta=float(B[1, 1]),
        alpha=float(B[0, 1]),
        invariance_residual=float(invariance_residual),
        W1=W1,
        W2=W2,
        block=B,
        out_of_model=out,
        convention=convention,
        notes=notes,
    )


def block_from_theta(theta: float) -> np.ndarray:
    """The (xi, V) block [[0, -1], [-1, beta]] with beta = cot - tan."""
    beta = 1.0 / math.tan(theta) - math.tan(theta)
    return np.array([[0.0, -1.0], [-1.0, beta]])


def reconstruct(theta: float, gamma1: float, gamma2: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([gamma1, gamma2]) @ R.T


def decompose(s: LevelSurface, p, plan=None) -> DPerpDecomposition:
    """Decomposition of the surface shape operator at ``p``.

    The frame's last two legs are the unit tangent parts of xi and V; the
    invariance residual is the norm of the D-components of A xi and A V.
    """
    d = shape_operator(s, p, plan)
    A = d.A
    off = A[:-2, -2:]
    res = float(np.linalg.norm(off)) if off.size else 0.0
    dec = decompose_block(A[-2:, -2:], res)
    if not d.gated:
        dec = replace(dec, out_of_model=True, convention="out of model")
    dec.notes["xi_tangency"] = d.xi_tangency
    dec.notes["h"] = d.h
    return dec


def av_identity_check(dec: DPerpDecomposition, block=None) -> dict[str, float]:
    """|A V + xi - (gamma1 + gamma2) V| and the two closed forms of beta."""
    B = dec.block if block is None else np.asarray(block, dtype=float)
    AV = B @ np.array([0.0, 1.0])
    gsum = dec.gamma1 + dec.gamma2
    r_av = float(np.linalg.norm(AV - np.array([-1.0, gsum])))
    t = dec.theta
    beta_closed = math.cos(2 * t) / (math.cos(t) * math.sin(t)) if not dec.out_of_model else float("nan")
    return {
        "av_residual": r_av,
        "beta_minus_gamma_sum": abs(dec.beta - gsum),
        "beta_minus_closed_form": abs(dec.beta - beta_closed),
        "gamma_product_plus_one": abs(dec.gamma1 * dec.gamma2 + 1.0),
        "a_xi_residual": float(np.linalg.norm(B @ np.array([1.0, 0.0]) - np.array([0.0, -1.0]))),
    }


# -- eigenvalue pairing on D ----------------------------------------------------


class SingularPairing(ZeroDivisionError):
    pass


def paired_eigenvalue(lam: float, beta: float, c: float) -> float:
    """(2 beta lambda + c + 3) / (4 lambda - 2 beta)."""
    den = 4.0 * lam - 2.0 * beta
    if abs(den) < 1e-8:
        raise SingularPairing("|4 lambda - 2 beta| < 1e-8")
    return (2.0 * beta * lam + c + 3.0) / den


def pairing_check(A, phi, pairs, c: float, beta: float, d_projector=None, purity: float = 1e-6) -> dict:
    """Max |A phi X - lambda-bar phi X| over eigenpairs (lambda, X) with X in D.

    Pairs whose eigenvector is not D-pure, or whose denominator is singular,
    are skipped and counted.
    """
    A, phi = np.asarray(A, dtype=float), np.asarray(phi, dtype=float)
    worst, used, skipped_purity, skipped_singular = 0.0, 0, 0, 0
    for lam, X in pairs:
        X = np.asarray(X, dtype=float)
        X = X / np.linalg.norm(X)
        if d_projector is not None:
            if np.linalg.norm(np.asarray(d_projector) @ X) < 1.0 - purity:
                skipped_purity += 1
                continue
        try:
            lb = paired_eigenvalue(float(lam), beta, c)
        except SingularPairing:
            skipped_singular += 1
            continue
        Y = phi @ X
        worst = max(worst, float(np.linalg.norm(A @ Y - lb * Y)))
        used += 1
    return {"residual": worst, "pairs": used, "skipped_purity": skipped_purity, "skipped_singular": skipped_singular}


def pairing_fixture(lams, theta: float, c: float):
    """A constructed shape operator of the pseudo-Hopf block form (frame components).

    Basis order: e_1..e_{m-1}, phi e_1..phi e_{m-1}, xi, V, with phi e_i -> -e_i
    on D and the (xi, V) block from ``theta``.  Returns (A, phi, pairs, beta).
    """
    lams = [float(x) for x in lams]
    k = len(lams)
    n = 2 * k + 2
    B = block_from_theta(theta)
    beta = float(B[1, 1])
    A = np.zeros((n, n))
    phi = np.zeros((n, n))
    for i, lam in enumerate(lams):
        A[i, i] = lam
        A[k + i, k + i] = paired_eigenvalue(lam, beta, c)
        phi[k + i, i] = 1.0
        phi[i, k + i] = -1.0
    A[-2:, -2:] = B
    pairs = [(lams[i], np.eye(n)[i]) for i in range(k)]
    D = np.diag([1.0] * (2 * k) + [0.0, 0.0])
    return A, phi, pairs, beta, D


# -- Codazzi --------------------------------------------------------------------


def codazzi_displayed_rhs(X, Y, Z, V, structure: StructureTensors, c: float) -> float:
    """-(c-1)/4 g(g(phi X, Z) Y + 2 g(phi X, Y) Z - g(phi Y, Z) X, V)."""
    g, P = structure.g, structure.phi
    X, Y, Z, V = (np.asarray(v, dtype=float) for v in (X, Y, Z, V))

    def ip(a, b):
        return float(a @ g @ b)

    w = ip(P @ X, Z) * Y + 2.0 * ip(P @ X, Y) * Z - ip(P @ Y, Z) * X
    return -(c - 1.0) / 4.0 * ip(w, V)


def codazzi_full_rhs(X, Y, Z, N, structure: StructureTensors, params: SpaceFormParams) -> float:
    """-g(R(X, Y) N, Z) with the closed-form space-form curvature."""
    R = curvature_spaceform(params, X, Y, N, structure)
    return -float(R @ structure.g @ np.asarray(Z, dtype=float))


def codazzi_residual(s: LevelSurface, p, plan=None, c: float = -3.0) -> dict[str, float]:
    """Codazzi residuals over all frame triples at ``p``.

    ``residual`` uses the full closed-form right side; ``residual_displayed``
    uses the shortened right side that assumes xi tangent.
    """
    d = frame_kernel(s, p, plan)
    params = SpaceFormParams(s.m, c)
    st = structure_at(SpaceFormParams(s.m), p)
    E, L = d["frame"], d["codazzi_lhs"]
    k = E.shape[1]
    worst_full = worst_disp = worst_lhs = 0.0
    for a in range(k):
        for b in range(k):
            for cc in range(k):
                X, Y, Z = E[:, a], E[:, b], E[:, cc]
                lhs = float(L[a, b, cc])
                worst_lhs = max(worst_lhs, abs(lhs))
                worst_full = max(worst_full, abs(lhs - codazzi_full_rhs(X, Y, Z, d["N"], st, params)))
                worst_disp = max(worst_disp, abs(lhs - codazzi_displayed_rhs(X, Y, Z, d["V"], st, c)))
    return {"residual": worst_full, "residual_displayed": worst_disp, "max_lhs": worst_lhs}


def connection_identities(s: LevelSurface, p, plan=None) -> dict[str, float]:
    """omega_{ki}^i = 0 and omega_{ki}^j + omega_{kj}^i = 0 on the surface frame."""
    om = frame_kernel(s, p, plan)["omega"]
    k = om.shape[0]
    diag = max(abs(float(om[a, i, i])) for a in range(k) for i in range(k))
    return {"omega_kii": diag, "omega_antisymmetry": float(np.max(np.abs(om + om.transpose(0, 2, 1))))}


# -- minimal-or-CMC dichotomies ----------------------------------------------


@dataclass(frozen=True)
class DichotomySample:
    h: float
    grad_components: np.ndarray  # frame components of grad h; last two are (xi, V)
    gamma_sum: float
    biharmonic_residual: float
    pseudo_hopf: bool = True


def classify_gradient(comps, tol: float, purity: float = 1e-6) -> str:
    comps = np.asarray(comps, dtype=float)
    n = float(np.linalg.norm(comps))
    if n <= tol:
        return "zero"
    perp = float(np.linalg.norm(comps[-2:])) / n
    d_part = float(np.linalg.norm(comps[:-2])) / n if comps.shape[0] > 2 else 0.0
    if perp >= 1.0 - purity:
        if abs(comps[-1]) / n <= purity:
            return "xi-line"
        return "D-perp"
    if d_part >= 1.0 - purity:
        return "D"
    return "mixed"


def dichotomy_checks(samples: list[DichotomySample], m: int, tol: float) -> dict:
    """Per-sample predicates of the minimal-or-CMC dichotomies.

    Only biharmonic samples carry a predicate.  grad h in D-perp requires
    h = 0 or h = -(gamma1 + gamma2)/m; grad h along xi requires grad h = 0,
    which the class itself excludes, so such a sample is always flagged.
    """
    rows = []
    consistent = True
    for smp in samples:
        cls = classify_gradient(smp.grad_components, tol)
        row = {"class": cls, "h": float(smp.h)}
        if smp.biharmonic_residual > tol or cls in ("D", "mixed", "zero"):
            row["verdict"] = "vacuous"
        else:
            if cls == "xi-line":
                ok = False
            else:
                ok = abs(smp.h) <= tol or abs(smp.h + smp.gamma_sum / m) <= tol
            row["verdict"] = "consistent" if ok else "inconsistent"
            consistent = consistent and ok
        rows.append(row)
    return {"consistent": consistent, "samples": rows}
