"""Acceptance criteria 1-10; each test records one pass/fail line."""

import json
import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from sasakian_tw import biharmonic as bh
from sasakian_tw import cli, dsl, report, suites
from sasakian_tw import pseudohopf as ph
from sasakian_tw.config import from_dict
from sasakian_tw.connections import (
    LeviCivita,
    TanakaWebsterContact,
    parallelism_residuals,
    tw_agreement,
    tw_torsion_residual,
)
from sasakian_tw.curvature import corollary_bound, curvature_spaceform, curvature_tensor
from sasakian_tw.hypersurface import (
    LevelSurface,
    plane_example_frame,
    plane_example_q,
    sample_points,
    shape_in_frame,
    shape_operator,
)
from sasakian_tw.model import SpaceForm, SpaceFormParams, phi_sectional_oracle, structure_at

SEED = 42
TIME_LIMIT = 60.0


def record(n: int, ok: bool, detail: str, started: float) -> None:
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < TIME_LIMIT
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s) {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_axioms():
    t0 = time.perf_counter()
    worst = {}
    for m in (1, 2):
        res = suites.axioms(from_dict({"m": m, "samples": 200, "seed": SEED, "tolerances": {"geometry": 1e-8}}))
        worst[m] = max(r["max_residual"] for r in res.rows())
    ok = all(v <= 1e-8 for v in worst.values())
    record(1, ok, f"200 points each; max residual m=1 {worst[1]:.1e}, m=2 {worst[2]:.1e} (tol 1e-8)", t0)


def test_criterion_02_tanaka_webster():
    t0 = time.perf_counter()
    par = tor = agree = 0.0
    for m in (1, 2):
        md = SpaceForm(m)
        tw = TanakaWebsterContact(md)
        for p in suites.model_points(m, 50, SEED):
            par = max(par, max(parallelism_residuals(tw, p).values()))
            tor = max(tor, tw_torsion_residual(tw, p))
            agree = max(agree, tw_agreement(md, p))
    conv = SpaceForm(1).deta_convention
    ok = par <= 1e-8 and tor <= 1e-8 and agree <= 1e-9
    record(
        2,
        ok,
        f"parallel {par:.1e}, torsion {tor:.1e} under factor {conv.factor}, constructions agree {agree:.1e}",
        t0,
    )


def test_criterion_03_curvature_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    params = SpaceFormParams(1)
    lc = LeviCivita(SpaceForm(1))
    oracle = 0.0
    for p in suites.model_points(1, 50, SEED):
        T = curvature_tensor(lc, p)
        X, Y, Z = rng.normal(size=(3, 3))
        num = np.einsum("abcl,a,b,c->l", T, X, Y, Z)
        oracle = max(oracle, float(np.max(np.abs(num - curvature_spaceform(params, X, Y, Z, structure_at(params, p))))))
    phisec = 0.0
    md = SpaceForm(1)
    for p in suites.model_points(1, 20, SEED + 1):
        st = structure_at(params, p)
        W = st.phi @ rng.normal(size=3)
        W = W / float(md.norm(p, W))
        phisec = max(phisec, abs(phi_sectional_oracle(params, p, W) + 3.0))
    ok = oracle <= 1e-6 and phisec <= 1e-6
    record(3, ok, f"closed form vs numeric {oracle:.1e} at 50 samples; |K(X, phi X) + 3| {phisec:.1e} at 20", t0)


def test_criterion_04_worked_examples():
    t0 = time.perf_counter()
    plane = LevelSurface.from_source("x + z", 0.0)
    cyl = LevelSurface.from_source("x^2 + z^2", 1.0)
    pts, _ = sample_points(plane, 50, SEED)
    a_err = max(
        float(np.max(np.abs(shape_in_frame(plane, p, plane_example_frame(p)) - [[0, plane_example_q(p[1])], [plane_example_q(p[1]), 0]])))
        for p in pts
    )
    h_plane = max(abs(shape_operator(plane, p).h) for p in pts)
    cpts, _ = sample_points(cyl, 50, SEED)
    h_cyl = max(abs(shape_operator(cyl, p).h) for p in cpts)
    verdicts, worst = {}, {}
    for name, s, ps in (("plane", plane, pts), ("cylinder", cyl, cpts)):
        recs = [bh.evaluate_point(s, p, 0.0) for p in ps]
        verdicts[name] = bh.surface_verdict(recs, 1e-5)
        worst[name] = max(r.max_residual() for r in recs)
    ok = (
        a_err <= 1e-7
        and h_plane <= 1e-9
        and h_cyl <= 1e-8
        and all(v == bh.VERDICT_POSITIVE for v in verdicts.values())
        and max(worst.values()) <= 1e-5
    )
    record(
        4,
        ok,
        f"plane: A error {a_err:.1e}, |h| {h_plane:.1e}, verdict '{verdicts['plane']}'; "
        f"cylinder: |h| max {h_cyl:.3g} (tol 1e-8), max residual {worst['cylinder']:.3g}, verdict '{verdicts['cylinder']}'",
        t0,
    )


def test_criterion_05_k_adjudication():
    t0 = time.perf_counter()
    adj = suites.adjudicate_k(1, SEED)
    bound = corollary_bound(1)
    spread_ok = adj["spread"] is not None and adj["spread"] <= 1e-5
    branch_ok = adj["branch"] in ("lemma", "alt")
    l_ok = adj["l_used"] == adj["measured_k"] - 2.0
    ok = spread_ok and branch_ok and l_ok and math.isclose(bound, 0.2)
    record(
        5,
        ok,
        f"measured_k {adj['measured_k']:.3g} over {adj['samples']} samples (spread {adj['spread']:.1e}); "
        f"k_lemma {adj['k_lemma']:g}, k_alt {adj['k_alt']:g}; branch '{adj['branch']}'; "
        f"l_used {adj['l_used']:.3g}; corollary bound {bound:g}",
        t0,
    )


def test_criterion_06_dual_path():
    t0 = time.perf_counter()
    k_used = suites.adjudicate_k(2, SEED, per_surface=2)["k_used"]
    literal = flipped = 0.0
    hmin = math.inf
    for i, (src, level) in enumerate(suites.random_surfaces(2, 3, SEED)):
        s = LevelSurface.from_source(src, level, m=2)
        for p in sample_points(s, 4, SEED + i)[0]:
            r = bh.evaluate_point(s, p, k_used)
            hmin = min(hmin, abs(r.h))
            literal = max(literal, r.details["dual_path_literal"])
            flipped = max(flipped, r.details["dual_path_analyst_plus"])
    fit = suites.tangent_factor(2, SEED)
    ok = hmin > 0 and literal <= 1e-4
    record(
        6,
        ok,
        f"min |h| {hmin:.2g}; |tau_N + E| max {literal:.3g} (tol 1e-4); with Lap_M = +trace Hess {flipped:.1e}; "
        f"tangent factor {fit['mu']:.12g}, deviation from m {fit['deviation_from_m']:.1e}",
        t0,
    )


def test_criterion_07_universal_identities():
    t0 = time.perf_counter()
    gated_sources = [("x^2 + 1.3*y^2 + 0.3*x^3", 1.0, 1)] + [(s, lv, 2) for s, lv in suites.random_surfaces(2, 2, SEED)]
    axi = ahxi = lap_id = 0.0
    for src, level, m in gated_sources:
        s = LevelSurface.from_source(src, level, m=m)
        for p in sample_points(s, 5, SEED)[0]:
            d = bh.pointwise(s, p)
            assert float(d["xi_tangency"]) <= bh.GATE_TOL
            axi = max(axi, float(np.sqrt((d["a_xi"] + d["V"]) @ d["g"] @ (d["a_xi"] + d["V"]))))
            ahxi = max(ahxi, bh.ah_xi_from_pointwise(d))
            lap_id = max(lap_id, bh.laplacian_identity_from_pointwise(d))
    plane = LevelSurface.from_source("x + z", 0.0)
    lap_id_plane = max(bh.laplacian_identity_check(plane, p) for p in sample_points(plane, 5, SEED)[0])
    cyl = LevelSurface.from_source("x^2 + z^2", 1.0)
    lap_id_cyl = max(bh.laplacian_identity_check(cyl, p) for p in sample_points(cyl, 5, SEED)[0])
    ok = axi <= 1e-6 and ahxi <= 1e-6 and max(lap_id, lap_id_plane) <= 1e-4
    record(
        7,
        ok,
        f"|A xi + V| {axi:.1e}, |h(A xi + V)| {ahxi:.1e} on xi-tangent surfaces; Laplacian identity residual {lap_id:.1e} there, "
        f"{lap_id_plane:.1e} on the plane; cylinder (xi not tangent, outside the hypothesis) {lap_id_cyl:.3g}",
        t0,
    )


def test_criterion_08_pseudo_hopf():
    t0 = time.perf_counter()
    fx = suites.pseudohopf_fixtures()
    rows = {r["check"]: r for r in fx.rows()}
    fixtures_ok = all(r["passed"] for r in rows.values())
    worst_fixture = max(r["max_residual"] for r in rows.values())
    plane = LevelSurface.from_source("x + z", 0.0)
    full = disp = 0.0
    for p in sample_points(plane, 10, SEED)[0]:
        c = ph.codazzi_residual(plane, p)
        full, disp = max(full, c["residual"]), max(disp, c["residual_displayed"])
    ok = fixtures_ok and full <= 1e-4
    record(
        8,
        ok,
        f"20-value theta grid fixtures max residual {worst_fixture:.1e} (tol 1e-9); plane Codazzi {full:.1e} "
        f"with the full curvature term, {disp:.3g} with the shortened xi-tangent form",
        t0,
    )


def test_criterion_09_parser():
    from test_dsl import PRECEDENCE, SMOOTH, fuzz

    t0 = time.perf_counter()
    exact = all(dsl.evaluate(dsl.parse(s), [0, 0, 0]) == v for s, v in PRECEDENCE)
    out = fuzz(100_000, seed=SEED)
    worst = 0.0
    rng = np.random.default_rng(SEED)
    for src in SMOOTH:
        e = dsl.parse(src)
        for _ in range(5):
            p, v = rng.uniform(-1, 1, 3), rng.normal(size=3)
            h = 1e-4
            f = [dsl.evaluate(e, p + k * h * v) for k in (-2, -1, 1, 2)]
            fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
            worst = max(worst, abs(dsl.eval_jet(e, p, 1, v).derivative(1) - fd) / max(1.0, abs(fd)))
    ok = exact and len(PRECEDENCE) == 20 and out["parsed"] + out["errors"] == 100_000 and worst <= 1e-8
    record(
        9,
        ok,
        f"{len(PRECEDENCE)} precedence fixtures exact={exact}; fuzz 1e5 inputs crash-free "
        f"({out['parsed']} parsed, {out['errors']} positioned errors); jet vs FD {worst:.1e}",
        t0,
    )


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    same = []
    for cmd in (["surface"], ["biharmonic"], ["pseudohopf"]):
        args = [*cmd, "--f", "x^2 + 1.3*y^2", "--level", "1", "--samples", "6", "--seed", "7", "--quiet"]
        texts = []
        for tag in "ab":
            path = tmp_path / f"{cmd[0]}_{tag}.json"
            cli.main([*args, "--json-out", str(path)])
            texts.append(report.dumps(report.without_timestamp(json.loads(path.read_text()))))
        same.append(texts[0] == texts[1])
    record(10, all(same), f"byte-identical reports (timestamp excluded) for surface/biharmonic/pseudohopf: {same}", t0)
