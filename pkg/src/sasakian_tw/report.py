"""Residual reports: assembly, deterministic JSON, and the plain-text table."""

from __future__ import annotations

import json
from datetime import datetime, timezone

import jsonschema

from . import __version__
from .config import RunConfig, schema
from .model import SpaceForm
from .suites import REJECTION_LIMIT, SuiteResult, as_plain

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_BREAKDOWN = 0, 1, 2, 3
TIMESTAMP_FIELD = "generated_at"


def exit_code(result: SuiteResult) -> int:
    if result.rejection_rate() > REJECTION_LIMIT:
        return EXIT_BREAKDOWN
    ok = all(r["passed"] for r in result.rows() if r["gating"])
    return EXIT_PASS if ok else EXIT_FAIL


def _verdicts(result: SuiteResult) -> dict:
    out = {}
    for key in ("biharmonic", "pseudohopf"):
        if key in result.sections and "verdict" in result.sections[key]:
            out[key] = result.sections[key]["verdict"]
    if "k_adjudication" in result.sections:
        out["k_branch"] = result.sections["k_adjudication"].get("branch")
    if "surface" in result.sections:
        sec = result.sections["surface"]
        out["xi_tangent"] = sec["gated_samples"] == result.accepted and result.accepted > 0
    return out


def build(command: str, cfg: RunConfig | None, result: SuiteResult, echo: dict | None = None) -> dict:
    code = exit_code(result)
    sections = {k: v for k, v in result.sections.items() if k not in ("k_adjudication", "deta_convention")}
    m = cfg.m if cfg is not None else 1
    rep = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "sasakian-tw", "version": __version__},
        "command": command,
        "config": echo if echo is not None else (cfg.as_dict() if cfg is not None else {}),
        "deta_convention": result.sections.get("deta_convention", SpaceForm(m).deta_convention.as_dict()),
        "k_adjudication": result.sections.get("k_adjudication"),
        "checks": result.rows(),
        "accepted_samples": result.accepted,
        "rejected_samples": result.rejected,
        "rejection_rate": result.rejection_rate(),
        "verdicts": _verdicts(result),
        "sections": sections,
        "status": {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_BREAKDOWN: "breakdown"}[code],
        "exit_code": code,
        TIMESTAMP_FIELD: datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return as_plain(rep)


def validate(rep: dict) -> list[str]:
    v = jsonschema.Draft202012Validator(schema("report"))
    return [f"/{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in v.iter_errors(rep)]


def dumps(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True, indent=2, allow_nan=False) + "\n"


def without_timestamp(rep: dict) -> dict:
    return {k: v for k, v in rep.items() if k != TIMESTAMP_FIELD}


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def render(rep: dict) -> str:
    lines = [f"sasakian-tw {rep['tool']['version']}  command={rep['command']}  status={rep['status']}"]
    head = ("check", "n", "max", "mean", "tol", "result")
    rows = []
    for r in rep["checks"]:
        mark = ("PASS" if r["passed"] else "FAIL") + ("" if r["gating"] else " (info)")
        rows.append((r["check"], str(r["samples"]), _fmt(r["max_residual"]), _fmt(r["mean_residual"]), _fmt(r["tolerance"]), mark))
    widths = [max(len(x[i]) for x in [head, *rows]) for i in range(len(head))]
    for r in [head, *rows]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    lines.append(f"samples: accepted={rep['accepted_samples']} rejected={rep['rejected_samples']}")
    adj = rep.get("k_adjudication")
    if adj:
        lines.append(
            f"k adjudication: measured={_fmt(adj.get('measured_k'))} branch={adj.get('branch')} "
            f"k_used={_fmt(adj.get('k_used'))} l_used={_fmt(adj.get('l_used'))}"
        )
    consts = rep["sections"].get("constants")
    if consts:
        lines.append("constants: " + "  ".join(f"{k}={_fmt(v)}" for k, v in sorted(consts.items())))
    for k, v in rep["verdicts"].items():
        lines.append(f"verdict {k}: {v}")
    return "\n".join(lines) + "\n"
