"""Command-line driver: ``sasakian-tw <command> [options]``.

Exit codes: 0 all gating checks pass, 1 a check failed, 2 usage or config
error, 3 numerical breakdown (more than 5% of samples rejected).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report, suites
from .config import ConfigError, RunConfig, from_dict, load_config
from .model import SpaceFormParams

COMMANDS = ("axioms", "curvature", "surface", "biharmonic", "pseudohopf", "constants")
SURFACE_COMMANDS = ("surface", "biharmonic", "pseudohopf")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--json-out", type=Path, help="write the JSON report here")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--strategy", choices=("jet", "fd"))
    common.add_argument("--k-branch", choices=("lemma", "alt", "auto"))
    common.add_argument("--m", type=int, help="dimension parameter when no config is given")
    common.add_argument("--f", help="level-set function (DSL) when no config is given")
    common.add_argument("--level", type=float, help="level value when no config is given")
    common.add_argument("--quiet", action="store_true", help="suppress the text table")

    ap = argparse.ArgumentParser(prog="sasakian-tw", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    ax = sub.add_parser("axioms", parents=[common], help="contact, Sasakian and Tanaka-Webster identities")
    ax.add_argument("--inject-fault", choices=("phi-sign",), help=argparse.SUPPRESS)
    sub.add_parser("curvature", parents=[common], help="curvature oracle and k adjudication")
    sub.add_parser("surface", parents=[common], help="shape operator, mean curvature, xi-tangency")
    sub.add_parser("biharmonic", parents=[common], help="two-route Tanaka-Webster biharmonic check")
    phs = sub.add_parser("pseudohopf", parents=[common], help="span{xi, V} analysis, eigenvalue pairing, Codazzi")
    phs.add_argument("--fixtures", action="store_true", help="run the constructed block fixtures instead")
    cs = sub.add_parser("constants", parents=[common], help="k, l and the corollary bound")
    cs.add_argument("--c", type=float, default=SpaceFormParams().c)
    return ap


def resolve_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        if args.m is not None or args.f is not None or args.level is not None:
            raise ConfigError(["/: --m/--f/--level cannot be combined with --config"])
    else:
        raw = {"m": 1 if args.m is None else args.m}
        if args.f is not None:
            raw["f"] = args.f
        if args.level is not None:
            raw["level"] = args.level
        cfg = from_dict(raw)
    cfg = cfg.with_overrides(seed=args.seed, samples=args.samples, strategy=args.strategy, k_branch=args.k_branch)
    if args.command in SURFACE_COMMANDS and cfg.f is None and not getattr(args, "fixtures", False):
        raise ConfigError([f"/f: the {args.command} command needs a level-set function"])
    return cfg


def run(args) -> tuple[dict, int]:
    cfg = resolve_config(args)
    cmd = args.command
    if cmd == "axioms":
        res = suites.axioms(cfg, phi_sign=-1 if args.inject_fault == "phi-sign" else 1)
    elif cmd == "curvature":
        res = suites.curvature(cfg)
    elif cmd == "surface":
        res = suites.surface(cfg)
    elif cmd == "biharmonic":
        res = suites.biharmonic(cfg)
    elif cmd == "pseudohopf":
        res = suites.pseudohopf_fixtures() if args.fixtures else suites.pseudohopf(cfg)
    else:
        res = suites.constants_report(cfg.m, args.c)
    echo = cfg.as_dict()
    if cmd == "constants":
        echo["c"] = args.c
    if cmd == "pseudohopf" and args.fixtures:
        echo["fixtures"] = True
    rep = report.build(cmd, cfg, res, echo)
    return rep, rep["exit_code"]


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        rep, code = run(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return report.EXIT_CONFIG
    if not args.quiet:
        sys.stdout.write(report.render(rep))
    if args.json_out is not None:
        args.json_out.parent.mkdir(parents=True, exist_ok=True)
        args.json_out.write_text(report.dumps(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
