"""Run configuration: JSON documents validated against a published schema."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import dsl

DEFAULT_SAMPLES = 50
DEFAULT_SEED = 42
DEFAULT_TOLERANCES = {"geometry": 1e-7, "first_order": 1e-6}
SECOND_ORDER_DEFAULT = {"jet": 1e-6, "fd": 1e-4}


class ConfigError(ValueError):
    """All schema violations of one document, each with its field path."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Tolerances:
    geometry: float
    first_order: float
    second_order: float


@dataclass(frozen=True)
class RunConfig:
    m: int
    f: str | None = None
    level: float = 0.0
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tolerances: Tolerances = field(default_factory=lambda: Tolerances(1e-7, 1e-6, 1e-6))
    strategy: str = "jet"
    orientation: int = 1
    k_branch: str = "auto"

    def as_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> "RunConfig":
        raw = self.as_dict()
        for k, v in kw.items():
            if v is not None:
                raw[k] = v
        if "strategy" in kw and kw["strategy"] is not None and kw["strategy"] != self.strategy:
            # an fd run loosens only a defaulted second-order tolerance
            if raw["tolerances"]["second_order"] == SECOND_ORDER_DEFAULT[self.strategy]:
                raw["tolerances"]["second_order"] = SECOND_ORDER_DEFAULT[kw["strategy"]]
        return from_dict({k: v for k, v in raw.items() if v is not None})


def schema(name: str = "config") -> dict:
    text = resources.files("sasakian_tw").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(x) for x in err.absolute_path]
    return "/" + "/".join(parts)


def validate(raw) -> list[str]:
    v = jsonschema.Draft202012Validator(schema("config"))
    errs = sorted(v.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    out = [f"{_path(e)}: {e.message}" for e in errs]
    if not out and isinstance(raw, dict) and "f" in raw:
        try:
            dsl.parse(raw["f"], raw["m"])
        except dsl.ParseError as exc:
            out.append(f"/f: {exc}")
    return out


def from_dict(raw) -> RunConfig:
    errs = validate(raw)
    if errs:
        raise ConfigError(errs)
    strategy = raw.get("strategy", "jet")
    tol = dict(DEFAULT_TOLERANCES, second_order=SECOND_ORDER_DEFAULT[strategy])
    tol.update(raw.get("tolerances", {}))
    return RunConfig(
        m=raw["m"],
        f=raw.get("f"),
        level=float(raw.get("level", 0.0)),
        samples=raw.get("samples", DEFAULT_SAMPLES),
        seed=raw.get("seed", DEFAULT_SEED),
        tolerances=Tolerances(**{k: float(v) for k, v in tol.items()}),
        strategy=strategy,
        orientation=raw.get("orientation", 1),
        k_branch=raw.get("k_branch", "auto"),
    )


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError([f"/: file not found: {path}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"/: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"]) from exc
    return from_dict(raw)
