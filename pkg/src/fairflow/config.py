"""JSON analysis configs (schema 1).

A config names the program, the input space and optionally a causal model,
restriction, condition or path set.  Relative paths resolve against the
config file's directory first and the shipped corpus second.

    {
      "schema": 1,
      "program": "c3.dp",
      "constants": {"T": 5},
      "inputs": [
        {"name": "group", "role": "protected", "domain": [0, 9], "dist": "uniform"},
        {"name": "score", "role": "unprotected", "domain": [1, 10],
         "dist": {"pmf": {"6": "3/20", ...}}}
      ],
      "model": "zipcode.scm",
      "paths": ["zipCode"],
      "wrap_size": 100
    }

Inputs with role ``background`` override the distribution of a model's
background variable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .causal import CausalModel, PathSpec, load_model
from .dsl import load_program
from .dsl.ast import DecisionProgram
from .errors import ConfigError, FairflowError
from .spaces import Distribution, Domain, InputSpace, Variable

SCHEMA = 1
_KNOWN_KEYS = {"schema", "comment", "program", "constants", "inputs", "model", "paths",
               "restriction", "condition", "wrap_size", "favorable"}


def corpus_dir() -> Path:
    return Path(str(resources.files("fairflow") / "corpus"))


def resolve(name: str | Path, base: Path | None = None) -> Path:
    """Find a file relative to ``base``, the working directory, or the corpus."""
    path = Path(name)
    candidates = [path] if path.is_absolute() else (
        ([base / path] if base is not None else []) + [Path.cwd() / path, corpus_dir() / path])
    for c in candidates:
        if c.is_file():
            return c
    raise ConfigError(f"file not found: {name}")


def parse_domain_spec(spec) -> Domain:
    if isinstance(spec, list) and len(spec) == 2 and all(isinstance(x, int) for x in spec):
        if spec[1] < spec[0]:
            raise ConfigError(f"empty range {spec}")
        return Domain.range(spec[0], spec[1])
    if isinstance(spec, dict) and set(spec) == {"values"}:
        return Domain.of(int(v) for v in spec["values"])
    raise ConfigError(f"bad domain {spec!r}: use [lo, hi] or {{\"values\": [...]}}")


def parse_dist(spec, domain: Domain) -> Distribution:
    if spec in (None, "uniform"):
        return Distribution.uniform(domain)
    if isinstance(spec, dict) and set(spec) == {"pmf"}:
        return Distribution.from_pmf(domain, {int(k): v for k, v in spec["pmf"].items()})
    raise ConfigError(f"bad distribution {spec!r}: use \"uniform\" or {{\"pmf\": {{...}}}}")


def parse_inputs(entries) -> tuple[InputSpace | None, dict[str, Distribution]]:
    """The input space (if any protected/unprotected inputs) and background overrides."""
    protected: list[Variable] = []
    unprotected: list[Variable] = []
    background: dict[str, Distribution] = {}
    for entry in entries:
        try:
            name, role = entry["name"], entry.get("role", "unprotected")
            dom = parse_domain_spec(entry["domain"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"input entry {entry!r} needs name and domain") from exc
        dist = parse_dist(entry.get("dist"), dom)
        if role == "protected":
            protected.append(Variable(name, dom, dist))
        elif role == "unprotected":
            unprotected.append(Variable(name, dom, dist))
        elif role == "background":
            background[name] = dist
        else:
            raise ConfigError(f"input {name}: unknown role {role!r}")
    if not protected and not unprotected:
        return None, background
    if len(protected) != 1:
        raise ConfigError(f"exactly one protected input required, got {len(protected)}")
    return InputSpace(protected[0], tuple(unprotected)), background


@dataclass
class AnalysisConfig:
    source: Path | None = None
    program: Path | None = None
    constants: dict[str, int] = field(default_factory=dict)
    space: InputSpace | None = None
    background: dict[str, Distribution] = field(default_factory=dict)
    model: Path | None = None
    paths: PathSpec | None = None
    restriction: Path | None = None
    condition: Path | None = None
    wrap_size: int | None = None
    favorable: int = 1

    def load_program(self, which: str = "program") -> DecisionProgram:
        path = getattr(self, which)
        if path is None:
            raise ConfigError(f"no {which} given")
        return load_program(path, self.constants)

    def load_model(self) -> CausalModel:
        if self.model is None:
            raise ConfigError("no causal model given")
        model = load_model(self.model)
        for name, dist in self.background.items():
            model = model.with_background(name, dist)
        return model

    def require_space(self) -> InputSpace:
        if self.space is None:
            raise ConfigError("no input space given (inputs with protected/unprotected roles)")
        return self.space

    def validate(self) -> None:
        if self.paths is not None and self.model is None:
            raise ConfigError("paths need a causal model")
        if self.model is not None and (self.restriction or self.condition):
            raise ConfigError("restriction/condition programs do not combine with a causal model")

    def echo(self) -> dict:
        out: dict = {}
        for key in ("program", "model", "restriction", "condition"):
            value = getattr(self, key)
            if value is not None:
                out[key] = Path(value).name
        if self.constants:
            out["constants"] = dict(sorted(self.constants.items()))
        if self.space is not None:
            out["space"] = self.space.describe()
        if self.background:
            out["background"] = {k: v.describe() for k, v in sorted(self.background.items())}
        if self.paths is not None:
            out["paths"] = sorted(self.paths.clamped)
        if self.wrap_size is not None:
            out["wrap_size"] = self.wrap_size
        out["favorable"] = self.favorable
        return out


def load_config(path: str | Path) -> AnalysisConfig:
    path = resolve(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data, path.parent, path)


def config_from_dict(data: dict, base: Path | None = None, source: Path | None = None) -> AnalysisConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported config schema {data.get('schema')!r} (expected {SCHEMA})")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    cfg = AnalysisConfig(source=source)
    for key in ("program", "model", "restriction", "condition"):
        if data.get(key) is not None:
            setattr(cfg, key, resolve(data[key], base))
    consts = data.get("constants", {})
    if not isinstance(consts, dict) or not all(isinstance(v, int) for v in consts.values()):
        raise ConfigError("constants must map names to integers")
    cfg.constants = dict(consts)
    try:
        cfg.space, cfg.background = parse_inputs(data.get("inputs", []))
    except FairflowError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"inputs: {exc}") from exc
    if "paths" in data:
        cfg.paths = PathSpec(data["paths"])
    cfg.wrap_size = data.get("wrap_size")
    cfg.favorable = data.get("favorable", 1)
    cfg.validate()
    return cfg
