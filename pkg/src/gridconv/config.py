"""JSON scenario configuration.

A config is one JSON object. Unknown keys anywhere are rejected::

    {
      "scenario": "source" | "saddle" | "linear_adiabatic" | "adiabatic_front" | "custom",
      "parameters": {...},              # named scenarios only, see scenarios.py
      "domain_length_x": 1.0,           # custom only
      "domain_length_y": 1.0,           # custom only
      "source": -2.0,                   # custom only
      "edges": {"left": {"kind": "dirichlet", "value": 0.0}, ...},  # custom only, all four
      "grid_sizes": [8, 16, 32],        # or
      "ladder": {"n_min": 8, "n_max": 128},
      "probes": [{"name": "center", "x": 0.5, "y": 0.5}],
      "solver": {"residual_tolerance": 1e-10, "max_iterations": 10000,
                 "alpha_min": null, "alpha_max": null, "alpha_cycle_length": 8},
      "fit_degree": 3,
      "stage_threshold": 0.001
    }

With neither ``grid_sizes`` nor ``ladder`` the ladder 8..128 is used.
"""

from __future__ import annotations

import inspect
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .afi_solver import SolverConfig
from .errors import ConfigError
from .extrapolation import DEFAULT_DEGREE, DEFAULT_STAGE_THRESHOLD
from .grid import EDGES, EdgeCondition, GridSpec, ProblemSpec
from .scenarios import SCENARIOS, default_probes
from .study import ProbeSpec, default_ladder

__all__ = ["ScenarioConfig", "load_config"]

KINDS = tuple(SCENARIOS) + ("custom",)
DEFAULT_LADDER = (8, 128)
_TOP_KEYS = {
    "scenario", "parameters", "domain_length_x", "domain_length_y", "source", "edges",
    "grid_sizes", "ladder", "probes", "solver", "fit_degree", "stage_threshold",
}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_BAD_NAME_CHARS = set(',"\'\n\r')


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _dict(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


@dataclass
class ScenarioConfig:
    scenario: str
    parameters: dict[str, float] = field(default_factory=dict)
    domain_length_x: float = 1.0
    domain_length_y: float = 1.0
    source: float = 0.0
    edges: dict[str, EdgeCondition] = field(default_factory=dict)
    grid_sizes: list[int] | None = None
    ladder: tuple[int, int] | None = None
    probes: list[ProbeSpec] = field(default_factory=list)
    solver: dict[str, Any] = field(default_factory=dict)
    fit_degree: int = DEFAULT_DEGREE
    stage_threshold: float = DEFAULT_STAGE_THRESHOLD

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = _dict(data, "config")
        _reject_unknown(data, _TOP_KEYS, "config")
        if "scenario" not in data:
            raise ConfigError("scenario: missing")
        kind = data["scenario"]
        if kind not in KINDS:
            raise ConfigError(f"scenario: expected one of {', '.join(KINDS)}, got {kind!r}")
        cfg = cls(scenario=kind)

        if kind == "custom":
            if "parameters" in data:
                raise ConfigError("parameters: only valid for named scenarios")
            for key in ("domain_length_x", "domain_length_y", "source"):
                if key in data:
                    setattr(cfg, key, _number(data[key], key))
            edges = _dict(data.get("edges"), "edges") if "edges" in data else None
            if edges is None:
                raise ConfigError("edges: required for a custom scenario")
            _reject_unknown(edges, set(EDGES), "edges")
            for name in EDGES:
                if name not in edges:
                    raise ConfigError(f"edges.{name}: missing")
                e = _dict(edges[name], f"edges.{name}")
                _reject_unknown(e, {"kind", "value"}, f"edges.{name}")
                if e.get("kind") not in ("dirichlet", "neumann"):
                    raise ConfigError(f"edges.{name}.kind: expected 'dirichlet' or 'neumann', got {e.get('kind')!r}")
                cfg.edges[name] = EdgeCondition(e["kind"], _number(e.get("value", 0.0), f"edges.{name}.value"))
        else:
            for key in ("domain_length_x", "domain_length_y", "source", "edges"):
                if key in data:
                    raise ConfigError(f"{key}: only valid for a custom scenario")
            params = _dict(data.get("parameters", {}), "parameters")
            allowed = set(inspect.signature(SCENARIOS[kind]).parameters) - {"n"}
            _reject_unknown(params, allowed, "parameters")
            cfg.parameters = {k: _number(v, f"parameters.{k}") for k, v in params.items()}

        if "grid_sizes" in data and "ladder" in data:
            raise ConfigError("grid_sizes: give either grid_sizes or ladder, not both")
        if "grid_sizes" in data:
            sizes = data["grid_sizes"]
            if not isinstance(sizes, list) or not sizes:
                raise ConfigError("grid_sizes: expected a non-empty list")
            cfg.grid_sizes = [_integer(n, "grid_sizes") for n in sizes]
            if any(n < 2 for n in cfg.grid_sizes):
                raise ConfigError("grid_sizes: every size must be >= 2")
            if any(b <= a for a, b in zip(cfg.grid_sizes, cfg.grid_sizes[1:])):
                raise ConfigError("grid_sizes: must be strictly ascending")
        if "ladder" in data:
            lad = _dict(data["ladder"], "ladder")
            _reject_unknown(lad, {"n_min", "n_max"}, "ladder")
            try:
                cfg.ladder = (_integer(lad["n_min"], "ladder.n_min"), _integer(lad["n_max"], "ladder.n_max"))
            except KeyError as exc:
                raise ConfigError(f"ladder.{exc.args[0]}: missing") from None
            try:
                default_ladder(*cfg.ladder)
            except ValueError as exc:
                raise ConfigError(f"ladder: {exc}") from None

        if "probes" in data:
            if not isinstance(data["probes"], list) or not data["probes"]:
                raise ConfigError("probes: expected a non-empty list")
            for k, p in enumerate(data["probes"]):
                p = _dict(p, f"probes[{k}]")
                _reject_unknown(p, {"name", "x", "y"}, f"probes[{k}]")
                name = p.get("name")
                if not isinstance(name, str) or not name or _BAD_NAME_CHARS & set(name):
                    raise ConfigError(f"probes[{k}].name: expected a plain non-empty string")
                try:
                    cfg.probes.append(
                        ProbeSpec(name, _number(p.get("x"), f"probes[{k}].x"), _number(p.get("y"), f"probes[{k}].y"))
                    )
                except ValueError as exc:
                    raise ConfigError(f"probes[{k}]: {exc}") from None
            if len({p.name for p in cfg.probes}) != len(cfg.probes):
                raise ConfigError("probes: names must be unique")

        if "solver" in data:
            solver = _dict(data["solver"], "solver")
            _reject_unknown(solver, _SOLVER_KEYS, "solver")
            cfg.solver = dict(solver)
            try:
                cfg.solver_config()
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"solver: {exc}") from None
        if "fit_degree" in data:
            cfg.fit_degree = _integer(data["fit_degree"], "fit_degree")
            if cfg.fit_degree < 0:
                raise ConfigError("fit_degree: must be >= 0")
        if "stage_threshold" in data:
            cfg.stage_threshold = _number(data["stage_threshold"], "stage_threshold")
            if cfg.stage_threshold <= 0:
                raise ConfigError("stage_threshold: must be > 0")

        try:
            cfg.problem()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"scenario": self.scenario}
        if self.scenario == "custom":
            out["domain_length_x"] = self.domain_length_x
            out["domain_length_y"] = self.domain_length_y
            out["source"] = self.source
            out["edges"] = {n: {"kind": e.kind.value, "value": e.value} for n, e in self.edges.items()}
        elif self.parameters:
            out["parameters"] = dict(self.parameters)
        if self.grid_sizes is not None:
            out["grid_sizes"] = list(self.grid_sizes)
        if self.ladder is not None:
            out["ladder"] = {"n_min": self.ladder[0], "n_max": self.ladder[1]}
        if self.probes:
            out["probes"] = [{"name": p.name, "x": p.x_fraction, "y": p.y_fraction} for p in self.probes]
        if self.solver:
            out["solver"] = dict(self.solver)
        out["fit_degree"] = self.fit_degree
        out["stage_threshold"] = self.stage_threshold
        return out

    def problem(self, n: int | None = None) -> ProblemSpec:
        """Expanded problem on an ``n`` x ``n`` grid (first configured size by default)."""
        if n is None:
            n = self.sizes()[0]
        if self.scenario == "custom":
            grid = GridSpec(n, self.domain_length_x, self.domain_length_y)
            return ProblemSpec(grid, source=self.source, **self.edges)
        return SCENARIOS[self.scenario](n=n, **self.parameters)

    def sizes(self) -> list[int]:
        if self.grid_sizes is not None:
            return list(self.grid_sizes)
        return default_ladder(*(self.ladder or DEFAULT_LADDER))

    def probe_list(self) -> tuple[ProbeSpec, ...]:
        return tuple(self.probes) if self.probes else default_probes(self.scenario)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver)


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return ScenarioConfig.from_dict(data)
