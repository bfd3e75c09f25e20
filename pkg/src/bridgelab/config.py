"""Experiment configuration: JSON schema, validation, builtin catalogue."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .bridge import SolverOptions
from .errors import ConfigError
from .potential import Potential, potential_from_config

MODES = ("bridge", "flow", "gaussian", "verify", "sweep")
METHODS = ("shooting", "action", "auto")


@dataclass
class ExperimentConfig:
    name: str
    mode: str
    potential: Potential
    x: np.ndarray
    y: np.ndarray
    T_values: list[float]
    theta_values: list[float]
    t_fractions: list[float]
    solver: SolverOptions
    csv_dir: Path
    json_path: Path
    quad_steps: int = 200001
    raw: dict = field(default_factory=dict)


def _fail(msg: str) -> ConfigError:
    return ConfigError(msg)


def parse_config(data: dict, *, name_hint: str = "config") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise _fail("config root must be a JSON object")
    name = data.get("name", name_hint)
    mode = data.get("mode")
    if mode not in MODES:
        raise _fail(f"mode must be one of {MODES}, got {mode!r}")

    pot_desc = data.get("potential")
    if pot_desc is None and mode == "gaussian":
        # the closed-form family never evaluates it; dim 1 keeps validation going
        pot_desc = {"kind": "quadratic_isotropic", "dim": 1}
    if not isinstance(pot_desc, dict):
        raise _fail("config needs a 'potential' object")
    try:
        potential = potential_from_config(pot_desc)
    except ValueError as exc:
        raise _fail(str(exc)) from exc

    endpoints = data.get("endpoints") or {}
    try:
        x = np.asarray(endpoints.get("x"), dtype=float).reshape(-1)
        y = np.asarray(endpoints.get("y", endpoints.get("x")), dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise _fail("endpoints.x / endpoints.y must be numeric arrays") from exc
    if x.size != potential.dim or y.size != potential.dim:
        raise _fail(
            f"endpoint dimension mismatch: potential dim {potential.dim}, "
            f"got x:{x.size} y:{y.size}"
        )

    T_values = data.get("T_values")
    if not isinstance(T_values, list) or not T_values:
        raise _fail("T_values must be a nonempty list")
    T_values = [float(t) for t in T_values]
    if any(t <= 0 for t in T_values) or any(b <= a for a, b in zip(T_values, T_values[1:])):
        raise _fail("T_values must be positive and strictly increasing")

    theta_values = [float(v) for v in data.get("theta_values", [k / 10 for k in range(1, 10)])]
    if any(not 0.0 < v < 1.0 for v in theta_values):
        raise _fail("theta_values must lie strictly inside (0, 1)")
    t_fractions = [float(v) for v in data.get("t_fractions", [0.25, 0.5, 0.75])]
    if any(not 0.0 < v < 1.0 for v in t_fractions):
        raise _fail("t_fractions must lie strictly inside (0, 1)")

    solver_desc = data.get("solver", {})
    if not isinstance(solver_desc, dict):
        raise _fail("'solver' must be an object")
    method = solver_desc.get("method", "auto")
    if method not in METHODS:
        raise _fail(f"solver.method must be one of {METHODS}, got {method!r}")
    try:
        solver = SolverOptions(
            method=method,
            max_iter=int(solver_desc.get("max_iter", 100)),
            tol_boundary=float(solver_desc.get("tol_boundary", 1e-9)),
            grid_points=(
                int(solver_desc["grid_points"]) if "grid_points" in solver_desc else None
            ),
        )
    except (TypeError, ValueError) as exc:
        raise _fail(f"bad solver options: {exc}") from exc

    outputs = data.get("outputs", {})
    csv_dir = Path(outputs.get("csv_dir", "out"))
    json_path = Path(outputs.get("json_path", str(csv_dir / f"{name}_summary.json")))

    quad_steps = int(data.get("quad_steps", 200001))

    return ExperimentConfig(
        name=str(name),
        mode=mode,
        potential=potential,
        x=x,
        y=y,
        T_values=T_values,
        theta_values=theta_values,
        t_fractions=t_fractions,
        solver=solver,
        csv_dir=csv_dir,
        json_path=json_path,
        quad_steps=quad_steps,
        raw=data,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise _fail(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _fail(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, name_hint=path.stem)


def builtin_config_names() -> list[str]:
    pkg = resources.files("bridgelab").joinpath("configs")
    return sorted(p.name[: -len(".json")] for p in pkg.iterdir() if p.name.endswith(".json"))


def load_builtin_config(name: str) -> ExperimentConfig:
    pkg = resources.files("bridgelab").joinpath("configs").joinpath(f"{name}.json")
    try:
        data = json.loads(pkg.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise _fail(
            f"no builtin config named {name!r}; available: {', '.join(builtin_config_names())}"
        ) from exc
    return parse_config(data, name_hint=name)


def resolve_config(spec: str | Path) -> ExperimentConfig:
    """A path to a JSON file, or the name of a packaged builtin config."""
    path = Path(spec)
    if path.exists():
        return load_config(path)
    if path.suffix == "" and "/" not in str(spec):
        return load_builtin_config(str(spec))
    raise _fail(f"config file {spec} does not exist")
