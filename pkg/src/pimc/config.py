"""Experiment configuration: a flat TOML document with validated defaults."""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pimc.actions import ACTION_CODES, ActionKind
from pimc.errors import ConfigurationError
from pimc.path import Discretization, InitSpec
from pimc.potentials import DEFAULT_A, PotentialKind
from pimc.sampler import ProposalSpec, Schedule

REQUIRED = ("action", "potential", "n_beads", "tau", "seeds")
POTENTIALS = ("coulomb", "harmonic", "free")


@dataclass(frozen=True)
class ExperimentConfig:
    action: str
    potential: str
    n_beads: int
    tau: float
    seeds: tuple[int, ...]
    mass: float = 1.0
    A: float | None = None
    omega: float | None = None
    delta: float = 0.3
    burn_in: int = 2000
    measure: int = 20000
    thin: int = 10
    n_blocks: int = 50
    init: str = "shell"
    init_r_lo: float = 0.5
    init_r_hi: float = 2.0
    init_point: tuple[float, float, float] = (0.0, 0.0, 1.0)
    probe_radius: float | None = None
    wall_radius: float | None = None
    tune_delta: bool = False
    collapse_epsilon: float = 0.1
    hist_min: float = 0.0
    hist_max: float = 6.0
    hist_bins: int = 100
    output_dir: str = "pimc_out"

    # Domain objects built from the flat fields.

    @property
    def disc(self) -> Discretization:
        return Discretization(self.tau, self.mass, self.n_beads)

    @property
    def potential_kind(self) -> PotentialKind:
        if self.action == "simplified":
            return PotentialKind.effective(self.A, self.tau, self.mass)
        if self.potential == "harmonic":
            return PotentialKind.harmonic(self.omega, self.mass)
        return PotentialKind(self.potential)

    @property
    def action_kind(self) -> ActionKind:
        return ActionKind(self.action, self.potential_kind, self.disc)

    @property
    def proposal(self) -> ProposalSpec:
        return ProposalSpec(self.delta)

    @property
    def schedule(self) -> Schedule:
        return Schedule(self.burn_in, self.measure, self.thin)

    def init_spec(self, seed: int) -> InitSpec:
        return InitSpec(
            kind=self.init, point=self.init_point, r_lo=self.init_r_lo,
            r_hi=self.init_r_hi, seed=seed, probe_radius=self.probe_radius,
        )

    @property
    def bin_edges(self):
        import numpy as np

        return np.linspace(self.hist_min, self.hist_max, self.hist_bins + 1)

    def to_dict(self) -> dict[str, Any]:
        """Flat mapping of the set fields; unset optionals are omitted."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def to_toml(self) -> str:
        return "".join(f"{k} = {_toml_value(v)}\n" for k, v in self.to_dict().items())

    def replace(self, **changes) -> ExperimentConfig:
        return validate(dataclasses.replace(self, **changes))


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_FIELDS = {"n_beads", "burn_in", "measure", "thin", "n_blocks", "hist_bins"}
_FLOAT_FIELDS = {
    "tau", "mass", "A", "omega", "delta", "init_r_lo", "init_r_hi", "probe_radius",
    "wall_radius", "collapse_epsilon", "hist_min", "hist_max",
}


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return str(v)


def _coerce(key: str, value):
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigurationError(f"{key} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key} must be a number, got {value!r}")
        return float(value)
    if key == "seeds":
        if isinstance(value, int) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in value
        ):
            raise ConfigurationError(f"seeds must be a list of integers, got {value!r}")
        return tuple(value)
    if key == "init_point":
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            raise ConfigurationError(f"init_point must be a list of 3 numbers, got {value!r}")
        return tuple(float(x) for x in value)
    if key == "tune_delta":
        if not isinstance(value, bool):
            raise ConfigurationError(f"tune_delta must be true or false, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigurationError(f"{key} must be a string, got {value!r}")
    return value


def config_from_mapping(data: Mapping[str, Any]) -> ExperimentConfig:
    """Build and validate a config from a flat mapping, filling defaults."""
    unknown = sorted(k for k in data if k not in _FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown configuration key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ConfigurationError(f"missing required key(s): {', '.join(missing)}")
    values = {k: _coerce(k, v) for k, v in data.items() if v is not None}
    return validate(ExperimentConfig(**values))


def parse_config(text: str, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Parse a flat TOML document; ``overrides`` take precedence over the file."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigurationError(f"configuration must be flat; found table(s): {', '.join(nested)}")
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(data)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field and cross-field rule; fill action-dependent defaults."""
    if cfg.action not in ACTION_CODES:
        raise ConfigurationError(
            f"action must be one of {sorted(ACTION_CODES)}, got {cfg.action!r}"
        )
    if cfg.potential not in POTENTIALS:
        raise ConfigurationError(f"potential must be one of {list(POTENTIALS)}, got {cfg.potential!r}")
    if cfg.action == "simplified" and cfg.potential != "coulomb":
        raise ConfigurationError("the simplified action is only defined for potential = \"coulomb\"")
    if cfg.action != "simplified" and cfg.A is not None:
        raise ConfigurationError(f"A is meaningless for the {cfg.action} action")
    if cfg.potential != "harmonic" and cfg.omega is not None:
        raise ConfigurationError(f"omega is meaningless for the {cfg.potential} potential")
    if cfg.action == "simplified" and cfg.A is None:
        cfg = dataclasses.replace(cfg, A=DEFAULT_A)
    if cfg.potential == "harmonic" and cfg.omega is None:
        cfg = dataclasses.replace(cfg, omega=1.0)
    if not cfg.seeds:
        raise ConfigurationError("seeds must contain at least one seed")
    if len(set(cfg.seeds)) != len(cfg.seeds):
        raise ConfigurationError(f"seeds must be distinct, got {list(cfg.seeds)}")
    if cfg.n_blocks < 2:
        raise ConfigurationError(f"n_blocks must be >= 2, got {cfg.n_blocks}")
    if cfg.hist_bins < 1 or not cfg.hist_max > cfg.hist_min:
        raise ConfigurationError("histogram needs hist_bins >= 1 and hist_max > hist_min")
    if not cfg.collapse_epsilon > 0:
        raise ConfigurationError(f"collapse_epsilon must be positive, got {cfg.collapse_epsilon}")
    if cfg.wall_radius is not None and not (math.isfinite(cfg.wall_radius) and cfg.wall_radius > 0):
        raise ConfigurationError(f"wall_radius must be positive, got {cfg.wall_radius}")
    if not cfg.output_dir:
        raise ConfigurationError("output_dir must not be empty")
    # Building the domain objects runs their own invariant checks.
    cfg.action_kind
    cfg.proposal
    cfg.schedule
    cfg.init_spec(cfg.seeds[0])
    return cfg
