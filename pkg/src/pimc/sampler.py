"""Metropolis single-bead sampling of ring paths distributed as exp(-S).

Random numbers come from numpy's PCG64 generator. Each sweep draws one
block of ``4 N`` uniforms: ``3 N`` displacement coordinates (bead-major),
followed by ``N`` acceptance variates. Beads are visited in order 0..N-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from pimc import _kernels
from pimc.actions import ActionKind
from pimc.errors import ConfigurationError, CorruptedStateError
from pimc.path import Discretization, InitSpec, Path, make_ring_path

RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"

# Burn-in tuner: adjust delta every this many sweeps toward 40-60% acceptance.
TUNE_INTERVAL = 50


@dataclass(frozen=True)
class ProposalSpec:
    """Uniform displacement in the cube ``[-delta, delta]^3``."""

    delta: float = 0.3

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ConfigurationError(f"proposal delta must be positive, got {self.delta!r}")


@dataclass(frozen=True)
class Schedule:
    burn_in: int = 2000
    measure: int = 20000
    thin: int = 10

    def __post_init__(self):
        for name in ("burn_in", "measure", "thin"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ConfigurationError(f"{name} must be a non-negative integer, got {value!r}")
        if self.thin < 1:
            raise ConfigurationError(f"thin must be >= 1, got {self.thin!r}")


@dataclass
class ChainState:
    path: Path
    rng_seed: int
    rng: np.random.Generator
    sweep_count: int = 0
    accepted: int = 0
    attempted: int = 0
    delta: float = math.nan

    @classmethod
    def start(cls, path: Path, seed: int) -> ChainState:
        return cls(path=path, rng_seed=seed, rng=np.random.default_rng([seed, 1]))

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempted if self.attempted else math.nan


def accept_probability(delta_s: float) -> float:
    """``min(1, exp(-delta_s))``; an infinite action increase gives 0."""
    if delta_s <= 0.0:
        return 1.0
    if math.isinf(delta_s):
        return 0.0
    return math.exp(-delta_s)


def metropolis_sweep(
    state: ChainState,
    action: ActionKind,
    proposal: ProposalSpec,
    wall_radius: float | None = None,
) -> ChainState:
    """Attempt one move per bead, in bead order. Updates ``state`` in place.

    ``wall_radius``, if given, confines beads to a ball: proposals outside
    are rejected, which is the same as an infinite potential there.
    """
    beads = state.path.beads
    n = beads.shape[0]
    if n != action.disc.n_beads:
        raise ConfigurationError(
            f"path has {n} beads but the action expects {action.disc.n_beads}"
        )
    pot = action.potential
    wall_r2 = wall_radius * wall_radius if wall_radius else 0.0
    rand = state.rng.random(4 * n)
    accepted, corrupt = _kernels.sweep(
        beads, rand, proposal.delta, action.code, pot.code, pot.coefficient,
        action.disc.mass, action.disc.tau, wall_r2,
    )
    if corrupt >= 0:
        raise CorruptedStateError(
            f"bead {corrupt} sits at a singular point of the {pot.variant} potential "
            f"(position {beads[corrupt].tolist()}, sweep {state.sweep_count})"
        )
    state.sweep_count += 1
    state.accepted += accepted
    state.attempted += n
    return state


@dataclass(frozen=True)
class Observation:
    sweep: int
    action_total: float
    spring_sum: float
    potential_sum: float
    thermo_sum: float
    link_energy_sum: float
    e_thermo: float
    min_radius: float
    acceptance_rate: float
    radii: np.ndarray


_COLUMNS = (
    "sweep",
    "action_total",
    "spring_sum",
    "potential_sum",
    "thermo_sum",
    "link_energy_sum",
    "e_thermo",
    "min_radius",
    "acceptance_rate",
)


@dataclass
class MeasurementStream:
    """Observations from one chain, stored column-wise.

    ``potential_sum`` is the sum of the action's potential over beads and
    ``thermo_sum`` the sum of its tau-derivative weights (they coincide
    except for the effective potential). ``link_energy_sum`` is only
    defined under the constant-force action, ``thermo_sum`` and
    ``e_thermo`` only under the other two.
    """

    action: str
    disc: Discretization
    seed: int
    sweep: np.ndarray
    action_total: np.ndarray
    spring_sum: np.ndarray
    potential_sum: np.ndarray
    thermo_sum: np.ndarray
    link_energy_sum: np.ndarray
    e_thermo: np.ndarray
    min_radius: np.ndarray
    acceptance_rate: np.ndarray
    radii: np.ndarray | None
    final_path: Path | None = None
    delta: float = math.nan
    accepted: int = 0
    attempted: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sweep)

    @classmethod
    def from_observations(cls, observations, action: str, disc: Discretization, seed: int,
                          keep_radii: bool = True) -> MeasurementStream:
        obs = list(observations)
        cols = {}
        for name in _COLUMNS:
            dtype = np.int64 if name == "sweep" else np.float64
            cols[name] = np.array([getattr(o, name) for o in obs], dtype=dtype)
        if keep_radii:
            radii = np.array([o.radii for o in obs]).reshape(len(obs), disc.n_beads)
        else:
            radii = None
        return cls(action=action, disc=disc, seed=seed, radii=radii, **cols)

    def observations(self) -> Iterator[Observation]:
        for k in range(len(self)):
            radii = self.radii[k] if self.radii is not None else np.empty(0)
            yield Observation(**{name: getattr(self, name)[k] for name in _COLUMNS}, radii=radii)

    @property
    def acceptance(self) -> float:
        return self.accepted / self.attempted if self.attempted else math.nan


def observe(path: Path, action: ActionKind, sweep: int = 0,
            acceptance_rate: float = math.nan) -> Observation:
    """Measure one path configuration."""
    pot = action.potential
    radii = np.empty(path.n_beads)
    values = _kernels.observe(
        path.beads, action.code, pot.code, pot.coefficient,
        action.disc.mass, action.disc.tau, radii,
    )
    return Observation(sweep, *values, acceptance_rate, radii)


def iter_chain(
    state: ChainState,
    action: ActionKind,
    proposal: ProposalSpec,
    schedule: Schedule,
    wall_radius: float | None = None,
    tune: bool = False,
) -> Iterator[Observation]:
    """Run burn-in then measurement sweeps, yielding every ``thin``-th sweep.

    If ``tune`` is set, the proposal width is adjusted during burn-in only;
    the final width is stored on ``state`` as ``state.delta``.
    """
    delta = proposal.delta
    window_acc = window_att = 0
    for k in range(schedule.burn_in):
        acc0, att0 = state.accepted, state.attempted
        metropolis_sweep(state, action, ProposalSpec(delta), wall_radius)
        if tune:
            window_acc += state.accepted - acc0
            window_att += state.attempted - att0
            if (k + 1) % TUNE_INTERVAL == 0:
                rate = window_acc / window_att
                if rate > 0.6:
                    delta *= 1.1
                elif rate < 0.4:
                    delta *= 0.9
                window_acc = window_att = 0
    state.delta = delta
    measuring = ProposalSpec(delta)
    for k in range(1, schedule.measure + 1):
        metropolis_sweep(state, action, measuring, wall_radius)
        if k % schedule.thin:
            continue
        yield observe(state.path, action, state.sweep_count, state.accepted / state.attempted)


def run_chain(
    disc: Discretization,
    action: ActionKind,
    proposal: ProposalSpec,
    schedule: Schedule,
    seed: int,
    init: InitSpec | None = None,
    wall_radius: float | None = None,
    keep_radii: bool = True,
    tune: bool = False,
) -> MeasurementStream:
    """Initialize a path, equilibrate, and collect a measurement stream.

    The default initial path is a uniform shell ``[0.5, 2.0]`` seeded with
    ``seed``; the move sequence uses an independent stream derived from it.
    """
    if action.disc != disc:
        raise ConfigurationError(f"action discretization {action.disc} differs from {disc}")
    if init is None:
        init = InitSpec(seed=seed)
    path = make_ring_path(disc.n_beads, init)
    state = ChainState.start(path, seed)
    stream = MeasurementStream.from_observations(
        iter_chain(state, action, proposal, schedule, wall_radius, tune),
        action.variant, disc, seed, keep_radii,
    )
    stream.final_path = state.path
    stream.delta = state.delta
    stream.accepted = state.accepted
    stream.attempted = state.attempted
    return stream
