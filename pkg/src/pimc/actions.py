"""Discretized imaginary-time actions and constant-force link kinematics.

Three actions score a closed path:

* ``primitive``: ``tau sum V_i + (M / 2 tau) sum |r_{i+1} - r_i|^2``.
* ``constant_force``: ``tau sum E_i`` where ``E_i`` is the energy of the
  classical motion from ``r_i`` to ``r_{i+1}`` under a constant force that
  matches the potential difference of the endpoints.
* ``simplified``: the primitive form with the regularized effective potential.

Full evaluations (:func:`action_total`) are vectorized numpy with exactly
rounded sums. Single-bead updates (:func:`local_action_delta`) go through
the same compiled code the sampler uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pimc import _kernels
from pimc.errors import ConfigurationError, SingularPointError
from pimc.path import Discretization, Path
from pimc.potentials import PotentialKind, potential_value, potential_values

ACTION_CODES = {
    "primitive": _kernels.PRIMITIVE,
    "constant_force": _kernels.CONSTANT_FORCE,
    "simplified": _kernels.SIMPLIFIED,
}


@dataclass(frozen=True)
class ActionKind:
    variant: str
    potential: PotentialKind
    disc: Discretization

    def __post_init__(self):
        if self.variant not in ACTION_CODES:
            raise ConfigurationError(
                f"unknown action {self.variant!r}; expected one of {sorted(ACTION_CODES)}"
            )
        pot = self.potential
        if self.variant == "simplified" and pot.variant != "effective":
            raise ConfigurationError("the simplified action requires the effective potential")
        if pot.variant == "effective" and (pot.tau != self.disc.tau or pot.mass != self.disc.mass):
            raise ConfigurationError(
                f"effective potential built for tau={pot.tau}, M={pot.mass} "
                f"but the discretization has tau={self.disc.tau}, M={self.disc.mass}"
            )
        if pot.variant == "harmonic" and pot.mass != self.disc.mass:
            raise ConfigurationError(
                f"harmonic potential mass {pot.mass} differs from discretization mass {self.disc.mass}"
            )

    @classmethod
    def primitive(cls, potential: PotentialKind, disc: Discretization) -> ActionKind:
        return cls("primitive", potential, disc)

    @classmethod
    def constant_force(cls, potential: PotentialKind, disc: Discretization) -> ActionKind:
        return cls("constant_force", potential, disc)

    @classmethod
    def simplified(cls, A: float, disc: Discretization) -> ActionKind:
        return cls("simplified", PotentialKind.effective(A, disc.tau, disc.mass), disc)

    @property
    def code(self) -> int:
        return ACTION_CODES[self.variant]


@dataclass(frozen=True)
class LinkKinematics:
    """Constant-force motion along one link ``r_i -> r_{i+1}``."""

    accel: np.ndarray
    velocity: np.ndarray
    energy: float
    unit_dir: np.ndarray
    t_start: float


def _vec(r) -> np.ndarray:
    v = np.asarray(r, dtype=np.float64)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ConfigurationError(f"expected a finite 3-vector, got {r!r}")
    return v


def _unit(d: np.ndarray) -> tuple[np.ndarray, float]:
    norm = math.sqrt(float(d @ d))
    if norm == 0.0:
        return np.zeros(3), 0.0
    return d / norm, norm


def link_acceleration(r_i, r_next, potential: PotentialKind, mass: float = 1.0) -> np.ndarray:
    """Acceleration of the constant force field along the link.

    A degenerate link (``r_next == r_i``) has zero acceleration.
    """
    a, b = _vec(r_i), _vec(r_next)
    dv = potential_value(potential, b) - potential_value(potential, a)
    u, dist = _unit(b - a)
    if dist == 0.0:
        return np.zeros(3)
    return -u * dv / (mass * dist)


def link_velocity(r_i, r_next, tau: float, accel) -> np.ndarray:
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau!r}")
    return (_vec(r_next) - _vec(r_i)) / tau - _vec(accel) * tau


def link_energy(r_i, r_next, tau: float, potential: PotentialKind, mass: float = 1.0) -> float:
    """``M |v_i|^2 / 2 + V(r_i)`` for the constant-force link."""
    accel = link_acceleration(r_i, r_next, potential, mass)
    v = link_velocity(r_i, r_next, tau, accel)
    return 0.5 * mass * float(v @ v) + potential_value(potential, r_i)


def link_kinematics(path: Path, i: int, action: ActionKind) -> LinkKinematics:
    n = path.n_beads
    if not 0 <= i < n:
        raise IndexError(f"link index {i} out of range for {n} beads")
    tau, mass = action.disc.tau, action.disc.mass
    r_i, r_next = path.beads[i], path.beads[(i + 1) % n]
    accel = link_acceleration(r_i, r_next, action.potential, mass)
    velocity = link_velocity(r_i, r_next, tau, accel)
    energy = 0.5 * mass * float(velocity @ velocity) + potential_value(action.potential, r_i)
    unit_dir, _ = _unit(r_next - r_i)
    return LinkKinematics(accel, velocity, energy, unit_dir, i * tau)


def classical_trajectory(r_i, r_next, tau: float, accel, s: float) -> np.ndarray:
    """Position at fractional time ``s = (t - t_i) / tau`` along the link.

    ``r_i + (r_next - r_i) s + accel tau^2 s (s - 1)``.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s!r}")
    a, b, acc = _vec(r_i), _vec(r_next), _vec(accel)
    return a + (b - a) * s + acc * (tau * tau * s * (s - 1.0))


def trajectory_velocity(r_i, r_next, tau: float, accel, s: float) -> np.ndarray:
    """Time derivative of :func:`classical_trajectory`."""
    return (_vec(r_next) - _vec(r_i)) / tau + _vec(accel) * (tau * (2.0 * s - 1.0))


def interpolated_energy(r_i, r_next, tau: float, potential: PotentialKind, mass: float, s: float) -> float:
    """``M |v(s)|^2 / 2 + V_lin(s)`` along the constant-force link.

    ``V_lin`` interpolates the endpoint potentials linearly in ``s``.
    """
    accel = link_acceleration(r_i, r_next, potential, mass)
    v = trajectory_velocity(r_i, r_next, tau, accel, s)
    va = potential_value(potential, r_i)
    vb = potential_value(potential, r_next)
    return 0.5 * mass * float(v @ v) + va + s * (vb - va)


def _sq_norms(d: np.ndarray) -> np.ndarray:
    return d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]


def spring_sum(path: Path) -> float:
    """``sum |r_{i+1} - r_i|^2`` around the ring."""
    return math.fsum(_sq_norms(path.links()))


def action_total(path: Path, action: ActionKind) -> float:
    """Total action of ``path``; ``math.inf`` where the effective repulsion diverges."""
    if path.n_beads != action.disc.n_beads:
        raise ConfigurationError(
            f"path has {path.n_beads} beads but the action expects {action.disc.n_beads}"
        )
    tau, mass = action.disc.tau, action.disc.mass
    pot = potential_values(action.potential, path.beads)
    if np.isinf(pot).any():
        return math.inf
    d = path.links()
    if action.variant == "constant_force":
        # tau * M |v_i|^2 / 2 == (M / 2 tau) |dr_i - a_i tau^2|^2
        dv = np.roll(pot, -1) - pot
        d2 = _sq_norms(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(d2 > 0.0, -dv / (mass * d2), 0.0)
        accel = d * scale[:, None]
        d = d - accel * (tau * tau)
    return 0.5 * mass / tau * math.fsum(_sq_norms(d)) + tau * math.fsum(pot)


def local_action_delta(path: Path, bead_index: int, new_position, action: ActionKind) -> float:
    """Action change from moving one bead, touching only its neighbourhood.

    Returns ``math.inf`` for a move the effective repulsion forbids. Raises
    :class:`SingularPointError` when the old or new position is singular
    under a plain Coulomb potential.
    """
    n = path.n_beads
    if not 0 <= bead_index < n:
        raise IndexError(f"bead index {bead_index} out of range for {n} beads")
    x, y, z = _vec(new_position)
    pot = action.potential
    if math.isnan(_kernels.pot(pot.code, pot.coefficient, *path.beads[bead_index])):
        raise SingularPointError(f"bead {bead_index} sits at the Coulomb singularity")
    ds = _kernels.local_delta(
        path.beads, bead_index, x, y, z, action.code, pot.code, pot.coefficient,
        action.disc.mass, action.disc.tau,
    )
    if math.isnan(ds):
        raise SingularPointError("proposed position sits at the Coulomb singularity")
    return ds
