"""Central potentials: Coulomb, harmonic, free, and the regularized effective form.

The effective potential adds a repulsive ``A tau^2 / (M r^4)`` term to the
Coulomb attraction. It is tied to a timestep, so it shrinks away as tau -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pimc.errors import ConfigurationError, SingularPointError

# Integer codes understood by the compiled sampler kernels.
COULOMB, HARMONIC, EFFECTIVE, FREE = 0, 1, 2, 3

_VARIANTS = {"coulomb": COULOMB, "harmonic": HARMONIC, "effective": EFFECTIVE, "free": FREE}

DEFAULT_A = 0.5


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigurationError(f"{name} must be a finite positive number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class PotentialKind:
    """An immutable description of a central potential.

    Use the constructors :meth:`coulomb`, :meth:`harmonic`, :meth:`effective`
    and :meth:`free` rather than building instances directly.
    """

    variant: str
    omega: float | None = None
    A: float | None = None
    tau: float | None = None
    mass: float = 1.0

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ConfigurationError(f"unknown potential variant {self.variant!r}")
        _positive("mass", self.mass)
        if self.variant == "harmonic":
            _positive("omega", self.omega)
        if self.variant == "effective":
            _positive("A", self.A)
            _positive("tau", self.tau)

    @classmethod
    def coulomb(cls) -> PotentialKind:
        return cls("coulomb")

    @classmethod
    def harmonic(cls, omega: float = 1.0, mass: float = 1.0) -> PotentialKind:
        return cls("harmonic", omega=omega, mass=mass)

    @classmethod
    def effective(cls, A: float = DEFAULT_A, tau: float = 0.05, mass: float = 1.0) -> PotentialKind:
        return cls("effective", A=A, tau=tau, mass=mass)

    @classmethod
    def free(cls) -> PotentialKind:
        return cls("free")

    @property
    def code(self) -> int:
        return _VARIANTS[self.variant]

    @property
    def coefficient(self) -> float:
        """Strength parameter handed to the kernels.

        ``M omega^2 / 2`` for harmonic, ``A tau^2 / M`` for effective, else 0.
        """
        if self.variant == "harmonic":
            return 0.5 * self.mass * self.omega**2
        if self.variant == "effective":
            return self.A * self.tau**2 / self.mass
        return 0.0


def potential_value(kind: PotentialKind, r) -> float:
    """Potential energy (hartree) at position ``r``.

    Coulomb at the exact origin raises :class:`SingularPointError`; the
    effective potential there returns ``math.inf``.
    """
    x, y, z = (float(c) for c in r)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ConfigurationError(f"position must be finite, got {r!r}")
    r2 = x * x + y * y + z * z
    v = kind.variant
    if v == "free":
        return 0.0
    if v == "harmonic":
        return kind.coefficient * r2
    if r2 == 0.0:
        if v == "coulomb":
            raise SingularPointError("Coulomb potential evaluated at the origin")
        return math.inf
    dist = math.sqrt(r2)
    if v == "coulomb":
        return -1.0 / dist
    return -1.0 / dist + kind.coefficient / (r2 * r2)


def potential_values(kind: PotentialKind, positions: np.ndarray) -> np.ndarray:
    """Vectorized :func:`potential_value` over an (N, 3) array."""
    r2 = np.einsum("ij,ij->i", positions, positions)
    v = kind.variant
    if v == "free":
        return np.zeros_like(r2)
    if v == "harmonic":
        return kind.coefficient * r2
    at_origin = r2 == 0.0
    if v == "coulomb" and at_origin.any():
        raise SingularPointError(
            f"Coulomb potential evaluated at the origin (bead {int(np.argmax(at_origin))})"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -1.0 / np.sqrt(r2)
        if v == "effective":
            out = out + kind.coefficient / (r2 * r2)
    if v == "effective":
        out[at_origin] = math.inf
    return out


def repulsive_term(A: float, tau: float, mass: float, r: float) -> float:
    """The regularizing term ``A tau^2 / (M r^4)``."""
    return A * tau * tau / (mass * r**4)


def effective_min_radius(A: float, tau: float, mass: float = 1.0) -> float:
    """Radius of the minimum of the effective potential, ``(4 A tau^2 / M)^(1/3)``.

    Setting ``d/dr (-1/r + A tau^2/(M r^4)) = 1/r^2 - 4 A tau^2/(M r^5)`` to
    zero gives the single stationary point.
    """
    _positive("A", A)
    _positive("tau", tau)
    _positive("mass", mass)
    return (4.0 * A * tau * tau / mass) ** (1.0 / 3.0)
