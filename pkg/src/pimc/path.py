"""Closed imaginary-time paths (ring polymers) and their discretization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal, TextIO

import numpy as np

from pimc.errors import ConfigurationError


@dataclass(frozen=True)
class Discretization:
    """Timestep ``tau``, particle ``mass`` and bead count of a ring path.

    Atomic units throughout: tau in inverse hartree, mass in electron masses.
    """

    tau: float
    mass: float
    n_beads: int

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigurationError(f"tau must be a finite positive number, got {self.tau!r}")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ConfigurationError(f"mass must be a finite positive number, got {self.mass!r}")
        if int(self.n_beads) != self.n_beads or self.n_beads < 2:
            raise ConfigurationError(f"n_beads must be an integer >= 2, got {self.n_beads!r}")

    @property
    def beta(self) -> float:
        return self.n_beads * self.tau


class Path:
    """A closed path of ``N`` beads in three dimensions.

    Only ``N`` positions are stored; bead ``N`` is bead ``0``. The bead array
    is owned by this object and mutated in place by the sampler.
    """

    __slots__ = ("beads",)

    def __init__(self, beads):
        arr = np.array(beads, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ConfigurationError(f"beads must have shape (N, 3), got {arr.shape}")
        if arr.shape[0] < 2:
            raise ConfigurationError(f"a closed path needs at least 2 beads, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("bead coordinates must be finite")
        self.beads = arr

    @property
    def n_beads(self) -> int:
        return self.beads.shape[0]

    def __len__(self) -> int:
        return self.beads.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.beads[i % self.n_beads]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return self.beads.shape == other.beads.shape and bool(np.all(self.beads == other.beads))

    def __repr__(self) -> str:
        return f"Path(n_beads={self.n_beads})"

    def copy(self) -> Path:
        return Path(self.beads)

    def links(self) -> np.ndarray:
        """All link displacements ``r[i+1] - r[i]`` as an (N, 3) array."""
        return np.roll(self.beads, -1, axis=0) - self.beads

    def radii(self) -> np.ndarray:
        return np.sqrt(np.einsum("ij,ij->i", self.beads, self.beads))

    def write_csv(self, fh: TextIO) -> None:
        """Dump a snapshot as ``index,x,y,z`` rows."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "x", "y", "z"])
        for i, (x, y, z) in enumerate(self.beads):
            writer.writerow([i, f"{x:.17g}", f"{y:.17g}", f"{z:.17g}"])


@dataclass(frozen=True)
class InitSpec:
    """How to place the initial beads.

    ``kind="constant"`` puts every bead at ``point``. ``kind="shell"`` draws
    beads uniformly (by volume, isotropic) in the shell ``r_lo <= r <= r_hi``
    from a PCG64 stream seeded with ``seed``. If ``probe_radius`` is set,
    bead 0 is afterwards moved to ``(0, 0, probe_radius)``.
    """

    kind: Literal["constant", "shell"] = "shell"
    point: tuple[float, float, float] = (0.0, 0.0, 1.0)
    r_lo: float = 0.5
    r_hi: float = 2.0
    seed: int = 0
    probe_radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "shell"):
            raise ConfigurationError(f"unknown init kind {self.kind!r}")
        if self.kind == "shell" and not (0 <= self.r_lo <= self.r_hi and self.r_hi > 0):
            raise ConfigurationError(
                f"shell init needs 0 <= r_lo <= r_hi, r_hi > 0; got [{self.r_lo}, {self.r_hi}]"
            )
        if self.probe_radius is not None and not (self.probe_radius >= 0):
            raise ConfigurationError(f"probe_radius must be >= 0, got {self.probe_radius}")


def make_ring_path(n_beads: int, init: InitSpec | None = None) -> Path:
    if init is None:
        init = InitSpec()
    if int(n_beads) != n_beads or n_beads < 2:
        raise ConfigurationError(f"n_beads must be an integer >= 2, got {n_beads!r}")
    n_beads = int(n_beads)

    if init.kind == "constant":
        beads = np.tile(np.asarray(init.point, dtype=np.float64), (n_beads, 1))
    else:
        rng = np.random.default_rng(init.seed)
        u = rng.random((n_beads, 3))
        lo3, hi3 = init.r_lo**3, init.r_hi**3
        r = np.cbrt(lo3 + u[:, 0] * (hi3 - lo3))
        cos_t = 2.0 * u[:, 1] - 1.0
        sin_t = np.sqrt(1.0 - cos_t**2)
        phi = 2.0 * np.pi * u[:, 2]
        beads = np.column_stack(
            (r * sin_t * np.cos(phi), r * sin_t * np.sin(phi), r * cos_t)
        )
    if init.probe_radius is not None:
        beads[0] = (0.0, 0.0, init.probe_radius)
    return Path(beads)


def link(path: Path, i: int) -> np.ndarray:
    """Displacement from bead ``i`` to the next bead around the ring."""
    n = path.n_beads
    if not 0 <= i < n:
        raise IndexError(f"link index {i} out of range for {n} beads")
    return path.beads[(i + 1) % n] - path.beads[i]
