"""Observables with error bars: energies, radial densities, collapse diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from pimc.actions import ActionKind
from pimc.errors import ConfigurationError, UnsupportedEstimatorError
from pimc.path import Discretization
from pimc.sampler import MeasurementStream

DEFAULT_BLOCKS = 50
# Below this many observations the default policy reports no error bar.
MIN_OBS_FOR_ERROR = 100

DEFAULT_EDGES = np.linspace(0.0, 6.0, 101)


@dataclass(frozen=True)
class EnergyEstimate:
    mean: float
    std_error: float
    n_blocks: int
    block_size: int

    @property
    def has_error(self) -> bool:
        return self.n_blocks >= 2 and math.isfinite(self.std_error)

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error if self.has_error else None,
            "n_blocks": self.n_blocks,
            "block_size": self.block_size,
        }


def blocking_error(series: Sequence[float], n_blocks: int) -> tuple[float, float]:
    """Mean and standard error from ``n_blocks`` contiguous block means.

    Leading samples that do not fill a whole block are dropped. The error is
    ``s / sqrt(n_blocks)`` with ``s`` the sample (ddof=1) standard deviation
    of the block means.
    """
    x = np.asarray(series, dtype=np.float64)
    if n_blocks < 2:
        raise ConfigurationError(f"need at least 2 blocks, got {n_blocks}")
    if x.size < n_blocks:
        raise ConfigurationError(f"series of length {x.size} is shorter than {n_blocks} blocks")
    size = x.size // n_blocks
    means = x[x.size - size * n_blocks:].reshape(n_blocks, size).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(n_blocks))


def blocked_estimate(series: Sequence[float], n_blocks: int | None = None) -> EnergyEstimate:
    """Wrap :func:`blocking_error` with the default reporting policy.

    With ``n_blocks=None`` a series of at least 100 samples gets 50 blocks;
    shorter series get their plain mean and no error bar.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ConfigurationError("cannot estimate from an empty series")
    if n_blocks is None:
        if x.size < MIN_OBS_FOR_ERROR:
            return EnergyEstimate(float(x.mean()), math.nan, 1, int(x.size))
        n_blocks = DEFAULT_BLOCKS
    if x.size < 2 or n_blocks < 2:
        return EnergyEstimate(float(x.mean()), math.nan, 1, int(x.size))
    mean, err = blocking_error(x, n_blocks)
    return EnergyEstimate(mean, err, n_blocks, int(x.size // n_blocks))


def combine_estimates(estimates: Iterable[EnergyEstimate]) -> EnergyEstimate:
    """Equal-weight combination of estimates from independent chains."""
    ests = list(estimates)
    if not ests:
        raise ConfigurationError("nothing to combine")
    if len(ests) == 1:
        return ests[0]
    mean = math.fsum(e.mean for e in ests) / len(ests)
    if all(e.has_error for e in ests):
        err = math.sqrt(math.fsum(e.std_error**2 for e in ests)) / len(ests)
    else:
        err = math.nan
    return EnergyEstimate(
        mean, err, sum(e.n_blocks for e in ests), min(e.block_size for e in ests)
    )


def thermo_energy_series(
    stream: MeasurementStream, disc: Discretization, include_tau_term: bool = True
) -> np.ndarray:
    """Per-observation thermodynamic energy.

    ``3/(2 tau) - M/(2 tau^2 N) sum|dr|^2 + (1/N) sum W_i``. ``W_i`` is the
    potential itself, or for the effective potential its tau-derivative
    weight ``-1/r + 3 A tau^2/(M r^4)`` when ``include_tau_term`` is set.
    """
    tau, mass, n = disc.tau, disc.mass, disc.n_beads
    weights = stream.thermo_sum if include_tau_term else stream.potential_sum
    return 1.5 / tau - mass / (2.0 * tau * tau * n) * stream.spring_sum + weights / n


def thermodynamic_energy(
    stream: MeasurementStream,
    disc: Discretization,
    action: ActionKind,
    n_blocks: int | None = None,
    include_tau_term: bool = True,
) -> EnergyEstimate:
    if action.variant == "constant_force":
        raise UnsupportedEstimatorError(
            "no thermodynamic estimator is defined for the constant-force action; "
            "use constant_force_energy_diagnostic"
        )
    if stream.action != action.variant:
        raise ConfigurationError(
            f"stream was produced by {stream.action!r}, not {action.variant!r}"
        )
    if len(stream) == 0:
        raise ConfigurationError("empty measurement stream")
    return blocked_estimate(thermo_energy_series(stream, disc, include_tau_term), n_blocks)


def constant_force_energy_diagnostic(
    stream: MeasurementStream, n_blocks: int | None = None
) -> EnergyEstimate:
    """Blocked mean of the bead-averaged link energy ``(1/N) sum E_i``.

    This is a diagnostic of the constant-force action, not a thermodynamic
    energy estimator.
    """
    if len(stream) == 0:
        raise ConfigurationError("empty measurement stream")
    if stream.action != "constant_force":
        raise ConfigurationError(f"stream was produced by {stream.action!r}, not constant_force")
    return blocked_estimate(stream.link_energy_sum / stream.disc.n_beads, n_blocks)


def collapse_metric(path_radii: Sequence[float], epsilon: float) -> float:
    """Fraction of beads closer than ``epsilon`` to the origin."""
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon!r}")
    r = np.asarray(path_radii, dtype=np.float64)
    if r.size == 0:
        return 0.0
    return float(np.count_nonzero(r < epsilon) / r.size)


@dataclass(frozen=True)
class RadialHistogram:
    bin_edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    overflow: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def mode(self) -> float:
        """Centre of the most populated bin."""
        k = int(np.argmax(self.density))
        return float(0.5 * (self.bin_edges[k] + self.bin_edges[k + 1]))


def _check_edges(bin_edges) -> np.ndarray:
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise ConfigurationError("need at least two bin edges")
    if not np.all(np.diff(edges) > 0):
        raise ConfigurationError("bin edges must be strictly increasing")
    return edges


class HistogramAccumulator:
    """Integer bin counts plus an overflow tally; mergeable across chains.

    Bins follow numpy's convention (the last bin includes its right edge).
    Radii below the first edge also go to the overflow tally.
    """

    def __init__(self, bin_edges=DEFAULT_EDGES):
        self.bin_edges = _check_edges(bin_edges)
        self.counts = np.zeros(self.bin_edges.size - 1, dtype=np.int64)
        self.overflow = 0

    def add(self, radii) -> None:
        r = np.asarray(radii, dtype=np.float64).ravel()
        counts, _ = np.histogram(r, bins=self.bin_edges)
        self.counts += counts
        self.overflow += int(r.size - counts.sum())

    def merge(self, other: HistogramAccumulator) -> HistogramAccumulator:
        if not np.array_equal(self.bin_edges, other.bin_edges):
            raise ConfigurationError("cannot merge histograms with different bin edges")
        out = HistogramAccumulator(self.bin_edges)
        out.counts = self.counts + other.counts
        out.overflow = self.overflow + other.overflow
        return out

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.overflow

    def result(self) -> RadialHistogram:
        """Densities normalized by the total including overflow.

        The integral of the density is therefore the in-range fraction, which
        is exactly 1 when nothing overflowed.
        """
        widths = np.diff(self.bin_edges)
        total = self.total
        if total == 0:
            density = np.zeros_like(widths)
        else:
            density = self.counts / (total * widths)
        return RadialHistogram(self.bin_edges.copy(), density, self.counts.copy(), self.overflow)


def radial_histogram(
    stream: MeasurementStream | Iterable[MeasurementStream], bin_edges=DEFAULT_EDGES
) -> RadialHistogram:
    """Histogram of every bead radius in every retained observation."""
    streams = [stream] if isinstance(stream, MeasurementStream) else list(stream)
    acc = HistogramAccumulator(bin_edges)
    for s in streams:
        if s.radii is None:
            raise ConfigurationError("stream was recorded without bead radii")
        acc.add(s.radii)
    return acc.result()
