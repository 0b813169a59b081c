import math

import numpy as np
import pytest

from pimc.path import Discretization
from pimc.sampler import _COLUMNS, MeasurementStream


def synthetic_stream(action="primitive", disc=None, radii=None, **cols):
    """A MeasurementStream built directly from column arrays."""
    disc = disc or Discretization(0.1, 1.0, 2)
    n = len(next(iter(cols.values()))) if cols else (len(radii) if radii is not None else 0)
    data = {}
    for name in _COLUMNS:
        if name in cols:
            data[name] = np.asarray(cols[name], dtype=np.int64 if name == "sweep" else np.float64)
        elif name == "sweep":
            data[name] = np.arange(n, dtype=np.int64)
        else:
            data[name] = np.full(n, math.nan)
    if radii is not None:
        radii = np.asarray(radii, dtype=np.float64)
    return MeasurementStream(action=action, disc=disc, seed=0, radii=radii, **data)


def primitive_harmonic_energy(beta, n_beads, omega=1.0, mass=1.0, dim=3):
    """Exact energy of the N-bead primitive harmonic ring from its normal modes.

    The quadratic form has eigenvalues (M/tau)(2 - 2 cos(2 pi k/N)) + tau M omega^2,
    so ln Z = -(N/2) ln tau - (1/2) sum ln(lambda_k) + const per dimension and
    E = -(1/N) d ln Z / d tau at fixed N.
    """
    tau = beta / n_beads
    k = np.arange(n_beads)
    c = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / n_beads)
    lam = mass / tau * c + tau * mass * omega**2
    dlam = -mass / tau**2 * c + mass * omega**2
    return dim * (n_beads / (2 * tau) + 0.5 * np.sum(dlam / lam)) / n_beads


def primitive_harmonic_energy_closed(beta, p):
    """Same quantity from the known closed form (Schweizer et al.), 3D."""
    al = 0.5 * beta / p
    q1 = math.sqrt(1 + al * al) + al
    q2 = math.sqrt(1 + al * al) - al
    return 3 * (q1**p + q2**p) / ((q1**p - q2**p) * (q1 + q2))


@pytest.fixture
def make_stream():
    return synthetic_stream


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line, then assert it."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        request.config.stash[_VERDICTS].append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
