"""Compiled inner loops for the Metropolis sampler.

Potentials are passed as ``(code, coef)`` pairs, see
:mod:`pimc.potentials`. Actions are passed as integer codes below. A
Coulomb evaluation at the origin yields NaN, which callers treat as a
singular point; the effective potential yields +inf there.
"""

import math

import numba
import numpy as np

PRIMITIVE, CONSTANT_FORCE, SIMPLIFIED = 0, 1, 2

_COULOMB, _HARMONIC, _EFFECTIVE, _FREE = 0, 1, 2, 3


@numba.njit(cache=True)
def pot(code, coef, x, y, z):
    r2 = x * x + y * y + z * z
    if code == _FREE:
        return 0.0
    if code == _HARMONIC:
        return coef * r2
    if r2 == 0.0:
        if code == _COULOMB:
            return math.nan
        return math.inf
    v = -1.0 / math.sqrt(r2)
    if code == _EFFECTIVE:
        v += coef / (r2 * r2)
    return v


@numba.njit(cache=True)
def thermo_weight(code, coef, x, y, z):
    """tau-derivative of tau*W(r) for the thermodynamic estimator."""
    v = pot(code, coef, x, y, z)
    if code == _EFFECTIVE:
        r2 = x * x + y * y + z * z
        v += 2.0 * coef / (r2 * r2)
    return v


@numba.njit(cache=True)
def link_energy(code, coef, mass, tau, ax, ay, az, bx, by, bz):
    """Energy of the constant-force link a -> b.

    Returns NaN when either endpoint is singular.
    """
    va = pot(code, coef, ax, ay, az)
    vb = pot(code, coef, bx, by, bz)
    if math.isnan(va) or math.isnan(vb):
        return math.nan
    if math.isinf(va) or math.isinf(vb):
        return math.inf
    dx = bx - ax
    dy = by - ay
    dz = bz - az
    d2 = dx * dx + dy * dy + dz * dz
    if d2 == 0.0:
        return va
    # tau * v = dr - a tau^2 with a = -dr (vb - va) / (M |dr|^2)
    f = 1.0 + tau * tau * (vb - va) / (mass * d2)
    tv2 = f * f * d2
    return 0.5 * mass * tv2 / (tau * tau) + va


@numba.njit(cache=True)
def local_delta(beads, i, nx, ny, nz, action, code, coef, mass, tau):
    """Action change from moving bead ``i`` to ``(nx, ny, nz)``.

    Returns NaN if the proposed position is singular.
    """
    n = beads.shape[0]
    ip = (i - 1) % n
    inx = (i + 1) % n
    px, py, pz = beads[ip, 0], beads[ip, 1], beads[ip, 2]
    ox, oy, oz = beads[i, 0], beads[i, 1], beads[i, 2]
    qx, qy, qz = beads[inx, 0], beads[inx, 1], beads[inx, 2]
    if action == CONSTANT_FORCE:
        e_new = link_energy(code, coef, mass, tau, px, py, pz, nx, ny, nz) + link_energy(
            code, coef, mass, tau, nx, ny, nz, qx, qy, qz
        )
        if math.isnan(e_new):
            return math.nan
        if math.isinf(e_new):
            return math.inf
        e_old = link_energy(code, coef, mass, tau, px, py, pz, ox, oy, oz) + link_energy(
            code, coef, mass, tau, ox, oy, oz, qx, qy, qz
        )
        return tau * (e_new - e_old)
    w_new = pot(code, coef, nx, ny, nz)
    if math.isnan(w_new):
        return math.nan
    if math.isinf(w_new):
        return math.inf
    w_old = pot(code, coef, ox, oy, oz)
    k_new = (
        (qx - nx) ** 2 + (qy - ny) ** 2 + (qz - nz) ** 2
        + (nx - px) ** 2 + (ny - py) ** 2 + (nz - pz) ** 2
    )
    k_old = (
        (qx - ox) ** 2 + (qy - oy) ** 2 + (qz - oz) ** 2
        + (ox - px) ** 2 + (oy - py) ** 2 + (oz - pz) ** 2
    )
    return 0.5 * mass / tau * (k_new - k_old) + tau * (w_new - w_old)


@numba.njit(cache=True)
def bead_is_singular(beads, i, code, coef):
    v = pot(code, coef, beads[i, 0], beads[i, 1], beads[i, 2])
    return math.isnan(v) or math.isinf(v)


@numba.njit(cache=True)
def sweep(beads, rand, delta, action, code, coef, mass, tau, wall_r2):
    """One sequential Metropolis pass over all beads.

    ``rand`` holds ``4 N`` uniforms in [0, 1): the first ``3 N`` are the
    bead-major displacement coordinates, the last ``N`` the acceptance
    variates. Returns ``(accepted, corrupt_bead)``; ``corrupt_bead`` is -1
    unless the current path is singular at some bead.
    """
    n = beads.shape[0]
    accepted = 0
    for i in range(n):
        if bead_is_singular(beads, i, code, coef):
            return accepted, i
        nx = beads[i, 0] + (2.0 * rand[3 * i] - 1.0) * delta
        ny = beads[i, 1] + (2.0 * rand[3 * i + 1] - 1.0) * delta
        nz = beads[i, 2] + (2.0 * rand[3 * i + 2] - 1.0) * delta
        if wall_r2 > 0.0 and nx * nx + ny * ny + nz * nz > wall_r2:
            continue
        ds = local_delta(beads, i, nx, ny, nz, action, code, coef, mass, tau)
        if math.isnan(ds) or math.isinf(ds):
            continue
        if ds <= 0.0 or rand[3 * n + i] < math.exp(-ds):
            beads[i, 0] = nx
            beads[i, 1] = ny
            beads[i, 2] = nz
            accepted += 1
    return accepted, -1


@numba.njit(cache=True)
def observe(beads, action, code, coef, mass, tau, out_radii):
    """Per-sweep observables of the current path.

    Returns ``(action_total, spring_sum, potential_sum, thermo_sum,
    link_energy_sum, e_thermo, min_radius)``; radii are written to
    ``out_radii``. ``thermo_sum`` and ``e_thermo`` are NaN under the
    constant-force action, ``link_energy_sum`` under the others. Sums use
    Kahan compensation.
    """
    n = beads.shape[0]
    spring = 0.0
    c_spring = 0.0
    wsum = 0.0
    c_w = 0.0
    tsum = 0.0
    c_t = 0.0
    esum = 0.0
    c_e = 0.0
    rmin = math.inf
    for i in range(n):
        j = (i + 1) % n
        x, y, z = beads[i, 0], beads[i, 1], beads[i, 2]
        dx = beads[j, 0] - x
        dy = beads[j, 1] - y
        dz = beads[j, 2] - z
        r = math.sqrt(x * x + y * y + z * z)
        out_radii[i] = r
        if r < rmin:
            rmin = r

        t = dx * dx + dy * dy + dz * dz - c_spring
        s = spring + t
        c_spring = (s - spring) - t
        spring = s

        t = pot(code, coef, x, y, z) - c_w
        s = wsum + t
        c_w = (s - wsum) - t
        wsum = s

        if action == CONSTANT_FORCE:
            t = link_energy(code, coef, mass, tau, x, y, z, beads[j, 0], beads[j, 1], beads[j, 2]) - c_e
            s = esum + t
            c_e = (s - esum) - t
            esum = s
        else:
            t = thermo_weight(code, coef, x, y, z) - c_t
            s = tsum + t
            c_t = (s - tsum) - t
            tsum = s

    if action == CONSTANT_FORCE:
        total = tau * esum
        tsum = math.nan
        e_thermo = math.nan
    else:
        esum = math.nan
        total = 0.5 * mass / tau * spring + tau * wsum
        e_thermo = 1.5 / tau - 0.5 * mass / (tau * tau * n) * spring + tsum / n
    return total, spring, wsum, tsum, esum, e_thermo, rmin


def warmup():
    """Trigger compilation with representative argument types."""
    beads = np.ones((2, 3))
    rand = np.full(8, 0.5)
    radii = np.empty(2)
    for action in (PRIMITIVE, CONSTANT_FORCE, SIMPLIFIED):
        sweep(beads, rand, 0.1, action, 0, 0.0, 1.0, 0.1, 0.0)
        observe(beads, action, 0, 0.0, 1.0, 0.1, radii)
