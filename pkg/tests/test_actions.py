import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from pimc import (
    ActionKind,
    Discretization,
    InitSpec,
    Path,
    PotentialKind,
    SingularPointError,
    action_total,
    classical_trajectory,
    link_acceleration,
    link_energy,
    link_kinematics,
    link_velocity,
    local_action_delta,
    make_ring_path,
)
from pimc.actions import spring_sum, trajectory_velocity

COULOMB = PotentialKind.coulomb()


def actions_for(disc, A=0.5):
    return {
        "primitive": ActionKind.primitive(COULOMB, disc),
        "constant_force": ActionKind.constant_force(COULOMB, disc),
        "simplified": ActionKind.simplified(A, disc),
    }


def random_path(rng, n):
    # Radii kept away from the origin so action magnitudes stay moderate.
    beads = rng.normal(size=(n, 3))
    beads *= (0.3 + rng.random(n) * 2.0)[:, None] / np.linalg.norm(beads, axis=1)[:, None]
    return Path(beads)


class TestLinkKinematics:
    def test_acceleration(self):
        np.testing.assert_allclose(link_acceleration((1, 0, 0), (2, 0, 0), COULOMB), (-0.5, 0, 0), atol=1e-15)
        np.testing.assert_array_equal(link_acceleration((1, 0, 0), (0, 1, 0), COULOMB), (0, 0, 0))
        np.testing.assert_array_equal(link_acceleration((1, 2, 3), (1, 2, 3), COULOMB), (0, 0, 0))

    def test_acceleration_propagates_singularity(self):
        with pytest.raises(SingularPointError):
            link_acceleration((0, 0, 0), (1, 0, 0), COULOMB)

    def test_velocity(self):
        np.testing.assert_allclose(link_velocity((0, 0, 0), (1, 0, 0), 0.1, (-0.5, 0, 0)), (10.05, 0, 0), rtol=1e-15)
        np.testing.assert_array_equal(link_velocity((1, 1, 1), (1.5, 1, 0), 0.25, (0, 0, 0)), np.array([0.5, 0, -1]) / 0.25)
        np.testing.assert_array_equal(link_velocity((1, 1, 1), (1, 1, 1), 0.25, (0, 0, 0)), (0, 0, 0))

    def test_energy(self):
        assert link_energy((1, 0, 0), (2, 0, 0), 0.1, COULOMB) == pytest.approx(10.05**2 / 2 - 1, rel=1e-14)
        assert link_energy((1, 0, 0), (2, 0, 0), 0.1, COULOMB) == pytest.approx(49.50125, rel=1e-14)
        assert link_energy((1, 0, 0), (1, 0, 0), 0.1, COULOMB) == -1.0
        assert link_energy((0, 0, 0), (0, 0, 0), 0.1, PotentialKind.harmonic(1.0)) == 0.0

    def test_trajectory(self):
        a = (-0.5, 0, 0)
        np.testing.assert_array_equal(classical_trajectory((1, 0, 0), (2, 0, 0), 0.1, a, 0.0), (1, 0, 0))
        np.testing.assert_array_equal(classical_trajectory((1, 0, 0), (2, 0, 0), 0.1, a, 1.0), (2, 0, 0))
        np.testing.assert_allclose(classical_trajectory((1, 0, 0), (2, 0, 0), 0.1, a, 0.5), (1.50125, 0, 0), rtol=1e-15)
        for s in (-0.1, 1.1):
            with pytest.raises(ValueError):
                classical_trajectory((1, 0, 0), (2, 0, 0), 0.1, a, s)

    def test_trajectory_velocity_by_finite_differences(self):
        r_i, r_n, tau = np.array([0.3, -0.2, 1.0]), np.array([0.9, 0.4, 0.5]), 0.2
        acc = link_acceleration(r_i, r_n, COULOMB)
        h = 1e-6
        for s in (0.1, 0.5, 0.9):
            fd = (classical_trajectory(r_i, r_n, tau, acc, s + h) - classical_trajectory(r_i, r_n, tau, acc, s - h)) / (2 * h * tau)
            np.testing.assert_allclose(trajectory_velocity(r_i, r_n, tau, acc, s), fd, rtol=1e-7)
        # The link starts with the velocity used in the link energy.
        np.testing.assert_allclose(trajectory_velocity(r_i, r_n, tau, acc, 0.0), link_velocity(r_i, r_n, tau, acc), rtol=1e-14)

    def test_trajectory_curvature_is_twice_link_acceleration(self):
        r_i, r_n, tau = np.array([0.3, -0.2, 1.0]), np.array([0.9, 0.4, 0.5]), 0.2
        acc = link_acceleration(r_i, r_n, COULOMB)
        h = 1e-3
        pos = [classical_trajectory(r_i, r_n, tau, acc, 0.5 + k * h) for k in (-1, 0, 1)]
        second = (pos[0] - 2 * pos[1] + pos[2]) / (h * tau) ** 2
        np.testing.assert_allclose(second, 2 * acc, rtol=1e-6)

    def test_kinematics_record(self):
        disc = Discretization(0.1, 1.0, 3)
        path = Path([(1, 0, 0), (2, 0, 0), (0, 1.5, 0)])
        k = link_kinematics(path, 0, ActionKind.constant_force(COULOMB, disc))
        np.testing.assert_allclose(k.accel, (-0.5, 0, 0), atol=1e-15)
        np.testing.assert_allclose(k.velocity, (10.05, 0, 0), rtol=1e-14)
        assert k.energy == pytest.approx(49.50125)
        np.testing.assert_array_equal(k.unit_dir, (1, 0, 0))
        assert k.t_start == 0.0
        k2 = link_kinematics(path, 2, ActionKind.constant_force(COULOMB, disc))
        assert k2.t_start == pytest.approx(0.2)
        assert np.linalg.norm(k2.unit_dir) == pytest.approx(1.0)
        assert np.linalg.norm(np.cross(k2.accel, k2.unit_dir)) < 1e-12


class TestActionTotal:
    def test_primitive_examples(self):
        disc3 = Discretization(0.1, 1.0, 3)
        const = make_ring_path(3, InitSpec("constant", (1, 0, 0)))
        assert action_total(const, ActionKind.primitive(COULOMB, disc3)) == pytest.approx(-0.3, abs=1e-15)
        disc2 = Discretization(0.1, 1.0, 2)
        assert action_total(Path([(0, 0, 1), (0, 0, 2)]), ActionKind.primitive(COULOMB, disc2)) == pytest.approx(9.85, abs=1e-13)

    def test_simplified_example(self):
        disc = Discretization(0.1, 1.0, 2)
        const = make_ring_path(2, InitSpec("constant", (1, 0, 0)))
        assert action_total(const, ActionKind.simplified(0.5, disc)) == pytest.approx(-0.199, abs=1e-15)

    def test_free_particle_constant_path(self):
        disc = Discretization(0.1, 1.0, 4)
        const = make_ring_path(4, InitSpec("constant", (1, 2, 3)))
        for variant in ("primitive", "constant_force"):
            assert action_total(const, ActionKind(variant, PotentialKind.free(), disc)) == 0.0

    def test_constant_force_is_tau_sum_of_link_energies(self):
        rng = np.random.default_rng(3)
        disc = Discretization(0.2, 1.0, 7)
        path = random_path(rng, 7)
        direct = disc.tau * math.fsum(
            link_energy(path[i], path[i + 1], disc.tau, COULOMB) for i in range(7)
        )
        assert action_total(path, ActionKind.constant_force(COULOMB, disc)) == pytest.approx(direct, rel=1e-13)

    def test_singular_bead(self):
        disc = Discretization(0.1, 1.0, 2)
        path = Path([(0, 0, 0), (0, 0, 1)])
        with pytest.raises(SingularPointError):
            action_total(path, ActionKind.primitive(COULOMB, disc))
        with pytest.raises(SingularPointError):
            action_total(path, ActionKind.constant_force(COULOMB, disc))
        assert action_total(path, ActionKind.simplified(0.5, disc)) == math.inf

    def test_simplified_minus_primitive_is_repulsion(self):
        rng = np.random.default_rng(4)
        disc = Discretization(0.1, 1.0, 20)
        path = random_path(rng, 20)
        r = path.radii()
        expected = disc.tau * math.fsum(0.5 * disc.tau**2 / r**4)
        got = action_total(path, ActionKind.simplified(0.5, disc)) - action_total(path, ActionKind.primitive(COULOMB, disc))
        assert got > 0
        assert got == pytest.approx(expected, rel=1e-9)

    def test_zero_acceleration_reduction_is_bitwise(self):
        disc = Discretization(0.1, 1.0, 6)
        r = 1.3
        path = Path([(r, 0, 0), (0, r, 0), (0, 0, r), (-r, 0, 0), (0, -r, 0), (0, 0, -r)])
        s1 = action_total(path, ActionKind.primitive(COULOMB, disc))
        s2 = action_total(path, ActionKind.constant_force(COULOMB, disc))
        assert s1 == s2

    def test_rejects_mismatched_bead_count(self):
        disc = Discretization(0.1, 1.0, 3)
        with pytest.raises(Exception):
            action_total(Path([(1, 0, 0), (0, 1, 0)]), ActionKind.primitive(COULOMB, disc))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_rotation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    disc = Discretization(0.15, 1.0, n)
    path = random_path(rng, n)
    rotated = Path(Rotation.random(random_state=seed).apply(path.beads))
    for action in actions_for(disc).values():
        assert action_total(rotated, action) == pytest.approx(action_total(path, action), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_spring_translation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    # Coordinates on a 2^-20 grid, so the shifted positions are exact too.
    beads = np.round(rng.normal(size=(n, 3)) * 2**20) / 2**20
    path = Path(beads)
    shift = rng.normal(size=3)
    shifted = Path(beads + np.round(shift * 2**20) / 2**20)
    assert spring_sum(shifted) == spring_sum(path)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_velocity_square_three_term_expansion(seed):
    rng = np.random.default_rng(seed)
    r_i, r_n = rng.normal(size=3), rng.normal(size=3)
    tau, mass = rng.uniform(0.01, 1.0), rng.uniform(0.5, 2.0)
    acc = link_acceleration(r_i, r_n, COULOMB, mass)
    v = link_velocity(r_i, r_n, tau, acc)
    d = r_n - r_i
    direct = mass * (v @ v) / 2
    terms = mass / 2 * (d @ d) / tau**2 + mass / 2 * tau**2 * (acc @ acc) - mass * (acc @ d)
    assert terms == pytest.approx(direct, rel=1e-12)


class TestLocalDelta:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 16),
           st.sampled_from(["primitive", "constant_force", "simplified"]))
    def test_matches_full_recompute(self, seed, n, variant):
        rng = np.random.default_rng(seed)
        disc = Discretization(rng.uniform(0.02, 0.5), 1.0, n)
        action = actions_for(disc)[variant]
        path = random_path(rng, n)
        i = int(rng.integers(n))
        new = path.beads[i] + rng.uniform(-0.5, 0.5, 3)
        if np.linalg.norm(new) < 0.05:
            return
        moved = path.copy()
        moved.beads[i] = new
        full = action_total(moved, action) - action_total(path, action)
        assert local_action_delta(path, i, new, action) == pytest.approx(full, abs=1e-9)

    def test_identity_move(self):
        rng = np.random.default_rng(0)
        disc = Discretization(0.1, 1.0, 5)
        path = random_path(rng, 5)
        for action in actions_for(disc).values():
            assert local_action_delta(path, 2, path.beads[2].copy(), action) == 0.0

    def test_simplified_repels_from_origin(self):
        disc = Discretization(0.1, 1.0, 4)
        path = make_ring_path(4, InitSpec("constant", (0, 0, 1)))
        ds = local_action_delta(path, 1, (0, 0, 1e-6), ActionKind.simplified(0.5, disc))
        assert ds > 1e15
        assert local_action_delta(path, 1, (0, 0, 0), ActionKind.simplified(0.5, disc)) == math.inf

    def test_coulomb_singular_proposal(self):
        disc = Discretization(0.1, 1.0, 4)
        path = make_ring_path(4, InitSpec("constant", (0, 0, 1)))
        for variant in ("primitive", "constant_force"):
            with pytest.raises(SingularPointError):
                local_action_delta(path, 1, (0, 0, 0), actions_for(disc)[variant])

    def test_does_not_mutate_path(self):
        rng = np.random.default_rng(1)
        disc = Discretization(0.1, 1.0, 5)
        path = random_path(rng, 5)
        before = path.beads.copy()
        local_action_delta(path, 0, (1, 1, 1), actions_for(disc)["constant_force"])
        np.testing.assert_array_equal(path.beads, before)


def test_action_kind_validation():
    disc = Discretization(0.1, 1.0, 4)
    with pytest.raises(Exception):
        ActionKind("simplified", COULOMB, disc)
    with pytest.raises(Exception):
        ActionKind("primitive", PotentialKind.effective(0.5, 0.2), disc)
    with pytest.raises(Exception):
        ActionKind("fourth_order", COULOMB, disc)
    assert ActionKind("primitive", PotentialKind.effective(0.5, 0.1), disc).code == 0
