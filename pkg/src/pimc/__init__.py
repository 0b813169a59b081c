"""Path-integral Monte Carlo for a single particle with three action discretizations."""

from pimc.errors import (
    ConfigurationError,
    CorruptedStateError,
    SingularPointError,
    UnsupportedEstimatorError,
)
from pimc.path import Discretization, InitSpec, Path, link, make_ring_path
from pimc.potentials import PotentialKind, effective_min_radius, potential_value
from pimc.actions import (
    ActionKind,
    LinkKinematics,
    action_total,
    classical_trajectory,
    link_acceleration,
    link_energy,
    link_kinematics,
    link_velocity,
    local_action_delta,
)
from pimc.sampler import (
    ChainState,
    MeasurementStream,
    ProposalSpec,
    Schedule,
    accept_probability,
    metropolis_sweep,
    run_chain,
)
from pimc.estimators import (
    EnergyEstimate,
    RadialHistogram,
    blocking_error,
    collapse_metric,
    constant_force_energy_diagnostic,
    radial_histogram,
    thermodynamic_energy,
)

__version__ = "0.1.0"

__all__ = [
    "ActionKind",
    "ChainState",
    "ConfigurationError",
    "CorruptedStateError",
    "Discretization",
    "EnergyEstimate",
    "InitSpec",
    "LinkKinematics",
    "MeasurementStream",
    "Path",
    "PotentialKind",
    "ProposalSpec",
    "RadialHistogram",
    "Schedule",
    "SingularPointError",
    "UnsupportedEstimatorError",
    "accept_probability",
    "action_total",
    "blocking_error",
    "classical_trajectory",
    "collapse_metric",
    "constant_force_energy_diagnostic",
    "effective_min_radius",
    "link",
    "link_acceleration",
    "link_energy",
    "link_kinematics",
    "link_velocity",
    "local_action_delta",
    "make_ring_path",
    "metropolis_sweep",
    "potential_value",
    "radial_histogram",
    "run_chain",
    "thermodynamic_energy",
]
