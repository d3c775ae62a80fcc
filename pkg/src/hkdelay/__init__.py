"""Delayed Hegselmann-Krause opinion dynamics: simulation plus certified
decay verification for the plain, multi-leader, pinned-leader,
steered-leader, and two-leader model variants."""

from .analysis import (
    CommonInfluencerResult,
    DecayCertificate,
    VerifierReport,
    check_ci,
    consensus_constants,
    containment_radius,
    default_tolerance,
    diameter,
    empirical_decay_rate,
    initial_spread,
    interval_diameters,
    run_all_checks,
    state_bound,
    verify_contraction,
    verify_decay_envelope,
    verify_dn_monotone,
    verify_hull_and_bound,
    verify_interval_recursion,
    verify_r_containment,
)
from .dynamics import (
    SystemState,
    control_law,
    make_rhs,
    rhs_general,
    rhs_multi_leader,
    rhs_single_leader_constant,
    rhs_single_leader_controlled,
    rhs_two_leaders,
)
from .errors import ConfigurationError, HistoryRangeError, IntegrationError, InvariantViolation
from .integrator import HistoryBuffer, StageReader, Trajectory, history_lookup, integrate, seed_history
from .kernels import (
    ConstantKernel,
    GaussianShiftedKernel,
    InfluenceKernel,
    TabulatedRadialKernel,
    eval_kernel,
    kernel_inf_on_ball,
    kernel_sup,
)
from .model import (
    AdjacencyMask,
    ConstantHistory,
    DelayMatrix,
    General,
    KernelTable,
    ModelVariant,
    MultiLeader,
    SampledHistory,
    ScenarioConfig,
    SingleLeaderConstant,
    SingleLeaderControlled,
    TwoLeaders,
    assemble_scenario,
)
from .scenario_io import load_scenario, parse_scenario
from .trajectory_io import TrajectoryData, read_trajectory, write_trajectory

__version__ = "0.1.0"
