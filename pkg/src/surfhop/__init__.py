"""Mixed quantum-classical dynamics for two-state avoided-crossing models.

Trajectory engines (adiabatic reference, stochastic surface hopping with
momentum rescaling, and hopping driven by a continuous quantum force) share
one model of two coupled one-dimensional diabatic surfaces, with an exact
grid propagation available as the accuracy reference.  All quantities are
in atomic units with hbar = 1.
"""

from .dynamics import (
    EngineKind,
    HopKind,
    HopOutcome,
    TrajectoryState,
    apply_hops,
    attempt_hop,
    canonical_momentum,
    derivatives,
    hop_probability,
    impulsive_jump,
    impulsive_jump_quadrature,
    rk4_step,
    trajectory_energy,
    trajectory_energy_canonical,
)
from .ensemble import (
    EnsembleFrame,
    EnsembleResult,
    InitialCondition,
    RunConfig,
    consistency_report,
    run_ensemble,
    sample_initial,
)
from .errors import (
    ConfigurationError,
    GridTooSmallError,
    PropagationError,
    SingularJumpError,
)
from .model import (
    HBAR,
    AdiabaticPoint,
    DensityMatrix2,
    DiabaticPoint,
    ModelPotential,
    density_to_adiabatic,
    density_to_diabatic,
    eval_adiabatic,
    eval_diabatic,
)
from .qgrid import (
    Grid,
    SplitOperator,
    Wavefunction,
    analyze,
    init_wavepacket,
    run_exact,
    split_step,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticPoint",
    "ConfigurationError",
    "DensityMatrix2",
    "DiabaticPoint",
    "EngineKind",
    "EnsembleFrame",
    "EnsembleResult",
    "Grid",
    "GridTooSmallError",
    "HBAR",
    "HopKind",
    "HopOutcome",
    "InitialCondition",
    "ModelPotential",
    "PropagationError",
    "RunConfig",
    "SingularJumpError",
    "SplitOperator",
    "TrajectoryState",
    "Wavefunction",
    "analyze",
    "apply_hops",
    "attempt_hop",
    "canonical_momentum",
    "consistency_report",
    "density_to_adiabatic",
    "density_to_diabatic",
    "derivatives",
    "eval_adiabatic",
    "eval_diabatic",
    "hop_probability",
    "impulsive_jump",
    "impulsive_jump_quadrature",
    "init_wavepacket",
    "rk4_step",
    "run_ensemble",
    "run_exact",
    "sample_initial",
    "split_step",
    "trajectory_energy",
    "trajectory_energy_canonical",
    "__version__",
]
