"""Simulator for wireless power transfer between two lossy, detuned LC coils.

Models energy exchange under linear frequency sweeps (adiabatic passage) and
counterdiabatically corrected drives (transitionless driving), integrating
the dissipative master equation and reproducing efficiency and robustness
studies as desk-scale numerical experiments.
"""

from .errors import (
    AccuracyError,
    CoilsweepError,
    ConfigError,
    InvalidParameterError,
    InvalidStateError,
    SingularScheduleError,
    StiffnessError,
    UndefinedAngleError,
    UndefinedEfficiencyError,
)
from .schedules import (
    CDTerms,
    DriveSchedule,
    NonCrossingSweepWarning,
    adiabaticity_margin,
    cd_boundary_report,
    counterdiabatic_terms,
    lz_probability,
    make_lz_schedule,
    make_sampled_schedule,
    mixing_angle,
)
from .model import (
    CoilPair,
    DissipationMatrix,
    Hamiltonian2,
    adiabatic_basis,
    adiabatic_populations,
    dissipation_matrix,
    rotating_hamiltonian,
    tqd_hamiltonian,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    canonical_initial_state,
    evolve_amplitudes_lab,
    evolve_amplitudes_rotating,
    evolve_master,
    validate_density_matrix,
)
from .metrics import (
    EfficiencyReport,
    doublecheck_integrals,
    efficiency,
    transfer_fidelity,
)
from .coupling import (
    DistanceModel,
    distance_study,
    kappa_from_inductance,
    kappa_of_distance,
)

__version__ = "0.1.0"
