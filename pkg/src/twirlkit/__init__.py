"""Random unitary operations that converge to the U(d) x U(d) twirl."""

from .attractors import (
    AttractorReport,
    attractor_space_eig,
    attractor_space_linear,
    asymptotic_spectrum,
    asymptotic_state,
    check_convergence_to_twirl,
    stationarity_sufficient,
)
from .channels import (
    DensityMatrix,
    Superoperator,
    UnitaryEnsemble,
    WernerParams,
    apply_ruo,
    build_superoperator,
    hs_distance_to_twirl,
    twirl_project,
    werner_state,
)
from .convergence import (
    ConvergenceTrace,
    OptimizationResult,
    convergence_rate,
    optimize_construction,
    optimize_probabilities,
    random_baseline,
    trace_convergence,
)
from .qubit import QubitParams, Rule, TwirlVerdict, canonicalize, classify_multi, classify_two
from .qudit import AParams, ConstructionSpec, Variant, build_ensemble, build_group_variant

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
