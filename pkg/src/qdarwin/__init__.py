"""Objectivity diagnostics for finite-dimensional system-environment states."""

from .core import (
    DEFAULT_TOL,
    ConditionalEnsemble,
    DensityMatrix,
    Outcome,
    ProjectiveMeasurement,
    PureState,
    SubsystemLayout,
    Tolerances,
    dephase_subsystem,
    eig_hermitian,
    load_state,
    measure_subsystem,
    partial_trace,
    save_state,
    tensor,
    validate_density_matrix,
    validate_pure_state,
)
from .measures import (
    AccessibleInfoBounds,
    MeasureValue,
    accessible_information_bounds,
    conditional_mutual_information,
    discord,
    entropy_bits,
    fidelity,
    holevo_quantity,
    mutual_information,
    pointer_basis,
    trace_distance,
    von_neumann_entropy,
)
from .objectivity import (
    DEFAULT_VERDICT_TOL,
    IndependenceVerdict,
    ObjectivityReport,
    RedundancyReport,
    SbsVerdict,
    SqdVerdict,
    TheoremWitness,
    VerdictTolerances,
    analyze,
    broadcast_distance_bound,
    check_strong_darwinism,
    check_strong_independence,
    detect_broadcast_structure,
    objectivity_deficit,
    redundancy,
    verify_equivalence,
)
from .optimize import DEFAULT_OPT, OptimizerConfig
from .zoo import (
    SbsSpec,
    make_broadcast_state,
    make_cq_state,
    make_correlated_branches,
    make_entangled_branches,
    make_ghz_reduced,
    make_haar_pure,
    make_horodecki,
    make_random_broadcast_state,
    make_random_density,
    std_layout,
)

__version__ = "0.1.0"
