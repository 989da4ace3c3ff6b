"""Hurwitz zeta zeros: evaluation, zero location, counting and parameter flows."""

from __future__ import annotations

from .analytic import AnalyticFunction, hurwitz_function, polynomial_function
from .errors import (
    BoundaryZero,
    CoefficientPole,
    ConstructionUnvalidated,
    LostZero,
    NewtonDiverged,
    NoFlowParameter,
    NotInNullSpace,
    NotPrime,
    NotSymmetric,
    PoleAtOne,
    PoleInside,
    ToleranceUnreachable,
    WrongFlow,
    ZetaflowError,
)
from .families import (
    PSI5_EVEN_L,
    CombinationSpec,
    SymmetryMatrix,
    beta_circle_5odd,
    build_psi5_odd,
    build_psi_even5,
    build_psi_even5_circle,
    build_psi_prime,
    combination_function,
    combination_param_derivative,
    evaluate_combination,
    gamma_from_beta_even5,
    hurwitz_spec,
    spec_from_json,
    spec_to_json,
    symmetry_defect,
    symmetry_matrix,
)
from .tracker import (
    BifurcationEvent,
    LinearizedFlowResult,
    StepControl,
    Trajectory,
    linearized_flow,
    scaled_spectrum,
    track_family_zero,
    track_hurwitz_zero,
)
from .zeros import (
    CountComparison,
    Rectangle,
    ZeroRecord,
    compare_counts,
    count_formula,
    find_zeros,
    newton_refine,
    winding_number,
)
from .zeta import (
    CharacterTable,
    EvalResult,
    dirichlet_characters,
    hurwitz_jet,
    hurwitz_zeta,
    hurwitz_zeta_alpha_derivative,
    hurwitz_zeta_s_derivative,
    riemann_zeta,
)

__version__ = "0.1.0"
