"""hetsize: finite-sample size control for heteroskedasticity-robust tests.

For a single linear restriction R beta = r in a fixed-design regression with
unknown heteroskedasticity, this package decides whether the robust squared
t-type statistics (HC0-HC4 weights and custom variants) admit finite
size-controlling critical values, computes the hard lower bound C* and the
attainable-size threshold alpha*, and finds the smallest size-controlling
critical value through a seeded Monte Carlo worst-case oracle over the
heteroskedasticity simplex.
"""

from .conditions import (
    ConditionCheck,
    ConditionReport,
    EquivalentForms,
    GroupConditionCheck,
    HetModel,
    check_assumption,
    check_condition_het,
    check_condition_uncorr,
    check_equivalent_forms,
    check_group_conditions,
    decide_size_controllability,
)
from .critval import (
    CriticalValueResult,
    VerificationResult,
    smallest_critical_value,
    verify_size_control,
)
from .errors import (
    BadPartition,
    BadSimplexPoint,
    BracketFailure,
    DecompositionFailure,
    DimensionMismatch,
    EquivalenceBreach,
    HetsizeError,
    InvalidInput,
    InvarianceBreach,
    NonpositiveWeight,
    NotControllable,
    ParseError,
    PreconditionUnverified,
    RaggedRows,
    RankDeficient,
    TooFewObservations,
    ZeroRestriction,
)
from .fixtures import Fixture, fixture, fixtures
from .model import (
    HatDiagnostics,
    TestProblem,
    WeightScheme,
    hat_diagnostics,
    residual,
    resolve_weights,
    validate_problem,
)
from .random_problems import random_partition, random_problem
from .size_oracle import (
    AlphaStarResult,
    McConfig,
    RejectionEstimate,
    SizeEstimate,
    alpha_star,
    expand_tau_sq,
    rejection_probability,
    worst_case_size,
)
from .statistic import (
    CStarResult,
    InvarianceReport,
    StatContext,
    b_map,
    c_star,
    c_star_reduced,
    invariance_audit,
    make_context,
    omega_het,
    omega_het_brute,
    t_het,
    t_het_brute,
)
from .subspaces import (
    IndexSets,
    SubspaceBasis,
    SubspaceBundle,
    analyze_subspaces,
    basis_b,
    basis_l_sharp,
    basis_m0lin,
    basis_v_sharp,
    compute_v_weights,
    index_sets,
    orthogonal_decomposition_check,
)

__version__ = "0.1.0"
