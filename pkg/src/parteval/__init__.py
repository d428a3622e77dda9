"""Exact partial evaluation of formal expressions over concrete monads.

An expression is a nested container of atoms; an algebra says what a
single container layer evaluates to.  A witness records one way of
evaluating only some sub-expressions.  This package decides whether
such a witness exists, enumerates and composes witnesses, builds the
induced reduction graphs and truncated simplicial complexes, and
carries a full exact-rational probability instance (feasibility by
linear programming, dilations, conditioning, stochastic dominance).

Everything is exact: integers and fractions.Fraction throughout, no
floats anywhere.
"""

from .bar import (
    Simplex,
    TruncatedComplex,
    build_truncated_complex,
    check_simplicial_identities,
    degeneracy,
    face,
    fill_inner_horn,
    simplex_from_witness,
    vertex,
    witness_from_simplex,
)
from .core import (
    AlgebraInstance,
    LawReport,
    LawResult,
    MonadInstance,
    NestedExpression,
    atoms_of,
    check_algebra_laws,
    check_monad_laws,
    eta_at,
    ev_under,
    expression,
    functor_apply,
    map_atoms,
    mu_at,
)
from .engine import (
    ArsReport,
    ReductionGraph,
    Witness,
    audit_witnesses,
    canonical_filler,
    check_ars_properties,
    check_total_evaluation_law,
    compose_witnesses,
    enumerate_fillers,
    enumerate_witnesses,
    identity_witness,
    reduction_graph,
    total_evaluation_witness,
    validate_witness,
    witness_from_value,
)
from .errors import (
    CarrierMismatch,
    ConditioningUndefined,
    DepthMismatch,
    DimensionMismatch,
    DomainMismatch,
    EnumerationLimitExceeded,
    FillerNotFound,
    IndexOutOfRange,
    InvalidDilation,
    InvalidWitness,
    MalformedExpression,
    NotComposable,
    PartialFunction,
    PevError,
    PreconditionViolated,
    UnsupportedInstance,
)
from .instances import (
    DIST,
    LIST,
    MULTISET,
    TERMINAL,
    ActionMonad,
    ConvexAlgebra,
    Monoid,
    action_algebra,
    action_expression,
    as_fraction,
    barycenter,
    commutative_monoid_algebra,
    convex_algebra,
    cyclic,
    dirac,
    dist_average,
    dist_pushforward,
    distribution,
    list_expression,
    monoid_algebra,
    multiset_expression,
    nat_add_algebra,
    point,
    self_action_algebra,
    terminal_algebra,
)
from .stochastics import (
    Dilation,
    LpProblem,
    compose_dist_witnesses,
    compose_kernels,
    decide_pev,
    dilation_from_witness,
    dirac_dilation,
    dist_filler,
    lift_decomposition,
    lp_feasible,
    sosd_1d,
    wasserstein1_1d,
    witness_from_dilation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
