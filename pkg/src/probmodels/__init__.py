"""Exact finite toolkit for probabilistic models on test spaces.

Test spaces and weights, morphisms and explanations, semiclassical covers and
their canonical classical explanations, non-signalling composites,
separability and Bell locality.  All arithmetic uses :class:`fractions.Fraction`.
"""

from .bell import BellVerdict, PRBox, build_pr_box, check_bell_local, local_implies_separable_check
from .classicalize import (
    Borelification,
    CoverOutcome,
    FiniteBorelModel,
    FiniteBorelSpace,
    Measure,
    barycenter_measure,
    bor_on_morphism,
    borelify,
    cover_space,
    dispersion_free_cover_states,
    lift_weight,
    semiclassical_cover,
)
from .composites import (
    Composite,
    JointWeight,
    NonSignalling,
    Signalling,
    check_composite,
    in_ns_state_space,
    is_separable_state,
    is_separable_weight,
    make_composite,
    marginals_and_conditionals,
    minimal_ns_composite,
    product_space,
    product_weight,
)
from .errors import DomainError, HypothesisViolation, MorphismViolation, StructuralError, UnboundedError
from .exactlp import (
    FarkasCertificate,
    Feasible,
    HullCertificate,
    Infeasible,
    LinearSystem,
    Member,
    NotMember,
    enumerate_vertices,
    hull_membership,
    solve_feasibility,
)
from .morphisms import (
    Explanation,
    Morphism,
    MorphismClass,
    check_morphism,
    classify,
    compose,
    compose_explanations,
    identity,
    identity_explanation,
    pullback_subquotient,
    pullback_weight,
)
from .testspace import (
    TestSpace,
    are_orthogonal,
    are_perspective,
    count_single_outcome_tests,
    is_event,
    is_irredundant,
    is_semiclassical,
)
from .weights import (
    ProbModel,
    Weight,
    check_weight,
    enumerate_dispersion_free,
    full_weight_polytope_vertices,
    make_full_model,
    state_membership,
)

__all__ = [name for name, value in dict(globals()).items() if not name.startswith("_") and not isinstance(value, type(bell))]
