"""Finite spaces of orderings, finite quotients of the orderings of Q(x),
inverse systems of such quotients, and positive-primitive formulas."""

from .errors import OrdspaceError
from .ppform import PPFormula, bound_B, check_tower, evaluate, evaluate_on_subspace, parse
from .ppform import search_counterexample_subspace
from .qx import (
    AlgebraicSide,
    InfinitySide,
    QuotientResult,
    Tower,
    TranscendentalCut,
    build_tower,
    construct_quotient,
    parse_ordering,
    restrict,
    sign_at,
    verify_inverse_system,
)
from .ratpoly import Interval, Polynomial, parse_polynomial
from .space import (
    FiniteSpace,
    harrison_set,
    one_point,
    quotient_structure,
    subspace_generated,
    value_set,
    verify_axioms,
)
from .structure import (
    components,
    decompose,
    direct_sum,
    four_fans,
    group_extension,
    is_isomorphic,
    make_fan,
    rebuild,
    stability_index,
)

__version__ = "0.1.0"

__all__ = [
    "OrdspaceError",
    "PPFormula",
    "bound_B",
    "check_tower",
    "evaluate",
    "evaluate_on_subspace",
    "parse",
    "search_counterexample_subspace",
    "AlgebraicSide",
    "InfinitySide",
    "QuotientResult",
    "Tower",
    "TranscendentalCut",
    "build_tower",
    "construct_quotient",
    "parse_ordering",
    "restrict",
    "sign_at",
    "verify_inverse_system",
    "Interval",
    "Polynomial",
    "parse_polynomial",
    "FiniteSpace",
    "harrison_set",
    "one_point",
    "quotient_structure",
    "subspace_generated",
    "value_set",
    "verify_axioms",
    "components",
    "decompose",
    "direct_sum",
    "four_fans",
    "group_extension",
    "is_isomorphic",
    "make_fan",
    "rebuild",
    "stability_index",
]
