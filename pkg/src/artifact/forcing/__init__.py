"""Desk-scale forcing over eventually periodic index sets.

Conditions pair an unbounded set of natural-number indices with a fiber that
assigns each index a nonempty finite set of tuples of hereditarily finite
sets.  ``forces_los`` decides ∈-formulas by almost-all evaluation;
``forces_clausal`` follows the inductive clauses with extension quantifiers
bounded to an enumerated space of conditions.
"""

from .clausal import FORCED, REFUTED, UNKNOWN, ConditionSpace, forces_clausal
from .conditions import (
    Condition,
    almost_all,
    extends,
    format_condition,
    parse_condition,
    trivial_condition,
)
from .constructions import (
    Split,
    decide_membership,
    decides,
    diag_name,
    differs_from_numerals,
    fix_constant,
    pseudo_generic,
    split_fibers,
    standard_part_name,
)
from .fibers import (
    Fiber,
    GenerativeFiber,
    OpaqueFiber,
    TabularFiber,
    amalgamate,
    fiber_transforms,
    format_fiber,
    one_point_one,
    parse_fiber,
    project,
    reindex,
    restrict_rank,
)
from .hfsets import EMPTY, HFSet, format_hf, hf, parse_hf, rank, universe, von_neumann
from .indexsets import EVENS, NATURALS, ODDS, IncreasingMap, IndexSet, format_index_set, parse_index_set
from .los import forces_los, truth_set
from .simplified import SimpleName, pullback, simplified_forces
from .thickness import (
    CardAtLeast,
    CardAtMost,
    Contains,
    FinFamily,
    contains_all,
    diagonal_thick,
    family_is_empty,
    format_family,
    parse_family,
    thickness_nu,
)

__all__ = [
    "FORCED",
    "REFUTED",
    "UNKNOWN",
    "ConditionSpace",
    "forces_clausal",
    "Condition",
    "almost_all",
    "extends",
    "format_condition",
    "parse_condition",
    "trivial_condition",
    "Split",
    "decide_membership",
    "decides",
    "diag_name",
    "differs_from_numerals",
    "fix_constant",
    "pseudo_generic",
    "split_fibers",
    "standard_part_name",
    "Fiber",
    "GenerativeFiber",
    "OpaqueFiber",
    "TabularFiber",
    "amalgamate",
    "fiber_transforms",
    "format_fiber",
    "one_point_one",
    "parse_fiber",
    "project",
    "reindex",
    "restrict_rank",
    "EMPTY",
    "HFSet",
    "format_hf",
    "hf",
    "parse_hf",
    "rank",
    "universe",
    "von_neumann",
    "EVENS",
    "NATURALS",
    "ODDS",
    "IncreasingMap",
    "IndexSet",
    "format_index_set",
    "parse_index_set",
    "forces_los",
    "truth_set",
    "SimpleName",
    "pullback",
    "simplified_forces",
    "CardAtLeast",
    "CardAtMost",
    "Contains",
    "FinFamily",
    "contains_all",
    "diagonal_thick",
    "family_is_empty",
    "format_family",
    "parse_family",
    "thickness_nu",
]
