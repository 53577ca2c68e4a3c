"""Canonical operators, theorem families, pencil tables and known systems."""

from .ansatz import Ansatz, AnsatzResult, align, ansatz_search, variety_from_connection
from .canonical import CANONICAL, CanonicalOperator, akns_trio, canonical, leading_metric, scalar_pencils, scalar_trio
from .families import (
    FAMILIES,
    Branch,
    KnownMatch,
    ParamFamily,
    PencilRule,
    check_pencil_rule,
    check_pencil_table,
    family,
    instantiate,
    levi_civita_variety,
    match_known_system,
    on_variety,
    pencil_admissible,
    same_quadratic_span,
)
from .systems import EXAMPLES, Example

__all__ = [
    "Ansatz",
    "AnsatzResult",
    "Branch",
    "CANONICAL",
    "CanonicalOperator",
    "EXAMPLES",
    "Example",
    "FAMILIES",
    "KnownMatch",
    "ParamFamily",
    "PencilRule",
    "akns_trio",
    "align",
    "ansatz_search",
    "canonical",
    "check_pencil_rule",
    "check_pencil_table",
    "family",
    "instantiate",
    "leading_metric",
    "levi_civita_variety",
    "match_known_system",
    "on_variety",
    "pencil_admissible",
    "same_quadratic_span",
    "scalar_pencils",
    "scalar_trio",
    "variety_from_connection",
]
