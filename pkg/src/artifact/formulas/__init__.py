"""Parsing, classification and Delta-st rewriting of st-in-formulas."""

from .classify import Classification, classify_delta_st, transfer_collapse
from .parser import parse_formula
from .rewrite import RewriteTrace, replay, rewrite_to_delta_st
from .syntax import alpha_equal, format_formula

__all__ = [
    "Classification",
    "RewriteTrace",
    "alpha_equal",
    "classify_delta_st",
    "format_formula",
    "parse_formula",
    "replay",
    "rewrite_to_delta_st",
    "transfer_collapse",
]
