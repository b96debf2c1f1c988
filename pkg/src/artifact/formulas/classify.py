"""Recognising Delta-st forms and erasing standardness marks."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ContractViolation, NotDeltaSt
from .syntax import STANDARD, Formula, Quant, St, walk


@dataclass(frozen=True)
class Classification:
    delta_st: bool
    prefix_length: int | None = None
    reason: str | None = None

    def __str__(self) -> str:
        if self.delta_st:
            return f"delta_st({self.prefix_length})"
        return f"not_delta_st({self.reason})"


def st_prefix(f: Formula) -> tuple[list[Quant], Formula]:
    """Split off the leading block of unbounded st quantifiers."""
    prefix = []
    while isinstance(f, Quant) and f.kind in STANDARD and f.bound is None:
        prefix.append(f)
        f = f.body
    return prefix, f


def classify_delta_st(f: Formula) -> Classification:
    prefix, matrix = st_prefix(f)
    for node in walk(matrix):
        if isinstance(node, St):
            return Classification(False, reason="st predicate in matrix")
        if isinstance(node, Quant):
            if node.kind in ("Ain", "Ein"):
                return Classification(False, reason="in-quantifier present")
            if node.kind in STANDARD:
                return Classification(False, reason="st-quantifier inside matrix")
    return Classification(True, prefix_length=len(prefix))


def erase_marks(f: Formula) -> Formula:
    prefix, matrix = st_prefix(f)
    for q in reversed(prefix):
        matrix = Quant("A" if q.kind == "Ast" else "E", q.var, matrix, q.sort, q.bound)
    return matrix


def transfer_collapse(f: Formula, standard_parameters: bool = True) -> Formula:
    """Replace the st prefix of a Delta-st formula by plain quantifiers.

    Valid by Transfer when every parameter is standard; callers assert this
    with ``standard_parameters``.
    """
    c = classify_delta_st(f)
    if not c.delta_st:
        raise NotDeltaSt(f"cannot collapse: {c.reason}")
    if not standard_parameters:
        raise ContractViolation("transfer requires standard parameters")
    return erase_marks(f)
