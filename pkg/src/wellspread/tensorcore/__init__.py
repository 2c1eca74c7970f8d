"""Quartic tensor algebra: Shift blocks, symmetrization, moment operators, e_t."""

from .elemsym import (
    ElemSymGrad,
    elem_sym,
    elem_sym_batch,
    elem_sym_grad,
    eval_Pt,
    eval_Pt_batch,
)
from .moment import MomentOperator, multiset_basis, sym_dim, sym_embed, symmetrize
from .scaled import ScaledScalar
from .shift import QuarticBlock, shift_mask, shift_quartic

__all__ = [
    "ElemSymGrad",
    "MomentOperator",
    "QuarticBlock",
    "ScaledScalar",
    "elem_sym",
    "elem_sym_batch",
    "elem_sym_grad",
    "eval_Pt",
    "eval_Pt_batch",
    "multiset_basis",
    "shift_mask",
    "shift_quartic",
    "sym_dim",
    "sym_embed",
    "symmetrize",
]
