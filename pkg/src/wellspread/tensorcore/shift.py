"""Redistribution of quartic tensors onto matrices indexed by index pairs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidDimensionError
from ..validation import check_vector


@lru_cache(maxsize=32)
def shift_mask(d: int, include_shift: bool = True) -> np.ndarray:
    """Entry multipliers ``mask[(j1,j2),(j3,j4)]`` as a read-only d²×d² array.

    Zero where ``j1 = j2`` not in ``{j3, j4}`` (or the mirrored condition),
    3/2 where both pairs are off-diagonal and share an index, one otherwise.
    """
    if d < 1:
        raise InvalidDimensionError("dimension must be positive")
    if not include_shift:
        mask = np.ones((d * d, d * d))
        mask.setflags(write=False)
        return mask
    j1, j2, j3, j4 = np.meshgrid(*(np.arange(d),) * 4, indexing="ij")
    left_diag = j1 == j2
    right_diag = j3 == j4
    left_out = left_diag & (j1 != j3) & (j1 != j4)
    right_out = right_diag & (j3 != j1) & (j3 != j2)
    share = (j1 == j3) | (j1 == j4) | (j2 == j3) | (j2 == j4)
    mask = np.ones((d,) * 4)
    mask[~left_diag & ~right_diag & share] = 1.5
    mask[left_out | right_out] = 0.0
    mask = mask.reshape(d * d, d * d)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True)
class QuarticBlock:
    """Symmetric d²×d² matrix acting on ``x ⊗ x``."""

    dim: int
    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def quadratic_form(self, x) -> float:
        x = check_vector(x, "x", length=self.dim)
        xx = np.outer(x, x).ravel()
        return float(xx @ self.entries @ xx)


def shift_quartic(a, include_shift: bool = True) -> QuarticBlock:
    """Return ``Shift(a^⊗4)`` (or the raw ``a^⊗4`` when ``include_shift`` is False)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] == 0:
        raise InvalidDimensionError("a must be a nonempty 1-D vector")
    a = check_vector(a, "a")
    d = a.shape[0]
    w = np.outer(a, a).ravel()
    entries = shift_mask(d, include_shift) * np.outer(w, w)
    entries.setflags(write=False)
    return QuarticBlock(d, entries)
