"""Elementary symmetric polynomials of fourth powers, with gradients.

``e_t(z)`` is accumulated with the one-dimensional recurrence
``e[j] <- e[j] + z_i * e[j-1]``.  The recurrence is evaluated column by column
(``e_j`` over all prefixes at once via ``cumsum``), which performs exactly the
same floating-point additions in the same order as the row-wise loop while
staying vectorized.

Two evaluation paths share one contract:

* fast path: ``z`` is divided by a power of two taken from ``max(z)`` so every
  prefix table fits in double range, and the power is added back to the
  exponent exactly;
* robust path: every table entry carries its own base-2 exponent.  Used
  automatically when the fast path over- or underflows.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..errors import DomainError
from ..validation import check_int, check_matrix, check_vector
from .scaled import ScaledScalar, normalize_vector

# fast-path tables must stay inside this band, otherwise fall back
_SAFE_LOG2 = 960


class ElemSymGrad(NamedTuple):
    """Value ``e_t(z)`` and partials ``partials * 2**exp2``."""

    value: ScaledScalar
    partials: np.ndarray
    exp2: int

    def partials_float(self) -> np.ndarray:
        return np.ldexp(self.partials, self.exp2)


def _check_z(z):
    z = check_vector(z, "z")
    if np.any(z < 0.0):
        raise DomainError("elementary symmetric inputs must be nonnegative")
    return z


def _prefix_tables(zs, depth):
    """Rows ``k = 0..depth`` of ``T[k, i] = e_k(zs[:i])`` for ``i = 0..n``."""
    n = zs.shape[-1]
    table = np.zeros(zs.shape[:-1] + (depth + 1, n + 1))
    table[..., 0, :] = 1.0
    for k in range(1, depth + 1):
        table[..., k, 1:] = np.cumsum(zs * table[..., k - 1, :-1], axis=-1)
    return table


def _fast_ok(value, positives, t):
    if not np.isfinite(value):
        return False
    if value == 0.0:
        return positives < t
    return abs(math.frexp(value)[1]) < _SAFE_LOG2


# ---------------------------------------------------------------- robust path


def _snorm(m, e):
    m, de = np.frexp(m)
    e = np.where(m == 0.0, 0, e + de)
    return m, e


def _sadd(m1, e1, m2, e2):
    top = np.maximum(e1, e2)
    top = np.where(m1 == 0.0, e2, np.where(m2 == 0.0, e1, top))
    m = np.ldexp(m1, e1 - top) + np.ldexp(m2, e2 - top)
    return _snorm(m, top)


def _robust_prefix(z, depth):
    """Per-entry-exponent prefix tables, shape ``(n + 1, depth + 1)``."""
    n = z.shape[0]
    zm, ze = np.frexp(z)
    mant = np.zeros((n + 1, depth + 1))
    expo = np.zeros((n + 1, depth + 1), dtype=np.int64)
    mant[0, 0], expo[0, 0] = 0.5, 1
    for i in range(n):
        m, e = mant[i].copy(), expo[i].copy()
        if zm[i] != 0.0:
            pm, pe = _snorm(m[:-1] * zm[i], e[:-1] + ze[i])
            m[1:], e[1:] = _sadd(m[1:], e[1:], pm, pe)
        mant[i + 1], expo[i + 1] = m, e
    return mant, expo


def _robust_value(z, t):
    mant, expo = _robust_prefix(z, t)
    return ScaledScalar(float(mant[-1, t]), int(expo[-1, t]))


def _robust_grad(z, t):
    n = z.shape[0]
    pm, pe = _robust_prefix(z, t)
    sm, se = _robust_prefix(z[::-1], t - 1)
    value = ScaledScalar(float(pm[-1, t]), int(pe[-1, t]))
    # partial_i = sum_k e_k(z[:i]) * e_{t-1-k}(z[i+1:])
    pre_m, pre_e = pm[:n, :t], pe[:n, :t]
    suf_m = sm[n - 1 :: -1, ::-1][:, :t] if t > 0 else sm[:0]
    suf_e = se[n - 1 :: -1, ::-1][:, :t] if t > 0 else se[:0]
    prod_m, prod_e = _snorm(pre_m * suf_m, pre_e + suf_e)
    top = np.where(prod_m == 0.0, np.iinfo(np.int64).min // 2, prod_e).max(axis=1)
    summed = np.ldexp(prod_m, np.where(prod_m == 0.0, 0, prod_e - top[:, None])).sum(axis=1)
    m_i, e_i = _snorm(summed, np.where(summed == 0.0, 0, top))
    live = m_i != 0.0
    if not np.any(live):
        return ElemSymGrad(value, np.zeros(n), 0)
    shared = int(e_i[live].max())
    partials = np.where(live, np.ldexp(m_i, np.where(live, e_i - shared, 0)), 0.0)
    partials, shared = normalize_vector(partials, shared)
    return ElemSymGrad(value, partials, shared)


# ---------------------------------------------------------------- public API


def elem_sym(z, t: int, *, robust: bool = False) -> ScaledScalar:
    """Return ``e_t(z) = sum_{|S|=t} prod_{i in S} z_i`` as a ScaledScalar.

    ``e_0 = 1`` and ``e_t = 0`` for ``t > len(z)``.  Entries of ``z`` must be
    nonnegative.  ``robust=True`` forces the per-entry-exponent path.
    """
    z = _check_z(z)
    t = check_int(t, "t", minimum=0)
    n = z.shape[0]
    if t == 0:
        return ScaledScalar.one()
    if t > n:
        return ScaledScalar.zero()
    if robust:
        return _robust_value(z, t)
    zmax = float(z.max())
    if zmax == 0.0:
        return ScaledScalar.zero()
    shift = math.frexp(zmax)[1]
    zs = np.ldexp(z, -shift)
    value = float(_prefix_tables(zs, t)[t, -1])
    if not _fast_ok(value, int(np.count_nonzero(z)), t):
        return _robust_value(z, t)
    return ScaledScalar(value, shift * t)


def elem_sym_grad(z, t: int, *, robust: bool = False) -> ElemSymGrad:
    """Value of ``e_t(z)`` and all partials ``e_{t-1}(z without z_i)``.

    Partials come from prefix and suffix elementary-symmetric tables in
    ``O(n t)`` time and share a single base-2 exponent.
    """
    z = _check_z(z)
    t = check_int(t, "t", minimum=1)
    n = z.shape[0]
    if t > n:
        return ElemSymGrad(ScaledScalar.zero(), np.zeros(n), 0)
    if robust:
        return _robust_grad(z, t)
    zmax = float(z.max())
    if zmax == 0.0:
        partials = np.full(n, 1.0 if t == 1 else 0.0)
        return ElemSymGrad(ScaledScalar.zero(), partials, 0)
    shift = math.frexp(zmax)[1]
    zs = np.ldexp(z, -shift)
    pre = _prefix_tables(zs, t)
    suf = _prefix_tables(zs[::-1], t - 1)
    value = float(pre[t, -1])
    if not _fast_ok(value, int(np.count_nonzero(z)), t):
        return _robust_grad(z, t)
    # pre[k, i] = e_k(z[:i]); suf[k, n-1-i] = e_k(z[i+1:])
    partials = np.zeros(n)
    for k in range(t):
        partials += pre[k, :n] * suf[t - 1 - k, n - 1 :: -1]
    if not np.all(np.isfinite(partials)):
        return _robust_grad(z, t)
    partials, exp2 = normalize_vector(partials, shift * (t - 1))
    return ElemSymGrad(ScaledScalar(value, shift * t), partials, exp2)


def elem_sym_batch(Z, t: int):
    """Row-wise ``e_t`` for a 2-D array; returns ``(mantissas, exponents)``.

    Rows that leave the fast path's safe range are recomputed robustly.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise DomainError("elem_sym_batch expects a 2-D array")
    if np.any(Z < 0.0):
        raise DomainError("elementary symmetric inputs must be nonnegative")
    rows, n = Z.shape
    mant = np.zeros(rows)
    expo = np.zeros(rows, dtype=np.int64)
    if t == 0:
        return np.full(rows, 0.5), np.ones(rows, dtype=np.int64)
    if t > n or rows == 0:
        return mant, expo
    zmax = Z.max(axis=1)
    _, shift = np.frexp(np.where(zmax > 0.0, zmax, 1.0))
    Zs = np.ldexp(Z, -shift[:, None])
    values = _prefix_tables(Zs, t)[:, t, -1]
    positives = np.count_nonzero(Z, axis=1)
    for r in range(rows):
        if zmax[r] == 0.0:
            continue
        if _fast_ok(values[r], positives[r], t):
            s = ScaledScalar(float(values[r]), int(shift[r]) * t)
        else:
            s = _robust_value(Z[r], t)
        mant[r], expo[r] = s.mantissa, s.exp2
    return mant, expo


def factorial_scaled(t: int) -> ScaledScalar:
    return ScaledScalar.from_int(math.factorial(t))


def eval_Pt(A, t: int, x) -> ScaledScalar:
    """``P_t(x) = t! * e_t(<a_i, x>^4)`` over the rows ``a_i`` of ``A``."""
    A = check_matrix(A, min_rows=0)
    t = check_int(t, "t", minimum=1)
    x = check_vector(x, "x", length=A.shape[1])
    z = (A @ x) ** 4
    return factorial_scaled(t) * elem_sym(z, t)


def eval_Pt_batch(A, t: int, X):
    """``P_t`` at every row of ``X``; returns ``(mantissas, exponents)``."""
    A = check_matrix(A, min_rows=0)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = (X @ A.T) ** 4
    mant, expo = elem_sym_batch(Z, t)
    fact = factorial_scaled(t)
    m, e = np.frexp(mant * fact.mantissa)
    expo = np.where(m == 0.0, 0, expo + fact.exp2 + e)
    return m, expo


def batch_to_log2(mant, expo):
    """log2 of positive scaled values; ``-inf`` for zeros."""
    mant = np.asarray(mant, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.where(mant > 0.0, np.log2(np.where(mant > 0.0, mant, 1.0)) + expo, -np.inf)
