"""The symmetrized moment operator ``M̃ = P_sym M P_sym``.

``M = t! sum_{|S|=t} ⊗_{i in S} B_i`` acts on ``(R^d)^{⊗2t}`` with
``B_i = Shift(a_i^⊗4)``.  Two representations are provided:

* the full-space route applies ``M`` by subset enumeration and symmetrizes by
  averaging over all index permutations.  It is the direct reading of the
  definition and serves small instances and tests;
* the compressed route works on the symmetric subspace ``Sym^{2t}``, which
  carries the whole nonzero spectrum of ``M̃``.  Vectors there are written in
  an orthonormal basis indexed by multisets of size ``2t``.  The operator is
  assembled in pair coordinates (orthonormal ``Sym²`` basis per slot) where
  the ordered-distinct-tuple sum ``t! sum_S ⊗ B_i`` expands through power sums
  ``p_k = sum_i B_i^{⊗k}`` over integer partitions of ``t``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from functools import cached_property, lru_cache

import numpy as np

from ..errors import InvalidDimensionError, ResourceLimitError
from ..validation import check_int, check_matrix, check_vector
from .shift import shift_mask

SUBSET_LIMIT = 10**7
DENSE_LIMIT = 4096


# ------------------------------------------------------------ symmetrization


def _infer_dim(length, order):
    d = int(round(length ** (1.0 / order)))
    for cand in (d - 1, d, d + 1):
        if cand >= 1 and cand**order == length:
            return cand
    raise InvalidDimensionError(f"length {length} is not a perfect {order}-th power")


def symmetrize(y, t: int, d: int | None = None) -> np.ndarray:
    """Average ``y`` over all ``(2t)!`` permutations of its tensor indices."""
    t = check_int(t, "t", minimum=1, maximum=3)
    y = check_vector(y, "y")
    order = 2 * t
    if d is None:
        d = _infer_dim(y.shape[0], order)
    elif y.shape[0] != d**order:
        raise InvalidDimensionError(f"y must have length d^{order} = {d**order}")
    T = y.reshape((d,) * order)
    out = np.zeros_like(T)
    perms = list(itertools.permutations(range(order)))
    for p in perms:
        out += T.transpose(p)
    return (out / len(perms)).ravel()


# ---------------------------------------------------- symmetric coordinates


def pair_index(d):
    """Unordered pairs ``(j, k)``, ``j <= k``, in the Sym² basis order."""
    return list(itertools.combinations_with_replacement(range(d), 2))


def sym_dim(d: int, order: int) -> int:
    return math.comb(d + order - 1, order)


@lru_cache(maxsize=16)
def _multisets(d, order):
    ms = list(itertools.combinations_with_replacement(range(d), order))
    lookup = {m: k for k, m in enumerate(ms)}
    counts = np.array(
        [math.factorial(order) / math.prod(math.factorial(c) for c in Counter(m).values()) for m in ms]
    )
    return ms, lookup, counts


def multiset_basis(d: int, order: int):
    """Multisets of size ``order`` and their orbit sizes ``N_m``."""
    ms, _, counts = _multisets(d, order)
    return ms, counts


@lru_cache(maxsize=16)
def _embedding(d, t):
    """Row -> (column, value) of the isometry ``Sym^{2t} -> (Sym²)^{⊗t}``.

    Every row (an ordered tuple of pairs) has exactly one nonzero entry.
    """
    pairs = pair_index(d)
    c = np.array([1.0 if j == k else math.sqrt(2.0) for j, k in pairs])
    _, lookup, counts = _multisets(d, 2 * t)
    D2 = len(pairs)
    cols = np.empty(D2**t, dtype=np.int64)
    vals = np.empty(D2**t)
    for r, q in enumerate(itertools.product(range(D2), repeat=t)):
        m = tuple(sorted(itertools.chain.from_iterable(pairs[k] for k in q)))
        col = lookup[m]
        cols[r] = col
        vals[r] = math.prod(c[k] for k in q) / math.sqrt(counts[col])
    cols.setflags(write=False)
    vals.setflags(write=False)
    return cols, vals


def sym_embed(x, t: int) -> np.ndarray:
    """Coordinates of ``x^{⊗2t}`` in the orthonormal basis of ``Sym^{2t}``."""
    x = check_vector(x, "x")
    ms, counts = multiset_basis(x.shape[0], 2 * t)
    idx = np.array(ms)
    return np.sqrt(counts) * np.prod(x[idx], axis=1)


def sym_basis_full(d: int, t: int) -> np.ndarray:
    """Dense ``d^{2t} × dim Sym^{2t}`` isometry onto the symmetric subspace."""
    order = 2 * t
    ms, lookup, counts = _multisets(d, order)
    U = np.zeros((d**order, len(ms)))
    for r, J in enumerate(itertools.product(range(d), repeat=order)):
        col = lookup[tuple(sorted(J))]
        U[r, col] = 1.0 / math.sqrt(counts[col])
    return U


# ------------------------------------------------------- partition expansion


def _partitions(t, largest=None):
    largest = t if largest is None else largest
    if t == 0:
        yield ()
        return
    for k in range(min(t, largest), 0, -1):
        for rest in _partitions(t - k, k):
            yield (k,) + rest


def distinct_tuple_expansion(t: int):
    """``[(coefficient, parts)]`` with sum over distinct ordered tuples
    ``= sum coefficient * ⊗_{parts} p_k`` up to slot permutation."""
    terms = []
    for lam in _partitions(t):
        mult = Counter(lam)
        z = math.prod(k**m * math.factorial(m) for k, m in mult.items())
        coef = (-1) ** (t - len(lam)) * math.factorial(t) // z
        terms.append((coef, lam))
    return terms


# ----------------------------------------------------------------- operator


class MomentOperator:
    """``M̃`` at level ``t`` for the rows of ``A``.

    Parameters
    ----------
    A : array of shape (n, d)
    t : int
        Level; the operator acts on ``(R^d)^{⊗2t}``.
    include_shift : bool
        Use ``Shift(a_i^⊗4)`` blocks (default) or the raw ``a_i^⊗4``.
    """

    def __init__(self, A, t: int, include_shift: bool = True):
        self.A = check_matrix(A, min_rows=0)
        self.t = check_int(t, "t", minimum=1)
        self.include_shift = bool(include_shift)
        self.n, self.d = self.A.shape
        self.apply_dim = self.d ** (2 * self.t)
        self.pair_dim = sym_dim(self.d, 2)
        self.sym_dim = sym_dim(self.d, 2 * self.t)

    # full-space route ---------------------------------------------------

    @cached_property
    def blocks(self) -> np.ndarray:
        """Array of shape ``(n, d², d²)`` holding every ``B_i``."""
        mask = shift_mask(self.d, self.include_shift)
        W = np.einsum("ij,ik->ijk", self.A, self.A).reshape(self.n, -1)
        return W[:, :, None] * mask[None] * W[:, None, :]

    def _check_subsets(self):
        count = math.comb(self.n, self.t)
        if count > SUBSET_LIMIT:
            raise ResourceLimitError(
                f"C({self.n},{self.t}) = {count} subsets exceeds {SUBSET_LIMIT}",
                count=count,
                limit=SUBSET_LIMIT,
            )

    def _apply_unsymmetrized(self, y):
        d2, t = self.d**2, self.t
        Y = y.reshape((d2,) * t)
        out = np.zeros_like(Y)
        for S in itertools.combinations(range(self.n), t):
            Z = Y
            for slot, i in enumerate(S):
                Z = np.moveaxis(np.tensordot(self.blocks[i], Z, axes=([1], [slot])), 0, slot)
            out += Z
        return math.factorial(t) * out.ravel()

    def apply(self, y) -> np.ndarray:
        """``M̃ y`` by subset enumeration in the full tensor space."""
        y = check_vector(y, "y", length=self.apply_dim)
        self._check_subsets()
        y = symmetrize(y, self.t, self.d)
        return symmetrize(self._apply_unsymmetrized(y), self.t, self.d)

    def raw_dense(self) -> np.ndarray:
        """Dense unsymmetrized ``M`` (small instances only)."""
        self._check_dense(self.apply_dim)
        self._check_subsets()
        out = np.zeros((self.apply_dim, self.apply_dim))
        for S in itertools.combinations(range(self.n), self.t):
            K = np.ones((1, 1))
            for i in S:
                K = np.kron(K, self.blocks[i])
            out += K
        return math.factorial(self.t) * out

    def to_dense(self) -> np.ndarray:
        """Dense ``M̃`` on ``(R^d)^{⊗2t}``, assembled from the compressed form."""
        self._check_dense(self.apply_dim)
        U = sym_basis_full(self.d, self.t)
        return U @ self.sym_dense() @ U.T

    @staticmethod
    def _check_dense(dim):
        if dim > DENSE_LIMIT:
            raise ResourceLimitError(
                f"dense dimension {dim} exceeds {DENSE_LIMIT}", count=dim, limit=DENSE_LIMIT
            )

    # compressed route ---------------------------------------------------

    @cached_property
    def pair_weights(self) -> np.ndarray:
        """Rows ``w_i`` with ``B_i' = diag(w_i) mask' diag(w_i)`` in Sym² coordinates."""
        pairs = np.array(pair_index(self.d))
        c = np.where(pairs[:, 0] == pairs[:, 1], 1.0, math.sqrt(2.0))
        return c * self.A[:, pairs[:, 0]] * self.A[:, pairs[:, 1]]

    @cached_property
    def pair_mask(self) -> np.ndarray:
        pairs = np.array(pair_index(self.d))
        flat = pairs[:, 0] * self.d + pairs[:, 1]
        return np.ascontiguousarray(shift_mask(self.d, self.include_shift)[np.ix_(flat, flat)])

    @cached_property
    def pair_blocks(self) -> np.ndarray:
        W = self.pair_weights
        return W[:, :, None] * self.pair_mask[None] * W[:, None, :]

    @cached_property
    def pair_sum(self) -> np.ndarray:
        W = self.pair_weights
        return (W.T @ W) * self.pair_mask

    def _power_sum_apply(self, Z, slots):
        """Apply ``sum_i ⊗_{slots} B_i'`` to ``Z`` of shape ``(D2,)*t + (b,)``."""
        if len(slots) == 1:
            return _apply_slot(Z, self.pair_sum, slots[0])
        blocks = self.pair_blocks
        chunk = max(1, (1 << 23) // Z.size)
        out = np.zeros_like(Z)
        for start in range(0, self.n, chunk):
            Bc = blocks[start : start + chunk]
            T = np.broadcast_to(Z, (Bc.shape[0],) + Z.shape)
            for s in slots:
                T = _apply_slot_batched(T, Bc, s)
            out += T.sum(axis=0)
        return out

    def _pair_space_apply(self, Z):
        """``t! sum_{|S|=t} ⊗ B_i'`` up to slot symmetrization."""
        out = np.zeros_like(Z)
        for coef, parts in distinct_tuple_expansion(self.t):
            T, start = Z, 0
            for k in parts:
                T = self._power_sum_apply(T, tuple(range(start, start + k)))
                start += k
            out += coef * T
        return out

    def sym_apply(self, u) -> np.ndarray:
        """Compressed operator applied to Sym^{2t} coordinates, ``(D,)`` or ``(D, b)``."""
        u = np.asarray(u, dtype=np.float64)
        squeeze = u.ndim == 1
        U = u[:, None] if squeeze else u
        if U.shape[0] != self.sym_dim:
            raise InvalidDimensionError(f"expected leading dimension {self.sym_dim}")
        cols, vals = _embedding(self.d, self.t)
        Z = (vals[:, None] * U[cols]).reshape((self.pair_dim,) * self.t + (U.shape[1],))
        Y = self._pair_space_apply(Z).reshape(-1, U.shape[1])
        out = np.zeros((self.sym_dim, U.shape[1]))
        np.add.at(out, cols, vals[:, None] * Y)
        return out[:, 0] if squeeze else out

    def pair_space_dense(self) -> np.ndarray:
        """Dense ``t! sum_S ⊗ B_i'`` in pair coordinates (up to slot order)."""
        dim = self.pair_dim**self.t
        self._check_dense(dim)
        out = np.zeros((dim, dim))
        for coef, parts in distinct_tuple_expansion(self.t):
            K = np.ones((1, 1))
            for k in parts:
                K = np.kron(K, self._power_sum_dense(k))
            out += coef * K
        return out

    def _power_sum_dense(self, k):
        if k == 1:
            return self.pair_sum
        D2 = self.pair_dim
        if k == 2:
            # sum_i B_i ⊗ B_i is a reshuffle of the Gram matrix of vec(B_i)
            V = self.pair_blocks.reshape(self.n, -1)
            G = (V.T @ V).reshape(D2, D2, D2, D2)
            return G.transpose(0, 2, 1, 3).reshape(D2 * D2, D2 * D2)
        out = np.zeros((D2**k, D2**k))
        for B in self.pair_blocks:
            K = B
            for _ in range(k - 1):
                K = np.kron(K, B)
            out += K
        return out

    def sym_dense(self) -> np.ndarray:
        """Dense compressed operator of size ``dim Sym^{2t}``."""
        self._check_dense(self.sym_dim)
        cols, vals = _embedding(self.d, self.t)
        if self.pair_dim**self.t <= DENSE_LIMIT:
            Mp = self.pair_space_dense()
            E = np.zeros((Mp.shape[0], self.sym_dim))
            E[np.arange(Mp.shape[0]), cols] = vals
            K = E.T @ Mp @ E
        else:
            K = np.empty((self.sym_dim, self.sym_dim))
            step = 256
            for s in range(0, self.sym_dim, step):
                K[:, s : s + step] = self.sym_apply(np.eye(self.sym_dim)[:, s : s + step])
        return 0.5 * (K + K.T)

    def quadratic_form(self, x) -> float:
        """``(x^{⊗2t})^T M̃ x^{⊗2t}`` through the compressed operator."""
        x = check_vector(x, "x", length=self.d)
        u = sym_embed(x, self.t)
        return float(u @ self.sym_apply(u))


def _apply_slot(Z, B, slot):
    T = np.moveaxis(Z, slot, -1)
    return np.moveaxis(T @ B, -1, slot)


def _apply_slot_batched(T, Bc, slot):
    # T has a leading batch axis matched with Bc; B is symmetric
    c = T.shape[0]
    moved = np.moveaxis(T, slot + 1, -1)
    shape = moved.shape
    out = np.matmul(moved.reshape(c, -1, shape[-1]), Bc).reshape(shape)
    return np.moveaxis(out, -1, slot + 1)
