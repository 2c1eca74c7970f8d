"""Floating-point numbers with an unbounded base-2 exponent.

Values of ``P_t`` grow like ``O(n)^t`` and leave the double range quickly, so
they travel as ``mantissa * 2**exp2`` with ``0.5 <= |mantissa| < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np


@total_ordering
@dataclass(frozen=True)
class ScaledScalar:
    mantissa: float
    exp2: int

    def __post_init__(self):
        m, e = math.frexp(self.mantissa)
        if m == 0.0:
            object.__setattr__(self, "mantissa", 0.0)
            object.__setattr__(self, "exp2", 0)
        elif m != self.mantissa or e != 0:
            object.__setattr__(self, "mantissa", m)
            object.__setattr__(self, "exp2", int(self.exp2) + e)
        else:
            object.__setattr__(self, "exp2", int(self.exp2))

    @classmethod
    def from_float(cls, value: float) -> "ScaledScalar":
        if not math.isfinite(value):
            raise OverflowError(f"cannot scale non-finite value {value}")
        return cls(float(value), 0)

    @classmethod
    def from_int(cls, value: int) -> "ScaledScalar":
        value = int(value)
        if value == 0:
            return cls(0.0, 0)
        k = abs(value).bit_length()
        # int / int is correctly rounded for arbitrarily large ints
        return cls(value / (1 << k), k)

    @classmethod
    def zero(cls) -> "ScaledScalar":
        return cls(0.0, 0)

    @classmethod
    def one(cls) -> "ScaledScalar":
        return cls(0.5, 1)

    def __float__(self) -> float:
        try:
            return math.ldexp(self.mantissa, self.exp2)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)

    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    def log2(self) -> float:
        if self.mantissa <= 0.0:
            raise ValueError("log2 of a non-positive value")
        return math.log2(self.mantissa) + self.exp2

    def __mul__(self, other):
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        return ScaledScalar(self.mantissa * other.mantissa, self.exp2 + other.exp2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        if other.mantissa == 0.0:
            raise ZeroDivisionError("division by a zero ScaledScalar")
        return ScaledScalar(self.mantissa / other.mantissa, self.exp2 - other.exp2)

    def __add__(self, other):
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        if self.mantissa == 0.0:
            return other
        if other.mantissa == 0.0:
            return self
        e = max(self.exp2, other.exp2)
        m = math.ldexp(self.mantissa, self.exp2 - e) + math.ldexp(other.mantissa, other.exp2 - e)
        return ScaledScalar(m, e)

    __radd__ = __add__

    def __neg__(self):
        return ScaledScalar(-self.mantissa, self.exp2)

    def __sub__(self, other):
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        return self + (-other)

    def __pow__(self, k: int):
        k = int(k)
        if k < 0:
            return ScaledScalar.one() / (self ** (-k))
        result = ScaledScalar.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def root(self, k: int) -> "ScaledScalar":
        """Real positive ``k``-th root, computed in log space."""
        if self.mantissa < 0.0:
            raise ValueError("root of a negative value")
        if self.mantissa == 0.0:
            return self
        q, r = divmod(self.exp2, k)
        return ScaledScalar(math.ldexp(self.mantissa, r) ** (1.0 / k), q)

    def _cmp_key(self, other):
        diff = self - other
        return diff.mantissa

    def __eq__(self, other):
        if not isinstance(other, ScaledScalar):
            try:
                other = ScaledScalar.from_float(float(other))
            except (TypeError, ValueError, OverflowError):
                return NotImplemented
        return self.mantissa == other.mantissa and self.exp2 == other.exp2

    def __lt__(self, other):
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        return self._cmp_key(other) < 0.0

    def __hash__(self):
        return hash((self.mantissa, self.exp2))

    def relative_error(self, other) -> float:
        """``|self - other| / |other|`` evaluated without overflow."""
        if not isinstance(other, ScaledScalar):
            other = ScaledScalar.from_float(float(other))
        if other.mantissa == 0.0:
            return 0.0 if self.mantissa == 0.0 else math.inf
        return abs(float((self - other) / other))

    def to_dict(self) -> dict:
        return {"mantissa": self.mantissa, "exp2": self.exp2}

    @classmethod
    def from_dict(cls, data: dict) -> "ScaledScalar":
        return cls(float(data["mantissa"]), int(data["exp2"]))

    def __repr__(self):
        if self.mantissa == 0.0:
            return "ScaledScalar(0)"
        log10 = self.log2() * math.log10(2.0) if self.mantissa > 0 else None
        if log10 is not None and abs(log10) < 300:
            return f"ScaledScalar({float(self):.12g})"
        return f"ScaledScalar({self.mantissa!r} * 2**{self.exp2})"


def normalize_vector(values: np.ndarray, exp2: int = 0):
    """Rescale ``values * 2**exp2`` so the largest magnitude lies in [0.5, 1)."""
    values = np.asarray(values, dtype=np.float64)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak == 0.0 or not math.isfinite(peak):
        return values, int(exp2)
    _, e = math.frexp(peak)
    return np.ldexp(values, -e), int(exp2) + e
