"""Vectorized interval arithmetic with outward rounding.

Only the operations needed for the nonnegative expressions in the
lambda_min continuity bound are provided. Endpoints are numpy arrays so a
whole grid of boxes is evaluated at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_DOWN = -np.inf
_UP = np.inf


def _down(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.nextafter(x, _DOWN)


def _up(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.nextafter(x, _UP)


@dataclass(frozen=True)
class Interval:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def of(cls, lo, hi=None) -> "Interval":
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        return cls(lo, hi)

    def __add__(self, other: "Interval | float") -> "Interval":
        o = _lift(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval | float") -> "Interval":
        return self + (-_lift(other))

    def __rsub__(self, other: float) -> "Interval":
        return _lift(other) - self

    def __mul__(self, other: "Interval | float") -> "Interval":
        o = _lift(other)
        with np.errstate(invalid="ignore", over="ignore"):
            c = np.stack([self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi])
        c = np.nan_to_num(c, nan=0.0)
        return Interval(_down(c.min(axis=0)), _up(c.max(axis=0)))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        """1/x for intervals inside [0, inf]; 1/0 is +inf."""
        if np.any(self.lo < 0):
            raise ValueError("reciprocal only defined for nonnegative intervals here")
        with np.errstate(divide="ignore", over="ignore"):
            return Interval(_down(1.0 / self.hi), _up(1.0 / self.lo))

    def __truediv__(self, other: "Interval | float") -> "Interval":
        return self * _lift(other).reciprocal()

    def __rtruediv__(self, other: float) -> "Interval":
        return _lift(other) * self.reciprocal()

    def sqrt(self) -> "Interval":
        if np.any(self.lo < 0):
            raise ValueError("sqrt of a negative interval")
        return Interval(np.maximum(_down(np.sqrt(self.lo)), 0.0), _up(np.sqrt(self.hi)))

    def contains(self, x: np.ndarray) -> np.ndarray:
        return (self.lo <= x) & (x <= self.hi)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo


def _lift(x: "Interval | float") -> Interval:
    return x if isinstance(x, Interval) else Interval.of(x)
