"""Univariate truncated Taylor arithmetic (order <= 3).

A :class:`Jet3` carries the normalized Taylor coefficients ``c[k] = f^(k)(0) / k!``
of ``t -> f(p + t v)``.  Arithmetic and the elementary functions follow the
usual recurrences for power series, truncated at the jet order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

MAX_ORDER = 3


class JetDomainError(ArithmeticError):
    """Raised when a jet operation leaves the domain of the function."""


@dataclass(frozen=True)
class Jet3:
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.coeffs) <= MAX_ORDER + 1:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}")

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet3":
        return cls((float(value),) + (0.0,) * order)

    @classmethod
    def variable(cls, value: float, slope: float, order: int) -> "Jet3":
        if order == 0:
            return cls((float(value),))
        return cls((float(value), float(slope)) + (0.0,) * (order - 1))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def derivative(self, k: int) -> float:
        """k-th derivative along the line (not the normalized coefficient)."""
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.coeffs[k] * math.factorial(k)

    def _lift(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            if other.order != self.order:
                raise ValueError("cannot mix jets of different order")
            return other
        return Jet3.constant(other, self.order)

    def __add__(self, other):
        o = self._lift(other)
        return Jet3(tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Jet3(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        a, b = self.coeffs, o.coeffs
        return Jet3(tuple(sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(len(a))))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        a, b = self.coeffs, o.coeffs
        if abs(b[0]) < 1e-300:
            raise JetDomainError("division by a value below 1e-300")
        q: list[float] = []
        for k in range(len(a)):
            q.append((a[k] - sum(b[i] * q[k - i] for i in range(1, k + 1))) / b[0])
        return Jet3(tuple(q))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, int):
            return powi(self, exponent)
        return powr(self, exponent)


def _series_exp(a: Sequence[float]) -> tuple[float, ...]:
    e = [math.exp(a[0])]
    for k in range(1, len(a)):
        e.append(sum(j * a[j] * e[k - j] for j in range(1, k + 1)) / k)
    return tuple(e)


def _series_sincos(a: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    s = [math.sin(a[0])]
    c = [math.cos(a[0])]
    for k in range(1, len(a)):
        s.append(sum(j * a[j] * c[k - j] for j in range(1, k + 1)) / k)
        c.append(-sum(j * a[j] * s[k - j] for j in range(1, k + 1)) / k)
    return tuple(s), tuple(c)


def exp(x: Jet3) -> Jet3:
    if x.value > 709.0:
        raise JetDomainError("exp overflow")
    return Jet3(_series_exp(x.coeffs))


def log(x: Jet3) -> Jet3:
    a = x.coeffs
    if a[0] <= 0.0:
        raise JetDomainError(f"log of non-positive value {a[0]!r}")
    out = [math.log(a[0])]
    for k in range(1, len(a)):
        acc = sum(j * out[j] * a[k - j] for j in range(1, k))
        out.append((a[k] - acc / k) / a[0])
    return Jet3(tuple(out))


def sqrt(x: Jet3) -> Jet3:
    a = x.coeffs
    if a[0] < 0.0:
        raise JetDomainError(f"sqrt of negative value {a[0]!r}")
    if a[0] == 0.0 and x.order > 0:
        raise JetDomainError("sqrt is not differentiable at 0")
    s = [math.sqrt(a[0])]
    for k in range(1, len(a)):
        s.append((a[k] - sum(s[j] * s[k - j] for j in range(1, k))) / (2.0 * s[0]))
    return Jet3(tuple(s))


def sin(x: Jet3) -> Jet3:
    return Jet3(_series_sincos(x.coeffs)[0])


def cos(x: Jet3) -> Jet3:
    return Jet3(_series_sincos(x.coeffs)[1])


def tan(x: Jet3) -> Jet3:
    s, c = _series_sincos(x.coeffs)
    return Jet3(s) / Jet3(c)


def powi(x: Jet3, n: int) -> Jet3:
    if n < 0:
        return Jet3.constant(1.0, x.order) / powi(x, -n)
    result = Jet3.constant(1.0, x.order)
    base = x
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


def powr(x: Jet3, r) -> Jet3:
    """x**r for a real (possibly jet-valued) exponent; requires x > 0."""
    if x.value <= 0.0:
        raise JetDomainError(f"real power of non-positive base {x.value!r}")
    return exp(log(x) * r)
