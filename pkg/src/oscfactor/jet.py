"""Truncated Taylor arithmetic for exact low-order derivative towers.

A :class:`Jet` stores the Taylor coefficients ``c[k] = f^(k)(x0) / k!`` of a
function around one or many base points ``x0`` (the trailing axes of ``c``).
Products, quotients, square roots and exponentials propagate the
coefficients with the usual recurrences, so derivatives of composite
expressions come out exact up to rounding.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.ndim == 0:
            self.c = self.c[None]

    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs) -> "Jet":
        derivs = np.asarray(derivs, dtype=float)
        scale = np.array([1.0 / factorial(k) for k in range(len(derivs))])
        return cls(derivs * scale.reshape((-1,) + (1,) * (derivs.ndim - 1)))

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def derivative(self, k: int) -> np.ndarray:
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.c[k] * factorial(k)

    def derivatives(self) -> np.ndarray:
        return np.stack([self.derivative(k) for k in range(self.order + 1)])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.c[: order + 1])

    def diff(self) -> "Jet":
        """Jet of the derivative; loses one order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k)

    def integrate(self, value) -> "Jet":
        """Jet of the antiderivative taking ``value`` at the base point."""
        k = np.arange(1, self.order + 2).reshape((-1,) + (1,) * (self.c.ndim - 1))
        head = np.broadcast_to(np.asarray(value, dtype=float), self.c.shape[1:])
        return Jet(np.concatenate([head[None], self.c / k]))

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> tuple["Jet", "Jet"]:
        n = min(self.order, other.order)
        return self.truncate(n), other.truncate(n)

    def _shift(self, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.array(np.broadcast_to(self.c, np.broadcast_shapes(self.c.shape, (1,) + value.shape)))
        c[0] = c[0] + value
        return Jet(c)

    def __neg__(self) -> "Jet":
        return Jet(-self.c)

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._shift(other)
        a, b = self._coerce(other)
        return Jet(a.c + b.c)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self._shift(-np.asarray(other, dtype=float))
        a, b = self._coerce(other)
        return Jet(a.c - b.c)

    def __rsub__(self, other) -> "Jet":
        return (-self)._shift(other)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        a, b = self._coerce(other)
        out = np.zeros(np.broadcast_shapes(a.c.shape, b.c.shape))
        for k in range(a.order + 1):
            for j in range(k + 1):
                out[k] += a.c[j] * b.c[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        a, b = self._coerce(other)
        q = np.zeros(np.broadcast_shapes(a.c.shape, b.c.shape))
        for k in range(a.order + 1):
            acc = a.c[k] + 0.0
            for j in range(1, k + 1):
                acc = acc - b.c[j] * q[k - j]
            q[k] = acc / b.c[0]
        return Jet(q)

    def __rtruediv__(self, other) -> "Jet":
        return Jet.constant(np.broadcast_to(other, self.value.shape), self.order) / self

    def __pow__(self, p: int) -> "Jet":
        if not isinstance(p, (int, np.integer)) or p < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(np.ones_like(self.value), self.order)
        for _ in range(p):
            out = out * self
        return out

    def exp(self) -> "Jet":
        e = np.zeros_like(self.c)
        e[0] = np.exp(self.c[0])
        for k in range(1, self.order + 1):
            for j in range(1, k + 1):
                e[k] += j * self.c[j] * e[k - j]
            e[k] /= k
        return Jet(e)

    def sqrt(self) -> "Jet":
        s = np.zeros_like(self.c)
        s[0] = np.sqrt(self.c[0])
        for k in range(1, self.order + 1):
            acc = self.c[k] + 0.0
            for j in range(1, k):
                acc = acc - s[j] * s[k - j]
            s[k] = acc / (2.0 * s[0])
        return Jet(s)

    def abs(self) -> "Jet":
        # valid away from zeros of the base value
        return Jet(self.c * np.sign(self.c[0]))

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, c0={self.c[0]!r})"
