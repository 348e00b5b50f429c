"""Truncated bivariate Taylor-jet arithmetic.

A :class:`Jet` holds the value and all partial derivatives of a scalar
function of two variables (x, y) at a base point, up to a fixed order in
{1, 2, 3}.  Coefficients are stored as *raw derivative values*
d^(i+j) f / dx^i dy^j, not Taylor-normalized; the i! j! conversion factors
live inside the arithmetic kernel (Leibniz rule with binomial weights).

Coefficients may be plain floats or numpy arrays of equal shape, in which
case every operation broadcasts elementwise; this is what makes batched
strip integration cheap.
"""

from __future__ import annotations

import math

import numpy as np

MAX_ORDER = 3

# Multi-index enumeration, fixed per order: (0,0), (1,0), (0,1), (2,0), ...
_INDICES = {
    o: tuple((s - j, j) for s in range(o + 1) for j in range(s + 1))
    for o in (1, 2, 3)
}
_SLOT = {o: {ij: k for k, ij in enumerate(idx)} for o, idx in _INDICES.items()}


def _leibniz_table(order):
    # For each output index (i, j): all ((k, l), (i-k, j-l), C(i,k)*C(j,l)).
    table = []
    slot = _SLOT[order]
    for (i, j) in _INDICES[order]:
        terms = []
        for k in range(i + 1):
            for l in range(j + 1):
                w = math.comb(i, k) * math.comb(j, l)
                terms.append((slot[(k, l)], slot[(i - k, j - l)], float(w)))
        table.append(terms)
    return table


_LEIBNIZ = {o: _leibniz_table(o) for o in (1, 2, 3)}


def _check_order(order):
    if order not in (1, 2, 3):
        raise ValueError(f"jet order must be 1, 2 or 3, got {order!r}")


class Jet:
    """Value plus partial derivatives up to ``order`` at a fixed base point."""

    __slots__ = ("order", "c")

    # make ndarray <op> Jet defer to the reflected Jet operators instead of
    # broadcasting Jet as an object scalar
    __array_ufunc__ = None

    def __init__(self, order, c):
        _check_order(order)
        c = np.asarray(c, dtype=float)
        if c.shape[0] != len(_INDICES[order]):
            raise ValueError(
                f"coefficient array has leading size {c.shape[0]}, "
                f"expected {len(_INDICES[order])} for order {order}"
            )
        self.order = order
        self.c = c

    # -- construction ------------------------------------------------------

    @staticmethod
    def constant(value, order, like=None):
        _check_order(order)
        n = len(_INDICES[order])
        tail = np.shape(like)[1:] if like is not None else ()
        c = np.zeros((n,) + np.broadcast_shapes(np.shape(value), tail))
        c[0] = value
        return Jet(order, c)

    @staticmethod
    def variable(which, point, order):
        """Jet of the coordinate function x or y at ``point``."""
        _check_order(order)
        if which not in ("x", "y"):
            raise ValueError(f"variable must be 'x' or 'y', got {which!r}")
        px, py = point
        value = px if which == "x" else py
        c = np.zeros((len(_INDICES[order]),) + np.shape(value))
        c[0] = value
        c[_SLOT[order][(1, 0) if which == "x" else (0, 1)]] = 1.0
        return Jet(order, c)

    @staticmethod
    def from_derivatives(order, mapping):
        """Build a jet from a {(i, j): value} map of derivative values."""
        _check_order(order)
        c = np.zeros(len(_INDICES[order]))
        for ij, v in mapping.items():
            c[_SLOT[order][ij]] = v
        return Jet(order, c)

    # -- inspection ---------------------------------------------------------

    @property
    def value(self):
        return self.c[0]

    def derivative(self, i, j):
        """Return d^(i+j)/dx^i dy^j at the base point."""
        return self.c[_SLOT[self.order][(i, j)]]

    @property
    def coeffs(self):
        """Derivative values as a {(i, j): value} map."""
        return {ij: self.c[k] for k, ij in enumerate(_INDICES[self.order])}

    def __repr__(self):
        pairs = ", ".join(f"{ij}: {v}" for ij, v in self.coeffs.items())
        return f"Jet(order={self.order}, {{{pairs}}})"

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError(
                    f"jet order mismatch: {self.order} vs {other.order}"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.ndarray)):
            return Jet.constant(other, self.order, like=self.c)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.order, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.order, self.c - o.c)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.order, o.c - self.c)

    def __neg__(self):
        return Jet(self.order, -self.c)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.c, o.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k, terms in enumerate(_LEIBNIZ[self.order]):
            acc = 0.0
            for s1, s2, w in terms:
                acc = acc + w * a[s1] * b[s2]
            out[k] = acc
        return Jet(self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jet exponent must be an integer")
        n = int(n)
        if n < 0:
            return (self.__pow__(-n))._reciprocal()
        result = Jet.constant(1.0, self.order, like=self.c)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- composition with univariate functions ------------------------------

    def _compose(self, series):
        """Evaluate sum_k series[k] * (self - value)^k by Horner."""
        w = Jet(self.order, self.c.copy())
        w.c[0] = np.zeros(np.shape(w.c[0]))
        result = Jet.constant(series[-1], self.order, like=self.c)
        for k in range(len(series) - 2, -1, -1):
            result = result * w
            result.c[0] = result.c[0] + series[k]
        return result

    def _reciprocal(self):
        v = self.c[0]
        if np.any(np.asarray(v) == 0.0):
            raise ZeroDivisionError("division by a jet with zero value")
        inv = 1.0 / v
        series = [inv * (-inv) ** k for k in range(self.order + 1)]
        return self._compose(series)

    def sqrt(self):
        v = self.c[0]
        if np.any(np.asarray(v) <= 0.0):
            raise ValueError("sqrt of a jet with non-positive value")
        r = np.sqrt(v)
        # Taylor coefficients of sqrt at v: binom(1/2, k) v^(1/2 - k)
        series = [r, 0.5 * r / v, -0.125 * r / v**2, 0.0625 * r / v**3]
        return self._compose(series[: self.order + 1])

    def exp(self):
        e = np.exp(self.c[0])
        series = [e, e, e / 2.0, e / 6.0]
        return self._compose(series[: self.order + 1])

    def sin(self):
        s, co = np.sin(self.c[0]), np.cos(self.c[0])
        series = [s, co, -s / 2.0, -co / 6.0]
        return self._compose(series[: self.order + 1])

    def cos(self):
        s, co = np.sin(self.c[0]), np.cos(self.c[0])
        series = [co, -s, -co / 2.0, s / 6.0]
        return self._compose(series[: self.order + 1])


# -- scalar-generic helpers: work on Jets and plain numbers -----------------


def sin(v):
    return v.sin() if isinstance(v, Jet) else math.sin(v)


def cos(v):
    return v.cos() if isinstance(v, Jet) else math.cos(v)


def exp(v):
    return v.exp() if isinstance(v, Jet) else math.exp(v)


def sqrt(v):
    if isinstance(v, Jet):
        return v.sqrt()
    if isinstance(v, np.ndarray):
        if np.any(v <= 0.0):
            raise ValueError("sqrt of a non-positive value")
        return np.sqrt(v)
    if v <= 0.0:
        raise ValueError("sqrt of a non-positive value")
    return math.sqrt(v)
