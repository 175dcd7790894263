"""First-order forward-mode jets.

A :class:`Jet` carries a value together with its partial derivatives with
respect to a fixed set of ``m`` seed directions.  Values may be scalars or
numpy arrays (a batch of independent evaluation points); partials then have
shape ``value.shape + (m,)``.  This lets the integrators push a whole grid of
initial conditions through the same jet arithmetic in one pass.

Functions in this module (``exp``, ``sin``, ...) accept jets as well as plain
floats/arrays, so Hamiltonians and constraint functions written against this
namespace can be evaluated with or without derivatives.
"""
from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "SeedMismatchError",
    "lift",
    "seed",
    "value_of",
    "partials_of",
    "jacobian",
    "exp",
    "log",
    "sin",
    "cos",
    "sqrt",
]


class SeedMismatchError(ValueError):
    """Two jets with different seed dimensions were combined."""


def _const(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


class Jet:
    __slots__ = ("value", "partials")
    # make numpy defer to our reflected operators instead of building object arrays
    __array_ufunc__ = None

    def __init__(self, value, partials):
        value = _const(value)
        partials = _const(partials)
        if partials.ndim == 0:
            raise ValueError("partials need a trailing seed axis")
        if partials.shape[:-1] != value.shape:
            shape = np.broadcast_shapes(value.shape, partials.shape[:-1])
            value = np.broadcast_to(value, shape)
            partials = np.broadcast_to(partials, shape + partials.shape[-1:])
        self.value = value
        self.partials = partials

    @property
    def nseeds(self) -> int:
        return self.partials.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Jet({self.value!r}, {self.partials!r})"

    def _check(self, other: "Jet") -> None:
        if other.partials.shape[-1] != self.partials.shape[-1]:
            raise SeedMismatchError(
                f"seed dimension {self.partials.shape[-1]} vs {other.partials.shape[-1]}"
            )

    def _scaled(self, value, factor) -> "Jet":
        # new jet with partials = factor * self.partials
        return Jet(value, _const(factor)[..., None] * self.partials)

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.value + other.value, self.partials + other.partials)
        c = _const(other)
        v = self.value + c
        return Jet(v, np.broadcast_to(self.partials, v.shape + (self.nseeds,)))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.partials)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.value - other.value, self.partials - other.partials)
        return self + (-_const(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(
                self.value * other.value,
                self.partials * other.value[..., None] + self.value[..., None] * other.partials,
            )
        c = _const(other)
        return self._scaled(self.value * c, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            if np.any(other.value == 0.0):
                raise ZeroDivisionError("division by jet with value 0")
            inv = 1.0 / other.value
            v = self.value * inv
            return Jet(v, (self.partials - v[..., None] * other.partials) * inv[..., None])
        c = _const(other)
        if np.any(c == 0.0):
            raise ZeroDivisionError("division of jet by 0")
        return self._scaled(self.value / c, 1.0 / c)

    def __rtruediv__(self, other):
        if np.any(self.value == 0.0):
            raise ZeroDivisionError("division by jet with value 0")
        c = _const(other)
        v = c / self.value
        return self._scaled(v, -v / self.value)

    def __pow__(self, k):
        if isinstance(k, Jet):
            return exp(k * log(self))
        k = _const(k)
        if k.ndim == 0 and float(k) == round(float(k)):
            kk = int(k)
            if kk == 0:
                return Jet(np.ones_like(self.value), np.zeros_like(self.partials))
            if kk == 1:
                return self
            if kk == 2:
                return self._scaled(self.value * self.value, 2.0 * self.value)
            return self._scaled(self.value**kk, kk * self.value ** (kk - 1))
        return self._scaled(self.value**k, k * self.value ** (k - 1.0))

    def __rpow__(self, base):
        return exp(self * np.log(_const(base)))

    def __abs__(self):
        return self._scaled(np.abs(self.value), np.sign(self.value))

    def __getitem__(self, idx):
        return Jet(self.value[idx], self.partials[idx])


# ---------------------------------------------------------------------------
# elementary functions


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return x._scaled(e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        if np.any(x.value <= 0.0):
            raise ValueError("log of non-positive jet value")
        return x._scaled(np.log(x.value), 1.0 / x.value)
    return np.log(x)


def sin(x):
    if isinstance(x, Jet):
        return x._scaled(np.sin(x.value), np.cos(x.value))
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return x._scaled(np.cos(x.value), -np.sin(x.value))
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Jet):
        if np.any(x.value < 0.0):
            raise ValueError("sqrt of negative jet value")
        r = np.sqrt(x.value)
        if np.any(r == 0.0):
            raise ZeroDivisionError("sqrt jet is not differentiable at 0")
        return x._scaled(r, 0.5 / r)
    return np.sqrt(x)


# ---------------------------------------------------------------------------
# seeding and extraction


def lift(x, active: Iterable[int] | None = None) -> list[Jet]:
    """Turn a point into a list of jets seeded on the ``active`` coordinates.

    ``x`` has shape ``(n,)`` or ``(..., n)`` for a batch.  The seed dimension is
    ``len(active)``; entry ``i`` gets the unit partial row for its position in
    ``active`` and zeros otherwise.  ``active=None`` seeds every coordinate.
    """
    x = _const(x)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("cannot lift an empty vector")
    n = x.shape[-1]
    active = list(range(n)) if active is None else list(active)
    for i in active:
        if not 0 <= i < n:
            raise IndexError(f"active index {i} outside 0..{n - 1}")
    m = len(active)
    out = []
    for i in range(n):
        d = np.zeros(x.shape[:-1] + (m,))
        if i in active:
            d[..., active.index(i)] = 1.0
        out.append(Jet(x[..., i], d))
    return out


def seed(x, tangents) -> list[Jet]:
    """Jets with values ``x[..., i]`` and partials ``tangents[..., i, :]``."""
    x = _const(x)
    tangents = _const(tangents)
    return [Jet(x[..., i], tangents[..., i, :]) for i in range(x.shape[-1])]


def value_of(x):
    return x.value if isinstance(x, Jet) else _const(x)


def partials_of(x, m: int, shape=()):
    if isinstance(x, Jet):
        return x.partials
    v = _const(x)
    return np.zeros(np.broadcast_shapes(v.shape, shape) + (m,))


def values(entries: Sequence) -> np.ndarray:
    """Stack the values of a sequence of entries along a trailing axis."""
    vals = [value_of(e) for e in entries]
    shape = np.broadcast_shapes(*(v.shape for v in vals))
    return np.stack([np.broadcast_to(v, shape) for v in vals], axis=-1)


def tangents(entries: Sequence, m: int | None = None) -> np.ndarray:
    """Stack partials so that ``out[..., i, j]`` is d entry_i / d seed_j."""
    if m is None:
        m = next(e.nseeds for e in entries if isinstance(e, Jet))
    vals = [value_of(e) for e in entries]
    shape = np.broadcast_shapes(*(v.shape for v in vals))
    rows = [np.broadcast_to(partials_of(e, m, shape), shape + (m,)) for e in entries]
    return np.stack(rows, axis=-2)


def jacobian(fun: Callable, x) -> np.ndarray:
    """Jacobian of a jet-evaluable map at ``x``; row i, column j = d fun_i / d x_j."""
    out = fun(lift(x))
    if isinstance(out, Jet) or np.ndim(out) == 0:
        out = [out]
    n = _const(x).shape[-1]
    return tangents(list(out), n)
