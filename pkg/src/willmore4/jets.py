"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds the Taylor coefficients ``d^m f(u0) / m!`` of a
(tensor-valued, batched) function of ``nvars`` parameters, for every
multi-index ``m`` with ``|m| <= order``.  Coefficients live on the leading
axis in graded-lexicographic order, so truncating to a lower order is a
slice.  The remaining axes are free: by convention axis 1 is the batch of
evaluation nodes and the rest are tensor indices.

Products truncate to the smaller of the two operand orders and derivatives
lower the order by one, so the order bookkeeping of a long computation is
automatic.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Callable, Sequence

import numpy as np

from .errors import UnsupportedOrderError

MAX_ORDER = 6


@functools.lru_cache(maxsize=None)
def multi_indices(nvars: int, order: int = MAX_ORDER) -> tuple[tuple[int, ...], ...]:
    """All multi-indices with total degree <= order, graded then lex order."""
    out = []
    for deg in range(order + 1):
        deg_block = [m for m in itertools.product(range(deg + 1), repeat=nvars) if sum(m) == deg]
        out.extend(sorted(deg_block, reverse=True))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _position(nvars: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(multi_indices(nvars))}


def ncoef(nvars: int, order: int) -> int:
    return math.comb(order + nvars, nvars)


@functools.lru_cache(maxsize=None)
def _triples(nvars: int, order: int):
    # (i, j) coefficient pairs contributing to each output coefficient k,
    # grouped by k so that np.add.reduceat can collapse them.
    pos = _position(nvars)
    left, right, starts = [], [], []
    for k in multi_indices(nvars, order):
        starts.append(len(left))
        for i in itertools.product(*(range(kv + 1) for kv in k)):
            j = tuple(kv - iv for kv, iv in zip(k, i))
            left.append(pos[i])
            right.append(pos[j])
    return np.array(left), np.array(right), np.array(starts)


@functools.lru_cache(maxsize=None)
def _deriv_map(nvars: int, order: int, var: int):
    pos = _position(nvars)
    src, fac = [], []
    for m in multi_indices(nvars, order - 1):
        shifted = list(m)
        shifted[var] += 1
        src.append(pos[tuple(shifted)])
        fac.append(m[var] + 1)
    return np.array(src), np.array(fac, dtype=float)


@functools.lru_cache(maxsize=None)
def _factorials(nvars: int, order: int) -> np.ndarray:
    return np.array([math.prod(math.factorial(e) for e in m) for m in multi_indices(nvars, order)],
                    dtype=float)


class Jet:
    """Truncated Taylor expansion; see the module docstring for the layout."""

    __slots__ = ("c", "nvars", "order")
    __array_priority__ = 100.0

    def __init__(self, c: np.ndarray, nvars: int, order: int):
        if order > MAX_ORDER:
            raise UnsupportedOrderError(f"jet order {order} exceeds the maximum {MAX_ORDER}")
        c = np.asarray(c, dtype=float)
        if c.shape[0] != ncoef(nvars, order):
            raise ValueError(f"expected {ncoef(nvars, order)} coefficients, got {c.shape[0]}")
        self.c = c
        self.nvars = nvars
        self.order = order

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((ncoef(nvars, order),) + value.shape)
        c[0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, value, var: int, nvars: int, order: int) -> "Jet":
        """The coordinate function ``u[var]`` expanded about ``value``."""
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            jet.c[1 + var] = 1.0
        return jet

    # -- basic structure --------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.c[: ncoef(self.nvars, order)], self.nvars, order)

    def derivatives(self) -> np.ndarray:
        """Partial derivatives ``d^m f`` (coefficients times m!)."""
        fac = _factorials(self.nvars, self.order).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return self.c * fac

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[(slice(None),) + idx], self.nvars, self.order)

    def reshape(self, *shape) -> "Jet":
        return Jet(self.c.reshape((self.c.shape[0],) + tuple(shape)), self.nvars, self.order)

    def moveaxis(self, src: int, dst: int) -> "Jet":
        # axes counted within the coefficient-stripped shape
        nd = len(self.shape)
        src, dst = src % nd + 1, dst % nd + 1
        return Jet(np.moveaxis(self.c, src, dst), self.nvars, self.order)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape})"

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different parameter counts")
            o = min(self.order, other.order)
            return self.truncate(o), other.truncate(o)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            c0 = a.c[0] + np.asarray(other, dtype=float)
            c = np.broadcast_to(a.c, (a.c.shape[0],) + c0.shape).copy()
            c[0] = c0
            return Jet(c, a.nvars, a.order)
        return Jet(a.c + b.c, a.nvars, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a.c * np.asarray(other, dtype=float), a.nvars, a.order)
        left, right, starts = _triples(a.nvars, a.order)
        prod = a.c[left] * b.c[right]
        return Jet(np.add.reduceat(prod, starts, axis=0), a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / np.asarray(other, dtype=float), self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.nvars, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        return self.power(float(p))

    # -- calculus ---------------------------------------------------------

    def deriv(self, var: int) -> "Jet":
        """Partial derivative in parameter ``var``; the order drops by one."""
        if self.order == 0:
            raise UnsupportedOrderError("cannot differentiate an order-0 jet")
        src, fac = _deriv_map(self.nvars, self.order, var)
        fac = fac.reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[src] * fac, self.nvars, self.order - 1)

    def gradient(self, axis: int = 1) -> "Jet":
        """Stack all first partials along a new tensor axis (default right after the batch axis)."""
        parts = [self.deriv(v) for v in range(self.nvars)]
        return stack(parts, axis=axis)

    def compose(self, taylor: Sequence[np.ndarray]) -> "Jet":
        """Apply a scalar function given its Taylor coefficients at the constant term.

        ``taylor[n]`` must equal ``f^(n)(a0) / n!`` for n = 0..order.
        """
        h = Jet(self.c.copy(), self.nvars, self.order)
        h.c[0] = 0.0
        out = Jet.constant(taylor[self.order], self.nvars, self.order)
        for n in range(self.order - 1, -1, -1):
            out = out * h + taylor[n]
        return out

    def sin(self) -> "Jet":
        a0 = self.c[0]
        s, co = np.sin(a0), np.cos(a0)
        cyc = (s, co, -s, -co)
        return self.compose([cyc[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def cos(self) -> "Jet":
        a0 = self.c[0]
        s, co = np.sin(a0), np.cos(a0)
        cyc = (co, -s, -co, s)
        return self.compose([cyc[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def exp(self) -> "Jet":
        e = np.exp(self.c[0])
        return self.compose([e / math.factorial(n) for n in range(self.order + 1)])

    def log(self) -> "Jet":
        a0 = self.c[0]
        coeffs = [np.log(a0)]
        for n in range(1, self.order + 1):
            coeffs.append((-1.0) ** (n + 1) / (n * a0 ** n))
        return self.compose(coeffs)

    def power(self, p: float) -> "Jet":
        a0 = self.c[0]
        coeffs = []
        binom = 1.0
        for n in range(self.order + 1):
            coeffs.append(binom * a0 ** (p - n))
            binom *= (p - n) / (n + 1)
        return self.compose(coeffs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def reciprocal(self) -> "Jet":
        return self.power(-1.0)


# -- free functions -------------------------------------------------------


def stack(jets: Sequence[Jet], axis: int = -1) -> Jet:
    """Stack jets of equal shape along a new tensor axis (axis counted without the coefficient axis)."""
    order = min(j.order for j in jets)
    nvars = jets[0].nvars
    cs = [j.truncate(order).c for j in jets]
    nd = cs[0].ndim
    ax = axis + 1 if axis >= 0 else nd + 1 + axis
    return Jet(np.stack(cs, axis=ax), nvars, order)


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum over tensor axes with jet convolution on the coefficient axis.

    Either operand may be a plain array (treated as a constant).  Subscripts
    describe the coefficient-stripped shapes, e.g. ``"zab,zbc->zac"``.
    """
    lhs, out = subscripts.split("->")
    sa, sb = lhs.split(",")
    if not isinstance(b, Jet):
        return Jet(np.einsum(f"T{sa},{sb}->T{out}", a.c, b), a.nvars, a.order)
    if not isinstance(a, Jet):
        return Jet(np.einsum(f"{sa},T{sb}->T{out}", a, b.c), b.nvars, b.order)
    order = min(a.order, b.order)
    a, b = a.truncate(order), b.truncate(order)
    left, right, starts = _triples(a.nvars, order)
    prod = np.einsum(f"T{sa},T{sb}->T{out}", a.c[left], b.c[right])
    return Jet(np.add.reduceat(prod, starts, axis=0), a.nvars, order)


def inv(m: Jet) -> Jet:
    """Inverse of a jet-valued square matrix (last two axes)."""
    m0 = m.c[0]
    m0inv = np.linalg.inv(m0)
    nil = Jet(m.c.copy(), m.nvars, m.order)
    nil.c[0] = 0.0
    # (M0 + N)^-1 = sum_n (-M0^-1 N)^n M0^-1, finite since N is nilpotent
    x = Jet(-np.einsum("...ij,T...jk->T...ik", m0inv, nil.c), m.nvars, m.order)
    eye = np.broadcast_to(np.eye(m0.shape[-1]), m0.shape)
    acc = Jet.constant(eye, m.nvars, m.order)
    for _ in range(m.order):
        acc = einsum("...ij,...jk->...ik", x, acc) + eye
    return einsum("...ij,...jk->...ik", acc, m0inv)


def variables(point: np.ndarray, order: int) -> list[Jet]:
    """Coordinate jets for a batch of parameter points of shape (N, nvars)."""
    point = np.atleast_2d(np.asarray(point, dtype=float))
    nvars = point.shape[1]
    return [Jet.variable(point[:, v], v, nvars, order) for v in range(nvars)]


def jet_map(func: Callable[[list[Jet]], Sequence[Jet]], point: np.ndarray, order: int) -> Jet:
    """Evaluate ``func`` on coordinate jets and stack its components on the last axis."""
    comps = func(variables(point, order))
    return stack(list(comps), axis=-1)
