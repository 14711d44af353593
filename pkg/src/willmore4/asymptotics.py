"""Energy of the dilated anchor rings delta_a(T^{2,2}) and its growth as a -> infinity.

With r = 1/sqrt(2), the normalized energy density of delta_a(T_{1,r})
reduces to a function I(s) of s = cos(phi_2), and
Ebar = 8 pi^2 * integral_{-1}^{1} I(s) ds, where

    I(s) = -p(a, s) / (8 a^3 (1 + s/sqrt2)^2 (1 + (a^2 - 1) s^2)^(11/2))

for an explicit polynomial p of degree 16 in a and 12 in s.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Sequence

import numpy as np
from scipy.special import beta as beta_fn

from .errors import DomainError, ParameterError

SQRT2 = math.sqrt(2.0)
# below this dilation factor p is evaluated in exact arithmetic
EXACT_BELOW = 0.5
ASYMPTOTIC_COEFFICIENT = 256.0 * math.pi ** 2 / 35.0

# P_COEFFS[j][i] is the coefficient of a^j s^i; odd powers of s carry an extra sqrt(2)
P_COEFFS: dict[int, dict[int, F]] = {
    16: {12: F(4)},
    14: {12: F(-24), 11: F(-24), 10: F(-24), 9: F(-24)},
    12: {12: F(54), 11: F(92), 10: F(-16), 9: F(-128), 8: F(-218), 7: F(-172), 6: F(-132)},
    10: {12: F(-50), 11: F(-106), 10: F(226), 9: F(502), 8: F(246), 7: F(-162), 6: F(-234),
         5: F(-286), 4: F(-380), 3: F(-188), 2: F(-144)},
    8: {12: F(9, 4), 11: F(-7), 10: F(-354), 9: F(-440), 8: F(541, 2), 7: F(632), 6: F(25),
        5: F(-350), 4: F(-847, 4), 3: F(95), 2: F(327), 1: F(118), 0: F(9)},
    6: {12: F(27), 11: F(88), 10: F(208), 9: F(-34), 8: F(-478), 7: F(-42), 6: F(816),
        5: F(398), 4: F(-241), 3: F(-302), 2: F(-304), 1: F(-108), 0: F(-28)},
    4: {12: F(-25, 2), 11: F(-38), 10: F(-16), 9: F(146), 8: F(165), 7: F(-322), 6: F(-570),
        5: F(254), 4: F(1523, 2), 3: F(64), 2: F(-318), 1: F(-104), 0: F(-10)},
    2: {12: F(-3), 11: F(-14), 10: F(-42), 9: F(-4), 8: F(100), 7: F(84), 6: F(-22),
        5: F(-88), 4: F(-69), 3: F(10), 2: F(32), 1: F(12), 0: F(4)},
    0: {12: F(9, 4), 11: F(9), 10: F(18), 9: F(-18), 8: F(-171, 2), 7: F(-18), 6: F(117),
        5: F(72), 4: F(-207, 4), 3: F(-63), 2: F(-9), 1: F(18), 0: F(9)},
}


def _coefficient_matrix() -> np.ndarray:
    """C[j, i] = numeric coefficient of a^j s^i (sqrt2 folded in)."""
    c = np.zeros((17, 13))
    for j, row in P_COEFFS.items():
        for i, q in row.items():
            c[j, i] = float(q) * (SQRT2 if i % 2 else 1.0)
    return c


_C = _coefficient_matrix()


def p_poly(a, s) -> np.ndarray:
    """The polynomial p(a, s), Horner in s then in a."""
    a = np.asarray(a, dtype=float)
    s = np.asarray(s, dtype=float)
    a, s = np.broadcast_arrays(a, s)
    out = np.zeros(a.shape)
    for j in range(16, -1, -1):
        row = np.zeros(a.shape)
        for i in range(12, -1, -1):
            row = row * s + _C[j, i]
        out = out * a + row
    return out


def _p_exact_scalar(a: float, s: float) -> float:
    """p(a, s) evaluated in exact rationals, with one rounding of sqrt(2) at 40 digits."""
    fa, fs = F(a), F(s)
    even = F(0)
    odd = F(0)
    for j, row in P_COEFFS.items():
        aj = fa ** j
        for i, q in row.items():
            term = q * aj * fs ** i
            if i % 2:
                odd += term
            else:
                even += term
    with localcontext() as ctx:
        ctx.prec = 40
        val = Decimal(even.numerator) / Decimal(even.denominator) \
            + Decimal(2).sqrt() * Decimal(odd.numerator) / Decimal(odd.denominator)
    return float(val)


def p_poly_exact(a, s) -> np.ndarray:
    """p(a, s) without floating-point cancellation (slow; for small a near s = -1)."""
    a, s = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(s, dtype=float))
    return np.vectorize(_p_exact_scalar, otypes=[float])(a, s)


def _denominator(a, s):
    return (1.0 + s / SQRT2) ** 2 * (1.0 + (a * a - 1.0) * s * s) ** 5.5


def dilated_integrand_I(a, s, exact: bool = False) -> np.ndarray:
    """I(s) for the dilation factor a (vectorized).

    ``exact`` evaluates p in rational arithmetic; the float path loses up to
    seven digits for a < 0.3 near s = -1.
    """
    a = np.asarray(a, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(a <= 0):
        raise DomainError("dilation factor must be positive")
    if np.any(np.abs(s) > 1):
        raise DomainError("s must lie in [-1, 1]")
    p = p_poly_exact(a, s) if exact else p_poly(a, s)
    return -p / (8.0 * a ** 3 * _denominator(a, s))


def _sinh_rule(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [-1, 1] clustered at s = 0 with width ~1/a."""
    scale = max(a, 1.0)
    wmax = math.asinh(scale)
    x, w = np.polynomial.legendre.leggauss(n)
    t = wmax * x
    s = np.sinh(t) / scale
    ds = np.cosh(t) / scale * wmax
    return s, w * ds


def _graded_rule(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [-1, 1] graded geometrically towards s = +-1.

    For a < 1 the integrand concentrates in layers of width ~a^2 at the ends.
    """
    tmin = 1e-3 * a * a
    edges = [1.0]
    while edges[-1] > tmin:
        edges.append(edges[-1] / 2.0)
    edges.append(0.0)
    panels = len(edges) - 1
    m = max(4, n // (2 * panels))
    x, w = np.polynomial.legendre.leggauss(m)
    ts, ws = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        ts.append(lo + (hi - lo) * (x + 1.0) / 2.0)
        ws.append(w * (hi - lo) / 2.0)
    t = np.concatenate(ts)
    wt = np.concatenate(ws)
    # t = 1 - |s| on each half
    return np.concatenate([t - 1.0, 1.0 - t]), np.concatenate([wt, wt])


def _dilation_rule(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    return _sinh_rule(a, n) if a >= 1.0 else _graded_rule(a, n)


def dilated_energy_closed(a: float, resolution: int = 400) -> float:
    """128 E of delta_a(T^{2,2}_{sqrt2,1}) by one-dimensional quadrature of I."""
    if a <= 0:
        raise DomainError("dilation factor must be positive")
    s, w = _dilation_rule(a, resolution)
    vals = dilated_integrand_I(a, s, exact=a < EXACT_BELOW)
    return 8.0 * math.pi ** 2 * math.fsum((w * vals).tolist())


def dilated_integrand_geometric(a: float, s) -> np.ndarray:
    """I(s) computed from the immersion itself (independent of the table)."""
    from .charts import dilated_anchor
    from .energies import energy_density
    from .geometry import geometry_at

    s = np.atleast_1d(np.asarray(s, dtype=float))
    chart = dilated_anchor(a, R=1.0, r=1.0 / SQRT2)
    phi2 = np.arccos(s)
    u = np.column_stack([np.full_like(s, 0.5 * math.pi), np.zeros_like(s), phi2, np.zeros_like(s)])
    geom = geometry_at(chart, u, derivs=1)
    # Ebar density times area element, divided by the coordinate factor sin(phi1) sin(phi2)
    return 128.0 * energy_density(geom) * geom.volume_element / (np.sin(u[:, 0]) * np.sin(phi2))


@dataclass(frozen=True)
class DilationScan:
    a: np.ndarray
    Ebar: np.ndarray
    coefficient: float
    fit_coefficients: np.ndarray


def asymptotic_fit(a_list: Sequence[float], degree: int | None = None, resolution: int = 400) -> DilationScan:
    """Least-squares fit of Ebar(a) / a^4 as a polynomial in 1/a; returns the 1/a -> 0 value."""
    a = np.asarray(a_list, dtype=float)
    if a.ndim != 1 or len(a) < 2:
        raise ParameterError("need at least two dilation factors")
    if np.any(np.diff(a) <= 0) or np.any(a <= 0):
        raise ParameterError("dilation factors must be positive and strictly increasing")
    vals = np.array([dilated_energy_closed(x, resolution) for x in a])
    if degree is None:
        degree = min(len(a) - 1, 2)
    x = 1.0 / a
    coef = np.polynomial.polynomial.polyfit(x, vals / a ** 4, degree)
    return DilationScan(a, vals, float(coef[0]), coef)


def lemma_integral(i: int, j: int, a: float, resolution: int = 400) -> tuple[float, float | None]:
    """The integral of a^j s^i / ((1 + s/sqrt2)^2 (1 + (a^2-1) s^2)^(11/2)) over [-1, 1].

    Also returns the a -> infinity limit where it is known: the Beta-function
    value of the integral of t^i (1 + t^2)^(-11/2) over R when j - i = 1 and
    i < 10, zero when j - i < 1 and j < 11, otherwise None.
    """
    if i < 0 or j < 0:
        raise ParameterError("indices must be non-negative")
    if a <= 0:
        raise DomainError("a must be positive")
    s, w = _dilation_rule(a, resolution)
    val = math.fsum((w * a ** j * s ** i / _denominator(a, s)).tolist())
    limit: float | None = None
    if j - i == 1 and i < 10:
        limit = 0.0 if i % 2 else float(beta_fn((i + 1) / 2.0, (10 - i) / 2.0))
    elif j - i < 1 and j < 11:
        limit = 0.0
    return val, limit


def limit_combination(a: float, resolution: int = 400) -> float:
    """-pi^2 (9 I_{0,1}(a) - 144 I_{2,3}(a)), which tends to the a^4 coefficient."""
    i01, _ = lemma_integral(0, 1, a, resolution)
    i23, _ = lemma_integral(2, 3, a, resolution)
    return -math.pi ** 2 * (9.0 * i01 - 144.0 * i23)
