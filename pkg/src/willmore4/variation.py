"""First-variation checks, Jacobi spectra and the family second-variation cross-check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .charts import ImmersionChart, TrigPolynomial, quadrature_rule
from .energies import DEFAULT_RESOLUTION, energy
from .errors import ParameterError, UnsupportedError
from .families import second_derivative_theta
from .jets import Jet, jet_map
from .obstruction import obstruction

# u-jets -> ambient component jets
VectorField = Callable[[list[Jet]], list[Jet]]


def normal_variation(chart: ImmersionChart, scalar: TrigPolynomial | None = None) -> VectorField:
    """The field phi * nu for the chart's unit normal nu (phi = 1 by default)."""
    if chart.normal_func is None:
        raise UnsupportedError(f"{chart.family} has no unit normal")
    nf = chart.normal_func
    if scalar is None:
        return nf

    def field(u):
        phi = scalar(u)
        return [phi * c for c in nf(u)]

    return field


def perturbed_chart(chart: ImmersionChart, field: VectorField, t: float,
                    invariant: bool = False) -> ImmersionChart:
    """The chart x + t V, pulled back radially onto the sphere in a sphere background.

    ``invariant`` keeps the chart's symmetries; set it only when V commutes
    with them (for instance a multiple of the normal by an invariant function).
    """
    base = chart.func
    sphere = chart.background.is_sphere

    def func(u):
        comps = [c + t * v for c, v in zip(base(u), field(u))]
        if sphere:
            norm2 = comps[0] * comps[0]
            for c in comps[1:]:
                norm2 = norm2 + c * c
            inv = norm2.sqrt().reciprocal()
            comps = [c * inv for c in comps]
        return comps

    params = dict(chart.params, t=t)
    return chart.with_func(func, params=params, normal_func=None,
                           symmetries=chart.symmetries if invariant else ())


@dataclass(frozen=True)
class FirstVariationResult:
    h: float
    derivative_h: float
    derivative_half: float
    richardson: float
    reference: float
    residual: float
    order: float

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.reference), abs(self.richardson))
        return self.residual / scale if scale > 0 else self.residual


def _energy_value(chart: ImmersionChart, resolution: int, use_symmetry: bool) -> float:
    return energy(chart, resolution=resolution, use_symmetry=use_symmetry).E


def first_variation_residual(chart: ImmersionChart, field: VectorField | None = None, h: float = 0.01,
                             resolution: int = DEFAULT_RESOLUTION, invariant: bool = False) -> FirstVariationResult:
    """Compare d/dt E(x + t V) at t = 0 with -integral <V, obstruction field> da.

    Central differences at steps h and h/2 are combined by Richardson
    extrapolation.  ``order`` is log2 of the ratio of the two raw
    difference errors against the reference (nan when both vanish).
    """
    k = chart.k
    if k not in (2, 4) or (k == 4 and chart.background.is_sphere):
        raise UnsupportedError(f"first variation needs k = 2, or k = 4 in Euclidean space (got k = {k}, "
                               f"{chart.background.kind})")
    if h <= 0:
        raise ParameterError("step must be positive")
    field = field or normal_variation(chart)

    def deriv(step):
        plus = _energy_value(perturbed_chart(chart, field, step, invariant), resolution, invariant)
        minus = _energy_value(perturbed_chart(chart, field, -step, invariant), resolution, invariant)
        return (plus - minus) / (2.0 * step)

    d1, d2 = deriv(h), deriv(h / 2.0)
    rich = (4.0 * d2 - d1) / 3.0

    rule = quadrature_rule(chart, resolution, use_symmetry=invariant)
    parts: list[float] = []
    chunk = 32 if k == 4 else 512
    for start in range(0, len(rule), chunk):
        sl = slice(start, start + chunk)
        nodes = rule.nodes[sl]
        ob = obstruction(chart, nodes)
        v = jet_map(field, ob.u, 0).value
        dens = np.einsum("nd,nd->n", v, ob.field)
        parts.extend((dens * rule.weights[sl] * ob.geometry.volume_element).tolist())
    ref = -math.fsum(parts)

    e1, e2 = abs(d1 - ref), abs(d2 - ref)
    order = math.log2(e1 / e2) if e1 > 0 and e2 > 0 else float("nan")
    return FirstVariationResult(h, d1, d2, rich, ref, abs(rich - ref), order)


# -- Jacobi spectra -------------------------------------------------------------

SURFACES = ("S4", "S2xS2")
# kernel bookkeeping: (dim K, dim C)
_KERNEL_DIMS = {"S4": (5, 1), "S2xS2": (9, 6)}


def c_j(lam: float) -> float:
    """Eigenvalue of 2 J (J + 4) (J + 6) on a J-eigenspace."""
    # adding 0.0 turns a signed zero into +0.0
    return 2.0 * lam * (lam + 4.0) * (lam + 6.0) + 0.0


@dataclass(frozen=True)
class SpectrumRow:
    lam: int
    mult: int
    cJ: float


@dataclass(frozen=True)
class SpectrumTable:
    surface: str
    rows: tuple[SpectrumRow, ...]
    killing_dim: int
    conformal_dim: int

    def pairs(self) -> list[tuple[int, int]]:
        return [(r.lam, r.mult) for r in self.rows]

    def multiplicity(self, lam: int) -> int:
        return sum(r.mult for r in self.rows if r.lam == lam)

    @property
    def energy_kernel_dim(self) -> int:
        """Total multiplicity of rows with cJ = 0."""
        return sum(r.mult for r in self.rows if r.cJ == 0)

    @property
    def negative_rows(self) -> tuple[SpectrumRow, ...]:
        return tuple(r for r in self.rows if r.cJ < 0)

    def as_dict(self) -> dict:
        return {"surface": self.surface,
                "rows": [{"lambda": r.lam, "mult": r.mult, "cJ": r.cJ} for r in self.rows],
                "killing_dim": self.killing_dim, "conformal_dim": self.conformal_dim,
                "energy_kernel_dim": self.energy_kernel_dim}


def _normalize_surface(surface: str) -> str:
    key = {"s4": "S4", "s2xs2": "S2xS2"}.get(surface.lower())
    if key is None:
        raise ParameterError(f"unknown surface {surface!r}; expected one of {SURFACES}")
    return key


def jacobi_spectrum(surface: str, j_max: int) -> SpectrumTable:
    """Closed-form spectrum of the Jacobi operator from spherical harmonics.

    S4 (totally geodesic in S5): lambda = j(j+3) - 4 with multiplicity
    C(j+4, 4) - C(j+2, 4).  S2xS2 (radii 1/sqrt2): lambda =
    2j(j+1) + 2j'(j'+1) - 8 with multiplicity (2j+1)(2j'+1), aggregated over
    (j, j') with j, j' <= j_max and truncated below the first eigenvalue
    that could receive contributions from larger j.
    """
    key = _normalize_surface(surface)
    if j_max < 2:
        raise ParameterError("j_max must be at least 2")
    mults: dict[int, int] = {}
    if key == "S4":
        for j in range(j_max + 1):
            lam = j * (j + 3) - 4
            mults[lam] = mults.get(lam, 0) + comb(j + 4, 4) - comb(j + 2, 4)
    else:
        for j in range(j_max + 1):
            for jp in range(j_max + 1):
                lam = 2 * j * (j + 1) + 2 * jp * (jp + 1) - 8
                mults[lam] = mults.get(lam, 0) + (2 * j + 1) * (2 * jp + 1)
        # eigenvalues from j = j_max + 1 start here; drop incomplete rows
        cutoff = 2 * (j_max + 1) * (j_max + 2) - 8
        mults = {lam: m for lam, m in mults.items() if lam < cutoff}
    rows = tuple(SpectrumRow(lam, m, c_j(lam)) for lam, m in sorted(mults.items()))
    kd, cd = _KERNEL_DIMS[key]
    return SpectrumTable(key, rows, kd, cd)


@dataclass(frozen=True)
class SecondVariationCheck:
    theta: float
    h: float
    fd_value: float
    operator_value: float

    @property
    def relative_difference(self) -> float:
        return abs(self.fd_value - self.operator_value) / abs(self.operator_value)


def second_variation_family_check(h: float = 1e-3, theta: float = math.pi / 4) -> SecondVariationCheck:
    """Second difference of Ebar along S2(cos t) x S2(sin t) against the operator value.

    Along the family the velocity is the unit normal, which is a J-eigenfield
    with eigenvalue -8, so the operator value is cJ(-8) times the area 4 pi^2.
    """
    fd = second_derivative_theta(theta, h)
    area = (4.0 * math.pi * 0.5) ** 2
    return SecondVariationCheck(theta, h, fd, c_j(-8) * area)
