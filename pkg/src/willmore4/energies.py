"""Energy densities, quadrature totals, renormalized-area coefficients and related energies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .charts import Background, ImmersionChart, QuadratureRule, quadrature_rule
from .errors import UnsupportedError
from .geometry import GeometryData, geometry_at, intrinsic_curvature

DEFAULT_RESOLUTION = 32
# nodes per geometry batch, keyed by the derivative depth on H
CHUNK = {0: 4096, 1: 2048, 2: 512, 4: 32}


@dataclass(frozen=True)
class EnergyReport:
    family: str
    params: dict
    background: str
    k: int
    E: float
    Ebar: float | None
    area: float
    resolution: int
    est_error: float

    def as_dict(self) -> dict:
        params = {key: (list(v) if isinstance(v, tuple) else v) for key, v in self.params.items()
                  if isinstance(v, (int, float, tuple))}
        return {"family": self.family, "params": params, "background": self.background,
                "resolution": self.resolution, "E": self.E, "Ebar": self.Ebar,
                "area": self.area, "est_error": self.est_error}


def _check_k(k: int) -> None:
    if k not in (2, 4):
        raise UnsupportedError(f"energies are implemented for k = 2 and k = 4, not {k}")


def energy_density(geom: GeometryData, background: Background | None = None, k: int | None = None) -> np.ndarray:
    """Pointwise energy integrand a^(k) (so E is its integral against area)."""
    background = background or geom.background
    k = k if k is not None else geom.k
    _check_k(k)
    if k != geom.k:
        raise UnsupportedError(f"geometry has k = {geom.k}, requested k = {k}")
    H2 = geom.H2
    if k == 2:
        trace_p = 1.0 if background.is_sphere else 0.0
        return -(H2 + 4.0 * trace_p) / 8.0
    dens = geom.dH2 - geom.LtH2 + (7.0 / 16.0) * H2 ** 2
    if background.is_sphere:
        dens = dens + 6.0 * H2 + 48.0
    return dens / 128.0


def area_coefficients(geom: GeometryData, background: Background | None = None) -> dict:
    """Renormalized-area coefficients a2 and (k = 4) a4 at the nodes."""
    background = background or geom.background
    k = geom.k
    _check_k(k)
    a2 = -((k - 1) / (2.0 * k * k)) * geom.H2
    if background.is_sphere:
        a2 = a2 - k / 4.0
    out = {"a2": a2}
    if k == 4:
        out["a4"] = energy_density(geom, background, 4)
    return out


def _depth(k: int) -> int:
    return 1 if k == 4 else 0


def integrate(chart: ImmersionChart, integrand: Callable[[GeometryData], np.ndarray | tuple],
              resolution: int = DEFAULT_RESOLUTION, derivs: int = 0,
              rule: QuadratureRule | None = None, use_symmetry: bool = True) -> np.ndarray:
    """Integrals over the chart of one or more scalar integrands against da.

    ``integrand`` returns an array of shape (N,) or (m, N); the result has
    shape (m,).  Sums use exactly rounded accumulation, so they do not
    depend on node batching.
    """
    rule = rule or quadrature_rule(chart, resolution, use_symmetry=use_symmetry)
    chunk = CHUNK[derivs]
    parts: list[list[float]] = []
    for start in range(0, len(rule), chunk):
        sl = slice(start, start + chunk)
        geom = geometry_at(chart, rule.nodes[sl], derivs=derivs)
        vals = np.atleast_2d(np.asarray(integrand(geom), dtype=float))
        contrib = vals * (rule.weights[sl] * geom.volume_element)
        if not parts:
            parts = [[] for _ in range(vals.shape[0])]
        for i, row in enumerate(contrib):
            parts[i].extend(row.tolist())
    return np.array([math.fsum(p) for p in parts])


def _energy_area(chart: ImmersionChart, resolution: int, use_symmetry: bool) -> tuple[float, float]:
    k = chart.k

    def both(geom):
        return np.stack([energy_density(geom, chart.background, k), np.ones(len(geom.u))])

    e, a = integrate(chart, both, resolution, derivs=_depth(k), use_symmetry=use_symmetry)
    return float(e), float(a)


def _require_compact(chart: ImmersionChart) -> None:
    if not chart.compact:
        raise UnsupportedError(f"{chart.family} is not compact; only pointwise quantities are available")


def energy(chart: ImmersionChart, background: Background | None = None,
           resolution: int = DEFAULT_RESOLUTION, use_symmetry: bool = True) -> EnergyReport:
    """Total energy by quadrature, with a resolution-halving error estimate."""
    if background is not None and background != chart.background:
        raise UnsupportedError(f"chart lives in {chart.background}, not {background}")
    _require_compact(chart)
    _check_k(chart.k)
    E, area = _energy_area(chart, resolution, use_symmetry)
    half = max(4, resolution // 2)
    E_half, _ = _energy_area(chart, half, use_symmetry)
    return EnergyReport(
        family=chart.family, params=dict(chart.params), background=chart.background.kind, k=chart.k,
        E=E, Ebar=128.0 * E if chart.k == 4 else None, area=area, resolution=resolution,
        est_error=abs(E - E_half),
    )


def energy_bar(chart: ImmersionChart, resolution: int = DEFAULT_RESOLUTION) -> float:
    """128 E without the error estimate (one quadrature pass)."""
    _require_compact(chart)
    if chart.k != 4:
        raise UnsupportedError("the normalized energy is defined for k = 4")
    return 128.0 * _energy_area(chart, resolution, True)[0]


def _lo_t_h2(geom: GeometryData) -> np.ndarray:
    a = np.einsum("nabd,nd->nab", geom.Lo, geom.H)
    return np.einsum("nab,nac,nbd,ncd->n", a, geom.ginv, geom.ginv, a)


def tracefree_density_bar(geom: GeometryData) -> np.ndarray:
    """128 a^(4) rewritten through the trace-free second fundamental form."""
    H2 = geom.H2
    dens = geom.dH2 - _lo_t_h2(geom) + (3.0 / 16.0) * H2 ** 2
    if geom.background.is_sphere:
        dens = dens + 6.0 * H2 + 48.0
    return dens


@dataclass(frozen=True)
class ModifiedEnergy:
    value: float
    Ebar: float
    Ebar_tracefree: float
    Lo4: float
    beta: float


def modified_energy(chart: ImmersionChart, beta: float, resolution: int = DEFAULT_RESOLUTION) -> ModifiedEnergy:
    """Ebar + beta * integral of |Lo|^4, plus the trace-free re-expression of Ebar."""
    _require_compact(chart)
    if chart.k != 4:
        raise UnsupportedError("modified energies are defined for k = 4")

    def f(geom):
        return np.stack([128.0 * energy_density(geom), tracefree_density_bar(geom), geom.Lo2 ** 2])

    ebar, ebar_tf, lo4 = integrate(chart, f, resolution, derivs=1)
    return ModifiedEnergy(float(ebar + beta * lo4), float(ebar), float(ebar_tf), float(lo4), beta)


def _require_hypersurface_r5(chart: ImmersionChart) -> None:
    if chart.k != 4 or chart.background.is_sphere or chart.background.n != 5:
        raise UnsupportedError("needs a 4-dimensional hypersurface of Euclidean R^5")


@dataclass(frozen=True)
class VyatkinReport:
    V: float
    Ebar: float
    chi: int
    relation_rhs: float
    relation_residual: float
    gauss_relation_rhs: float
    gauss_relation_residual: float
    vterms_residual: float
    weyl_identity_residual: float
    sigma2_identity_residual: float


def vyatkin_energy(chart: ImmersionChart, resolution: int = DEFAULT_RESOLUTION) -> VyatkinReport:
    """Vyatkin's energy from its integrated form, with P from the Gauss equation.

    The relation to Ebar and the polynomial identities for |W|^2, sigma_2
    and the curvature terms are evaluated and reported as residuals
    (integrated over the chart); they are not asserted here.

    ``relation_*`` uses the published form
    V = Ebar/4 + 8 pi^2 chi + int(2 tr Lo^4 - 11/12 |Lo|^4).  A direct Gauss
    equation evaluation gives instead the identity
    -8 sigma_2 = tr Lo^4 - |Lo|^4/3 - H tr Lo^3 + 3/8 H^2 |Lo|^2 - 3/64 H^4,
    which leads to V = Ebar/4 - 16 pi^2 chi + int(5/6 |Lo|^4 - tr Lo^4);
    that variant is reported as ``gauss_relation_*``.
    """
    _require_hypersurface_r5(chart)
    _require_compact(chart)
    if chart.euler_char is None:
        raise UnsupportedError(f"Euler characteristic of {chart.family} unknown")

    def f(geom):
        cur = intrinsic_curvature(geom)
        trP = np.einsum("naa->n", cur.schouten)
        curv_terms = -4.0 * cur.PLoLo + 2.0 * trP * cur.Lo2
        V = 0.25 * geom.dH2 + curv_terms
        H = geom.H_scalar
        H2 = H * H
        lo2, lo4 = cur.Lo2, cur.Lo4
        vterms = 2 * cur.trLo4 - (2.0 / 3.0) * lo4 - H * cur.trLo3 + H2 * lo2 / 8.0
        weyl = (7.0 / 3.0) * lo4 - 4 * cur.trLo4
        sig = (cur.trLo4 - lo4 / 3.0 - H * cur.trLo3 + 3.0 / 8.0 * H2 * lo2 - 3.0 / 64.0 * H2 * H2) / 4.0
        extra = 2 * cur.trLo4 - (11.0 / 12.0) * lo4
        extra_gauss = (5.0 / 6.0) * lo4 - cur.trLo4
        return np.stack([V, 128.0 * energy_density(geom), extra, extra_gauss,
                         np.abs(curv_terms - vterms), np.abs(cur.weyl2 - weyl), np.abs(cur.sigma2 - sig)])

    V, ebar, extra, extra_gauss, r_vt, r_w, r_s = integrate(chart, f, resolution, derivs=1)
    chi = chart.euler_char
    rhs = 0.25 * ebar + 8 * math.pi ** 2 * chi + extra
    rhs_gauss = 0.25 * ebar - 16 * math.pi ** 2 * chi + extra_gauss
    return VyatkinReport(float(V), float(ebar), chi, float(rhs), float(V - rhs), float(rhs_gauss),
                         float(V - rhs_gauss), float(r_vt), float(r_w), float(r_s))


def gauss_bonnet_integral(chart: ImmersionChart, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Integral of |W|^2 + 16 sigma_2(P) over the chart."""
    if chart.k != 4:
        raise UnsupportedError("Chern-Gauss-Bonnet check needs k = 4")
    _require_compact(chart)

    def f(geom):
        cur = intrinsic_curvature(geom)
        return cur.weyl2 + 16.0 * cur.sigma2

    return float(integrate(chart, f, resolution, derivs=0)[0])


def gauss_bonnet_residual(chart: ImmersionChart, resolution: int = DEFAULT_RESOLUTION) -> float:
    """|integral of (|W|^2 + 16 sigma_2) - 32 pi^2 chi|."""
    if chart.euler_char is None:
        raise UnsupportedError(f"Euler characteristic of {chart.family} unknown")
    return abs(gauss_bonnet_integral(chart, resolution) - 32 * math.pi ** 2 * chart.euler_char)
