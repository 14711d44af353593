"""Expansion coefficients of the minimal extension and the obstruction field."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets
from .charts import ImmersionChart, quadrature_rule
from .errors import UnsupportedError
from .geometry import GeometryData, JetGeometry, geometry_at

OBSTRUCTION_TERMS = (
    "bilaplacian", "L_dH_dH", "L_L_lapH", "dH2_H", "lap_MH", "div2_LH_H",
    "MMH", "LAA", "LtH2_H", "lap_H2H", "H2_MH", "H4_H",
)


def _raise2(ginv: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Raise both tangent indices of t_ab (..., normal axis optional)."""
    return np.einsum("nac,nbe,nce...->nab...", ginv, ginv, t)


def _M_apply(geom_L: np.ndarray, ginv: np.ndarray, v: np.ndarray) -> np.ndarray:
    """L^ab <L_ab, v> for a normal vector field v."""
    a = np.einsum("nabd,nd->nab", geom_L, v)
    return np.einsum("nabd,nab->nd", geom_L, _raise2(ginv, a))


def expansion_coefficients(geom: GeometryData) -> dict:
    """U2 and (k = 4) U4 as ambient normal vectors.

    Needs ``geom`` computed with derivs >= 2 when k = 4.
    """
    k = geom.k
    if k not in (2, 4):
        raise UnsupportedError(f"expansion coefficients are implemented for k = 2, 4 (got {k})")
    out = {"U2": geom.H / (2.0 * k)}
    if k == 4:
        if geom.lapH is None:
            raise UnsupportedError("U4 needs the Laplacian of H (derivs >= 2)")
        H = geom.H
        bracket = geom.lapH + _M_apply(geom.L, geom.ginv, H) - (2.0 / k ** 2) * geom.H2[:, None] * H
        if geom.background.is_sphere:
            # -tr(P) H + (k - 4) P(H) + 2k P.L with P = g / 2
            bracket = bracket + 2.0 * H
        out["U4"] = bracket / (8.0 * k * (k - 2))
    return out


@dataclass
class ObstructionField:
    """Obstruction field at N nodes with the individual formula terms.

    ``terms`` holds the unnormalized pieces whose sum is ``norm_factor``
    times the field.
    """

    u: np.ndarray
    field: np.ndarray
    terms: dict
    norm_factor: float
    geometry: GeometryData

    @property
    def sup(self) -> float:
        return float(np.max(np.linalg.norm(self.field, axis=1)))

    @property
    def term_scale(self) -> float:
        """Sum over terms of their sup-norms, in the units of the field."""
        return sum(float(np.max(np.linalg.norm(t, axis=1))) for t in self.terms.values()) / self.norm_factor

    @property
    def scaled_sup(self) -> float:
        scale = self.term_scale
        return self.sup / scale if scale > 0 else 0.0


def _k2_terms(geom: GeometryData) -> dict:
    H = geom.H
    return {
        "lapH": geom.lapH,
        "MH": _M_apply(geom.L, geom.ginv, H),
        "H2_H": -0.5 * geom.H2[:, None] * H,
    }


def _k4_terms(jg: JetGeometry) -> tuple[dict, GeometryData]:
    ginv_j = jg.ginv
    H = jg.H
    A = jets.einsum("nabd,nd->nab", jg.L, H)
    A_up = jets.einsum("nac,ncb->nab", jets.einsum("nae,nec->nac", ginv_j, A), ginv_j)
    MH = jets.einsum("nabd,nab->nd", jg.L, A_up)
    H2 = jets.einsum("nd,nd->n", H, H)
    dH = jg.nabla(H)
    lapH = jg.trace_first_pair(jg.nabla(dH))
    bilap = jg.laplacian(lapH)
    lap_MH = jg.laplacian(MH)
    T = jets.einsum("nab,nd->nabd", A, H)
    div2 = jg.div2(T)
    lap_H2H = jg.laplacian(H * H2.reshape(H2.shape[0], 1))

    L = jg.L.value
    g = jg.g.value
    ginv = ginv_j.value
    Hv = H.value
    Lo = L - np.einsum("nab,nd->nabd", g, Hv) / 4.0
    geom = GeometryData(
        background=jg.background, k=4, u=jg.u, x=jg.x.value, dx=jg.dx.value, g=g, ginv=ginv,
        christoffel=jg.gamma.value, PN=jg.PN.value, L=L, H=Hv, Lo=Lo,
        normal=jg.chart.normal(jg.u) if jg.chart.normal_func is not None else None,
        dH=dH.value, lapH=lapH.value, bilapH=bilap.value,
    )
    L_up = _raise2(ginv, L)
    dHv = dH.value
    dHdH = np.einsum("nad,nbd->nab", dHv, dHv)
    Av = A.value
    A_upv = A_up.value
    MHv = MH.value
    H2v = H2.value[:, None]
    B = np.einsum("nab,nbc,ncd->nad", A_upv, g, A_upv)
    LtH2 = np.einsum("nab,nab->n", Av, A_upv)[:, None]
    terms = {
        "bilaplacian": 2.0 * bilap.value,
        "L_dH_dH": -2.0 * np.einsum("nabd,nab->nd", L_up, dHdH),
        "L_L_lapH": 2.0 * _M_apply(L, ginv, lapH.value),
        "dH2_H": geom.dH2[:, None] * Hv,
        "lap_MH": 2.0 * lap_MH.value,
        "div2_LH_H": 2.0 * div2.value,
        "MMH": 2.0 * _M_apply(L, ginv, MHv),
        "LAA": 2.0 * np.einsum("nacd,nac->nd", L, B),
        "LtH2_H": -LtH2 * Hv,
        "lap_H2H": -1.75 * lap_H2H.value,
        "H2_MH": -1.75 * H2v * MHv,
        "H4_H": (7.0 / 16.0) * H2v ** 2 * Hv,
    }
    return terms, geom


def obstruction(chart: ImmersionChart, u, k: int | None = None) -> ObstructionField:
    """Obstruction field at parameter points.

    k = 2: both backgrounds.  k = 4: Euclidean background only (no formula
    for the sphere background is available).
    """
    k = chart.k if k is None else k
    if k != chart.k:
        raise UnsupportedError(f"chart has k = {chart.k}, requested k = {k}")
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if k == 2:
        geom = geometry_at(chart, u, derivs=2)
        terms = _k2_terms(geom)
        factor = 4.0
    elif k == 4:
        if chart.background.is_sphere:
            raise UnsupportedError("k = 4 obstruction is available for Euclidean backgrounds only")
        terms, geom = _k4_terms(JetGeometry(chart, u, 6))
        factor = 128.0
    else:
        raise UnsupportedError(f"obstruction not available for k = {k}")
    total = sum(terms.values())
    return ObstructionField(u=u, field=total / factor, terms=terms, norm_factor=factor, geometry=geom)


def obstruction_nodes(chart: ImmersionChart, resolution: int = 12) -> np.ndarray:
    """A pole-free node set covering each orbit type of the chart once."""
    return quadrature_rule(chart, resolution, use_symmetry=True).nodes


@dataclass(frozen=True)
class ObstructionNorms:
    sup: float
    l2: float
    term_scale: float
    scaled_sup: float
    nodes: int


def obstruction_norms(chart: ImmersionChart, resolution: int = 12, chunk: int = 16) -> ObstructionNorms:
    """Sup-norm, L2 norm (by quadrature) and term-relative sup of the obstruction."""
    rule = quadrature_rule(chart, resolution, use_symmetry=True)
    sups, scale_terms, l2parts = [], {}, []
    for start in range(0, len(rule), chunk):
        sl = slice(start, start + chunk)
        ob = obstruction(chart, rule.nodes[sl])
        sups.append(ob.sup)
        for name, t in ob.terms.items():
            scale_terms[name] = max(scale_terms.get(name, 0.0), float(np.max(np.linalg.norm(t, axis=1))))
        mag2 = np.einsum("nd,nd->n", ob.field, ob.field)
        l2parts.extend((mag2 * rule.weights[sl] * ob.geometry.volume_element).tolist())
    sup = max(sups)
    scale = sum(scale_terms.values()) / (128.0 if chart.k == 4 else 4.0)
    return ObstructionNorms(sup, math.sqrt(max(math.fsum(l2parts), 0.0)), scale,
                            sup / scale if scale > 0 else 0.0, len(rule))


@dataclass(frozen=True)
class LeadingTermCheck:
    eps: float
    obstruction_residual: float
    obstruction_residual_half: float
    expansion_residual: float
    expansion_residual_half: float

    @property
    def obstruction_ratio(self) -> float:
        return self.obstruction_residual / self.obstruction_residual_half

    @property
    def expansion_ratio(self) -> float:
        return self.expansion_residual / self.expansion_residual_half


def _graph_residuals(chart: ImmersionChart, u: np.ndarray, eps: float) -> tuple[float, float]:
    ob = obstruction(chart, u)
    geom = ob.geometry
    if eps == 0.0:
        return float(np.max(np.abs(ob.field))), 0.0
    lead = geom.bilapH / 64.0
    r_ob = float(np.max(np.linalg.norm(ob.field - lead, axis=1))) / eps
    u4 = expansion_coefficients(geom)["U4"]
    r_u = float(np.max(np.linalg.norm(u4 - geom.lapH / 64.0, axis=1))) / eps
    return r_ob, r_u


def leading_term_check(chart: ImmersionChart, eps: float | None = None, nodes: int = 16,
                       seed: int = 0) -> LeadingTermCheck:
    """Compare the obstruction with Delta^2 H / 64 and U4 with Delta H / 64 on a graph.

    Residuals are max-node norms divided by eps, at eps and eps / 2, so the
    caller can check their quadratic decay.
    """
    if chart.family != "graph":
        raise UnsupportedError("leading-term check needs the periodic graph family")
    if chart.k != 4:
        raise UnsupportedError("leading-term check is implemented for k = 4")
    from .charts import periodic_graph

    eps = chart.params["eps"] if eps is None else eps
    phi = chart.params["phi"]
    u = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=(nodes, 4))
    r1, u1 = _graph_residuals(periodic_graph(eps, phi), u, eps)
    r2, u2 = _graph_residuals(periodic_graph(eps / 2, phi), u, eps / 2)
    return LeadingTermCheck(eps, r1, r2, u1, u2)
