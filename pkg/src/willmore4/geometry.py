"""Frame-free pointwise submanifold geometry from chart jets.

Normal-valued tensors are stored as ambient vectors on the last axis, with
the node batch first and covariant tangent indices in between, e.g. the
second fundamental form has shape (N, k, k, D).  All normal calculus goes
through the normal projector; no normal frames are ever chosen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .charts import Background, ImmersionChart, jet_eval
from .errors import DegeneracyError, UnsupportedError, UnsupportedOrderError
from .jets import Jet

DEGENERACY_CONDITION = 1e12
_TAN = "ijklmopq"

# derivative depth on H -> required jet order of the immersion
DEPTH_ORDER = {0: 2, 1: 3, 2: 4, 4: 6}


class JetGeometry:
    """Geometric jets of an immersion at a batch of nodes.

    Everything is a :class:`Jet`; orders drop automatically as derivatives
    are taken, so a quantity computed from an order-q immersion jet is
    available with q - 2 orders of Taylor data left for further
    differentiation.
    """

    def __init__(self, chart: ImmersionChart, u, order: int):
        if order < 2:
            raise UnsupportedOrderError("second fundamental form needs a jet of order >= 2")
        self.chart = chart
        self.background = chart.background
        self.k = chart.k
        self.u = np.atleast_2d(np.asarray(u, dtype=float))
        x = jet_eval(chart, self.u, order)
        self.x = x
        dx = x.gradient(axis=1)  # (N, a, D)
        self.dx = dx
        ddx = dx.gradient(axis=1)  # (N, b, a, D)
        self.ddx = ddx
        g = jets.einsum("nad,nbd->nab", dx, dx)
        _check_degenerate(g.value, self.u)
        self.g = g
        self.ginv = jets.inv(g)
        raised = jets.einsum("nab,nbd->nad", self.ginv, dx)
        tangential = jets.einsum("nad,nae->nde", dx, raised)
        dim = x.shape[-1]
        eye = np.broadcast_to(np.eye(dim), (x.shape[0], dim, dim))
        pn = -tangential + eye
        if self.background.is_sphere:
            r2 = jets.einsum("nd,nd->n", x, x)
            radial = jets.einsum("nd,ne->nde", x, x)
            inv_r2 = r2.reciprocal().reshape(x.shape[0], 1, 1)
            pn = pn - radial * inv_r2
        self.PN = pn
        self.L = jets.einsum("nde,nabe->nabd", pn, ddx)
        self.H = jets.einsum("nab,nabd->nd", self.ginv, self.L)
        # Gamma^c_ab = g^cd <x_ab, x_d>; intrinsic, so valid in both backgrounds
        low = jets.einsum("nabe,nde->nabd", ddx, dx)
        self.gamma = jets.einsum("ncd,nabd->ncab", self.ginv, low)

    def project(self, t: Jet) -> Jet:
        """Apply the normal projector on the last axis."""
        m = len(t.shape) - 2
        idx = _TAN[:m]
        return jets.einsum(f"nde,n{idx}e->n{idx}d", self.PN, t)

    def nabla(self, t: Jet) -> Jet:
        """Covariant derivative of a normal-valued covariant tensor.

        Input shape (N, a1..am, D); output (N, b, a1..am, D) with the new
        derivative index first.
        """
        m = len(t.shape) - 2
        idx = _TAN[:m]
        out = self.project(t.gradient(axis=1))
        for i in range(m):
            src = idx[:i] + "c" + idx[i + 1:]
            corr = jets.einsum(f"ncb{idx[i]},n{src}d->nb{idx}d", self.gamma, t)
            out = out - corr
        return out

    def trace_first_pair(self, t: Jet) -> Jet:
        """Contract the first two tangent indices with the inverse metric."""
        m = len(t.shape) - 2
        rest = _TAN[2:m]
        return jets.einsum(f"nij,nij{rest}d->n{rest}d", self.ginv, t)

    def laplacian(self, t: Jet) -> Jet:
        """Rough Laplacian g^ab (nabla nabla t)_ab of a normal-valued tensor."""
        return self.trace_first_pair(self.nabla(self.nabla(t)))

    def div2(self, t: Jet) -> Jet:
        """nabla_a nabla_b t^{ab} for a normal-valued (0,2) tensor t_ab."""
        return _double_trace(self.ginv, self.nabla(self.nabla(t)))


def _double_trace(ginv: Jet, nn: Jet) -> Jet:
    # g^{ca} g^{eb} (nabla_c nabla_e t)_{ab}
    half = jets.einsum("nca,nceabd->nebd", ginv, nn)
    return jets.einsum("neb,nebd->nd", ginv, half)


def _check_degenerate(g: np.ndarray, u: np.ndarray) -> None:
    d = np.sqrt(np.einsum("naa->na", g))
    if np.any(d <= 0) or not np.all(np.isfinite(g)):
        bad = int(np.argmin(d.min(axis=1)))
        raise DegeneracyError(f"degenerate metric at node {u[bad].tolist()}")
    normed = g / (d[:, :, None] * d[:, None, :])
    cond = np.linalg.cond(normed)
    if np.any(cond > DEGENERACY_CONDITION):
        bad = int(np.argmax(cond))
        raise DegeneracyError(f"degenerate metric (condition {cond[bad]:.3g}) at node {u[bad].tolist()}")


@dataclass
class GeometryData:
    """Pointwise geometric data at N nodes (plain arrays, batch axis first)."""

    background: Background
    k: int
    u: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    christoffel: np.ndarray
    PN: np.ndarray
    L: np.ndarray
    H: np.ndarray
    Lo: np.ndarray
    normal: np.ndarray | None = None
    dH: np.ndarray | None = None
    lapH: np.ndarray | None = None
    bilapH: np.ndarray | None = None
    jet: JetGeometry | None = None

    @property
    def volume_element(self) -> np.ndarray:
        return np.sqrt(np.linalg.det(self.g))

    @property
    def unit_normal(self) -> np.ndarray:
        """The family normal if known, else a local unit normal (hypersurfaces only)."""
        if self.normal is not None:
            return self.normal
        codim = self.x.shape[1] - self.k - (1 if self.background.is_sphere else 0)
        if codim != 1:
            raise UnsupportedError("scalar normal quantities need a hypersurface")
        cols = np.linalg.norm(self.PN, axis=1)
        j = np.argmax(cols, axis=1)
        v = self.PN[np.arange(len(j)), :, j]
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    @property
    def H_scalar(self) -> np.ndarray:
        return np.einsum("nd,nd->n", self.H, self.unit_normal)

    @property
    def H2(self) -> np.ndarray:
        return np.einsum("nd,nd->n", self.H, self.H)

    @property
    def LH(self) -> np.ndarray:
        """A_ab = <L_ab, H>."""
        return np.einsum("nabd,nd->nab", self.L, self.H)

    @property
    def LtH2(self) -> np.ndarray:
        a = self.LH
        return np.einsum("nab,nac,nbd,ncd->n", a, self.ginv, self.ginv, a)

    @property
    def L2(self) -> np.ndarray:
        return np.einsum("nabd,nac,nbe,nced->n", self.L, self.ginv, self.ginv, self.L)

    @property
    def Lo2(self) -> np.ndarray:
        return np.einsum("nabd,nac,nbe,nced->n", self.Lo, self.ginv, self.ginv, self.Lo)

    @property
    def dH2(self) -> np.ndarray:
        if self.dH is None:
            raise UnsupportedOrderError("gradient of H not computed")
        return np.einsum("nad,nab,nbd->n", self.dH, self.ginv, self.dH)

    @property
    def M(self) -> np.ndarray:
        """Ambient matrix L^ab (x) L_ab, so that M v = L^ab <L_ab, v>."""
        up = np.einsum("nac,nbe,nced->nabd", self.ginv, self.ginv, self.L)
        return np.einsum("nabd,nabe->nde", up, self.L)

    def scalar_form(self, t: np.ndarray) -> np.ndarray:
        """Component of a normal-valued tensor along the unit normal."""
        return np.einsum("n...d,nd->n...", t, self.unit_normal)


def geometry_at(chart: ImmersionChart, u, background: Background | None = None,
                derivs: int = 0, keep_jets: bool = False) -> GeometryData:
    """Geometry at parameter points.

    ``derivs`` selects how many covariant derivatives of H are wanted:
    0 (base data), 1 (nabla H), 2 (also Delta H) or 4 (also Delta^2 H).
    """
    if background is not None and background != chart.background:
        raise UnsupportedError(f"chart lives in {chart.background}, not {background}")
    if derivs not in DEPTH_ORDER:
        raise UnsupportedOrderError(f"derivative depth {derivs} not supported")
    jg = JetGeometry(chart, u, DEPTH_ORDER[derivs])
    k = chart.k
    L = jg.L.value
    H = jg.H.value
    g = jg.g.value
    Lo = L - np.einsum("nab,nd->nabd", g, H) / k
    data = GeometryData(
        background=chart.background, k=k, u=jg.u, x=jg.x.value, dx=jg.dx.value, g=g,
        ginv=jg.ginv.value, christoffel=jg.gamma.value, PN=jg.PN.value, L=L, H=H, Lo=Lo,
        normal=chart.normal(jg.u) if chart.normal_func is not None else None,
        jet=jg if keep_jets else None,
    )
    if derivs >= 1:
        dH = jg.nabla(jg.H)
        data.dH = dH.value
    if derivs >= 2:
        lap = jg.trace_first_pair(jg.nabla(dH))
        data.lapH = lap.value
    if derivs >= 4:
        data.bilapH = jg.laplacian(lap).value
    return data


def normal_derivatives(chart: ImmersionChart, u, background: Background | None = None,
                       depth: int = 4) -> dict:
    """nabla H, Delta H and (depth 4) Delta^2 H at the given nodes."""
    geom = geometry_at(chart, u, background, derivs=depth)
    out = {"dH": geom.dH}
    if depth >= 2:
        out["lapH"] = geom.lapH
    if depth >= 4:
        out["bilapH"] = geom.bilapH
    return out


# -- intrinsic curvature --------------------------------------------------------


@dataclass
class IntrinsicCurvature:
    """Intrinsic curvature at N nodes, all tensors in an orthonormal tangent frame."""

    riemann: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    schouten: np.ndarray
    weyl: np.ndarray
    sigma2: np.ndarray
    weyl2: np.ndarray
    Lo2: np.ndarray
    Lo4: np.ndarray
    trLo3: np.ndarray | None
    trLo4: np.ndarray | None
    PLoLo: np.ndarray | None


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """F with F g F^T = I (inverse Cholesky factor), batched."""
    c = np.linalg.cholesky(g)
    return np.linalg.inv(c)


def intrinsic_curvature(geom: GeometryData) -> IntrinsicCurvature:
    """Curvature of the induced metric via the Gauss equation (k = 4)."""
    if geom.k != 4:
        raise UnsupportedError("intrinsic curvature is implemented for k = 4 only")
    f = orthonormal_frame(geom.g)
    L = np.einsum("nia,njb,nabd->nijd", f, f, geom.L)
    Lo = np.einsum("nia,njb,nabd->nijd", f, f, geom.Lo)
    k = geom.k
    eye = np.eye(k)
    riem = np.einsum("nacd,nbed->nabce", L, L) - np.einsum("naed,nbcd->nabce", L, L)
    if geom.background.is_sphere:
        riem = riem + (np.einsum("ac,be->abce", eye, eye) - np.einsum("ae,bc->abce", eye, eye))
    ric = np.einsum("nabad->nbd", riem)
    scal = np.einsum("naa->n", ric)
    P = (ric - scal[:, None, None] * eye / (2 * (k - 1))) / (k - 2)
    pg = (np.einsum("nac,be->nabce", P, eye) + np.einsum("nbe,ac->nabce", P, eye)
          - np.einsum("nae,bc->nabce", P, eye) - np.einsum("nbc,ae->nabce", P, eye))
    weyl = riem - pg
    trP = np.einsum("naa->n", P)
    sigma2 = 0.5 * (trP ** 2 - np.einsum("nab,nab->n", P, P))
    weyl2 = np.einsum("nabce,nabce->n", weyl, weyl)
    Lo2 = np.einsum("nabd,nabd->n", Lo, Lo)
    trLo3 = trLo4 = PLoLo = None
    codim = geom.x.shape[1] - k - (1 if geom.background.is_sphere else 0)
    if codim == 1:
        S = np.einsum("nabd,nd->nab", Lo, geom.unit_normal)
        S2 = S @ S
        trLo3 = np.einsum("nab,nba->n", S2, S)
        trLo4 = np.einsum("nab,nba->n", S2, S2)
        PLoLo = np.einsum("nab,nab->n", P, S2)
    return IntrinsicCurvature(riem, ric, scal, P, weyl, sigma2, weyl2, Lo2, Lo2 ** 2,
                              trLo3, trLo4, PLoLo)
