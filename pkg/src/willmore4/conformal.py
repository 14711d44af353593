"""Ambient conformal maps acting on charts through jet composition."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .charts import (
    Euclidean,
    ImmersionChart,
    _product_domain,
    anchor_ring,
    product_of_spheres,
    quadrature_rule,
)
from .energies import DEFAULT_RESOLUTION, energy
from .errors import MapSingularityError, ParameterError, UnsupportedError
from .jets import Jet

SINGULARITY_MARGIN = 1e-6
KINDS = ("stereographic", "inversion", "dilation", "scale", "translation", "rotation")


@dataclass(frozen=True)
class MapStep:
    """One elementary map.

    kind: stereographic (unit sphere in R^(n+1) to R^n from (0, ..., 0, 1)),
    inversion (center, radius), dilation (factor, coords: scale only those
    coordinates), scale (isotropic factor), translation (vector), rotation
    (orthogonal matrix).
    """

    kind: str
    center: tuple[float, ...] = ()
    radius: float = 1.0
    factor: float = 1.0
    coords: tuple[int, ...] = ()
    matrix: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown map kind {self.kind!r}")
        if self.kind in ("dilation", "scale") and self.factor <= 0:
            raise ParameterError("dilation factor must be positive")
        if self.kind == "inversion" and self.radius <= 0:
            raise ParameterError("inversion radius must be positive")
        if self.kind == "rotation":
            q = np.asarray(self.matrix, dtype=float)
            if q.ndim != 2 or q.shape[0] != q.shape[1] or not np.allclose(q @ q.T, np.eye(len(q)), atol=1e-12):
                raise ParameterError("rotation matrix must be orthogonal")

    @property
    def conformal(self) -> bool:
        return self.kind != "dilation" or self.factor == 1.0

    def _check_dim(self, n: int) -> None:
        need = {"inversion": len(self.center), "translation": len(self.center),
                "rotation": len(self.matrix)}.get(self.kind)
        if need is not None and need != n:
            raise ParameterError(f"{self.kind} acts on R^{need}, chart lives in R^{n}")
        if self.kind == "dilation" and any(not 0 <= c < n for c in self.coords):
            raise ParameterError("dilation coordinates out of range")

    def apply(self, x: list[Jet]) -> list[Jet]:
        n = len(x)
        self._check_dim(n)
        if self.kind == "stereographic":
            # base point (0, ..., 0, 1); its distance is sqrt(2 (1 - x_n)) on the unit sphere
            denom = 1.0 - x[-1]
            if np.min(np.abs(denom.value)) < 0.5 * SINGULARITY_MARGIN ** 2:
                raise MapSingularityError("image passes within 1e-6 of the stereographic base point")
            inv = denom.reciprocal()
            return [c * inv for c in x[:-1]]
        if self.kind == "inversion":
            d = [c - ci for c, ci in zip(x, self.center)]
            r2 = d[0] * d[0]
            for di in d[1:]:
                r2 = r2 + di * di
            if np.min(r2.value) < SINGULARITY_MARGIN ** 2:
                raise MapSingularityError("image passes within 1e-6 of the inversion center")
            s = self.radius ** 2 * r2.reciprocal()
            return [ci + di * s for ci, di in zip(self.center, d)]
        if self.kind == "dilation":
            return [self.factor * c if i in self.coords else c for i, c in enumerate(x)]
        if self.kind == "scale":
            return [self.factor * c for c in x]
        if self.kind == "translation":
            return [c + b for c, b in zip(x, self.center)]
        q = self.matrix
        out = []
        for row in q:
            acc = None
            for qij, c in zip(row, x):
                if qij:
                    acc = qij * c if acc is None else acc + qij * c
            out.append(acc if acc is not None else 0.0 * x[0])
        return out


@dataclass(frozen=True)
class AmbientMap:
    """Composition of elementary maps, applied left to right."""

    steps: tuple[MapStep, ...] = ()

    def then(self, other: "AmbientMap") -> "AmbientMap":
        return AmbientMap(self.steps + other.steps)

    @property
    def conformal(self) -> bool:
        return all(s.conformal for s in self.steps)

    @property
    def has_stereographic(self) -> bool:
        return any(s.kind == "stereographic" for s in self.steps)

    def apply_jets(self, x: list[Jet]) -> list[Jet]:
        for step in self.steps:
            x = step.apply(x)
        return x

    def __call__(self, points) -> np.ndarray:
        """Numeric evaluation on points of shape (N, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        comps = [Jet.constant(pts[:, i], 1, 0) for i in range(pts.shape[1])]
        return np.stack([c.value for c in self.apply_jets(comps)], axis=1)

    # factories
    @staticmethod
    def identity() -> "AmbientMap":
        return AmbientMap()

    @staticmethod
    def stereographic() -> "AmbientMap":
        return AmbientMap((MapStep("stereographic"),))

    @staticmethod
    def inversion(center: Sequence[float], radius: float = 1.0) -> "AmbientMap":
        return AmbientMap((MapStep("inversion", center=tuple(float(c) for c in center), radius=float(radius)),))

    @staticmethod
    def dilation(factor: float, coords: Sequence[int]) -> "AmbientMap":
        return AmbientMap((MapStep("dilation", factor=float(factor), coords=tuple(int(c) for c in coords)),))

    @staticmethod
    def scale(factor: float) -> "AmbientMap":
        return AmbientMap((MapStep("scale", factor=float(factor)),))

    @staticmethod
    def translation(vector: Sequence[float]) -> "AmbientMap":
        return AmbientMap((MapStep("translation", center=tuple(float(c) for c in vector)),))

    @staticmethod
    def rotation(matrix) -> "AmbientMap":
        q = np.asarray(matrix, dtype=float)
        return AmbientMap((MapStep("rotation", matrix=tuple(tuple(r) for r in q.tolist())),))


def _symmetry_survives(steps: Sequence[MapStep], coords: Sequence[int], n: int, tol: float = 1e-12) -> bool:
    """Whether a coordinate-rotation symmetry of the source survives the maps.

    The group is tracked as rotations of span(P) about the point o; isometries
    and isotropic scalings only conjugate it, the other maps must fix it.
    """
    P = np.eye(n)[:, list(coords)]
    o = np.zeros(n)
    for s in steps:
        if s.kind == "rotation":
            q = np.asarray(s.matrix)
            P, o = q @ P, q @ o
        elif s.kind == "translation":
            o = o + np.asarray(s.center)
        elif s.kind == "scale":
            o = s.factor * o
        elif s.kind == "inversion":
            if np.max(np.abs(P.T @ (np.asarray(s.center) - o))) > tol:
                return False
        elif s.kind == "dilation":
            if s.factor == 1.0:
                continue
            inside = np.zeros(len(o), dtype=bool)
            inside[list(s.coords)] = True
            aligned = np.all(np.abs(P[inside]) <= tol) or np.all(np.abs(P[~inside]) <= tol)
            if not aligned or np.max(np.abs(o[inside]), initial=0.0) > tol:
                return False
        else:
            if np.max(np.abs(o)) > tol or np.max(np.abs(P[-1])) > tol:
                return False
            P, o = P[:-1], o[:-1]
    return True


def push_forward_chart(chart: ImmersionChart, amap: AmbientMap) -> ImmersionChart:
    """The chart composed with an ambient map.

    A sphere-background chart admits rotations followed by one stereographic
    step, after which the chart lives in Euclidean space.  Symmetries survive only when
    every step commutes with the corresponding rotations.
    """
    n = chart.ambient_dim
    background = chart.background
    on_sphere = background.is_sphere
    dim = n
    for s in amap.steps:
        s._check_dim(dim)
        if s.kind == "stereographic":
            dim -= 1
            if not on_sphere:
                raise UnsupportedError("stereographic projection applies to sphere-background charts only")
            on_sphere = False
        elif on_sphere and s.kind != "rotation":
            raise UnsupportedError(f"{s.kind} does not preserve the sphere background")
    base = chart.func
    new_bg = Euclidean(n - 1) if amap.has_stereographic else background

    def func(u):
        return amap.apply_jets(base(u))

    syms = tuple((p, c) for p, c in chart.symmetries if _symmetry_survives(amap.steps, c, n))
    # check the image at a coarse node set so singular maps fail early
    amap(chart.points(quadrature_rule(chart, 8).nodes))
    return replace(chart, background=new_bg, func=func, normal_func=None, symmetries=syms)


def conformal_invariance_residual(chart: ImmersionChart, amap: AmbientMap,
                                  resolution: int = DEFAULT_RESOLUTION) -> float:
    """|Ebar(chart) - Ebar(mapped chart)|, each side with its own background formula."""
    if chart.k != 4:
        raise UnsupportedError("conformal invariance check needs k = 4")
    if not amap.conformal:
        raise UnsupportedError("map is not conformal (non-isotropic dilation)")
    image = push_forward_chart(chart, amap)
    e0 = energy(chart, resolution=resolution).Ebar
    e1 = energy(image, resolution=resolution).Ebar
    return abs(e0 - e1)


# -- stereographic correspondence with anchor rings ------------------------------------


def sphere_angles(m: int, x: np.ndarray) -> np.ndarray:
    """Angles of unit vectors x (shape (N, m + 1)) in the chart's sphere parametrization."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if m == 1:
        return np.arctan2(x[:, 1], x[:, 0])[:, None]
    angles = []
    for i in range(m - 1):
        # polar angle i is measured from coordinate m - i within the first m - i + 1 coordinates
        head = np.linalg.norm(x[:, : m - i + 1], axis=1)
        angles.append(np.arccos(np.clip(x[:, m - i] / head, -1.0, 1.0)))
    angles.append(np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * math.pi))
    return np.stack(angles, axis=1)


@dataclass(frozen=True)
class CorrespondenceResult:
    j: int
    k: int
    R: float
    r: float
    sup_distance: float
    sup_tube_residual: float


def anchor_correspondence(j: int, k: int, r1: float, resolution: int = 8) -> CorrespondenceResult:
    """Stereographic image of S^j(r1) x S^k(r2) against the anchor ring T^{j,k}_{1/r1, r2/r1}.

    Each image point is matched with the anchor chart at the corresponding
    parameters (same core angles; tube angles from the Moebius map of the
    second factor), and its distance to the implicit tube is also reported.
    """
    if not 0 < r1 < 1:
        raise ParameterError("r1 must lie in (0, 1)")
    r2 = math.sqrt(1.0 - r1 * r1)
    prod = product_of_spheres((j, k), (r1, r2))
    image = push_forward_chart(prod, AmbientMap.stereographic())
    R, r = 1.0 / r1, r2 / r1
    tube = anchor_ring(j, k, R, r)
    u = quadrature_rule(prod, resolution).nodes
    pts = image.points(u)
    _, offsets = _product_domain((j, k))
    z = prod.points(u)[:, j + 1:] / r2
    zeta = z[:, -1]
    denom = 1.0 - r2 * zeta
    w = (zeta - r2) / denom
    v = r1 * z[:, :-1] / denom[:, None]
    tube_angles = sphere_angles(k, np.column_stack([v, w]))
    u_tube = np.column_stack([u[:, :offsets[1]], tube_angles])
    dist = float(np.max(np.linalg.norm(tube.points(u_tube) - pts, axis=1)))
    y = pts[:, : j + 1]
    rho = np.linalg.norm(y, axis=1)
    tube_res = np.abs(np.hypot(rho - R, np.linalg.norm(pts[:, j + 1:], axis=1)) - r)
    return CorrespondenceResult(j, k, R, r, dist, float(np.max(tube_res)))
