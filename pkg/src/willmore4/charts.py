"""Parametrized immersions, the built-in families, and their quadrature rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from . import jets
from .errors import DomainError, ParameterError, UnsupportedOrderError
from .jets import Jet

TWO_PI = 2.0 * math.pi

ComponentFunc = Callable[[list[Jet]], list[Jet]]


@dataclass(frozen=True)
class Background:
    """Ambient space: Euclidean R^n or the unit round sphere S^n inside R^(n+1)."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise ParameterError(f"unknown background kind {self.kind!r}")

    @property
    def ambient_dim(self) -> int:
        """Number of Cartesian coordinates carrying the immersion."""
        return self.n + 1 if self.kind == "sphere" else self.n

    @property
    def schouten(self) -> float:
        return 0.5 if self.kind == "sphere" else 0.0

    @property
    def is_sphere(self) -> bool:
        return self.kind == "sphere"


def Euclidean(n: int) -> Background:
    return Background("euclidean", n)


def Sphere(n: int) -> Background:
    return Background("sphere", n)


@dataclass(frozen=True)
class ChartDomain:
    """Parameter box.

    ``polar_power[i] = m > 0`` marks a polar angle on (0, pi) whose volume
    element carries a factor sin^m; such parameters get Gauss-Jacobi nodes
    in cos(phi).  Periodic parameters span a full 2*pi.
    """

    intervals: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]
    polar_power: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.polar_power:
            object.__setattr__(self, "polar_power", (0,) * len(self.intervals))
        for (lo, hi), per in zip(self.intervals, self.periodic):
            if not lo < hi:
                raise ParameterError(f"empty interval ({lo}, {hi})")
            if per and abs((hi - lo) - TWO_PI) > 1e-12:
                raise ParameterError("periodic parameters must span 2*pi")

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.intervals)


@dataclass(frozen=True)
class ImmersionChart:
    """A parametrized immersion whose components are built from jet arithmetic.

    ``func`` maps the list of coordinate jets to the list of ambient
    coordinate jets.  ``symmetries`` lists (parameter, coords) pairs: the
    parameter together with all later angles of the same sphere factor
    parametrizes an orbit of the rotation group of the listed ambient
    coordinates, which maps the image to itself.  Scalar invariants do not
    depend on such a parameter, and the volume element depends on it only
    through the sphere's own sin^m factor.
    """

    family: str
    params: dict
    k: int
    background: Background
    domain: ChartDomain
    func: ComponentFunc
    normal_func: ComponentFunc | None = None
    euler_char: int | None = None
    symmetries: tuple[tuple[int, tuple[int, ...]], ...] = ()
    compact: bool = True

    @property
    def ambient_dim(self) -> int:
        return self.background.ambient_dim

    def points(self, u) -> np.ndarray:
        """Positions at parameter points, shape (N, ambient_dim)."""
        return jet_eval(self, u, 0).value

    def normal(self, u) -> np.ndarray | None:
        """The family's documented unit normal (hypersurfaces only)."""
        if self.normal_func is None:
            return None
        u = _check_point(self, u)
        return jets.jet_map(self.normal_func, u, 1).value

    def with_func(self, func: ComponentFunc, **changes) -> "ImmersionChart":
        return replace(self, func=func, **changes)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    def __len__(self) -> int:
        return len(self.weights)


# -- evaluation ------------------------------------------------------------


def _check_point(chart: ImmersionChart, u) -> np.ndarray:
    u = np.atleast_2d(np.asarray(u, dtype=float)).copy()
    if u.shape[1] != chart.k:
        raise DomainError(f"expected {chart.k} parameters, got {u.shape[1]}")
    for i, ((lo, hi), per) in enumerate(zip(chart.domain.intervals, chart.domain.periodic)):
        if per:
            u[:, i] = lo + np.mod(u[:, i] - lo, hi - lo)
        elif np.any(u[:, i] < lo) or np.any(u[:, i] > hi):
            raise DomainError(f"parameter {i} outside [{lo}, {hi}]")
    return u


def jet_eval(chart: ImmersionChart, u, order: int) -> Jet:
    """Jet of the immersion at one or more parameter points.

    Returns a jet of shape (N, ambient_dim) whose coefficients are the exact
    partial derivatives divided by the multi-index factorials.
    """
    if order > jets.MAX_ORDER:
        raise UnsupportedOrderError(f"order {order} > {jets.MAX_ORDER}")
    u = _check_point(chart, u)
    return jets.jet_map(chart.func, u, order)


# -- sphere parametrizations ------------------------------------------------


def _sphere_components(m: int, ang: Sequence[Jet]) -> list[Jet]:
    """Unit S^m in R^(m+1); angles are (polar..., azimuth), last coordinate cos(first polar)."""
    if m == 1:
        (t,) = ang
        return [t.cos(), t.sin()]
    *polar, t = ang
    s = [p.sin() for p in polar]
    c = [p.cos() for p in polar]
    comps = []
    # innermost: product of all sines times (cos t, sin t)
    prod = s[0]
    for si in s[1:]:
        prod = prod * si
    comps.append(prod * t.cos())
    comps.append(prod * t.sin())
    for i in range(len(polar) - 1, -1, -1):
        factor = c[i]
        for si in s[:i]:
            factor = factor * si
        comps.append(factor)
    return comps


def _sphere_symmetries(m: int, param_offset: int, coord_offset: int) -> list:
    """Symmetry data of one sphere factor; first entry is the outermost angle."""
    if m == 1:
        return [(param_offset, (coord_offset, coord_offset + 1))]
    out = []
    for p in range(m - 1):
        out.append((param_offset + p, tuple(range(coord_offset, coord_offset + m + 1 - p))))
    out.append((param_offset + m - 1, (coord_offset, coord_offset + 1)))
    return out


def _sine_power_integral(m: int) -> float:
    """Integral of sin^m over (0, pi)."""
    return math.sqrt(math.pi) * math.gamma(0.5 * (m + 1)) / math.gamma(0.5 * m + 1)


def _sphere_domain(m: int):
    if m == 1:
        return [(0.0, TWO_PI)], [True], [0]
    intervals = [(0.0, math.pi)] * (m - 1) + [(0.0, TWO_PI)]
    periodic = [False] * (m - 1) + [True]
    powers = list(range(m - 1, 0, -1)) + [0]
    return intervals, periodic, powers


def _product_domain(dims: Sequence[int]):
    intervals, periodic, powers, offsets = [], [], [], []
    for m in dims:
        offsets.append(len(intervals))
        iv, per, pw = _sphere_domain(m)
        intervals += iv
        periodic += per
        powers += pw
    dom = ChartDomain(tuple(intervals), tuple(periodic), tuple(powers))
    return dom, offsets


def _euler(m: int) -> int:
    return 2 if m % 2 == 0 else 0


def _split(u: list[Jet], dims: Sequence[int], offsets: Sequence[int]) -> list[list[Jet]]:
    return [u[o:o + m] for o, m in zip(offsets, dims)]


# -- families -----------------------------------------------------------------

PRODUCT_FAMILIES = {
    "s2xs2": (2, 2),
    "s1xs3": (1, 3),
    "s1s1s2": (1, 1, 2),
    "torus4": (1, 1, 1, 1),
    "clifford": (1, 1),
}


def _check_radii(radii, tol=1e-12, normalize=False):
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise ParameterError("radii must be positive")
    total = sum(r * r for r in radii)
    if normalize:
        scale = math.sqrt(total)
        return [r / scale for r in radii]
    if abs(total - 1.0) > tol:
        raise ParameterError(f"sum of squared radii must equal 1 (got {total!r})")
    return radii


def product_of_spheres(dims: Sequence[int], radii: Sequence[float], *, normalize: bool = False,
                       family: str | None = None) -> ImmersionChart:
    """S^{m1}(r1) x ... x S^{ml}(rl) inside the unit sphere of R^{sum(m_i + 1)}."""
    if len(dims) != len(radii):
        raise ParameterError("one radius per factor required")
    radii = _check_radii(radii, normalize=normalize)
    dom, offsets = _product_domain(dims)
    ambient = sum(m + 1 for m in dims)

    def func(u):
        comps = []
        for r, ang, m in zip(radii, _split(u, dims, offsets), dims):
            comps += [r * y for y in _sphere_components(m, ang)]
        return comps

    normal_func = None
    if len(dims) == 2:
        r1, r2 = radii

        def normal_func(u):
            f1, f2 = _split(u, dims, offsets)
            y1 = _sphere_components(dims[0], f1)
            y2 = _sphere_components(dims[1], f2)
            return [-r2 * y for y in y1] + [r1 * y for y in y2]

    syms = []
    coord = 0
    for m, off in zip(dims, offsets):
        syms += _sphere_symmetries(m, off, coord)
        coord += m + 1
    params = {f"r{i + 1}": r for i, r in enumerate(radii)}
    return ImmersionChart(
        family=family or "x".join(f"s{m}" for m in dims),
        params=params,
        k=sum(dims),
        background=Sphere(ambient - 1),
        domain=dom,
        func=func,
        normal_func=normal_func,
        euler_char=math.prod(_euler(m) for m in dims),
        symmetries=tuple(syms),
    )


def great_sphere(k: int = 4) -> ImmersionChart:
    """Totally geodesic S^k inside S^(k+1)."""
    dom, _ = _product_domain([k])

    def func(u):
        return _sphere_components(k, u) + [Jet.constant(np.zeros(u[0].shape), u[0].nvars, u[0].order)]

    def normal_func(u):
        z = Jet.constant(np.zeros(u[0].shape), u[0].nvars, u[0].order)
        return [z] * (k + 1) + [z + 1.0]

    return ImmersionChart(f"s{k}_equator", {}, k, Sphere(k + 1), dom, func, normal_func,
                          euler_char=_euler(k), symmetries=tuple(_sphere_symmetries(k, 0, 0)))


def round_sphere(k: int = 4, radius: float = 1.0, ambient: int | None = None) -> ImmersionChart:
    """Round S^k(radius) in R^(k+1) (or a larger Euclidean space, zero padded)."""
    if radius <= 0:
        raise ParameterError("radius must be positive")
    n = ambient or k + 1
    if n < k + 1:
        raise ParameterError("ambient dimension too small")
    dom, _ = _product_domain([k])

    def pad(u, comps):
        z = Jet.constant(np.zeros(u[0].shape), u[0].nvars, u[0].order)
        return comps + [z] * (n - k - 1)

    def func(u):
        return pad(u, [radius * y for y in _sphere_components(k, u)])

    def normal_func(u):
        return pad(u, [-y for y in _sphere_components(k, u)])

    return ImmersionChart(f"s{k}", {"radius": radius}, k, Euclidean(n), dom, func,
                          normal_func if n == k + 1 else None,
                          euler_char=_euler(k), symmetries=tuple(_sphere_symmetries(k, 0, 0)))


def anchor_ring(j: int, m: int, R: float, r: float) -> ImmersionChart:
    """Tube T^{j,m}_{R,r} of radius r about S^j(R) x {0} in R^(j+m+1).

    Normal orientation: outward from the core sphere.
    """
    if not 0 < r < R:
        raise ParameterError(f"anchor ring needs 0 < r < R (got R={R}, r={r})")
    if j < 1 or m < 1:
        raise ParameterError("anchor ring factor dimensions must be positive")
    dims = (j, m)
    dom, offsets = _product_domain(dims)

    def parts(u):
        fy, fz = _split(u, dims, offsets)
        y = _sphere_components(j, fy)
        z = _sphere_components(m, fz)
        return y, z[:-1], z[-1]

    def func(u):
        y, v, w = parts(u)
        rad = R + r * w
        return [rad * yi for yi in y] + [r * vi for vi in v]

    def normal_func(u):
        y, v, w = parts(u)
        return [w * yi for yi in y] + list(v)

    # the core sphere is fully symmetric; the tube sphere only about the w axis
    syms = _sphere_symmetries(j, offsets[0], 0) + _sphere_symmetries(m, offsets[1], j + 1)[1:]
    return ImmersionChart(f"anchor{j}{m}", {"j": j, "k": m, "R": R, "r": r}, j + m,
                          Euclidean(j + m + 1), dom, func, normal_func,
                          euler_char=_euler(j) * _euler(m), symmetries=tuple(syms))


def dilated_anchor(a: float, R: float = math.sqrt(2.0), r: float = 1.0) -> ImmersionChart:
    """delta_a(T^{2,2}_{R,r}) with delta_a(y, v) = (y, a v), y in R^3, v in R^2."""
    if a <= 0:
        raise ParameterError("dilation factor must be positive")
    base = anchor_ring(2, 2, R, r)
    dims, (_, offsets) = (2, 2), _product_domain((2, 2))

    def func(u):
        comps = base.func(u)
        return comps[:3] + [a * c for c in comps[3:]]

    def normal_func(u):
        fy, fz = _split(u, dims, offsets)
        y = _sphere_components(2, fy)
        z = _sphere_components(2, fz)
        w = z[-1]
        ell = (a * a * w * w + z[0] * z[0] + z[1] * z[1]).sqrt()
        inv = ell.reciprocal()
        return [a * w * yi * inv for yi in y] + [zi * inv for zi in z[:2]]

    return replace(base, family="dilated_anchor", params={"a": a, "R": R, "r": r},
                   func=func, normal_func=normal_func)


def ellipsoid(a: float = 1.0, axes: Sequence[float] | None = None) -> ImmersionChart:
    """Ellipsoid in R^5 with semiaxes (1, 1, 1, 1, a) unless ``axes`` is given.  Inward normal."""
    axes = tuple(float(x) for x in (axes if axes is not None else (1.0, 1.0, 1.0, 1.0, a)))
    if len(axes) != 5 or any(x <= 0 for x in axes):
        raise ParameterError("ellipsoid needs five positive semiaxes")
    dom, _ = _product_domain([4])
    # _sphere_components orders coordinates (x1, x2, ..., x5) with x5 = cos(phi1)

    def func(u):
        return [ax * y for ax, y in zip(axes, _sphere_components(4, u))]

    def normal_func(u):
        y = _sphere_components(4, u)
        grad = [-(yi / ax) for yi, ax in zip(y, axes)]
        norm = grad[0] * grad[0]
        for gi in grad[1:]:
            norm = norm + gi * gi
        inv = norm.sqrt().reciprocal()
        return [gi * inv for gi in grad]

    syms = tuple((p, c) for p, c in _sphere_symmetries(4, 0, 0) if len({axes[i] for i in c}) == 1)
    return ImmersionChart("ellipsoid", {"axes": axes}, 4, Euclidean(5), dom, func, normal_func,
                          euler_char=2, symmetries=syms)


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite sum of coef * cos(m . u) and coef * sin(m . u) terms."""

    terms: tuple[tuple[float, tuple[int, ...], str], ...]

    def __call__(self, u: list[Jet]) -> Jet:
        total = None
        for coef, modes, kind in self.terms:
            arg = None
            for mv, uv in zip(modes, u):
                if mv:
                    arg = mv * uv if arg is None else arg + mv * uv
            if arg is None:
                piece = Jet.constant(np.full(u[0].shape, coef if kind == "cos" else 0.0), u[0].nvars, u[0].order)
            else:
                piece = coef * (arg.cos() if kind == "cos" else arg.sin())
            total = piece if total is None else total + piece
        return total

    @property
    def degree(self) -> int:
        return max(sum(abs(m) for m in modes) for _, modes, _ in self.terms)

    @classmethod
    def cosines(cls, *modes: Sequence[int]) -> "TrigPolynomial":
        return cls(tuple((1.0, tuple(m), "cos") for m in modes))


def periodic_graph(eps: float, phi: TrigPolynomial | None = None, k: int = 4) -> ImmersionChart:
    """Graph (u, eps * phi(u)) over the flat R^k in R^(k+1), periodic in every coordinate."""
    if phi is None:
        phi = TrigPolynomial.cosines((1,) + (0,) * (k - 1))
    if any(len(m) != k for _, m, _ in phi.terms):
        raise ParameterError("trig polynomial modes must have one entry per parameter")

    def func(u):
        return list(u) + [eps * phi(u)]

    def normal_func(u):
        f = eps * phi(u)
        grads = [f.deriv(i) for i in range(k)]
        # order-0 evaluation: re-expand at the same order by padding with zeros
        grads = [Jet.constant(g.value, u[0].nvars, u[0].order) for g in grads]
        norm = 1.0 + sum((g * g for g in grads[1:]), grads[0] * grads[0])
        inv = norm.sqrt().reciprocal()
        return [-g * inv for g in grads] + [inv]

    dom = ChartDomain(((0.0, TWO_PI),) * k, (True,) * k)
    return ImmersionChart("graph", {"eps": eps, "phi": phi}, k, Euclidean(k + 1), dom, func,
                          normal_func, euler_char=None, compact=False)


def make_family_chart(tag: str, normalize: bool = False, **params) -> ImmersionChart:
    """Build a named family chart.

    Tags: s2xs2, s1xs3, s1s1s2, torus4, clifford (product spheres in the unit
    sphere, radii r1..), s4_equator, s4 / s2 (round spheres in Euclidean
    space, optional radius), anchor (j, k, R, r), dilated_anchor (a, R, r),
    ellipsoid (a or axes), graph (eps, phi, k).
    """
    if tag in PRODUCT_FAMILIES:
        dims = PRODUCT_FAMILIES[tag]
        try:
            radii = [params.pop(f"r{i + 1}") for i in range(len(dims))]
        except KeyError as exc:
            raise ParameterError(f"{tag} needs radii r1..r{len(dims)}") from exc
        _no_extra(tag, params)
        return product_of_spheres(dims, radii, normalize=normalize, family=tag)
    if tag in ("s4_equator", "s2_equator"):
        _no_extra(tag, params)
        return great_sphere(int(tag[1]))
    if tag in ("s4", "s2"):
        radius = params.pop("radius", 1.0)
        _no_extra(tag, params)
        return round_sphere(int(tag[1]), radius)
    if tag == "anchor":
        return anchor_ring(int(params["j"]), int(params["k"]), float(params["R"]), float(params["r"]))
    if tag == "dilated_anchor":
        return dilated_anchor(float(params.get("a", 1.0)), float(params.get("R", math.sqrt(2.0))),
                              float(params.get("r", 1.0)))
    if tag == "ellipsoid":
        return ellipsoid(float(params.get("a", 1.0)), params.get("axes"))
    if tag == "graph":
        return periodic_graph(float(params.get("eps", 0.0)), params.get("phi"), int(params.get("k", 4)))
    raise ParameterError(f"unknown family {tag!r}")


def _no_extra(tag, params):
    if params:
        raise ParameterError(f"unexpected parameters for {tag}: {sorted(params)}")


# -- quadrature -----------------------------------------------------------------


def _rule_1d(lo: float, hi: float, periodic: bool, power: int, n: int):
    if periodic:
        h = (hi - lo) / n
        return lo + h * np.arange(n), np.full(n, h)
    if power > 0:
        alpha = 0.5 * (power - 1)
        s, w = roots_jacobi(n, alpha, alpha)
        phi = np.arccos(s)[::-1]
        w = w[::-1] / np.sin(phi) ** power
        return phi, w
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def quadrature_rule(chart: ImmersionChart, resolution: int, use_symmetry: bool = False) -> QuadratureRule:
    """Tensor-product rule over the chart's parameter box.

    Periodic parameters: ``resolution`` equispaced nodes with trapezoidal
    weights.  Polar parameters with volume factor sin^m: Gauss-Jacobi nodes
    in cos(phi) for the weight (1 - s^2)^((m-1)/2), with the sin^m factor
    divided back out so that sqrt(det g) remains the only geometric weight.
    With ``use_symmetry`` every symmetry parameter collapses to a single
    node (pi/2 for polar angles, weighted by the integral of sin^m), which
    is exact because only the sin^m factor of the volume element varies
    along it.
    """
    if resolution < 4:
        raise DomainError("resolution must be at least 4")
    dom = chart.domain
    sym = {p for p, _ in chart.symmetries} if use_symmetry else set()
    axes_n, axes_w = [], []
    for i, ((lo, hi), per, pw) in enumerate(zip(dom.intervals, dom.periodic, dom.polar_power)):
        if i in sym and pw > 0:
            axes_n.append(np.array([0.5 * math.pi]))
            axes_w.append(np.array([_sine_power_integral(pw)]))
        elif i in sym:
            axes_n.append(np.array([lo]))
            axes_w.append(np.array([hi - lo]))
        else:
            x, w = _rule_1d(lo, hi, per, pw, resolution)
            axes_n.append(x)
            axes_w.append(w)
    grids = np.meshgrid(*axes_n, indexing="ij")
    wgrids = np.meshgrid(*axes_w, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return QuadratureRule(nodes, weights, resolution)
