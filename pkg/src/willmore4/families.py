"""Closed-form energies of the product-of-spheres families and their critical points.

Each family's normalized energy 128 E is a Laurent polynomial in the radius
ratios t, stored as an exponent -> coefficient table, so values, gradients
and Hessians are exact term-by-term evaluations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError

PI = math.pi


class Laurent:
    """Multivariate Laurent polynomial sum c_m t^m with integer exponents."""

    def __init__(self, terms: dict[tuple[int, ...], float]):
        self.exps = np.array(list(terms.keys()), dtype=int)
        self.coefs = np.array(list(terms.values()), dtype=float)
        self.arity = self.exps.shape[1]

    def _check(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.shape[-1] != self.arity:
            raise ParameterError(f"expected {self.arity} ratio parameters")
        if np.any(t <= 0):
            raise DomainError("ratio parameters must be positive")
        return t

    def _monomials(self, t: np.ndarray) -> np.ndarray:
        # shape (..., nterms)
        return np.prod(t[..., None, :] ** self.exps, axis=-1)

    def __call__(self, t) -> np.ndarray:
        t = self._check(t)
        return self._monomials(t) @ self.coefs

    def gradient(self, t) -> np.ndarray:
        t = self._check(t)
        mono = self._monomials(t)
        # d/dt_i t^m = m_i t^m / t_i
        return np.einsum("...m,mi,m->...i", mono, self.exps, self.coefs) / t

    def hessian(self, t) -> np.ndarray:
        t = self._check(t)
        mono = self._monomials(t)
        e = self.exps
        outer = e[:, :, None] * e[:, None, :] - np.einsum("mi,ij->mij", e, np.eye(self.arity))
        h = np.einsum("...m,mij,m->...ij", mono, outer, self.coefs)
        return h / (t[..., :, None] * t[..., None, :])


def _sym3(a: int, b: int, c: int) -> dict:
    """Average of t_s(1)^a t_s(2)^b t_s(3)^c over the permutations of three variables."""
    out: dict = {}
    for perm in itertools.permutations(range(3)):
        e = [0, 0, 0]
        for var, power in zip(perm, (a, b, c)):
            e[var] += power
        out[tuple(e)] = out.get(tuple(e), 0.0) + 1.0 / 6.0
    return out


def _torus_terms() -> dict:
    # -(pi^4 / (t1 t2 t3)^3) [9 t^444 + 27 Sym(t1^4 t2^4) - 42 Sym(t1^4 t2^4 t3^2) - 42 Sym(t1^4 t2^2 t3^2)]
    acc: dict = {(4, 4, 4): 9.0}
    for weight, mono in ((27.0, (4, 4, 0)), (-42.0, (4, 4, 2)), (-42.0, (4, 2, 2))):
        for e, c in _sym3(*mono).items():
            acc[e] = acc.get(e, 0.0) + weight * c
    return {tuple(x - 3 for x in e): -PI ** 4 * c for e, c in acc.items()}


FAMILY_ENERGIES: dict[str, Laurent] = {
    "s2xs2": Laurent({(2,): -16 * PI ** 2, (-2,): -16 * PI ** 2, (0,): 224 * PI ** 2}),
    "s1xs3": Laurent({(1,): 9 * PI ** 3 / 4 * 15, (-1,): 9 * PI ** 3 / 4 * 14, (-3,): -9 * PI ** 3 / 4}),
    "s1s1s2": Laurent({
        (1, 1): -16 * PI ** 3,
        (1, -1): 56 * PI ** 3, (-1, 1): 56 * PI ** 3,
        (1, -3): -9 * PI ** 3, (-3, 1): -9 * PI ** 3,
        (-1, -1): 14 * PI ** 3,
    }),
    "torus4": Laurent(_torus_terms()),
}

# dimensions of the sphere factors; the last radius is the reference for t
FAMILY_DIMS = {"s2xs2": (2, 2), "s1xs3": (1, 3), "s1s1s2": (1, 1, 2), "torus4": (1, 1, 1, 1)}


def _family(name: str) -> Laurent:
    try:
        return FAMILY_ENERGIES[name]
    except KeyError:
        raise ParameterError(f"unknown family {name!r}; choose from {sorted(FAMILY_ENERGIES)}") from None


def family_arity(family: str) -> int:
    return _family(family).arity


def family_energy_closed(family: str, *t: float) -> float:
    """Closed-form 128 E of the family at ratios t_i = r_i / r_last."""
    return float(_family(family)(np.array(t, dtype=float)))


def family_energy_radii(family: str, radii: Sequence[float]) -> float:
    """Closed-form 128 E from radii (any positive scale)."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise DomainError("radii must be positive")
    return family_energy_closed(family, *(radii[:-1] / radii[-1]))


def ratios_to_radii(t: Sequence[float]) -> np.ndarray:
    """Radii with unit sum of squares corresponding to ratios t (last radius implied)."""
    full = np.append(np.asarray(t, dtype=float), 1.0)
    return full / np.sqrt(np.sum(full ** 2))


@dataclass(frozen=True)
class CriticalPoint:
    family: str
    t: tuple[float, ...]
    radii: tuple[float, ...]
    Ebar: float
    classification: str
    grad_norm: float

    @property
    def radii_squared(self) -> tuple[float, ...]:
        return tuple(r * r for r in self.radii)


def _classify(hess: np.ndarray) -> str:
    ev = np.linalg.eigvalsh(hess)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.all(ev < -1e-9 * scale):
        return "max"
    if np.all(ev > 1e-9 * scale):
        return "min"
    if np.any(ev < -1e-9 * scale) and np.any(ev > 1e-9 * scale):
        return "saddle"
    return "degenerate"


def find_critical_points(family: str, grid: int = 12, lo: float = 0.1, hi: float = 3.0,
                         iterations: int = 100, merge_tol: float = 1e-8) -> list[CriticalPoint]:
    """Newton's method on the exact gradient from a multistart grid over (lo, hi)^arity."""
    f = _family(family)
    axis = np.linspace(lo, hi, grid + 2)[1:-1]
    t = np.array(list(itertools.product(axis, repeat=f.arity)), dtype=float)
    alive = np.ones(len(t), dtype=bool)
    for _ in range(iterations):
        g = f.gradient(t[alive])
        h = f.hessian(t[alive])
        try:
            step = np.linalg.solve(h, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(hi_, gi, rcond=None)[0] for hi_, gi in zip(h, g)])
        new = t[alive] - step
        # keep iterates positive: halve toward zero instead of crossing it
        bad = new <= 0
        new[bad] = 0.5 * t[alive][bad]
        t[alive] = new
        runaway = np.any((t > 1e3) | (t < 1e-3) | ~np.isfinite(t), axis=1)
        alive &= ~runaway
        if not alive.any():
            break
    found: list[CriticalPoint] = []
    for p in t[alive]:
        gn = float(np.linalg.norm(f.gradient(p)))
        if not gn < 1e-10:
            continue
        if any(np.max(np.abs(np.array(c.t) - p)) < merge_tol for c in found):
            continue
        found.append(CriticalPoint(
            family=family, t=tuple(float(x) for x in p), radii=tuple(ratios_to_radii(p).tolist()),
            Ebar=float(f(p)), classification=_classify(f.hessian(p)), grad_norm=gn,
        ))
    found.sort(key=lambda c: c.t)
    return found


# -- relations between families ---------------------------------------------------


def _s4_ebar(resolution: int) -> float:
    from .charts import round_sphere
    from .energies import energy_bar

    return energy_bar(round_sphere(4), resolution)


def _s2_energy(resolution: int) -> float:
    from .charts import round_sphere
    from .energies import energy

    return energy(round_sphere(2), resolution=resolution).E


def clifford_energy_closed(t: float) -> float:
    """k = 2 energy of S^1(r1) x S^1(r2) in S^3 with t = r1 / r2."""
    if t <= 0:
        raise DomainError("ratio must be positive")
    return -0.5 * PI ** 2 * (t + 1.0 / t)


RELATION_CONSTANTS = {
    "torus_vs_s1s1s2": PI / 2,
    "torus_vs_s1xs3": 4 * PI / (3 * math.sqrt(3)),
    "torus_vs_s2xs2": PI ** 2 / 4,
    "torus_vs_s4": 3 * PI ** 2 / 8,
    "clifford_vs_s2": PI / 2,
}


def relation_residuals(sample_count: int = 20, seed: int = 0, resolution: int = 32) -> dict[str, float]:
    """Maximum relative residual |LHS - c RHS| / |LHS| of each family relation over random radii."""
    if sample_count < 1:
        raise ParameterError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    E = family_energy_radii
    s2, s3 = math.sqrt(2.0), math.sqrt(3.0)
    c = RELATION_CONSTANTS
    res = {name: 0.0 for name in c}
    s4 = _s4_ebar(resolution)
    s2_k2 = _s2_energy(resolution)

    def rel(lhs, rhs):
        return abs(lhs - rhs) / max(abs(lhs), 1e-300)

    for _ in range(sample_count):
        r1, r2, r3 = rng.uniform(0.2, 1.0, size=3)
        res["torus_vs_s1s1s2"] = max(res["torus_vs_s1s1s2"], rel(
            E("torus4", [r1, r2, r3, r3]), c["torus_vs_s1s1s2"] * E("s1s1s2", [r1, r2, s2 * r3])))
        res["torus_vs_s1xs3"] = max(res["torus_vs_s1xs3"], rel(
            E("torus4", [r1, r2, r2, r2]), c["torus_vs_s1xs3"] * E("s1xs3", [r1, s3 * r2])))
        res["torus_vs_s2xs2"] = max(res["torus_vs_s2xs2"], rel(
            E("torus4", [r1, r1, r2, r2]), c["torus_vs_s2xs2"] * E("s2xs2", [s2 * r1, s2 * r2])))
        res["torus_vs_s4"] = max(res["torus_vs_s4"], rel(E("torus4", [r1] * 4), c["torus_vs_s4"] * s4))
        res["clifford_vs_s2"] = max(res["clifford_vs_s2"], rel(
            clifford_energy_closed(r1 / r1), c["clifford_vs_s2"] * s2_k2))
    return res


@dataclass(frozen=True)
class ScanResult:
    family: str
    min: float
    argmin: tuple[float, ...]
    max: float
    argmax: tuple[float, ...]
    points: np.ndarray
    values: np.ndarray


def scan_grid(family: str, lo: float, hi: float, steps: int, fixed: dict[int, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Geometric grid over [lo, hi] in every free ratio, with optional fixed coordinates."""
    f = _family(family)
    if not 0 < lo < hi:
        raise DomainError("scan range must satisfy 0 < lo < hi")
    if steps < 2:
        raise ParameterError("need at least two steps")
    fixed = dict(fixed or {})
    axis = np.geomspace(lo, hi, steps)
    axes = [np.array([fixed[i]]) if i in fixed else axis for i in range(f.arity)]
    pts = np.array(list(itertools.product(*axes)), dtype=float)
    return pts, f(pts)


def boundedness_scan(family: str, lo: float = 0.05, hi: float = 10.0, steps: int = 200,
                     fixed: dict[int, float] | None = None) -> ScanResult:
    """Grid extrema of the closed form."""
    pts, vals = scan_grid(family, lo, hi, steps, fixed)
    i, j = int(np.argmin(vals)), int(np.argmax(vals))
    return ScanResult(family, float(vals[i]), tuple(pts[i]), float(vals[j]), tuple(pts[j]), pts, vals)


def second_derivative_theta(theta: float = PI / 4, h: float = 1e-3) -> float:
    """Central second difference of 128 E along S^2(cos theta) x S^2(sin theta)."""
    f = FAMILY_ENERGIES["s2xs2"]

    def e(th):
        return float(f(np.array([math.cos(th) / math.sin(th)])))

    return (e(theta + h) - 2 * e(theta) + e(theta - h)) / (h * h)
