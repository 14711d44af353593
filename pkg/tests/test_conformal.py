from __future__ import annotations

import math

import numpy as np
import pytest

from willmore4 import charts
from willmore4.conformal import (
    AmbientMap,
    MapStep,
    _symmetry_survives,
    anchor_correspondence,
    conformal_invariance_residual,
    push_forward_chart,
    sphere_angles,
)
from willmore4.energies import energy, energy_bar
from willmore4.errors import MapSingularityError, ParameterError, UnsupportedError

SQ2, SQ3 = math.sqrt(2.0), math.sqrt(3.0)


def _rot(n, i, j, a):
    q = np.eye(n)
    c, s = math.cos(a), math.sin(a)
    q[i, i] = q[j, j] = c
    q[i, j], q[j, i] = -s, s
    return q


CORPUS = [
    (charts.round_sphere(4), AmbientMap.inversion((0, 0, 0, 0, 2.0))),
    (charts.ellipsoid(2.0), AmbientMap.inversion((0, 0, 0, 0, 3.0), 1.5)),
    (charts.anchor_ring(2, 2, SQ2, 1.2), AmbientMap.inversion((0, 0, 0, 0, 3.0))),
    (charts.anchor_ring(1, 3, 2.0, SQ3), AmbientMap.scale(2.0).then(AmbientMap.translation((0, 0, 0, 0, 1.0)))),
    (charts.round_sphere(4), AmbientMap.translation((1, 2, 3, 4, 5.0)).then(AmbientMap.rotation(_rot(5, 0, 4, 0.7)))),
    (charts.product_of_spheres((2, 2), (0.6, 0.8)), AmbientMap.stereographic()),
    (charts.product_of_spheres((1, 3), (0.5, math.sqrt(0.75))), AmbientMap.stereographic()),
    (charts.product_of_spheres((1, 1, 2), (0.5, 0.5, math.sqrt(0.5))), AmbientMap.stereographic()),
    (charts.dilated_anchor(2.0), AmbientMap.inversion((0, 0, 0, 0, 6.0), 3.0)),
    (charts.ellipsoid(0.5), AmbientMap.scale(3.0).then(AmbientMap.inversion((0, 0, 0, 0, 4.0), 2.0))),
]


@pytest.mark.parametrize("chart,amap", CORPUS, ids=[f"{c.family}-{i}" for i, (c, _) in enumerate(CORPUS)])
def test_energy_is_conformally_invariant(chart, amap):
    assert conformal_invariance_residual(chart, amap) < 1e-5


@pytest.mark.parametrize("j,k", [(2, 2), (1, 3), (3, 1), (1, 1)])
def test_stereographic_image_of_products_is_an_anchor_ring(j, k):
    for r1 in (1 / SQ2, 0.5, 0.8):
        res = anchor_correspondence(j, k, r1)
        assert res.sup_distance < 1e-10
        assert res.sup_tube_residual < 1e-10
        assert res.R == pytest.approx(1 / r1)


def test_identity_and_dilation():
    pts = np.random.default_rng(1).normal(size=(6, 5))
    assert np.array_equal(AmbientMap.identity()(pts), pts)
    out = AmbientMap.dilation(3.0, (3, 4))(pts)
    assert np.allclose(out[:, :3], pts[:, :3]) and np.allclose(out[:, 3:], 3.0 * pts[:, 3:])
    assert not AmbientMap.dilation(3.0, (3, 4)).conformal


def test_inversion_is_an_involution():
    inv = AmbientMap.inversion((1.0, 0.0, -1.0), 2.0)
    pts = np.random.default_rng(2).normal(size=(5, 3))
    assert np.allclose(inv.then(inv)(pts), pts)


def test_dilation_reproduces_the_dilated_anchor_ring():
    base = charts.dilated_anchor(1.0)
    image = push_forward_chart(base, AmbientMap.dilation(2.5, (3, 4)))
    u = charts.quadrature_rule(base, 4).nodes
    assert np.allclose(image.points(u), charts.dilated_anchor(2.5).points(u))


def test_sphere_angles_invert_the_parametrization():
    c = charts.round_sphere(3, ambient=4)
    u = charts.quadrature_rule(c, 5).nodes
    assert np.allclose(sphere_angles(3, c.points(u)), u)


def test_tracked_symmetries_match_the_full_grid():
    amap = AmbientMap.translation((0, 0, 0, 0, 1.0)).then(AmbientMap.inversion((0, 0, 0, 0, 3.0)))
    image = push_forward_chart(charts.round_sphere(4), amap)
    assert image.symmetries
    reduced = energy(image, resolution=8, use_symmetry=True).Ebar
    full = energy(image, resolution=8, use_symmetry=False).Ebar
    assert reduced == pytest.approx(full, rel=1e-11)


def test_symmetry_bookkeeping():
    coords = (0, 1, 2, 3)
    assert _symmetry_survives(AmbientMap.inversion((0, 0, 0, 0, 2.0)).steps, coords, 5)
    assert not _symmetry_survives(AmbientMap.inversion((1, 0, 0, 0, 2.0)).steps, coords, 5)
    moved = AmbientMap.translation((1, 0, 0, 0, 0.0)).then(AmbientMap.inversion((1, 0, 0, 0, 2.0)))
    assert _symmetry_survives(moved.steps, coords, 5)
    assert not _symmetry_survives(AmbientMap.dilation(2.0, (3, 4)).steps, coords, 5)
    assert _symmetry_survives(AmbientMap.dilation(2.0, (3, 4)).steps, (0, 1, 2), 5)


def test_singular_maps_are_reported():
    c = charts.round_sphere(4)
    centre = c.points(charts.quadrature_rule(c, 8).nodes[:1])[0]
    with pytest.raises(MapSingularityError):
        push_forward_chart(c, AmbientMap.inversion(centre))


def test_rejections():
    s4 = charts.round_sphere(4)
    with pytest.raises(UnsupportedError):
        conformal_invariance_residual(s4, AmbientMap.dilation(2.0, (4,)))
    with pytest.raises(UnsupportedError):
        conformal_invariance_residual(charts.round_sphere(2), AmbientMap.scale(2.0))
    with pytest.raises(UnsupportedError):
        push_forward_chart(s4, AmbientMap.stereographic())
    with pytest.raises(UnsupportedError):
        push_forward_chart(charts.product_of_spheres((2, 2), (0.6, 0.8)), AmbientMap.scale(2.0))
    with pytest.raises(ParameterError):
        MapStep("shear")
    with pytest.raises(ParameterError):
        AmbientMap.rotation([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ParameterError):
        push_forward_chart(s4, AmbientMap.translation((1.0, 2.0)))
    with pytest.raises(ParameterError):
        anchor_correspondence(2, 2, 1.5)


def test_rotated_product_then_stereographic():
    c = charts.product_of_spheres((2, 2), (0.6, 0.8))
    amap = AmbientMap.rotation(_rot(6, 0, 3, 0.3)).then(AmbientMap.stereographic())
    assert push_forward_chart(c, amap).background == charts.Euclidean(5)
    # the rotation breaks every symmetry, so the image uses the full (coarse) grid
    assert energy_bar(push_forward_chart(c, amap), 16) == pytest.approx(energy_bar(c, 16), rel=1e-5)
