from __future__ import annotations

import math

import numpy as np
import pytest

from willmore4 import charts
from willmore4.errors import DegeneracyError, UnsupportedError, UnsupportedOrderError
from willmore4.geometry import geometry_at, intrinsic_curvature, normal_derivatives


def _nodes(chart, res=5, step=23):
    return charts.quadrature_rule(chart, res).nodes[::step]


def test_unit_sphere_in_r5():
    c = charts.round_sphere(4)
    g = geometry_at(c, _nodes(c), derivs=1)
    assert np.allclose(g.H2, 16.0)
    assert np.allclose(g.LtH2, 64.0)
    assert np.allclose(g.dH2, 0.0, atol=1e-20)
    assert np.allclose(g.Lo2, 0.0, atol=1e-24)
    # H points inward along the position vector
    assert np.allclose(g.H, -4.0 * g.x)
    cur = intrinsic_curvature(g)
    assert np.allclose(cur.sigma2, 1.5)
    assert np.allclose(cur.scalar, 12.0)
    assert np.allclose(cur.weyl2, 0.0, atol=1e-24)


def test_sphere_of_radius_two_scales():
    c = charts.round_sphere(4, radius=2.0)
    g = geometry_at(c, _nodes(c))
    assert np.allclose(g.H2, 4.0)
    assert np.allclose(g.volume_element / geometry_at(charts.round_sphere(4), _nodes(c)).volume_element, 16.0)


def test_equator_is_totally_geodesic():
    c = charts.great_sphere(4)
    g = geometry_at(c, _nodes(c))
    assert np.max(np.abs(g.L)) < 1e-12
    cur = intrinsic_curvature(g)
    assert np.allclose(cur.sigma2, 1.5)


def test_clifford_type_product_is_minimal_with_known_curvature():
    c = charts.product_of_spheres((2, 2), (1 / math.sqrt(2), 1 / math.sqrt(2)))
    g = geometry_at(c, _nodes(c), derivs=1)
    assert np.allclose(g.H2, 0.0, atol=1e-20)
    cur = intrinsic_curvature(g)
    assert np.allclose(cur.weyl2, 64.0 / 3.0)
    assert np.allclose(cur.sigma2, 2.0 / 3.0)
    assert np.allclose(cur.scalar, 8.0)


def test_normal_projector_and_second_fundamental_form_are_normal():
    c = charts.anchor_ring(2, 2, math.sqrt(2), 1.2)
    g = geometry_at(c, _nodes(c))
    # P_N annihilates tangent vectors, is symmetric and idempotent
    assert np.max(np.abs(np.einsum("nde,nae->nad", g.PN, g.dx))) < 1e-12
    assert np.allclose(g.PN, np.swapaxes(g.PN, 1, 2))
    assert np.allclose(np.einsum("nde,nef->ndf", g.PN, g.PN), g.PN)
    assert np.allclose(np.einsum("nabd,nde->nabe", g.L, g.PN), g.L)
    assert np.allclose(np.einsum("nab,nabd->nd", g.ginv, g.Lo), 0.0, atol=1e-12)


def test_gauss_equation_identity_for_sigma2():
    # -8 sigma_2 = tr Lo^4 - |Lo|^4/3 - H tr Lo^3 + 3/8 H^2 |Lo|^2 - 3/64 H^4 for hypersurfaces of R^5
    c = charts.anchor_ring(2, 2, math.sqrt(2), 1.2)
    g = geometry_at(c, _nodes(c))
    cur = intrinsic_curvature(g)
    H = g.H_scalar
    rhs = cur.trLo4 - cur.Lo4 / 3 - H * cur.trLo3 + 3 / 8 * H ** 2 * cur.Lo2 - 3 / 64 * H ** 4
    assert np.allclose(-8 * cur.sigma2, rhs, atol=1e-11)


def test_gradient_of_H_along_a_rotationally_symmetric_ring():
    # H depends only on the tube angle, so nabla H vanishes along the core directions
    c = charts.anchor_ring(1, 3, 2.0, 1.0)
    d = normal_derivatives(c, _nodes(c), depth=2)
    assert d["dH"].shape[1] == 4
    assert np.allclose(d["dH"][:, 0], 0.0, atol=1e-12)
    assert "lapH" in d


def test_degenerate_metric_is_reported():
    with pytest.raises(DegeneracyError):
        geometry_at(charts.round_sphere(4), [[0.0, 1.0, 1.0, 1.0]])


def test_errors():
    c = charts.round_sphere(4)
    with pytest.raises(UnsupportedOrderError):
        geometry_at(c, _nodes(c), derivs=3)
    with pytest.raises(UnsupportedError):
        geometry_at(c, _nodes(c), background=charts.Sphere(5))
    with pytest.raises(UnsupportedError):
        intrinsic_curvature(geometry_at(charts.round_sphere(2), [[1.0, 0.5]]))
    with pytest.raises(UnsupportedOrderError):
        _ = geometry_at(c, _nodes(c)).dH2
