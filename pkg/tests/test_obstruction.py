from __future__ import annotations

import math

import numpy as np
import pytest

from willmore4 import charts
from willmore4.errors import UnsupportedError
from willmore4.geometry import geometry_at
from willmore4.obstruction import (
    OBSTRUCTION_TERMS,
    expansion_coefficients,
    leading_term_check,
    obstruction,
    obstruction_norms,
)

SQ2, SQ3 = math.sqrt(2.0), math.sqrt(3.0)


def _nodes(chart, res=5, step=37):
    return charts.quadrature_rule(chart, res).nodes[::step]


def test_round_sphere_terms_cancel_exactly():
    c = charts.round_sphere(4)
    ob = obstruction(c, _nodes(c))
    assert set(ob.terms) == set(OBSTRUCTION_TERMS)
    H = ob.geometry.H
    # with |H| = 4 and parallel H: M H = 4 H
    expected = {"MMH": 32.0, "LAA": 32.0, "LtH2_H": -64.0, "H2_MH": -112.0, "H4_H": 112.0}
    for name, factor in expected.items():
        assert np.allclose(ob.terms[name], factor * H)
    for name in set(OBSTRUCTION_TERMS) - set(expected):
        assert np.allclose(ob.terms[name], 0.0, atol=1e-10)
    assert ob.sup < 1e-10


def test_expansion_coefficients_on_the_sphere():
    c = charts.round_sphere(4)
    geom = geometry_at(c, _nodes(c), derivs=2)
    u = expansion_coefficients(geom)
    assert np.allclose(np.linalg.norm(u["U2"], axis=1), 0.5)
    assert np.allclose(np.linalg.norm(u["U4"], axis=1), 0.125)
    equator = charts.great_sphere(4)
    ue = expansion_coefficients(geometry_at(equator, _nodes(equator), derivs=2))
    assert np.allclose(ue["U4"], 0.0, atol=1e-12)


def test_critical_anchor_ring_and_non_critical_ring():
    crit = obstruction_norms(charts.anchor_ring(2, 2, SQ2, 1.0), resolution=6)
    assert crit.scaled_sup < 1e-10
    non = obstruction_norms(charts.anchor_ring(2, 2, SQ2, 1.2), resolution=6)
    assert non.scaled_sup > 1e-2
    assert non.l2 > 0.0 and non.nodes > 0


def test_k2_willmore_operator():
    for c in (charts.round_sphere(2), charts.make_family_chart("clifford", r1=1 / SQ2, r2=1 / SQ2)):
        assert obstruction_norms(c, resolution=8).sup < 1e-10
    off = charts.make_family_chart("clifford", r1=0.6, r2=0.8)
    assert obstruction_norms(off, resolution=8).sup > 1e-2


def test_leading_term_on_periodic_graph_decays_quadratically():
    phi = charts.TrigPolynomial.cosines((1, 0, 0, 0), (0, 1, 1, 0))
    chk = leading_term_check(charts.periodic_graph(0.05, phi), nodes=6)
    assert 3.5 < chk.obstruction_ratio < 4.5
    assert 3.5 < chk.expansion_ratio < 4.5


def test_errors():
    with pytest.raises(UnsupportedError):
        obstruction(charts.product_of_spheres((2, 2), (0.6, 0.8)), [[1.0, 1.0, 1.0, 1.0]])
    with pytest.raises(UnsupportedError):
        obstruction(charts.round_sphere(4), [[1.0, 1.0, 1.0, 1.0]], k=2)
    with pytest.raises(UnsupportedError):
        leading_term_check(charts.round_sphere(4))
    with pytest.raises(UnsupportedError):
        expansion_coefficients(geometry_at(charts.round_sphere(4), [[1.0, 1.0, 1.0, 1.0]]))
