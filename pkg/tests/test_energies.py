from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from willmore4 import charts, energies
from willmore4.conformal import AmbientMap, push_forward_chart
from willmore4.errors import UnsupportedError

PI = math.pi
SQ2 = math.sqrt(2.0)


def test_sphere_and_clifford_products():
    assert energies.energy_bar(charts.round_sphere(4)) == pytest.approx(128 * PI ** 2, rel=1e-12)
    # the great equator of S^5 has Ebar = 48 vol(S^4)
    assert energies.energy_bar(charts.great_sphere(4), 16) == pytest.approx(48 * 8 * PI ** 2 / 3, rel=1e-12)
    prod = charts.product_of_spheres((2, 2), (1 / SQ2, 1 / SQ2))
    assert energies.energy_bar(prod) == pytest.approx(192 * PI ** 2, rel=1e-12)


def test_k2_energies():
    assert energies.energy(charts.round_sphere(2), resolution=16).E == pytest.approx(-2 * PI, rel=1e-12)
    cliff = charts.make_family_chart("clifford", r1=1 / SQ2, r2=1 / SQ2)
    assert energies.energy(cliff, resolution=16).E == pytest.approx(-PI ** 2, rel=1e-12)
    assert energies.energy(cliff, resolution=16).Ebar is None


def test_energy_report_fields():
    rep = energies.energy(charts.round_sphere(4), resolution=16)
    assert rep.E == pytest.approx(rep.Ebar / 128)
    assert rep.area == pytest.approx(8 * PI ** 2 / 3)
    d = rep.as_dict()
    assert set(d) >= {"family", "params", "background", "resolution", "E", "Ebar", "area", "est_error"}
    assert rep.est_error < 1e-8


def test_ellipsoid_is_minimized_by_the_round_sphere():
    e = {a: energies.energy_bar(charts.ellipsoid(a), 24) for a in (0.7, 1.0, 1.4)}
    assert e[1.0] == pytest.approx(128 * PI ** 2, rel=1e-10)
    assert e[0.7] > e[1.0] and e[1.4] > e[1.0]


@given(st.floats(min_value=0.4, max_value=3.0), st.floats(min_value=-PI, max_value=PI))
@settings(max_examples=6, deadline=None)
def test_rotation_and_scale_invariance(factor, angle):
    ring = charts.anchor_ring(2, 2, SQ2, 1.2)
    q = np.eye(5)
    q[[0, 0, 4, 4], [0, 4, 0, 4]] = [math.cos(angle), -math.sin(angle), math.sin(angle), math.cos(angle)]
    base = energies.energy_bar(ring, 16)
    moved = push_forward_chart(ring, AmbientMap.rotation(q).then(AmbientMap.scale(factor)))
    assert energies.energy_bar(moved, 16) == pytest.approx(base, rel=1e-10)


def test_chern_gauss_bonnet():
    for c in (charts.round_sphere(4), charts.ellipsoid(2.0), charts.anchor_ring(1, 3, 3.0, 1.0),
              charts.product_of_spheres((2, 2), (0.6, 0.8))):
        assert energies.gauss_bonnet_residual(c, 24) < 1e-5


def test_trace_free_form_and_modified_energy():
    for c in (charts.ellipsoid(0.5), charts.anchor_ring(2, 2, SQ2, 1.2), charts.dilated_anchor(2.0)):
        m = energies.modified_energy(c, beta=4.0 / 3.0, resolution=16)
        assert m.Ebar_tracefree == pytest.approx(m.Ebar, rel=1e-10)
        assert m.value == pytest.approx(m.Ebar + 4.0 / 3.0 * m.Lo4)
        assert m.value >= 0.0
    s4 = energies.modified_energy(charts.round_sphere(4), beta=1.0, resolution=16)
    assert s4.Lo4 == pytest.approx(0.0, abs=1e-20)


def test_vyatkin_energy_gauss_form_relation():
    for c in (charts.round_sphere(4), charts.anchor_ring(2, 2, SQ2, 1.2), charts.ellipsoid(2.0)):
        rep = energies.vyatkin_energy(c, 24)
        assert abs(rep.gauss_relation_residual) < 1e-6 * max(1.0, abs(rep.V))
        assert rep.vterms_residual < 1e-10 and rep.weyl_identity_residual < 1e-10
    # the published form is off by -48 pi^2 on the round sphere
    s4 = energies.vyatkin_energy(charts.round_sphere(4), 16)
    assert s4.relation_residual == pytest.approx(-48 * PI ** 2, rel=1e-10)


def test_errors():
    with pytest.raises(UnsupportedError):
        energies.vyatkin_energy(charts.product_of_spheres((2, 2), (0.6, 0.8)))
    with pytest.raises(UnsupportedError):
        energies.modified_energy(charts.round_sphere(2), 1.0)
    with pytest.raises(UnsupportedError):
        energies.energy(charts.round_sphere(4), background=charts.Sphere(5))
    with pytest.raises(UnsupportedError):
        energies.energy(charts.periodic_graph(0.05))
    with pytest.raises(UnsupportedError):
        energies.energy(charts.round_sphere(3))
