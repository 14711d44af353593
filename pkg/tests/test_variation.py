from __future__ import annotations

import math

import pytest

from willmore4 import charts, variation
from willmore4.errors import ParameterError, UnsupportedError

PI = math.pi


def test_s4_spectrum_rows():
    t = variation.jacobi_spectrum("S4", 3)
    assert t.pairs() == [(-4, 1), (0, 5), (6, 14), (14, 30)]
    assert [r.cJ for r in t.rows[:2]] == [0.0, 0.0]
    assert t.rows[2].cJ == variation.c_j(6) > 0
    assert t.energy_kernel_dim == 6 == t.killing_dim + t.conformal_dim
    assert not t.negative_rows


def test_s2xs2_spectrum_rows():
    t = variation.jacobi_spectrum("s2xs2", 2)
    assert t.pairs()[:4] == [(-8, 1), (-4, 6), (0, 9), (4, 10)]
    assert t.multiplicity(-4) == 6
    assert t.energy_kernel_dim == 15 == t.killing_dim + t.conformal_dim
    assert [(r.lam, r.mult) for r in t.negative_rows] == [(-8, 1)]
    assert t.as_dict()["energy_kernel_dim"] == 15
    # raising the truncation only appends rows
    longer = variation.jacobi_spectrum("S2xS2", 5)
    assert longer.pairs()[: len(t.rows)] == t.pairs()


def test_c_j_roots():
    assert [variation.c_j(x) for x in (0, -4, -6)] == [0.0, 0.0, 0.0]
    assert variation.c_j(-8) == -128.0


def test_family_second_variation():
    chk = variation.second_variation_family_check()
    assert chk.operator_value == pytest.approx(-512 * PI ** 2, rel=1e-14)
    assert chk.relative_difference < 1e-4


def test_first_variation_on_critical_sphere_vanishes():
    c = charts.round_sphere(2, radius=1.5)

    def field(u):
        x, n = c.func(u), c.normal_func(u)
        w = x[2] * x[2] + x[0]
        return [w * ni for ni in n]

    r = variation.first_variation_residual(c, field, h=0.01, resolution=24)
    assert abs(r.reference) < 1e-12
    assert r.residual < 1e-6
    assert r.order == pytest.approx(2.0, abs=0.05)


def test_first_variation_k2_in_sphere_background():
    c = charts.make_family_chart("clifford", r1=0.6, r2=0.8)
    r = variation.first_variation_residual(c, h=0.01, resolution=24, invariant=True)
    assert r.relative_residual < 1e-6
    assert r.order == pytest.approx(2.0, abs=0.05)


def test_first_variation_k4_ellipsoid():
    c = charts.ellipsoid(2.0)

    def field(u):
        x, n = c.func(u), c.normal_func(u)
        return [x[4] * x[4] * ni for ni in n]

    r = variation.first_variation_residual(c, field, h=0.01, resolution=32, invariant=True)
    assert r.relative_residual < 1e-5
    assert r.order == pytest.approx(2.0, abs=0.1)


def test_perturbed_chart_stays_on_sphere():
    import numpy as np

    c = charts.product_of_spheres((2, 2), (0.6, 0.8))
    p = variation.perturbed_chart(c, variation.normal_variation(c), 0.1)
    x = p.points(charts.quadrature_rule(p, 4).nodes)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
    assert p.symmetries == () and p.params["t"] == 0.1


def test_errors():
    with pytest.raises(ParameterError):
        variation.jacobi_spectrum("S3", 3)
    with pytest.raises(ParameterError):
        variation.jacobi_spectrum("S4", 1)
    with pytest.raises(UnsupportedError):
        variation.first_variation_residual(charts.product_of_spheres((2, 2), (0.6, 0.8)))
    with pytest.raises(ParameterError):
        variation.first_variation_residual(charts.round_sphere(2), h=0.0)
    with pytest.raises(UnsupportedError):
        variation.normal_variation(charts.round_sphere(2).with_func(charts.round_sphere(2).func, normal_func=None))
