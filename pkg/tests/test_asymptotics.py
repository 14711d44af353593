from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from willmore4 import asymptotics, charts, energies
from willmore4.errors import DomainError, ParameterError

PI = math.pi


def test_integrand_at_the_undilated_ring():
    assert float(asymptotics.dilated_integrand_I(1.0, 0.0)) == pytest.approx(2.0)
    assert asymptotics.dilated_energy_closed(1.0) == pytest.approx(192 * PI ** 2, rel=1e-12)


@given(st.floats(min_value=0.05, max_value=200.0), st.floats(min_value=-0.99, max_value=0.99))
@settings(max_examples=40, deadline=None)
def test_tabulated_integrand_matches_geometry(a, s):
    table = float(asymptotics.dilated_integrand_I(a, s, exact=True))
    geo = float(asymptotics.dilated_integrand_geometric(a, s)[0])
    assert table == pytest.approx(geo, rel=1e-8)


def test_float_and_exact_paths_agree_for_moderate_a():
    s = np.linspace(-0.95, 0.95, 11)
    for a in (0.8, 2.0, 30.0):
        assert np.allclose(asymptotics.dilated_integrand_I(a, s), asymptotics.dilated_integrand_I(a, s, exact=True),
                           rtol=1e-9)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 5.0])
def test_one_dimensional_reduction_matches_four_dimensional_quadrature(a):
    closed = asymptotics.dilated_energy_closed(a)
    assert energies.energy_bar(charts.dilated_anchor(a), 64) == pytest.approx(closed, rel=1e-5)


def test_leading_coefficient_fit():
    fit = asymptotics.asymptotic_fit([20, 40, 80, 160])
    assert fit.coefficient == pytest.approx(asymptotics.ASYMPTOTIC_COEFFICIENT, rel=1e-2)
    rough = asymptotics.asymptotic_fit([10, 20])
    assert rough.coefficient == pytest.approx(asymptotics.ASYMPTOTIC_COEFFICIENT, rel=5e-2)
    assert len(rough.fit_coefficients) == 2


def test_energy_grows_for_large_dilation():
    e = [asymptotics.dilated_energy_closed(a) for a in (10.0, 20.0, 40.0, 80.0)]
    assert all(x < y for x, y in zip(e, e[1:]))


def test_lemma_integrals_and_limit_combination():
    v01, lim01 = asymptotics.lemma_integral(0, 1, 1e4)
    v23, lim23 = asymptotics.lemma_integral(2, 3, 1e4)
    assert lim01 == pytest.approx(256 / 315) and lim23 == pytest.approx(32 / 315)
    assert v01 == pytest.approx(lim01, abs=1e-3) and v23 == pytest.approx(lim23, abs=1e-3)
    assert asymptotics.lemma_integral(1, 2, 10.0)[1] == 0.0
    assert asymptotics.lemma_integral(0, 0, 10.0)[1] == 0.0
    assert asymptotics.lemma_integral(0, 12, 10.0)[1] is None
    assert asymptotics.limit_combination(1e4) == pytest.approx(asymptotics.ASYMPTOTIC_COEFFICIENT, rel=1e-6)


def test_errors():
    with pytest.raises(DomainError):
        asymptotics.dilated_integrand_I(-1.0, 0.0)
    with pytest.raises(DomainError):
        asymptotics.dilated_integrand_I(1.0, 1.5)
    with pytest.raises(DomainError):
        asymptotics.dilated_energy_closed(0.0)
    with pytest.raises(ParameterError):
        asymptotics.asymptotic_fit([10.0])
    with pytest.raises(ParameterError):
        asymptotics.asymptotic_fit([20.0, 10.0])
    with pytest.raises(ParameterError):
        asymptotics.lemma_integral(-1, 0, 2.0)
