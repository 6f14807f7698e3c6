import math

import numpy as np
import pytest
from scipy.optimize import brentq
from hypothesis import given
from hypothesis import strategies as st

from mwm.errors import DomainError, UnsupportedOperationError
from mwm.spectral import (GaussianOhmic, Ohmic, SingleMode, Tabulated, density, eta, omega_th,
                          read_tabulated_csv, stabilization_interval)
from mwm.units import HBAR, KB


def test_ohmic_values(ohmic):
    assert density(ohmic, 0.0) == 0.0
    assert density(ohmic, 8.0) == pytest.approx(0.1 * 8 * math.exp(-1), rel=1e-14)
    assert density(ohmic, 8.0) == pytest.approx(0.29430, abs=1e-5)


def test_band_value(band):
    ohm = 0.1 * 13 * math.exp(-13 / 8)
    peak = 0.05 * 169 / (math.sqrt(math.pi) * 4)
    assert ohm == pytest.approx(0.25599, abs=1e-5)
    assert peak == pytest.approx(1.1918, abs=1e-4)
    assert density(band, 13.0) == pytest.approx(ohm + peak, rel=1e-14)


def test_single_mode_has_no_pointwise_density():
    with pytest.raises(UnsupportedOperationError):
        density(SingleMode(1.0, 13.0), 13.0)


def test_tabulated_interpolation_and_zero_outside():
    sd = Tabulated([1.0, 2.0, 4.0], [0.0, 1.0, 3.0])
    assert density(sd, 1.5) == pytest.approx(0.5)
    assert density(sd, 3.0) == pytest.approx(2.0)
    assert density(sd, 0.5) == 0.0 and density(sd, 5.0) == 0.0


@pytest.mark.parametrize("kw", [dict(alpha=-0.1, omega_c=8), dict(alpha=0.1, omega_c=0)])
def test_ohmic_validation(kw):
    with pytest.raises(DomainError):
        Ohmic(**kw)


def test_tabulated_validation():
    with pytest.raises(DomainError):
        Tabulated([1.0, 1.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        Tabulated([1.0, 2.0], [0.0, -1.0])


def test_tabulated_csv(tmp_path):
    p = tmp_path / "density.csv"
    p.write_text("omega_meV,I_meV\n1,0\n2,1\n4,3\n")
    sd = read_tabulated_csv(p)
    assert density(sd, 3.0) == pytest.approx(2.0)


def test_eta(ohmic):
    assert eta(ohmic, 8.0, 0.0) == density(ohmic, 8.0)
    assert eta(ohmic, 8.0, 10.0) == pytest.approx(0.29435, abs=1e-5)
    # small-frequency limit 2 alpha kB T
    assert eta(ohmic, 1e-7, 100.0) == pytest.approx(2 * 0.1 * KB * 100, rel=1e-6)


def test_omega_th_examples(ohmic):
    assert omega_th(SingleMode(1.0, 13.0), 10.0) == 13.0
    assert omega_th(ohmic, 0.0) == pytest.approx(8.0, abs=1e-5)


def test_omega_th_band_matches_stationary_point(band):
    # the band weight Omega^2 exp(-(Omega-13)^2/16) alone peaks at (13 + sqrt(233))/2 = 14.13
    def deta(w, h=1e-5):
        return (eta(band, w + h, 10.0) - eta(band, w - h, 10.0)) / (2 * h)

    root = brentq(deta, 13.0, 14.5, xtol=1e-12)
    got = omega_th(band, 10.0)
    assert got == pytest.approx(root, abs=1e-5)
    assert 13.0 < got < (13 + math.sqrt(233)) / 2


def test_omega_th_nonincreasing_in_T(ohmic):
    vals = [omega_th(ohmic, T) for T in (0.0, 10.0, 50.0, 100.0)]
    assert all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))


def test_stabilization_interval(ohmic):
    assert stabilization_interval(SingleMode(1.0, 13.0), 0.0) == pytest.approx(
        math.pi * HBAR / 26, rel=1e-12)
    assert stabilization_interval(SingleMode(1.0, 13.0), 0.0) == pytest.approx(0.0795, abs=1e-4)
    assert stabilization_interval(ohmic, 0.0) == pytest.approx(0.1292, abs=1e-4)
    assert stabilization_interval(SingleMode(1.0, 26.0), 0.0) == pytest.approx(
        stabilization_interval(SingleMode(1.0, 13.0), 0.0) / 2, rel=1e-14)


@given(st.floats(0.01, 60), st.floats(0, 200), st.floats(0, 200))
def test_eta_nondecreasing_in_T(w, T1, T2):
    sd = GaussianOhmic(0.1, 8.0, 0.05, 13.0, 4.0)
    lo, hi = sorted((T1, T2))
    assert eta(sd, w, hi) >= eta(sd, w, lo) * (1 - 1e-14)


@given(st.floats(0, 200), st.floats(0, 1), st.floats(0.5, 20))
def test_density_nonnegative(w, a, wc):
    assert density(Ohmic(a, wc), w) >= 0
    assert density(GaussianOhmic(a, wc, a, wc, 1.0), w) >= 0


def test_rate_covariance(band):
    w = np.array([0.3, 5.0, 20.0])
    assert np.allclose(band.rate(w), density(band, HBAR * w) / HBAR, rtol=1e-14)
