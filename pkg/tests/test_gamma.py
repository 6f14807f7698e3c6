import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwm.errors import QuadratureError
from mwm.gamma import (QuadConfig, gamma_phase, gamma_pi, gamma_weak, single_mode_g_prime,
                       single_mode_gamma_minus, single_mode_gamma_plus)
from mwm.kernels import GAMMA_M0PM, GAMMA_MM0, GAMMA_MP0, PHASE_KINDS, filter_pi
from mwm.spectral import Ohmic, SingleMode
from mwm.units import HBAR, KB

WC = 8.0 / HBAR


def closed_ohmic(alpha, wc, tau):
    return 2 * alpha * np.log1p((wc * tau) ** 2)


def test_zero_at_start(ohmic):
    assert gamma_pi(ohmic, 10.0, (0.3,), 0.3) == 0.0
    assert gamma_weak(ohmic, 10.0, (-1, 1, 1), (0.0, 0.1, 0.2), 0.2) > 0  # a0, a1 survive


def test_ohmic_zero_temperature_closed_form(ohmic):
    tau = np.linspace(0.01, 2.0, 50)
    got = gamma_pi(ohmic, 0.0, (0.0,), tau)
    assert np.allclose(got, closed_ohmic(0.1, WC, tau), rtol=1e-9, atol=0)
    assert gamma_pi(ohmic, 0.0, (0.0,), 0.2) == pytest.approx(0.38656, abs=1e-5)


def test_single_mode_closed_forms():
    sd = SingleMode(g_sq=4.0, omega_p=13.0)
    wp = 13.0 / HBAR
    for T in (0.0, 10.0, 100.0):
        gp = single_mode_g_prime(sd, T)
        coth = 1 / math.tanh(13.0 / (2 * KB * T)) if T else 1.0
        assert gp == pytest.approx(2 * 4.0 / 169.0 * coth, rel=1e-14)
        t = np.linspace(0.0, 1.0, 33)
        assert np.allclose(gamma_pi(sd, T, (0.0,), t),
                           single_mode_gamma_plus(gp, wp, 0.0, t), rtol=1e-12, atol=1e-15)
        t = np.linspace(0.2, 1.0, 33)
        assert np.allclose(gamma_pi(sd, T, (0.0, 0.2), t),
                           single_mode_gamma_minus(gp, wp, 0.0, 0.2, t), rtol=1e-10)


def test_weak_identities(band):
    tt = (0.0, 0.12, 0.3)
    t = np.linspace(0.3, 0.9, 7)
    assert np.allclose(gamma_weak(band, 10.0, (-1, 1, -1), tt, t), gamma_pi(band, 10.0, tt, t),
                       rtol=1e-9)
    assert np.allclose(gamma_weak(band, 10.0, (-1, -1, -1), tt, t),
                       gamma_pi(band, 10.0, (0.0,), t), rtol=1e-9)


def _trapezoid_reference(alpha, wc_mev, T, c, times, t, n=10 ** 6):
    # independent evaluation: plain complex exponentials, uniform nodes, explicit origin limit
    wc = wc_mev / HBAR
    w = np.linspace(0.0, 40 * wc, n + 1)
    t0, t1, t2 = times
    ph = lambda a, b: np.exp(1j * w * a) - np.exp(1j * w * b)  # noqa: E731
    f = np.abs(c[0] * ph(t2, t) + c[1] * ph(t1, t2) + c[2] * ph(t0, t1)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        x = HBAR * w / (2 * KB * T)
        g = 2 * alpha * w * np.exp(-w / wc) / np.tanh(x) * f / w ** 2
    lim = (c[0] * (t - t2) + c[1] * (t2 - t1) + c[2] * (t1 - t0)) ** 2
    g[0] = 2 * alpha * (2 * KB * T / HBAR) * lim
    return np.trapezoid(g, w)


def test_weak_against_trapezoid(ohmic):
    ref = _trapezoid_reference(0.1, 8.0, 10.0, (-1, 1, 1), (0.0, 0.1, 0.2), 0.4)
    got = gamma_weak(ohmic, 10.0, (-1, 1, 1), (0.0, 0.1, 0.2), 0.4)
    assert got == pytest.approx(ref, rel=1e-8)


def test_pi_against_trapezoid(ohmic):
    ref = _trapezoid_reference(0.1, 8.0, 50.0, (-1, -1, -1), (0.0, 0.3, 0.6), 1.1)
    got = gamma_pi(ohmic, 50.0, (0.0,), 1.1)
    assert abs(got - ref) <= max(1e-12, 1e-8 * abs(ref))


def test_phase_functions():
    tt = (0.0, 0.1, 0.25)
    sd = SingleMode(4.0, 13.0)
    w = 13.0 / HBAR
    ratio = 4.0 / 169.0
    a = lambda s, e: np.exp(1j * w * s) - np.exp(1j * w * e)  # noqa: E731
    a2, a1, a0 = a(0.25, 0.4), a(0.1, 0.25), a(0.0, 0.1)
    assert gamma_phase(sd, GAMMA_MM0, tt, 0.4) == pytest.approx(
        4 * ratio * np.imag((a2 + a1) * np.conj(a0)), rel=1e-12)
    assert gamma_phase(sd, GAMMA_M0PM, tt, 0.4) == pytest.approx(
        4 * ratio * np.imag(a2 * np.conj(a1)), rel=1e-12)
    for kind in PHASE_KINDS:
        assert gamma_phase(Ohmic(0.1, 8.0), kind, (0.0, 0.0, 0.2), 0.2) == pytest.approx(0, abs=1e-14)


def test_phase_sign_flip_symmetry(ohmic):
    # mirror t1 about the midpoint of [t0, t2]: no closed map, so check linearity directly
    tt = (0.0, 0.1, 0.25)
    mm0 = gamma_phase(ohmic, GAMMA_MM0, tt, 0.4)
    mp0 = gamma_phase(ohmic, GAMMA_MP0, tt, 0.4)
    plus = gamma_phase(ohmic, "-00+", tt, 0.4)
    # Im[(a2+a1)a0*] + Im[(a2-a1)a0*] = 2 Im[a2 a0*]; Im[a2(a1+a0)*] - Im[a2 a1*] = Im[a2 a0*]
    assert mm0 + mp0 == pytest.approx(2 * (plus - gamma_phase(ohmic, GAMMA_M0PM, tt, 0.4)),
                                      rel=1e-8)


def test_gamma_minus_at_pi():
    g = 0.37
    wp = 20.0
    t1 = math.pi / wp
    t = np.linspace(t1, t1 + 3.0, 1000)
    gm = single_mode_gamma_minus(g, wp, 0.0, t1, t)
    assert np.allclose(gm, g * (6 * np.cos(wp * t) + 10), rtol=1e-12)
    assert np.all(gm >= single_mode_gamma_plus(g, wp, 0.0, t))


def test_gamma_minus_small_delta_shift():
    g, wp, d0 = 1.0, 10.0, 1e-3
    t = np.linspace(0.1, 2.0, 200)
    approx = 2 * g * (1 - np.cos(wp * (t - 2 * d0)))
    # the shift is exact to first order; the remainder is second order in wp*d0
    err = np.abs(single_mode_gamma_minus(g, wp, 0.0, d0, t) - approx).max()
    assert err < 5 * (wp * d0) ** 2
    err2 = np.abs(single_mode_gamma_minus(g, wp, 0.0, d0 / 10, t)
                  - 2 * g * (1 - np.cos(wp * (t - 2 * d0 / 10)))).max()
    assert err2 < err / 50


@given(st.floats(0.05, 3.0))
def test_gamma_minus_minimum(x):
    wp = 10.0
    t1 = x / wp
    t = np.linspace(t1, t1 + 2 * math.pi / wp, 4001)
    gm = single_mode_gamma_minus(1.0, wp, 0.0, t1, t)
    assert gm.min() == pytest.approx((math.sqrt(5 - 4 * math.cos(x)) - 1) ** 2, abs=1e-5)


@given(st.floats(0.0, 5.0), st.floats(0.001, 2.0), st.floats(0.0, 3.0), st.floats(0.1, 40.0))
def test_gamma_minus_matches_filter(t0, d0, dt, wp):
    t1 = t0 + d0
    t = t1 + dt
    assert single_mode_gamma_minus(0.7, wp, t0, t1, t) == pytest.approx(
        0.7 * filter_pi(wp, (t0, t1), t), abs=1e-9)


def test_temperature_monotone_and_nonnegative(band):
    t = np.linspace(0.2, 1.5, 14)
    prev = None
    for T in (0.0, 10.0, 50.0, 100.0):
        g = gamma_pi(band, T, (0.0, 0.2), t)
        assert np.all(g >= 0)
        if prev is not None:
            assert np.all(g >= prev * (1 - 1e-10))
        prev = g


def test_continuity(ohmic):
    t = 0.4 + np.array([-1e-7, 0.0, 1e-7])
    g = gamma_weak(ohmic, 10.0, (-1, 1, 1), (0.0, 0.1, 0.2), t)
    assert abs(g[2] - g[0]) < 1e-5


def test_quadrature_budget(ohmic):
    with pytest.raises(QuadratureError):
        gamma_pi(ohmic, 10.0, (0.0,), 50.0, QuadConfig(max_panels=2, rel_tol=1e-12))
