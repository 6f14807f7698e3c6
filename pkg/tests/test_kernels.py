import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwm.kernels import (GAMMA_M0PM, GAMMA_MM0, GAMMA_MP0, PHASE_KINDS, _imag_bilinear, a_m,
                         filter_pi, filter_pi_scaled, filter_weak, filter_weak_scaled,
                         gamma_integrand_imag, theta_phase)
from mwm.spectral import Ohmic, SingleMode
from mwm.units import HBAR

times_st = st.lists(st.floats(0, 3), min_size=4, max_size=4, unique=True).map(sorted)


def brute_a(w, ts, te):
    return cmath.exp(1j * w * ts) - cmath.exp(1j * w * te)


def test_a_m_examples():
    assert a_m(2.0, 0.3, 0.3) == 0
    assert a_m(math.pi, 0.0, 1.0) == pytest.approx(2.0)
    assert abs(a_m(1.0, 0.0, 1.0)) ** 2 == pytest.approx(2 * (1 - math.cos(1)), rel=1e-14)
    assert 2 * (1 - math.cos(1)) == pytest.approx(0.91939, abs=1e-5)


def test_filter_pi_examples():
    w = np.linspace(0.1, 20, 7)
    assert np.allclose(filter_pi(w, (0.1,), 0.5), 2 * (1 - np.cos(w * 0.4)), rtol=1e-13)
    assert filter_pi(1.0, (0.0, math.pi), 2 * math.pi) == pytest.approx(16.0, rel=1e-14)
    assert filter_pi(3.0, (0.2,), 0.2) == 0.0


def test_filter_weak_examples():
    w = np.linspace(0.1, 30, 11)
    tt = (0.0, 0.1, 0.2)
    assert np.allclose(filter_weak(w, (-1, 1, -1), tt, 0.37), filter_pi(w, tt, 0.37), rtol=1e-13)
    assert filter_weak(2.0, (-1, 0, 0), tt, 0.2) == 0.0
    ref = abs(-brute_a(1.0, 0.2, 0.4) + brute_a(1.0, 0.1, 0.2) + brute_a(1.0, 0.0, 0.1)) ** 2
    assert filter_weak(1.0, (-1, 1, 1), tt, 0.4) == pytest.approx(ref, rel=1e-14)


def test_phase_integrand_examples():
    for kind in PHASE_KINDS:
        assert gamma_integrand_imag(1.3, kind, (0.0, 0.0, 0.2), 0.2) == 0.0
    ref = (brute_a(1.0, 0.2, 0.4) * brute_a(1.0, 0.1, 0.2).conjugate()).imag
    assert gamma_integrand_imag(1.0, GAMMA_M0PM, (0.0, 0.1, 0.2), 0.4) == pytest.approx(ref)


@given(st.floats(0.01, 40), times_st)
def test_sign_flip_maps_mm0_to_mp0(w, tt):
    t0, t1, t2, t = tt
    a2, a1, a0 = brute_a(w, t2, t), brute_a(w, t1, t2), brute_a(w, t0, t1)
    assert _imag_bilinear(GAMMA_MM0, a2, -a1, a0) == pytest.approx(
        _imag_bilinear(GAMMA_MP0, a2, a1, a0), abs=1e-12)


@given(st.floats(0, 50), times_st)
def test_filters_nonnegative(w, tt):
    t0, t1, t2, t = tt
    assert filter_pi(w, (t0, t1, t2), t) >= 0
    for c in [(-1, 1, 1), (1, 0, -1), (0, 1, 0)]:
        assert filter_weak(w, c, (t0, t1, t2), t) >= 0


@given(st.floats(0.05, 5))
def test_pairwise_cancellation(tau):
    w = 2 * math.pi / tau
    assert filter_pi(w, (0.0, tau), 2 * tau) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.01, 50), times_st)
def test_telescoping(w, tt):
    t0, t1, t2, t = tt
    assert filter_weak(w, (-1, -1, -1), (t0, t1, t2), t) == pytest.approx(
        filter_pi(w, (t0,), t), abs=1e-11)


@given(st.floats(0.01, 50), times_st, st.floats(-5, 5))
def test_time_translation(w, tt, s):
    t0, t1, t2, t = tt
    sh = (t0 + s, t1 + s, t2 + s)
    assert filter_pi(w, sh, t + s) == pytest.approx(filter_pi(w, (t0, t1, t2), t), abs=1e-10)
    assert filter_weak(w, (-1, 1, 1), sh, t + s) == pytest.approx(
        filter_weak(w, (-1, 1, 1), (t0, t1, t2), t), abs=1e-10)
    for kind in PHASE_KINDS:
        assert gamma_integrand_imag(w, kind, sh, t + s) == pytest.approx(
            gamma_integrand_imag(w, kind, (t0, t1, t2), t), abs=1e-10)


def test_scaled_forms():
    w = np.array([1e-3, 0.7, 9.0])
    tt = (0.0, 0.1, 0.25)
    assert np.allclose(filter_pi_scaled(w, tt, 0.4) * w ** 2, filter_pi(w, tt, 0.4), rtol=1e-12)
    assert np.allclose(filter_weak_scaled(w, (-1, 1, 1), tt, 0.4) * w ** 2,
                       filter_weak(w, (-1, 1, 1), tt, 0.4), rtol=1e-12)
    # Omega -> 0: f/Omega^2 -> (sum of signed interval lengths)^2
    assert filter_pi_scaled(0.0, tt, 0.4) == pytest.approx((0.1 - 0.15 + 0.15) ** 2)


def test_theta_phase():
    sd = SingleMode(4.0, 13.0)
    assert theta_phase(sd, 0.3, 0.3) == 0.0
    w = 13.0 / HBAR
    g2 = 4.0 / HBAR ** 2
    assert theta_phase(sd, 0.1, 0.5) == pytest.approx(g2 * (w * 0.4 - math.sin(w * 0.4)) / w ** 2)
    vals = [theta_phase(Ohmic(0.1, 8.0), 0.0, tau) for tau in (0.05, 0.1, 0.4, 1.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
