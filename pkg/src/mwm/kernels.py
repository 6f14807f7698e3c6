"""Frequency-domain filter functions of the pulse timing.

All functions broadcast: ``omega`` (rad/ps) along the last axis and ``t`` (ps)
along the leading axis when both are arrays, giving shape ``(len(t), len(omega))``.

The ``*_scaled`` variants return the kernel divided by Omega^2 (or each
a^(m) divided by Omega), evaluated through sinc so they stay finite at 0.
"""
import math

import numpy as np

from .errors import DomainError
from .quadrature import integrate
from .spectral import SingleMode
from .units import HBAR, energy_to_angfreq

# Identifiers of the phase functions entering the weak-pulse polarization.
GAMMA_MM0 = "--0"
GAMMA_MP0 = "-+0"
GAMMA_M00_PLUS = "-00+"
GAMMA_M00_MINUS = "-00-"
GAMMA_M0PM = "-0+-"  # shared by the k2-k1+k0 and k2+k1-k0 terms
PHASE_KINDS = (GAMMA_MM0, GAMMA_MP0, GAMMA_M00_PLUS, GAMMA_M00_MINUS, GAMMA_M0PM)
_ALIASES = {"-0-": GAMMA_M0PM, "-0+": GAMMA_M0PM, "-0±": GAMMA_M0PM, "-0+-": GAMMA_M0PM}


def _grid(omega, t):
    w = np.asarray(omega, dtype=float)
    t = np.asarray(t, dtype=float)
    if w.ndim and t.ndim:
        return w[None, :], t[:, None]
    return w, t


def a_m(omega, t_start, t_end):
    """e^{i Omega t_start} - e^{i Omega t_end}."""
    w, ts = _grid(omega, t_start)
    w, te = _grid(omega, t_end)
    return np.exp(1j * w * ts) - np.exp(1j * w * te)


def a_m_scaled(omega, t_start, t_end):
    """a_m / Omega, finite at Omega = 0 where it equals -i (t_end - t_start)."""
    w, ts = _grid(omega, t_start)
    w, te = _grid(omega, t_end)
    tau = te - ts
    return -1j * tau * np.sinc(w * tau / (2.0 * math.pi)) * np.exp(0.5j * w * (ts + te))


def _pi_sum(fn, omega, times, t):
    times = list(times)
    M = len(times) - 1
    total = 0.0
    for m in range(M):
        total = total + (-1) ** m * fn(omega, times[m], times[m + 1])
    return total + (-1) ** M * fn(omega, times[M], t)


def filter_pi(omega, times, t):
    """|sum_m (-1)^m (e^{i W t_m} - e^{i W t_{m+1}}) + (-1)^M (e^{i W t_M} - e^{i W t})|^2."""
    return np.abs(_pi_sum(a_m, omega, times, t)) ** 2


def filter_pi_scaled(omega, times, t):
    return np.abs(_pi_sum(a_m_scaled, omega, times, t)) ** 2


def _weak_parts(fn, omega, times, t):
    t0, t1, t2 = times
    return fn(omega, t2, t), fn(omega, t1, t2), fn(omega, t0, t1)


def filter_weak(omega, c, times, t):
    """|c2 a2 + c1 a1 + c0 a0|^2 with c = (c2, c1, c0) in {+1, -1, 0}."""
    a2, a1, a0 = _weak_parts(a_m, omega, times, t)
    return np.abs(c[0] * a2 + c[1] * a1 + c[2] * a0) ** 2


def filter_weak_scaled(omega, c, times, t):
    a2, a1, a0 = _weak_parts(a_m_scaled, omega, times, t)
    return np.abs(c[0] * a2 + c[1] * a1 + c[2] * a0) ** 2


def _imag_bilinear(kind, a2, a1, a0):
    kind = _ALIASES.get(kind, kind)
    if kind == GAMMA_MM0:
        return np.imag((a2 + a1) * np.conj(a0))
    if kind == GAMMA_MP0:
        return np.imag((a2 - a1) * np.conj(a0))
    if kind == GAMMA_M00_PLUS:
        return np.imag(a2 * np.conj(a1 + a0))
    if kind == GAMMA_M00_MINUS:
        return np.imag(a2 * np.conj(a1 - a0))
    if kind == GAMMA_M0PM:
        return np.imag(a2 * np.conj(a1))
    raise DomainError(f"unknown phase kind {kind!r}; expected one of {PHASE_KINDS}")


def gamma_integrand_imag(omega, kind, times, t):
    """Im{...} factor of the requested phase function, e.g. Im{(a2 + a1) a0*} for ``--0``."""
    return _imag_bilinear(kind, *_weak_parts(a_m, omega, times, t))


def gamma_integrand_imag_scaled(omega, kind, times, t):
    return _imag_bilinear(kind, *_weak_parts(a_m_scaled, omega, times, t))


def theta_phase(sd, t_start, t_end, rel_tol=1e-10):
    """Global phase int I(W) [W tau - sin W tau] / W^2 dW accumulated over [t_start, t_end].

    It multiplies the identity on the qubit and cancels from every trace; kept
    for cross-checks of the exact single-mode evolution.
    """
    tau = t_end - t_start
    if tau < 0:
        raise DomainError("t_end must be >= t_start")
    if tau == 0:
        return 0.0
    if isinstance(sd, SingleMode):
        w = energy_to_angfreq(sd.omega_p)
        g2 = sd.g_sq / HBAR ** 2
        return g2 * (w * tau - math.sin(w * tau)) / w ** 2

    def f(w):
        x = w * tau
        # (x - sin x)/x^2 via series near 0
        small = x < 1e-3
        xs = np.where(small, 1.0, x)
        core = np.where(small, x / 6.0 - x ** 3 / 120.0, (xs - np.sin(xs)) / xs ** 2)
        return sd.rate(w) * core * tau ** 2

    wmax = energy_to_angfreq(sd.default_omega_max())
    bps = np.arange(1, int(wmax * tau / math.pi) + 1) * math.pi / tau
    return float(integrate(f, 0.0, wmax, breakpoints=bps[:2000], rel_tol=rel_tol).value)
