"""Decoherence exponents and phase functions as frequency integrals.

Gamma = 2 int dW I(W) coth(hbar W / 2 kB T) f(W, t) / W^2, evaluated with the
batched Gauss-Kronrod engine over a whole array of observation times at once.
Single-mode densities bypass quadrature entirely.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DomainError
from .quadrature import integrate
from .spectral import SingleMode
from .units import coth_thermal, energy_to_angfreq, omega_coth

# (c2, c1, c0) of every exponent appearing in the three-pulse polarization
WEAK_COEFFS = (
    (-1, -1, -1), (-1, -1, 0), (-1, 0, 0), (-1, -1, 1), (-1, 1, 1),
    (-1, 1, 0), (-1, 0, -1), (-1, 0, 1), (-1, 1, -1),
)


@dataclass(frozen=True)
class QuadConfig:
    """Frequency-integration settings.

    ``omega_max`` is in meV; ``None`` picks the density's default cutoff
    (40 omega_c, or omega_p + 8 gamma_p if larger).
    """

    omega_max: Optional[float] = None
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 20000

    def __post_init__(self):
        if self.omega_max is not None and not self.omega_max > 0:
            raise DomainError("omega_max must be > 0")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be > 0")
        if self.max_panels < 1:
            raise DomainError("max_panels must be >= 1")

    def cutoff(self, sd):
        """Upper integration limit in rad/ps."""
        e = self.omega_max if self.omega_max is not None else sd.default_omega_max()
        return energy_to_angfreq(e)


DEFAULT_QUAD = QuadConfig()


def _as_times(t, t_last):
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < t_last - 1e-12):
        raise DomainError(f"observation time must be >= last pulse time {t_last}")
    return arr


def _breakpoints(wmax, span, max_panels):
    if span <= 0:
        return None
    n = int(wmax * span / math.pi)
    n = min(n, max_panels // 4)
    if n < 1:
        return None
    return np.linspace(0.0, wmax, n + 2)[1:-1]


def _integrate_rows(sd, T, rows, span, qc, n_rows):
    """Integrate ``rows(w)`` (shape (n_rows, len(w))) against the bath weights.

    ``rows`` returns a pair (thermal_rows, phase_rows): the first are the
    scaled filters weighted by 2 (I/W)(W coth), the second the scaled
    Im-bilinears weighted by 4 I.
    """
    wmax = qc.cutoff(sd)

    def f(w):
        thermal, phase = rows(w)
        out = []
        if thermal is not None:
            out.append(2.0 * sd.rate_over_omega(w) * omega_coth(w, T) * thermal)
        if phase is not None:
            out.append(4.0 * sd.rate(w) * phase)
        return np.concatenate([o.reshape(-1, w.size) for o in out], axis=0)

    res = integrate(f, 0.0, wmax, breakpoints=_breakpoints(wmax, span, qc.max_panels),
                    rel_tol=qc.rel_tol, abs_tol=qc.abs_tol, max_panels=qc.max_panels,
                    batch=n_rows)
    return res.value


def single_mode_g_prime(sd, T):
    """g' = 2 |g_p|^2 / Omega_p^2 coth(hbar Omega_p / 2 kB T)."""
    return 2.0 * sd.coupling_ratio * coth_thermal(sd.omega_p, T)


def _chunks(n, size):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


_T_CHUNK = 256


def gamma_pi(sd, T, times, t, qc=None):
    """Decoherence exponent under a pi-pulse train with pulses at ``times``."""
    qc = qc or DEFAULT_QUAD
    times = tuple(times)
    ts = _as_times(t, times[-1])
    if isinstance(sd, SingleMode):
        w = energy_to_angfreq(sd.omega_p)
        out = single_mode_g_prime(sd, T) * kernels.filter_pi(np.array([w]), times, ts)[:, 0]
    else:
        out = np.empty(ts.size)
        for sl in _chunks(ts.size, _T_CHUNK):
            sub = ts[sl]
            out[sl] = _integrate_rows(
                sd, T, lambda w: (kernels.filter_pi_scaled(w, times, sub), None),
                sub.max() - times[0], qc, sub.size)
    return out if np.ndim(t) else float(out[0])


def gamma_weak(sd, T, c, times, t, qc=None):
    """Gamma_{c2 c1 c0}(t) of the three-pulse expansion."""
    qc = qc or DEFAULT_QUAD
    times = tuple(times)
    ts = _as_times(t, times[-1])
    if isinstance(sd, SingleMode):
        w = energy_to_angfreq(sd.omega_p)
        out = single_mode_g_prime(sd, T) * kernels.filter_weak(np.array([w]), c, times, ts)[:, 0]
    else:
        out = np.empty(ts.size)
        for sl in _chunks(ts.size, _T_CHUNK):
            sub = ts[sl]
            out[sl] = _integrate_rows(
                sd, T, lambda w: (kernels.filter_weak_scaled(w, c, times, sub), None),
                sub.max() - times[0], qc, sub.size)
    return out if np.ndim(t) else float(out[0])


def gamma_phase(sd, kind, times, t, qc=None):
    """Phase function 4 int dW I(W)/W^2 Im{...} of the requested kind (radians).

    Every kind carries the I/W^2 weight, including the one shared by the
    k2 - k1 + k0 and k2 + k1 - k0 terms.
    """
    qc = qc or DEFAULT_QUAD
    times = tuple(times)
    ts = _as_times(t, times[-1])
    if isinstance(sd, SingleMode):
        w = energy_to_angfreq(sd.omega_p)
        im = kernels.gamma_integrand_imag(np.array([w]), kind, times, ts)[:, 0]
        out = 4.0 * sd.coupling_ratio * im
    else:
        out = np.empty(ts.size)
        for sl in _chunks(ts.size, _T_CHUNK):
            sub = ts[sl]
            out[sl] = _integrate_rows(
                sd, 0.0,
                lambda w: (None, kernels.gamma_integrand_imag_scaled(w, kind, times, sub)),
                sub.max() - times[0], qc, sub.size)
    return out if np.ndim(t) else float(out[0])


def weak_exponents(sd, T, times, t, qc=None):
    """All nine Gamma_{c2c1c0} and five phase functions in one batched pass.

    Returns ``(gammas, phases)``: dicts keyed by coefficient triple and by
    phase kind, each holding arrays over ``t``.
    """
    qc = qc or DEFAULT_QUAD
    times = tuple(times)
    ts = _as_times(t, times[-1])
    n_g, n_p = len(WEAK_COEFFS), len(kernels.PHASE_KINDS)
    if isinstance(sd, SingleMode):
        w = np.array([energy_to_angfreq(sd.omega_p)])
        gp = single_mode_g_prime(sd, T)
        gam = {c: gp * kernels.filter_weak(w, c, times, ts)[:, 0] for c in WEAK_COEFFS}
        ph = {k: 4.0 * sd.coupling_ratio * kernels.gamma_integrand_imag(w, k, times, ts)[:, 0]
              for k in kernels.PHASE_KINDS}
        return gam, ph
    chunk = max(1, _T_CHUNK // (n_g + n_p))
    vals = np.empty((n_g + n_p, ts.size))
    for sl in _chunks(ts.size, chunk):
        sub = ts[sl]

        def rows(w, sub=sub):
            a2, a1, a0 = kernels._weak_parts(kernels.a_m_scaled, w, times, sub)
            therm = np.stack([np.abs(c[0] * a2 + c[1] * a1 + c[2] * a0) ** 2
                              for c in WEAK_COEFFS])
            phase = np.stack([kernels._imag_bilinear(k, a2, a1, a0)
                              for k in kernels.PHASE_KINDS])
            return therm, phase

        out = _integrate_rows(sd, T, rows, sub.max() - times[0], qc, (n_g + n_p) * sub.size)
        vals[:, sl] = out.reshape(n_g + n_p, sub.size)
    gam = {c: vals[i] for i, c in enumerate(WEAK_COEFFS)}
    ph = {k: vals[n_g + i] for i, k in enumerate(kernels.PHASE_KINDS)}
    return gam, ph


def single_mode_gamma_plus(g_prime, omega_p, t0, t):
    """Free-decay exponent g' 2[1 - cos W_p (t - t0)] (omega_p in rad/ps)."""
    return g_prime * 2.0 * (1.0 - np.cos(omega_p * (np.asarray(t) - t0)))


def single_mode_gamma_minus(g_prime, omega_p, t0, t1, t):
    """Exponent after one pi pulse at t1, in amplitude-phase form.

    g' {2[3 - 2 cos x] - 2 sqrt(5 - 4 cos x) cos[W_p (t - t0) + phi]} with
    x = W_p (t1 - t0) and phi = atan2(-2 sin x, 2 cos x - 1), which makes it
    identical to g' |a0 - a1|^2.
    """
    if not t0 < t1:
        raise DomainError("need t0 < t1")
    t = np.asarray(t, dtype=float)
    if np.any(t < t1):
        raise DomainError("need t >= t1")
    x = omega_p * (t1 - t0)
    phi = math.atan2(-2.0 * math.sin(x), 2.0 * math.cos(x) - 1.0)
    amp = math.sqrt(5.0 - 4.0 * math.cos(x))
    return g_prime * (2.0 * (3.0 - 2.0 * math.cos(x))
                      - 2.0 * amp * np.cos(omega_p * (t - t0) + phi))
