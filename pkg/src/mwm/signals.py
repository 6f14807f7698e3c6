"""Observable layer: diffracted-signal intensities, time integrals and t1 sweeps.

Intensities are per-qubit and dimensionless. The inhomogeneous Gaussian
distribution of qubit frequencies enters as exp[-tau^2 dB^2 / 2] on each
amplitude, tau being the order's detuning time argument.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoEchoError, QuadratureError
from .gamma import DEFAULT_QUAD, gamma_pi, gamma_weak, weak_exponents
from .kernels import (GAMMA_M00_MINUS, GAMMA_M00_PLUS, GAMMA_M0PM, GAMMA_MM0, GAMMA_MP0)
from .pulses import (FOUR_WAVE, FREE_INDUCTION, SIX_WAVE, WEAK_ORDERS, DiffractionOrder, Mode,
                     echo_time, phase_matching_direction)
from .quadrature import integrate
from .units import energy_to_angfreq


@dataclass(frozen=True)
class EnsembleSpec:
    """Gaussian inhomogeneous broadening of the qubit transition (FWHM-free width, meV)."""

    delta_B: float = 0.0

    def __post_init__(self):
        if not self.delta_B >= 0:
            raise DomainError("delta_B must be >= 0")

    @property
    def width(self):
        """Width in rad/ps."""
        return energy_to_angfreq(self.delta_B)


HOMOGENEOUS = EnsembleSpec(0.0)


@dataclass
class SignalCurve:
    """Sampled intensity of one diffraction order.

    ``kind`` is ``"t"`` for time-resolved curves and ``"t1"`` for
    time-integrated intensities against the first control-pulse time.
    """

    order: DiffractionOrder
    x: np.ndarray
    intensity: np.ndarray
    kind: str = "t"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.x.shape != self.intensity.shape:
            raise DomainError("x and intensity must have equal length")


def _scalar_out(t, arr):
    if np.ndim(t):
        return arr
    v = np.asarray(arr).reshape(-1)[0]
    return complex(v) if np.iscomplexobj(v) else float(v)


def intensity_pi_train(seq, sd, T, ens, t, qc=None):
    """Intensity in the phase-matched direction (-1)^M K^(M) of a pi-pulse train."""
    if seq.mode is not Mode.PI_TRAIN:
        raise DomainError("intensity_pi_train needs a pi-train sequence")
    order = phase_matching_direction(seq.n_control)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    g = gamma_pi(sd, T, seq.times, ts, qc)
    tau = order.detuning_time(seq.times, ts)
    pref = 0.25 * math.sin(seq.thetas[0]) ** 2
    return _scalar_out(t, pref * np.exp(-2.0 * g - (tau * ens.width) ** 2))


def intensity_free_induction(seq, sd, T, ens, t, qc=None):
    """Free-induction reference along k0: only the exciting pulse acts."""
    t0 = seq.times[0]
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    g = gamma_pi(sd, T, (t0,), ts, qc)
    pref = 0.25 * math.sin(seq.thetas[0]) ** 2
    return _scalar_out(t, pref * np.exp(-2.0 * g - ((ts - t0) * ens.width) ** 2))


def _trig(thetas):
    c = [math.cos(th / 2) for th in thetas]
    s = [math.sin(th / 2) for th in thetas]
    S = [math.sin(th) for th in thetas]
    return c, s, S


def weak_polarization_terms(seq, sd, T, ens, t, qc=None):
    """Per-qubit complex amplitudes of the nine orders radiated by three weak pulses.

    Returns a list of ``(order, amplitude)`` in the order of
    :data:`mwm.pulses.WEAK_ORDERS`; amplitudes are arrays when ``t`` is.
    """
    if seq.mode is not Mode.WEAK_THREE_PULSE:
        raise DomainError("weak_polarization_terms needs a three-pulse weak sequence")
    times = seq.times
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    G, ph = weak_exponents(sd, T, times, ts, qc)
    c, s, S = _trig(seq.thetas)
    E = lambda key: np.exp(-G[key])  # noqa: E731
    ei = lambda x: np.exp(1j * x)  # noqa: E731

    g1 = ph[GAMMA_MM0]
    g5 = ph[GAMMA_MP0]
    gp, gm = ph[GAMMA_M00_PLUS], ph[GAMMA_M00_MINUS]
    g0 = ph[GAMMA_M0PM]
    amps = [
        E((-1, -1, -1)) * 0.5 * S[0] * c[1] ** 2 * c[2] ** 2,
        E((-1, -1, 0)) * 0.5 * (ei(g1) * c[0] ** 2 - ei(-g1) * s[0] ** 2) * S[1] * c[2] ** 2,
        E((-1, 0, 0)) * 0.5 * ((ei(gp) * c[0] ** 2 - ei(-gp) * s[0] ** 2) * c[1] ** 2
                               + (ei(gm) * s[0] ** 2 - ei(-gm) * c[0] ** 2) * s[1] ** 2) * S[2],
        -E((-1, -1, 1)) * 0.5 * S[0] * s[1] ** 2 * c[2] ** 2,
        -E((-1, 1, 1)) * 0.5 * S[0] * c[1] ** 2 * s[2] ** 2,
        E((-1, 1, 0)) * 0.5 * (-ei(g5) * c[0] ** 2 + ei(-g5) * s[0] ** 2) * S[1] * s[2] ** 2,
        -E((-1, 0, -1)) * np.cos(g0) * 0.25 * S[0] * S[1] * S[2],
        -E((-1, 0, 1)) * np.cos(g0) * 0.25 * S[0] * S[1] * S[2],
        E((-1, 1, -1)) * 0.5 * S[0] * s[1] ** 2 * s[2] ** 2,
    ]
    out = []
    for (order, targ), a in zip(WEAK_ORDERS, amps):
        env = np.exp(-0.5 * (targ.evaluate(times, ts) * ens.width) ** 2)
        out.append((order, _scalar_out(t, np.asarray(a * env, dtype=complex))))
    return out


def intensity_weak(seq, sd, T, ens, order, t, qc=None):
    """Intensity of the 4WM (2k2-k0) or 6WM (2k2-2k1+k0) echo of three weak pulses."""
    if seq.mode is not Mode.WEAK_THREE_PULSE:
        raise DomainError("intensity_weak needs a three-pulse weak sequence")
    c, s, S = _trig(seq.thetas)
    if order == FOUR_WAVE:
        coeffs = (-1, 1, 1)
        pref = 0.25 * S[0] ** 2 * c[1] ** 4 * s[2] ** 4
    elif order == SIX_WAVE:
        coeffs = (-1, 1, -1)
        pref = 0.25 * S[0] ** 2 * s[1] ** 4 * s[2] ** 4
    else:
        raise DomainError(f"intensity_weak covers 2k2-k0 and 2k2-2k1+k0, not {order}")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if pref == 0.0:
        return _scalar_out(t, np.zeros_like(ts))
    g = gamma_weak(sd, T, coeffs, seq.times, ts, qc)
    tau = order.detuning_time(seq.times, ts)
    return _scalar_out(t, pref * np.exp(-2.0 * g - (tau * ens.width) ** 2))


def intensity(seq, sd, T, ens, order, t, qc=None):
    """Time-resolved intensity of ``order`` for either sequence kind."""
    if seq.mode is Mode.PI_TRAIN:
        if order == phase_matching_direction(seq.n_control):
            return intensity_pi_train(seq, sd, T, ens, t, qc)
        if order == FREE_INDUCTION or order.coeffs == (1,) + (0,) * seq.n_control:
            return intensity_free_induction(seq, sd, T, ens, t, qc)
        raise DomainError(f"a pi train radiates into {phase_matching_direction(seq.n_control)}, "
                          f"not {order}")
    if order in (FOUR_WAVE, SIX_WAVE):
        return intensity_weak(seq, sd, T, ens, order, t, qc)
    for k, (o, _) in enumerate(WEAK_ORDERS):
        if o == order:
            ts = np.atleast_1d(np.asarray(t, dtype=float))
            amp = weak_polarization_terms(seq, sd, T, ens, ts, qc)[k][1]
            return _scalar_out(t, np.abs(amp) ** 2)
    raise DomainError(f"{order} is not radiated by three weak pulses")


def _time_scales(seq, ens, order):
    """Panel width and the time before which the march must not stop."""
    iv = seq.intervals
    h = min([0.05] + [d / 2 for d in iv])
    if ens.width > 0:
        h = min(h, 0.5 / ens.width)
    t_min = seq.t_last
    try:
        e = echo_time(seq, order)
        if ens.width > 0:
            t_min = max(t_min, e.time + 8.0 / ens.width)
        else:
            t_min = max(t_min, e.time)
    except NoEchoError:
        pass
    return h, t_min


def integrated_intensity(seq, sd, T, ens, order, t_upper=None, qc=None, *,
                         rel_tol=1e-9, tail=1e-12, max_span=2000.0, max_blocks=400):
    """Time-integrated intensity from the last pulse to ``t_upper``.

    With ``t_upper=None`` the upper limit is found automatically: panels are
    appended until the integrand stays below ``tail`` times its peak over five
    consecutive panels. Raises :class:`QuadratureError` (with the partial sum
    as ``estimate``) if that does not happen within ``max_span`` ps.
    """
    qc = qc or DEFAULT_QUAD
    start = seq.t_last

    def f(x):
        return np.asarray(intensity(seq, sd, T, ens, order, x, qc))

    if t_upper is not None:
        if t_upper < start:
            raise DomainError("t_upper must be >= last pulse time")
        if t_upper == start:
            return 0.0
        h, _ = _time_scales(seq, ens, order)
        bps = np.arange(start + h, t_upper, h)
        return float(integrate(f, start, t_upper, breakpoints=bps, rel_tol=rel_tol,
                               abs_tol=1e-300, batch=0).value)

    h, t_min = _time_scales(seq, ens, order)
    total = 0.0
    peak = 0.0
    quiet = 0
    a = start
    width = h
    for _ in range(max_blocks):
        edges = a + width * np.arange(9)
        res = integrate(f, edges[0], edges[-1], breakpoints=edges[1:-1], rel_tol=rel_tol,
                        abs_tol=max(1e-300, 1e-13 * abs(total)), batch=0)
        total += float(res.value)
        vals = f(res.rule.nodes).reshape(-1)
        peak = max(peak, float(np.max(vals)) if vals.size else 0.0)
        # per-panel maxima of the node values of the eight nominal panels
        for lo_e, hi_e in zip(edges[:-1], edges[1:]):
            sel = (res.rule.nodes >= lo_e) & (res.rule.nodes <= hi_e)
            m = float(np.max(vals[sel])) if np.any(sel) else 0.0
            quiet = quiet + 1 if m <= tail * peak else 0
        a = edges[-1]
        if peak == 0.0 and a >= t_min:
            return 0.0
        if quiet >= 5 and a >= t_min:
            return total
        if a >= t_min:
            width *= 1.25
        if a - start > max_span:
            break
    raise QuadratureError(
        f"time integral of {order} did not decay below {tail:g} x peak within {max_span} ps",
        estimate=total, error=None)


def time_resolved_curve(seq, sd, T, ens, order, t_grid, qc=None):
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.asarray(intensity(seq, sd, T, ens, order, t_grid, qc)) if t_grid.size else t_grid
    return SignalCurve(order, t_grid, vals, "t", _meta(seq, sd, T, ens))


def _meta(seq, sd, T, ens, **extra):
    meta = {
        "sequence": f"{seq.mode.value} times_ps={list(seq.times)} "
                    f"theta_over_pi={[th / math.pi for th in seq.thetas]}",
        "reservoir": repr(sd),
        "T_K": T,
        "delta_B_meV": ens.delta_B,
        "normalization": "per-qubit, pulse-area prefactors included",
    }
    meta.update(extra)
    return meta


def _sweep_point(args):
    seq, sd, T, ens, t1, qc = args
    s = seq.with_time(1, t1)
    return (integrated_intensity(s, sd, T, ens, FOUR_WAVE, qc=qc),
            integrated_intensity(s, sd, T, ens, SIX_WAVE, qc=qc))


def map_ordered(fn, items, jobs=1):
    """Order-preserving map, in a process pool when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def sweep_t1(seq, sd, T, ens, t1_grid, qc=None, jobs=1):
    """Time-integrated 4WM and 6WM intensities against the first control-pulse time.

    ``seq`` is a three-pulse template whose t0 and t2 stay fixed. Each grid point
    is evaluated independently, so results do not depend on ``jobs``.
    """
    if seq.mode is not Mode.WEAK_THREE_PULSE:
        raise DomainError("sweep_t1 needs a three-pulse weak template")
    t0, _, t2 = seq.times
    t1_grid = np.asarray(t1_grid, dtype=float)
    if np.any((t1_grid <= t0) | (t1_grid >= t2)):
        raise DomainError("t1 grid must lie strictly inside (t0, t2)")
    res = map_ordered(_sweep_point, [(seq, sd, T, ens, float(t1), qc) for t1 in t1_grid], jobs)
    i4 = np.array([r[0] for r in res], dtype=float)
    i6 = np.array([r[1] for r in res], dtype=float)
    meta = _meta(seq, sd, T, ens, t2_ps=t2)
    return (SignalCurve(FOUR_WAVE, t1_grid, i4, "t1", dict(meta)),
            SignalCurve(SIX_WAVE, t1_grid, i6, "t1", dict(meta)))
