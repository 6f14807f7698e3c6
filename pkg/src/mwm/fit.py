"""Simultaneous least-squares estimation of reservoir and ensemble parameters.

Several diffraction-order curves are stacked into one residual vector and
fitted with a bounded Levenberg-Marquardt iteration started from a small
low-discrepancy design over the bound box.

Parameter names and units: ``alpha``, ``alpha_p`` (dimensionless),
``omega_c``, ``omega_p``, ``gamma_p``, ``delta_B`` (meV) and ``T`` (K).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import qmc

from .errors import DomainError, FitError, MWMError, UnsupportedOperationError
from .pulses import (FOUR_WAVE, FREE_INDUCTION, SIX_WAVE, DiffractionOrder, Mode,
                     echo_time, phase_matching_direction)
from .signals import EnsembleSpec, integrated_intensity, intensity
from .spectral import GaussianOhmic, Ohmic
from .units import HBAR, omega_coth

PARAM_NAMES = ("alpha", "omega_c", "alpha_p", "omega_p", "gamma_p", "delta_B", "T")
_BAND = ("alpha_p", "omega_p", "gamma_p")
_KINDS = ("t", "t1")


@dataclass
class Dataset:
    """One measured curve.

    ``kind="t"``: intensity against detection time for the fixed ``sequence``.
    ``kind="t1"``: time-integrated intensity against the first control-pulse
    time of a three-pulse ``sequence`` (its t1 is replaced by each x).
    ``weight`` defaults to 1/max|y| (1 for an all-zero curve).
    """

    order: DiffractionOrder
    kind: str
    x: np.ndarray
    y: np.ndarray
    sequence: object
    weight: float = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"dataset kind must be one of {_KINDS}, got {self.kind!r}")
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.y.shape or self.x.size == 0:
            raise DomainError("dataset x and y must be equal-length non-empty vectors")
        if self.kind == "t1" and self.sequence.mode is not Mode.WEAK_THREE_PULSE:
            raise DomainError("t1 datasets need a three-pulse weak template")
        if self.weight is None:
            peak = float(np.max(np.abs(self.y)))
            self.weight = 1.0 / peak if peak > 0 else 1.0

    @classmethod
    def from_curve(cls, curve, sequence, weight=None):
        return cls(curve.order, curve.kind, curve.x, curve.intensity, sequence, weight)


@dataclass
class FitProblem:
    datasets: list
    free: tuple
    bounds: dict
    initial: dict
    fixed: dict = field(default_factory=dict)
    n_starts: int = 8
    seed: int = 0

    def __post_init__(self):
        if not self.datasets:
            raise DomainError("a fit problem needs at least one dataset")
        self.free = tuple(self.free)
        for name in self.free + tuple(self.fixed):
            if name not in PARAM_NAMES:
                raise DomainError(f"unknown parameter {name!r}")
        dup = set(self.free) & set(self.fixed)
        if dup:
            raise DomainError(f"parameters both free and fixed: {sorted(dup)}")
        for name in self.free:
            if name not in self.bounds:
                raise DomainError(f"free parameter {name!r} has no bounds")
            lo, hi = self.bounds[name]
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DomainError(f"bounds of {name!r} must be finite and ordered")
            x0 = self.initial.get(name)
            if x0 is None or not lo <= x0 <= hi:
                raise DomainError(f"initial guess of {name!r} missing or outside bounds")
        names = set(self.free) | set(self.fixed)
        for req in ("alpha", "omega_c"):
            if req not in names:
                raise DomainError(f"parameter {req!r} must be free or fixed")
        band = names & set(_BAND)
        if band and band != set(_BAND):
            raise DomainError("alpha_p, omega_p and gamma_p must be given together")
        self._fast = None

    @property
    def lower(self):
        return np.array([self.bounds[n][0] for n in self.free], dtype=float)

    @property
    def upper(self):
        return np.array([self.bounds[n][1] for n in self.free], dtype=float)

    @property
    def x0(self):
        return np.array([self.initial[n] for n in self.free], dtype=float)

    def params(self, x):
        p = dict(self.fixed)
        p.update(zip(self.free, np.asarray(x, dtype=float).tolist()))
        p.setdefault("delta_B", 0.0)
        p.setdefault("T", 0.0)
        return p

    def ranges(self, name):
        """(smallest, largest) value ``name`` can take during the fit."""
        if name in self.free:
            return self.bounds[name]
        v = self.params(self.x0)[name]
        return v, v

    def forward_model(self):
        """The cached fast forward model, or None when it does not apply."""
        if self._fast is None:
            try:
                self._fast = ForwardModel(self)
            except UnsupportedOperationError:
                self._fast = False
        return self._fast or None


def physics(p):
    """(spectral density, T, ensemble) for a full parameter dict."""
    if "alpha_p" in p:
        sd = GaussianOhmic(p["alpha"], p["omega_c"], p["alpha_p"], p["omega_p"], p["gamma_p"])
    else:
        sd = Ohmic(p["alpha"], p["omega_c"])
    return sd, p.get("T", 0.0), EnsembleSpec(p.get("delta_B", 0.0))


def _exact_curve(ds, sd, T, ens, qc):
    if ds.kind == "t":
        return np.atleast_1d(np.asarray(intensity(ds.sequence, sd, T, ens, ds.order, ds.x, qc),
                                        dtype=float))
    return np.array([integrated_intensity(ds.sequence.with_time(1, float(x)), sd, T, ens,
                                          ds.order, qc=qc) for x in ds.x])


def model_curves(problem, x, exact=False, qc=None):
    """Model intensities for every dataset at free-parameter vector ``x``."""
    p = problem.params(x)
    fast = None if exact else problem.forward_model()
    if fast is not None:
        return fast.curves(p)
    sd, T, ens = physics(p)
    out = []
    for k, ds in enumerate(problem.datasets):
        try:
            out.append(_exact_curve(ds, sd, T, ens, qc))
        except MWMError as e:
            e.args = (f"dataset {k}: {e}",) + e.args[1:]
            e.dataset = k
            raise
    return out


def residuals(problem, x, exact=False, qc=None):
    """Concatenated weighted differences (model - data) over all datasets."""
    x = np.asarray(x, dtype=float)
    if problem.free and (np.any(x < problem.lower) or np.any(x > problem.upper)):
        raise DomainError("parameters outside bounds")
    curves = model_curves(problem, x, exact, qc)
    return np.concatenate([ds.weight * (m - ds.y) for ds, m in zip(problem.datasets, curves)])


# ---------------------------------------------------------------------------
# fast forward model


def _node_weights(intervals):
    """Node times and weights d with sum_m c_m a_m = sum_k d_k e^{i W s_k}."""
    w = {}
    for ts, te, c in intervals:
        w[ts] = w.get(ts, 0.0) + c
        w[te] = w.get(te, 0.0) - c
    return [(s, d) for s, d in w.items() if d != 0.0]


def _pair_terms(intervals):
    """Gamma = sum_j coef_j Phi(|s_a - s_b|); returns [(coef, s_a, s_b)]."""
    nodes = _node_weights(intervals)
    out = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            out.append((-4.0 * nodes[i][1] * nodes[j][1], nodes[i][0], nodes[j][0]))
    return out


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel_nodes(a, b, h, n):
    m = max(1, int(math.ceil((b - a) / h - 1e-9)))
    edges = np.linspace(a, b, m + 1)
    u, w = _gl(n)
    d = np.diff(edges)[:, None]
    return (edges[:-1, None] + d * u).ravel(), (d * w).ravel()


class ForwardModel:
    """Fast evaluation of fit datasets with all parameter-free work precomputed.

    Every decoherence exponent used here is a fixed linear combination of
    Phi(s) = int dW (I/W)(W coth)(1 - cos Ws)/W^2 over time differences s, so
    one matrix-vector product per parameter set gives Phi on a fine s grid
    and a cubic spline supplies it everywhere else. Time integrals use fixed
    Gauss-Legendre panels over the window where the inhomogeneous envelope
    is not negligible, so ``delta_B`` must be bounded away from zero.
    """

    omega_order = 20
    t_order = 12

    def __init__(self, problem, s_step=None, envelope_cut=6.5):
        self.problem = problem
        dB_lo, dB_hi = problem.ranges("delta_B")
        self._has_t1 = any(ds.kind == "t1" for ds in problem.datasets)
        if self._has_t1 and dB_lo <= 0:
            raise UnsupportedOperationError("time-integrated datasets need delta_B > 0")
        wc_hi = problem.ranges("omega_c")[1] / HBAR
        wc_lo = problem.ranges("omega_c")[0] / HBAR
        w_hi = 25.0 * wc_hi
        scale_hi = wc_hi
        if "alpha_p" in problem.params(problem.x0):
            wp_hi = problem.ranges("omega_p")[1] / HBAR
            gp_hi = problem.ranges("gamma_p")[1] / HBAR
            gp_lo = problem.ranges("gamma_p")[0] / HBAR
            w_hi = max(w_hi, wp_hi + 9.0 * gp_hi)
            scale_hi = max(scale_hi, wp_hi + 3.0 * gp_hi)
            wc_lo = min(wc_lo, gp_lo)
        self._cut = envelope_cut / (dB_lo / HBAR) if dB_lo > 0 else None
        t_h = min(0.05, 2.0 / scale_hi)
        if dB_hi > 0:
            t_h = min(t_h, 0.5 / (dB_hi / HBAR))

        self._blocks = [self._build(ds, t_h) for ds in problem.datasets]
        s_max = max(b["s_max"] for b in self._blocks)
        h_w = min(2.0 * math.pi / s_max, wc_lo)
        self.omega, wq = _panel_nodes(0.0, w_hi, h_w, self.omega_order)
        h_s = s_step if s_step is not None else 0.05 / scale_hi
        n_s = int(math.ceil(s_max / h_s)) + 1
        self.s = np.linspace(0.0, s_max * (1 + 1e-12), n_s)
        x = self.s[:, None] * self.omega[None, :] / (2.0 * math.pi)
        self._kernel = (0.5 * self.s[:, None] ** 2 * np.sinc(x) ** 2) * wq[None, :]

    def _build(self, ds, t_h):
        seq = ds.sequence
        order = ds.order
        if seq.mode is Mode.PI_TRAIN:
            pm = phase_matching_direction(seq.n_control)
            is_fid = order == FREE_INDUCTION or order.coeffs == (1,) + (0,) * seq.n_control
            if order == pm:
                times = list(seq.times)
                M = seq.n_control
                pref = 0.25 * math.sin(seq.thetas[0]) ** 2

                def intervals(t, times=times, M=M):
                    iv = [(times[m], times[m + 1], (-1.0) ** m) for m in range(M)]
                    return iv + [(times[M], t, (-1.0) ** M)]
            elif is_fid:
                t0 = seq.times[0]
                pref = 0.25 * math.sin(seq.thetas[0]) ** 2

                def intervals(t, t0=t0):
                    return [(t0, t, 1.0)]
                order = DiffractionOrder((1,) + (0,) * seq.n_control)
            else:
                raise UnsupportedOperationError(f"no fast model for {order} of a pi train")
        else:
            th = seq.thetas
            c = [math.cos(a / 2) for a in th]
            s = [math.sin(a / 2) for a in th]
            S = [math.sin(a) for a in th]
            if order == FOUR_WAVE:
                cc = (-1.0, 1.0, 1.0)
                pref = 0.25 * S[0] ** 2 * c[1] ** 4 * s[2] ** 4
            elif order == SIX_WAVE:
                cc = (-1.0, 1.0, -1.0)
                pref = 0.25 * S[0] ** 2 * s[1] ** 4 * s[2] ** 4
            else:
                raise UnsupportedOperationError(f"no fast model for {order}")
            intervals = None

        coef, sa, sb, tau, seg, wt = [], [], [], [], [], []
        s_max = 0.0
        for i, xv in enumerate(ds.x):
            if ds.kind == "t":
                s_seq = seq
                tn = np.array([xv])
                w = np.array([1.0])
            else:
                s_seq = seq.with_time(1, float(xv))
                lo = s_seq.t_last
                try:
                    te = echo_time(s_seq, order).time
                except MWMError:
                    te = lo
                hi = max(lo, te) + self._cut
                tn, w = _panel_nodes(lo, hi, t_h, self.t_order)
            if intervals is None:
                t0, t1, t2 = s_seq.times

                def ivs(t, t0=t0, t1=t1, t2=t2):
                    return [(t2, t, cc[0]), (t1, t2, cc[1]), (t0, t1, cc[2])]
            else:
                ivs = intervals
            if np.any(tn < s_seq.times[0]) or (ds.kind == "t" and np.any(tn < s_seq.t_last)):
                raise DomainError("detection times must follow the last pulse")
            # symbolic pair structure is the same for every node: use a marker time
            marker = -1.2345e9
            terms = _pair_terms(ivs(marker))
            ca = np.array([cf for cf, _, _ in terms])
            A = np.array([[tn_ if a == marker else a for tn_ in tn] for _, a, _ in terms])
            B = np.array([[tn_ if b == marker else b for tn_ in tn] for _, _, b in terms])
            dif = np.abs(A - B).T  # (nodes, pairs)
            s_max = max(s_max, float(dif.max()))
            coef.append(np.broadcast_to(ca, dif.shape))
            sa.append(dif)
            tau.append(order.detuning_time(s_seq.times, tn))
            seg.append(np.full(tn.size, i))
            wt.append(w)
        return {
            "coef": np.concatenate(coef), "s": np.concatenate(sa), "tau": np.concatenate(tau),
            "seg": np.concatenate(seg), "w": np.concatenate(wt), "pref": pref,
            "n": ds.x.size, "s_max": s_max,
        }

    def phi(self, p):
        """Spline of Phi(s) for parameters ``p``."""
        sd, T, _ = physics(p)
        v = sd.rate_over_omega(self.omega) * omega_coth(self.omega, T)
        vals = self._kernel @ v
        return CubicSpline(self.s, vals, bc_type=((1, 0.0), "not-a-knot"))

    def curves(self, p):
        spl = self.phi(p)
        width = p.get("delta_B", 0.0) / HBAR
        out = []
        for b in self._blocks:
            g = np.sum(b["coef"] * spl(b["s"]), axis=1)
            f = b["pref"] * np.exp(-2.0 * g - (b["tau"] * width) ** 2)
            out.append(np.bincount(b["seg"], weights=f * b["w"], minlength=b["n"]))
        return out


# ---------------------------------------------------------------------------
# solver


def fd_jacobian(fun, x, steps, lower=None, upper=None, f0=None):
    """Central finite-difference Jacobian, one-sided next to a bound."""
    x = np.asarray(x, dtype=float)
    f0 = fun(x) if f0 is None else f0
    J = np.empty((f0.size, x.size))
    for i, h in enumerate(steps):
        xp, xm = x.copy(), x.copy()
        up = lower is None or x[i] + h <= upper[i]
        dn = lower is None or x[i] - h >= lower[i]
        if up and dn:
            xp[i] += h
            xm[i] -= h
            J[:, i] = (fun(xp) - fun(xm)) / (2 * h)
        elif up:
            xp[i] += h
            J[:, i] = (fun(xp) - f0) / h
        else:
            xm[i] -= h
            J[:, i] = (f0 - fun(xm)) / h
    return J


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    initial_cost: float
    n_iter: int
    converged: bool
    trace: list
    jac: np.ndarray
    message: str


def levenberg_marquardt(fun, x0, lower, upper, rel_step=1e-4, max_iter=200, step_tol=1e-10,
                        ftol=1e-12, lam0=1e-3):
    """Bounded damped Gauss-Newton on 0.5*|fun(x)|^2.

    Steps are clipped to the box; a step is accepted only if it lowers the
    cost, so the trace of accepted costs is non-increasing. Convergence
    when the scaled step norm drops below ``step_tol`` or the relative cost
    improvement below ``ftol``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    width = upper - lower
    steps = rel_step * width
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    r = fun(x)
    cost = 0.5 * float(r @ r)
    trace = [cost]
    lam = lam0
    J = fd_jacobian(fun, x, steps, lower, upper, r)
    for it in range(1, max_iter + 1):
        if cost == 0.0:
            return LMResult(x, cost, trace[0], it - 1, True, trace, J, "zero residual")
        A = J.T @ J
        g = J.T @ r
        if not np.any(g):
            return LMResult(x, cost, trace[0], it - 1, False, trace, J, "zero gradient")
        # coordinates pinned at a bound with the gradient pushing outward stay fixed
        free = ~(((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0)))
        if not np.any(free):
            return LMResult(x, cost, trace[0], it - 1, True, trace, J, "stationary on bounds")
        Af = A[np.ix_(free, free)]
        gf = g[free]
        d = np.diag(Af).copy()
        d[d == 0] = 1.0
        while True:
            dx = np.zeros_like(x)
            try:
                dx[free] = np.linalg.solve(Af + lam * np.diag(d), -gf)
            except np.linalg.LinAlgError:
                dx[free] = np.linalg.lstsq(Af + lam * np.diag(d), -gf, rcond=None)[0]
            xn = np.clip(x + dx, lower, upper)
            step = np.linalg.norm((xn - x) / width)
            if step < step_tol:
                return LMResult(x, cost, trace[0], it, True, trace, J, "step below tolerance")
            rn = fun(xn)
            cn = 0.5 * float(rn @ rn)
            if cn < cost:
                improve = (cost - cn) / cost
                x, r, cost = xn, rn, cn
                trace.append(cost)
                lam = max(lam / 3.0, 1e-12)
                if improve < ftol:
                    return LMResult(x, cost, trace[0], it, True, trace, J,
                                    "relative improvement below tolerance")
                break
            lam *= 4.0
            if lam > 1e16:
                return LMResult(x, cost, trace[0], it, True, trace, J,
                                "no further descent (damping saturated)")
        J = fd_jacobian(fun, x, steps, lower, upper, r)
    return LMResult(x, cost, trace[0], max_iter, False, trace, J, "iteration limit")


@dataclass
class FitResult:
    names: tuple
    estimates: dict
    sigmas: dict
    residual_norm: float
    initial_residual_norm: float
    n_iter: int
    converged: bool
    ill_conditioned: bool
    trace: list
    start: int
    n_converged: int
    message: str

    def report(self):
        lines = [f"converged: {self.converged} ({self.message})",
                 f"starts converged: {self.n_converged}, best start: {self.start}",
                 f"iterations: {self.n_iter}",
                 f"residual norm: {self.residual_norm:.6e} (initial {self.initial_residual_norm:.6e})",
                 f"ill-conditioned: {self.ill_conditioned}"]
        for n in self.names:
            lines.append(f"{n} = {self.estimates[n]:.10g} +/- {self.sigmas[n]:.3g}")
        return "\n".join(lines) + "\n"


def _sigmas(J, cost, m):
    n = J.shape[1]
    sv = np.linalg.svd(J, compute_uv=False)
    ill = sv.size == 0 or sv[-1] < 1e-10 * sv[0] or sv[0] == 0
    s2 = 2.0 * cost / (m - n) if m > n else float("nan")
    if sv.size and sv[0] > 0 and not ill:
        cov = np.linalg.inv(J.T @ J) * s2
        sig = np.sqrt(np.abs(np.diag(cov)))
    else:
        sig = np.full(n, np.inf)
    return sig, bool(ill)


def start_points(problem):
    """Initial guess followed by a scrambled Halton design over the bound box."""
    pts = [problem.x0]
    k = problem.n_starts - 1
    if k > 0:
        u = qmc.Halton(d=len(problem.free), scramble=True, seed=problem.seed).random(k)
        pts.extend(qmc.scale(u, problem.lower, problem.upper))
    return pts


def solve(problem, exact=False, qc=None, **lm_options):
    """Multistart bounded Levenberg-Marquardt fit of ``problem``.

    Raises :class:`FitError` (carrying the best incumbent) when no start
    converges or the data carry no information on the free parameters.
    """
    if not problem.free:
        raise DomainError("no free parameters")

    def fun(x):
        return residuals(problem, x, exact, qc)

    runs = []
    for i, x0 in enumerate(start_points(problem)):
        res = levenberg_marquardt(fun, x0, problem.lower, problem.upper, **lm_options)
        runs.append((i, res))
    best_i, best = min(runs, key=lambda ir: (not ir[1].converged, ir[1].cost))
    n_conv = sum(r.converged for _, r in runs)
    if all(not np.any(r.jac) for _, r in runs):
        raise FitError("residuals are insensitive to every free parameter", best=best)
    if n_conv == 0:
        raise FitError(f"no start converged ({best.message})", best=best)
    m = best.jac.shape[0]
    sig, ill = _sigmas(best.jac, best.cost, m)
    return FitResult(
        names=problem.free,
        estimates=dict(zip(problem.free, best.x.tolist())),
        sigmas=dict(zip(problem.free, sig.tolist())),
        residual_norm=math.sqrt(2 * best.cost),
        initial_residual_norm=math.sqrt(2 * best.initial_cost),
        n_iter=best.n_iter, converged=True, ill_conditioned=ill, trace=best.trace,
        start=best_i, n_converged=n_conv, message=best.message)


def jacobian_check(problem, x, rel_step=1e-4, exact=False, qc=None):
    """Max deviation between finite-difference Jacobians at steps h and h/2.

    ``problem`` is a :class:`FitProblem` (steps relative to bound width) or a
    plain residual callable (steps relative to max(|x|, 1)). The deviation of
    each column is scaled by that column's largest entry.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(problem, FitProblem):
        fun = lambda v: residuals(problem, v, exact, qc)  # noqa: E731
        h = rel_step * (problem.upper - problem.lower)
        lo, hi = problem.lower, problem.upper
    else:
        fun = problem
        h = rel_step * np.maximum(np.abs(x), 1.0)
        lo = hi = None
    J1 = fd_jacobian(fun, x, h, lo, hi)
    J2 = fd_jacobian(fun, x, h / 2, lo, hi)
    scale = np.max(np.abs(J2), axis=0)
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(J1 - J2) / scale))
