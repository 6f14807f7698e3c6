"""Reservoir spectral densities I(Omega) and derived thermal quantities.

Parameters are given in meV. Internally the quadrature works in rad/ps, where
``I`` keeps the same functional form (every variant is unit covariant), so the
``rate*`` helpers simply rescale by hbar.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedOperationError
from .units import HBAR, coth_thermal, energy_to_angfreq

_SQRT_PI = math.sqrt(math.pi)


class SpectralDensity:
    """Base class. Subclasses are frozen dataclasses."""

    is_delta = False

    def density(self, omega):
        raise NotImplementedError

    def density_over_energy(self, omega):
        """I(Omega)/Omega (dimensionless), finite at Omega = 0."""
        raise NotImplementedError

    def default_omega_max(self):
        """Integration cutoff in meV."""
        raise NotImplementedError

    def search_upper(self):
        raise NotImplementedError

    # rad/ps views used by the quadrature
    def rate(self, w):
        return self.density(np.asarray(w) * HBAR) / HBAR

    def rate_over_omega(self, w):
        return self.density_over_energy(np.asarray(w) * HBAR)


def _check_nonneg(**kw):
    for name, v in kw.items():
        if not (v >= 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be a finite value >= 0, got {v}")


def _check_pos(**kw):
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be > 0, got {v}")


@dataclass(frozen=True)
class Ohmic(SpectralDensity):
    """I(Omega) = alpha Omega exp(-Omega/omega_c)."""

    alpha: float
    omega_c: float  # meV

    def __post_init__(self):
        _check_nonneg(alpha=self.alpha)
        _check_pos(omega_c=self.omega_c)

    def density_over_energy(self, omega):
        return self.alpha * np.exp(-np.asarray(omega, dtype=float) / self.omega_c)

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return omega * self.density_over_energy(omega)

    def default_omega_max(self):
        return 40.0 * self.omega_c

    def search_upper(self):
        return 10.0 * self.omega_c


@dataclass(frozen=True)
class GaussianOhmic(SpectralDensity):
    """Ohmic background plus a Gaussian phonon band centred at omega_p.

    The band term is alpha_p Omega^2 exp[-(Omega-omega_p)^2/gamma_p^2] / (sqrt(pi) gamma_p).
    """

    alpha: float
    omega_c: float
    alpha_p: float
    omega_p: float
    gamma_p: float

    def __post_init__(self):
        _check_nonneg(alpha=self.alpha, alpha_p=self.alpha_p)
        _check_pos(omega_c=self.omega_c, omega_p=self.omega_p, gamma_p=self.gamma_p)

    def density_over_energy(self, omega):
        omega = np.asarray(omega, dtype=float)
        band = (self.alpha_p * omega / (_SQRT_PI * self.gamma_p)
                * np.exp(-((omega - self.omega_p) / self.gamma_p) ** 2))
        return self.alpha * np.exp(-omega / self.omega_c) + band

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return omega * self.density_over_energy(omega)

    def default_omega_max(self):
        return max(40.0 * self.omega_c, self.omega_p + 8.0 * self.gamma_p)

    def search_upper(self):
        return 10.0 * max(self.omega_c, self.omega_p + 3.0 * self.gamma_p)


@dataclass(frozen=True)
class SingleMode(SpectralDensity):
    """I(Omega) = g_sq delta(Omega - omega_p); g_sq in meV^2, omega_p in meV."""

    g_sq: float
    omega_p: float

    is_delta = True

    def __post_init__(self):
        _check_nonneg(g_sq=self.g_sq)
        _check_pos(omega_p=self.omega_p)

    def density(self, omega):
        raise UnsupportedOperationError(
            "SingleMode is a delta spectrum with no pointwise value; "
            "use the closed-form decoherence exponents instead")

    density_over_energy = density

    @property
    def coupling_ratio(self):
        """|g_p|^2 / Omega_p^2 (dimensionless)."""
        return self.g_sq / self.omega_p ** 2

    def default_omega_max(self):
        return self.omega_p

    def search_upper(self):
        return self.omega_p


@dataclass(frozen=True)
class Tabulated(SpectralDensity):
    """Sampled I(Omega); linear interpolation inside, zero outside."""

    omega: tuple
    values: tuple

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size == 0:
            raise DomainError("tabulated spectrum needs two equal-length non-empty columns")
        if np.any(np.diff(w) <= 0):
            raise DomainError("tabulated Omega samples must be strictly increasing")
        if np.any(w < 0) or np.any(v < 0):
            raise DomainError("tabulated samples need Omega >= 0 and I >= 0")
        object.__setattr__(self, "omega", tuple(w.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    def density(self, omega):
        return np.interp(np.asarray(omega, dtype=float), self.omega, self.values,
                         left=0.0, right=0.0)

    def density_over_energy(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.density(omega) / np.maximum(omega, 1e-300)

    def default_omega_max(self):
        return self.omega[-1]

    def search_upper(self):
        return self.omega[-1]


def read_tabulated_csv(path):
    """Read a two-column (Omega_meV, I_meV) CSV with a header line."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if len(rows) < 2:
        raise DomainError(f"{path}: expected a header line and at least one sample")
    try:
        data = [(float(r[0]), float(r[1])) for r in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise DomainError(f"{path}: malformed sample row ({exc})") from None
    w, v = zip(*data)
    return Tabulated(w, v)


def density(sd, omega):
    """Spectral density I(Omega) in meV at Omega (meV)."""
    if np.any(np.asarray(omega) < 0):
        raise DomainError("omega must be >= 0")
    return sd.density(omega)


def eta(sd, omega, T):
    """Thermalized boson factor I(Omega) coth(Omega / 2 kB T), meV."""
    if np.any(np.asarray(omega) <= 0):
        raise DomainError("eta needs omega > 0")
    return sd.density(omega) * coth_thermal(omega, T)


def _golden_max(fn, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def omega_th(sd, T, *, n_scan=4001, tol=1e-6):
    """Frequency (meV) at which eta(Omega, T) peaks.

    A uniform scan over (0, search_upper] brackets the global maximum (the
    Gaussian-ohmic factor has two lobes, and at high T the ohmic factor is
    largest at Omega -> 0), then golden-section search refines it to ``tol``.
    A peak at the origin is returned as a value within ``tol`` of 0.
    """
    if isinstance(sd, SingleMode):
        return float(sd.omega_p)
    upper = float(sd.search_upper())
    grid = np.linspace(upper / n_scan, upper, n_scan)
    vals = eta(sd, grid, T)
    i = int(np.argmax(vals))
    lo = grid[i - 1] if i > 0 else 0.0
    hi = grid[min(i + 1, n_scan - 1)]

    def f(x):
        return float(eta(sd, max(x, 1e-12), T))

    return _golden_max(f, lo, hi, tol)


def stabilization_interval(sd, T):
    """Largest pi-pulse interval (ps) that still suppresses decoherence: pi / (2 Omega_th).

    Infinite when the thermal factor peaks at the origin.
    """
    w = energy_to_angfreq(omega_th(sd, T))
    if w <= 1e-5:
        return math.inf
    return math.pi / (2.0 * w)
