"""Physical constants and the conversions between meV, ps, K and rad/ps.

Everything downstream works in angular frequency (rad/ps) and time (ps);
energies in meV only appear at the API boundary.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysConst:
    hbar: float = 0.6582119569  # meV ps
    kB: float = 0.08617333262  # meV / K

    def __post_init__(self):
        if not (self.hbar > 0 and self.kB > 0):
            raise DomainError("physical constants must be strictly positive")


CONST = PhysConst()
HBAR = CONST.hbar
KB = CONST.kB


def energy_to_angfreq(energy):
    """Convert an energy in meV to an angular frequency in rad/ps."""
    return np.asarray(energy, dtype=float) / HBAR if np.ndim(energy) else float(energy) / HBAR


def angfreq_to_energy(omega):
    """Convert an angular frequency in rad/ps to an energy in meV."""
    return np.asarray(omega, dtype=float) * HBAR if np.ndim(omega) else float(omega) * HBAR


def coth_thermal(energy, T):
    """Return coth(E / 2 kB T) for E in meV and T in K.

    T = 0 is the exact limit and gives 1.
    """
    e = np.asarray(energy, dtype=float)
    if np.any(e <= 0):
        raise DomainError("coth_thermal needs E > 0 (the zero-frequency limit is taken upstream)")
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T}")
    if T == 0:
        out = np.ones_like(e)
    else:
        # coth(x) = 1 + 2/(e^{2x} - 1), accurate for large x; overflow gives exactly 1
        with np.errstate(over="ignore", divide="ignore"):
            x = e / (2.0 * KB * T)
            out = 1.0 + 2.0 / np.expm1(2.0 * x)
    return out if np.ndim(energy) else float(out)


def omega_coth(omega, T):
    """Return omega * coth(hbar omega / 2 kB T) for omega in rad/ps.

    Finite at omega = 0 (limit 2 kB T / hbar), which keeps the
    decoherence integrands free of 0/0 near the origin.
    """
    w = np.asarray(omega, dtype=float)
    if T == 0:
        return np.abs(w) if np.ndim(omega) else abs(float(omega))
    scale = 2.0 * KB * T / HBAR
    x = w / scale
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    val = np.where(small, 1.0 + x * x / 3.0, xs / np.tanh(xs))
    out = scale * val
    return out if np.ndim(omega) else float(out)
