"""Exact evolution of one qubit coupled to one truncated boson mode.

Used as ground truth for every closed form at single-mode spectral density.
Basis ordering is qubit (index 0 = down, 1 = up) tensor Fock |0..n_cut>.
Frequencies and couplings are in rad/ps, times in ps.
"""
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DomainError
from .pulses import WEAK_ORDERS
from .units import HBAR, KB

TAIL_TOL = 1e-10
LEAK_TOL = 1e-8

SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |up><down|
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class ThermalOracleState:
    rho: np.ndarray
    n_cut: int
    omega_p: float
    g_p: complex
    T: float
    t: float = 0.0

    @property
    def dim(self):
        return self.n_cut + 1


def mean_occupation(omega_p, T):
    """Bose occupation 1/(exp(hbar W / kB T) - 1); 0 at T = 0."""
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega_p / (KB * T))


def thermal_populations(nbar, n_cut):
    n = np.arange(n_cut + 1)
    if nbar == 0:
        return (n == 0).astype(float)
    return nbar ** n / (1.0 + nbar) ** (n + 1)


def _auto_cutoff(nbar):
    n = 0
    while thermal_populations(nbar, n)[-1] >= TAIL_TOL:
        n += 1
    return n


def build_thermal(omega_p, g_p, T, n_cut=None, t0=0.0):
    """Qubit in |down>, boson in the (renormalized) truncated thermal state."""
    if not omega_p > 0:
        raise DomainError("omega_p must be > 0")
    if T < 0:
        raise DomainError("T must be >= 0")
    nbar = mean_occupation(omega_p, T)
    if n_cut is None:
        n_cut = _auto_cutoff(nbar)
    p = thermal_populations(nbar, n_cut)
    if p[-1] >= TAIL_TOL:
        raise CutoffError(f"n_cut={n_cut} leaves thermal tail {p[-1]:.2e} >= {TAIL_TOL}")
    p = p / p.sum()
    rho = np.kron(np.diag([1.0, 0.0]), np.diag(p)).astype(complex)
    return ThermalOracleState(rho, n_cut, float(omega_p), g_p, float(T), float(t0))


def from_single_mode(sd, T, n_cut=None, t0=0.0):
    """Build from a :class:`~mwm.spectral.SingleMode` density given in meV."""
    return build_thermal(sd.omega_p / HBAR, math.sqrt(sd.g_sq) / HBAR, T, n_cut, t0)


def annihilation(n_cut):
    return np.diag(np.sqrt(np.arange(1, n_cut + 1)), 1).astype(complex)


def displacement(beta, n_cut):
    """Dense exp(beta b^dag - beta* b) on the truncated space."""
    b = annihilation(n_cut)
    return expm(beta * b.conj().T - np.conj(beta) * b)


def pulse_unitary(theta, phi):
    """exp{(theta/2)[sigma+ e^{i phi} - sigma- e^{-i phi}]} on the qubit."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])


def apply_pulse(state, theta, phi=0.0):
    U = np.kron(pulse_unitary(theta, phi), np.eye(state.dim))
    return replace(state, rho=U @ state.rho @ U.conj().T)


def free_unitary(state, dt):
    """exp[i Theta + sigma_z (alpha b^dag - alpha* b)] over [state.t, state.t + dt]."""
    W, g = state.omega_p, state.g_p
    t = state.t
    alpha = g / W * (np.exp(1j * W * t) - np.exp(1j * W * (t + dt)))
    theta = abs(g) ** 2 * (W * dt - math.sin(W * dt)) / W ** 2
    b = annihilation(state.n_cut)
    gen = np.kron(SIGMA_Z, alpha * b.conj().T - np.conj(alpha) * b)
    gen = gen + 1j * theta * np.eye(2 * state.dim)
    return expm(gen)


def _check_leak(state):
    pops = np.real(np.diag(state.rho)).reshape(2, state.dim).sum(axis=0)
    if pops[-1] > LEAK_TOL:
        raise CutoffError(f"population {pops[-1]:.2e} reached Fock level {state.n_cut}; "
                          "increase n_cut")


def evolve_free(state, dt, unitary=None):
    if dt < 0:
        raise DomainError("dt must be >= 0")
    if dt == 0:
        return state
    U = free_unitary(state, dt) if unitary is None else unitary
    out = replace(state, rho=U @ state.rho @ U.conj().T, t=state.t + dt)
    _check_leak(out)
    return out


def polarization(state):
    """Tr[(sigma+ x 1) rho]."""
    op = np.kron(SIGMA_PLUS, np.eye(state.dim))
    return complex(np.trace(op @ state.rho))


def qubit_state(state):
    r = state.rho.reshape(2, state.dim, 2, state.dim)
    return np.einsum("injn->ij", r)


def qubit_purity(state):
    q = qubit_state(state)
    return float(np.real(np.trace(q @ q)))


def run_sequence(state, thetas, phases, times, t):
    """Apply pulses at ``times`` (first one at ``state.t``) and evolve to ``t``."""
    times = list(times)
    if abs(times[0] - state.t) > 1e-15:
        state = evolve_free(state, times[0] - state.t)
    stops = times[1:] + [t]
    for th, ph, stop in zip(thetas, phases, stops):
        state = apply_pulse(state, th, ph)
        state = evolve_free(state, stop - state.t)
    return state


def phase_cycled_amplitudes(omega_p, g_p, T, thetas, times, t, n_cut=40, n_steps=5):
    """Diffraction-order amplitudes by discrete Fourier analysis over pulse phases.

    Every pulse phase runs over ``n_steps`` equally spaced values; the
    amplitude of order n is the coefficient of exp(-i n.phi) in
    Tr[sigma+ rho]. With coefficients in [-2, 2], five steps separate all orders.

    Returns a dict mapping coefficient tuples to complex amplitudes (orders
    with |amplitude| <= 1e-14 are dropped).
    """
    base = build_thermal(omega_p, g_p, T, n_cut, t0=times[0])
    npulse = len(times)
    stops = list(times[1:]) + [t]
    # free unitaries do not depend on the pulse phases
    unitaries = []
    s = base
    for m in range(npulse):
        U = free_unitary(replace(s, t=times[m]), stops[m] - times[m])
        unitaries.append(U)
    steps = 2 * math.pi * np.arange(n_steps) / n_steps
    grid = {}
    for idx in itertools.product(range(n_steps), repeat=npulse):
        st = base
        for m in range(npulse):
            st = apply_pulse(st, thetas[m], steps[idx[m]])
            st = evolve_free(st, stops[m] - times[m], unitary=unitaries[m])
        grid[idx] = polarization(st)
    half = n_steps // 2
    out = {}
    for n in itertools.product(range(-half, half + 1), repeat=npulse):
        acc = 0j
        for idx, val in grid.items():
            acc += val * np.exp(1j * sum(nm * steps[k] for nm, k in zip(n, idx)))
        acc /= n_steps ** npulse
        if abs(acc) > 1e-14:
            out[n] = acc
    return out


def compare_weak_orders(sd, T, thetas, times, t, n_cut=40, corrupt=False):
    """Max relative deviation per order between oracle and the nine-term expansion.

    ``corrupt`` conjugates the analytic amplitudes (flipping every phase
    function's sign) and serves as a negative control.
    """
    from .pulses import PulseSequence
    from .signals import HOMOGENEOUS, weak_polarization_terms

    seq = PulseSequence.weak(times, thetas)
    analytic = dict(weak_polarization_terms(seq, sd, T, HOMOGENEOUS, t))
    oracle = phase_cycled_amplitudes(sd.omega_p / HBAR, math.sqrt(sd.g_sq) / HBAR, T,
                                     thetas, times, t, n_cut)
    report = {}
    for order, _ in WEAK_ORDERS:
        a = analytic[order]
        if corrupt:
            a = np.conj(a)
        o = oracle.get(order.coeffs, 0j)
        scale = max(abs(o), abs(a), 1e-300)
        report[order] = abs(a - o) / scale
    stray = {n: v for n, v in oracle.items()
             if n not in {o.coeffs for o, _ in WEAK_ORDERS} and abs(v) > 1e-10}
    return report, stray
