"""Multiwave-mixing photon-echo signals from qubit ensembles under bang-bang control."""
from .errors import (ConfigError, CutoffError, DomainError, FitError, MWMError, NoEchoError,
                     QuadratureError, UnsupportedOperationError)
from .fit import Dataset, FitProblem, FitResult, jacobian_check, residuals, solve
from .gamma import QuadConfig, gamma_phase, gamma_pi, gamma_weak
from .oracle import ThermalOracleState, build_thermal, phase_cycled_amplitudes
from .pulses import (FOUR_WAVE, FREE_INDUCTION, SIX_WAVE, DiffractionOrder, Mode, Pulse,
                     PulseSequence, echo_time, enumerate_weak_orders, phase_matching_direction)
from .spectral import (GaussianOhmic, Ohmic, SingleMode, Tabulated, eta, omega_th,
                       stabilization_interval)
from .signals import (HOMOGENEOUS, EnsembleSpec, SignalCurve, integrated_intensity, intensity,
                      sweep_t1, time_resolved_curve)
from .units import HBAR, KB, coth_thermal, energy_to_angfreq

__version__ = "0.1.0"
