"""Impulsive pulse sequences and the diffraction orders they radiate into.

Wavevectors are kept symbolic: a direction is an integer combination
n0 k0 + n1 k1 + ... of the pulse wavevectors, and every formula downstream
depends only on those integers.
"""
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, NoEchoError


class Mode(enum.Enum):
    PI_TRAIN = "pi-train"
    WEAK_THREE_PULSE = "weak"


@dataclass(frozen=True)
class Pulse:
    t: float  # ps
    theta: float  # rad
    k_label: int = 0

    def __post_init__(self):
        if not (0.0 <= self.theta <= 2.0 * math.pi + 1e-12):
            raise DomainError(f"pulse area must lie in [0, 2 pi], got {self.theta}")


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple
    mode: Mode = Mode.PI_TRAIN

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        if not pulses:
            raise DomainError("a pulse sequence needs at least the exciting pulse")
        for a, b in zip(pulses, pulses[1:]):
            if not b.t > a.t:
                raise DomainError("pulse times must be strictly increasing")
        if self.mode is Mode.WEAK_THREE_PULSE and len(pulses) != 3:
            raise DomainError("the weak-pulse expansion is defined for exactly 3 pulses")
        if self.mode is Mode.PI_TRAIN:
            for p in pulses[1:]:
                if abs(p.theta - math.pi) > 1e-12:
                    raise DomainError("pi-train control pulses must have area pi")

    @classmethod
    def pi_train(cls, times, theta0=math.pi / 2):
        """Exciting pulse at ``times[0]`` followed by pi pulses at the remaining times."""
        times = list(times)
        pulses = [Pulse(times[0], theta0, 0)]
        pulses += [Pulse(t, math.pi, m) for m, t in enumerate(times[1:], start=1)]
        return cls(tuple(pulses), Mode.PI_TRAIN)

    @classmethod
    def equally_spaced(cls, M, delta, t0=0.0, theta0=math.pi / 2):
        return cls.pi_train([t0 + m * delta for m in range(M + 1)], theta0)

    @classmethod
    def weak(cls, times, thetas=(math.pi / 2,) * 3):
        if len(times) != 3 or len(thetas) != 3:
            raise DomainError("weak sequences take three times and three areas")
        return cls(tuple(Pulse(t, th, m) for m, (t, th) in enumerate(zip(times, thetas))),
                   Mode.WEAK_THREE_PULSE)

    @property
    def times(self):
        return tuple(p.t for p in self.pulses)

    @property
    def thetas(self):
        return tuple(p.theta for p in self.pulses)

    @property
    def n_control(self):
        """Number of pulses after the exciting one (M)."""
        return len(self.pulses) - 1

    @property
    def intervals(self):
        ts = self.times
        return tuple(b - a for a, b in zip(ts, ts[1:]))

    @property
    def t_last(self):
        return self.pulses[-1].t

    def with_time(self, index, t):
        ps = list(self.pulses)
        ps[index] = Pulse(t, ps[index].theta, ps[index].k_label)
        return PulseSequence(tuple(ps), self.mode)


@dataclass(frozen=True)
class DiffractionOrder:
    """Direction n0 k0 + n1 k1 + ... given by its integer coefficients."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    def label(self):
        parts = []
        for m in reversed(range(len(self.coeffs))):
            n = self.coeffs[m]
            if n == 0:
                continue
            mag = "" if abs(n) == 1 else str(abs(n))
            sign = "-" if n < 0 else "+"
            parts.append(f"{sign}{mag}k{m}")
        if not parts:
            return "0"
        s = "".join(parts)
        return s[1:] if s[0] == "+" else s

    __str__ = label

    def padded(self, n):
        return self.coeffs + (0,) * (n - len(self.coeffs))

    def detuning_time(self, times, t):
        """Argument multiplying the detuning nu - omega in this order's phase."""
        return t - sum(n * tm for n, tm in zip(self.coeffs, times))

    @classmethod
    def parse(cls, text, n=3):
        """Parse labels such as ``2k2-2k1+k0`` (or coefficient lists ``1,-2,2``)."""
        text = text.replace(" ", "")
        if "k" not in text:
            return cls(tuple(int(x) for x in text.split(",")))
        coeffs = [0] * n
        i = 0
        while i < len(text):
            j = i + 1 if text[i] in "+-" else i
            k = text.index("k", j)
            mag = text[j:k]
            e = k + 1
            while e < len(text) and text[e].isdigit():
                e += 1
            m = int(text[k + 1:e])
            if m >= len(coeffs):
                coeffs += [0] * (m + 1 - len(coeffs))
            val = int(mag) if mag else 1
            coeffs[m] += -val if text[i] == "-" else val
            i = e
        return cls(tuple(coeffs))


FREE_INDUCTION = DiffractionOrder((1,))
FOUR_WAVE = DiffractionOrder((-1, 0, 2))  # 2k2 - k0
SIX_WAVE = DiffractionOrder((1, -2, 2))  # 2k2 - 2k1 + k0


def phase_matching_direction(M):
    """Coefficients of (-1)^M [k0 + 2 sum_{m=1}^M (-1)^m k_m] over (k0, ..., kM)."""
    if M < 0:
        raise DomainError("M must be >= 0")
    s = (-1) ** M
    coeffs = [s] + [s * 2 * (-1) ** m for m in range(1, M + 1)]
    return DiffractionOrder(tuple(coeffs))


class TimeArgument(NamedTuple):
    """Detuning time argument t - t2 + d1*Delta1 + d0*Delta0 of a weak-pulse term."""

    d1: int
    d0: int

    def evaluate(self, times, t):
        t0, t1, t2 = times
        return t - t2 + self.d1 * (t2 - t1) + self.d0 * (t1 - t0)

    def __str__(self):
        s = "t-t2"
        for c, name in ((self.d1, "D1"), (self.d0, "D0")):
            if c:
                s += ("+" if c > 0 else "-") + ("" if abs(c) == 1 else str(abs(c))) + name
        return s


# The nine radiating orders of the three-pulse expansion, in the order the
# polarization terms are assembled.
WEAK_ORDERS = (
    (DiffractionOrder((1, 0, 0)), TimeArgument(1, 1)),
    (DiffractionOrder((0, 1, 0)), TimeArgument(1, 0)),
    (DiffractionOrder((0, 0, 1)), TimeArgument(0, 0)),
    (DiffractionOrder((-1, 2, 0)), TimeArgument(1, -1)),
    (DiffractionOrder((-1, 0, 2)), TimeArgument(-1, -1)),
    (DiffractionOrder((0, -1, 2)), TimeArgument(-1, 0)),
    (DiffractionOrder((1, -1, 1)), TimeArgument(0, 1)),
    (DiffractionOrder((-1, 1, 1)), TimeArgument(0, -1)),
    (DiffractionOrder((1, -2, 2)), TimeArgument(-1, 1)),
)


def enumerate_weak_orders():
    return list(WEAK_ORDERS)


class EchoTime(NamedTuple):
    time: float
    pre_window: bool  # echo falls before the last pulse, only its tail is observed


def echo_time(seq, order):
    """Time at which the order's inhomogeneous phase vanishes.

    Orders without a conjugated (negative) component never rephase and raise
    :class:`NoEchoError`.
    """
    coeffs = order.coeffs
    if len(coeffs) > len(seq.pulses):
        raise DomainError(f"order {order} refers to more pulses than the sequence has")
    if not any(n < 0 for n in coeffs):
        raise NoEchoError(f"order {order} has no conjugated component and never rephases")
    t_echo = sum(n * t for n, t in zip(coeffs, seq.times))
    return EchoTime(t_echo, t_echo < seq.t_last)
