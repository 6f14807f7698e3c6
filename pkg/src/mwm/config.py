"""Run configuration: an INI file with physical units fixed by convention.

Energies in meV, times in ps, temperatures in K, pulse areas in multiples
of pi. Lists are comma separated; a grid may also be written
``start:stop:step`` (both ends included when stop lies on the grid).

Sections and keys::

    [reservoir]   kind = ohmic | gaussian-ohmic | single-mode | tabulated
                  alpha, omega_c, alpha_p, omega_p, gamma_p, g_sq, file
    [run]         temperature (list), seed, out
    [ensemble]    delta_B (list)
    [pulses]      mode = pi-train | weak
                  theta0, delta (list), M (list), t0          (pi-train)
                  times, thetas, t2 (list)                     (weak)
    [grid]        t | t_after, t1
    [quadrature]  rel_tol, abs_tol, omega_max, max_panels
    [gamma]       coeffs = c2 c1 c0; c2 c1 c0 ...   (weak exponents to tabulate)
    [oracle]      omega_p, g_sq, temperatures, thetas, times, t, n_cut,
                  tolerance, corrupt_sign
    [fit]         free, data, starts, noise
    [fit.bounds]  <param> = lo, hi
    [fit.initial] <param> = value

Relative paths are resolved against the config file's directory.
"""
import configparser
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MWMError
from .gamma import QuadConfig
from .spectral import GaussianOhmic, Ohmic, SingleMode, read_tabulated_csv

_RANGE = re.compile(r"^\s*([^:]+):([^:]+):([^:]+)\s*$")


@dataclass
class RunConfig:
    path: str
    reservoir: object
    temperatures: list
    delta_B: list
    mode: str
    theta0: float = math.pi / 2
    deltas: list = field(default_factory=list)
    M_list: list = field(default_factory=list)
    t0: float = 0.0
    times: tuple = None
    thetas: tuple = None
    t2_list: list = field(default_factory=list)
    t_grid: np.ndarray = None
    t_after: np.ndarray = None
    t1_grid: np.ndarray = None
    quad: QuadConfig = None
    gamma_coeffs: list = field(default_factory=list)
    oracle: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None


class _Reader:
    def __init__(self, path):
        self.path = path
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        self.cp.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                self.lines = fh.read().splitlines()
            self.cp.read_string("\n".join(self.lines), source=path)
        except OSError as e:
            raise ConfigError(f"{path}: cannot read config ({e.strerror})") from None
        except configparser.Error as e:
            raise ConfigError(f"{path}: {e}") from None

    def where(self, section, key=None):
        """``path:line [section] key`` for error messages."""
        sec = None
        for i, line in enumerate(self.lines, 1):
            s = line.strip()
            if s.startswith("["):
                sec = s.strip("[]").strip()
                if key is None and sec == section:
                    return f"{self.path}:{i} [{section}]"
            elif sec == section and key is not None and re.match(
                    rf"^{re.escape(key)}\s*[=:]", s):
                return f"{self.path}:{i} [{section}] {key}"
        return f"{self.path} [{section}]" + (f" {key}" if key else "")

    def fail(self, section, key, msg):
        raise ConfigError(f"{self.where(section, key)}: {msg}")

    def has(self, section, key=None):
        if not self.cp.has_section(section):
            return False
        return key is None or self.cp.has_option(section, key)

    def raw(self, section, key, default=None, required=False):
        if self.has(section, key):
            return self.cp.get(section, key).strip()
        if required:
            self.fail(section, key, "missing required key")
        return default

    def num(self, section, key, default=None, required=False, minimum=None, strict=False,
            cast=float):
        text = self.raw(section, key, None, required)
        if text is None:
            return default
        try:
            v = cast(text)
        except ValueError:
            self.fail(section, key, f"expected a number, got {text!r}")
        if not math.isfinite(v):
            self.fail(section, key, "must be finite")
        if minimum is not None and (v <= minimum if strict else v < minimum):
            self.fail(section, key, f"must be {'>' if strict else '>='} {minimum}, got {v}")
        return v

    def nums(self, section, key, default=None, required=False):
        text = self.raw(section, key, None, required)
        if text is None:
            return default
        m = _RANGE.match(text)
        try:
            if m:
                a, b, h = (float(g) for g in m.groups())
                if h <= 0 or b < a:
                    self.fail(section, key, "range needs start <= stop and step > 0")
                n = int(math.floor((b - a) / h + 1e-9)) + 1
                return [a + i * h for i in range(n)]
            return [float(p) for p in text.replace(";", ",").split(",") if p.strip()]
        except ValueError:
            self.fail(section, key, f"expected numbers, got {text!r}")

    def file(self, section, key):
        text = self.raw(section, key, required=True)
        p = text if os.path.isabs(text) else os.path.join(os.path.dirname(self.path), text)
        if not os.path.exists(p):
            self.fail(section, key, f"file not found: {text}")
        return p


def _reservoir(r):
    kind = r.raw("reservoir", "kind", required=True).lower()
    try:
        if kind == "ohmic":
            return Ohmic(r.num("reservoir", "alpha", required=True, minimum=0),
                         r.num("reservoir", "omega_c", required=True, minimum=0, strict=True))
        if kind == "gaussian-ohmic":
            g = {k: r.num("reservoir", k, required=True, minimum=0, strict=k in
                          ("omega_c", "omega_p", "gamma_p"))
                 for k in ("alpha", "omega_c", "alpha_p", "omega_p", "gamma_p")}
            return GaussianOhmic(**g)
        if kind == "single-mode":
            return SingleMode(r.num("reservoir", "g_sq", required=True, minimum=0),
                              r.num("reservoir", "omega_p", required=True, minimum=0,
                                    strict=True))
        if kind == "tabulated":
            return read_tabulated_csv(r.file("reservoir", "file"))
    except MWMError as e:
        if isinstance(e, ConfigError):
            raise
        r.fail("reservoir", None, str(e))
    r.fail("reservoir", "kind", f"unknown kind {kind!r}")


def _positive_list(r, section, key, values, allow_zero=True):
    for v in values:
        if v < 0 or (v == 0 and not allow_zero):
            r.fail(section, key, f"values must be {'>=' if allow_zero else '>'} 0, got {v}")
    return values


def load(path):
    """Parse and validate a run configuration."""
    r = _Reader(path)
    sd = _reservoir(r)
    temps = _positive_list(r, "run", "temperature",
                           r.nums("run", "temperature", default=[0.0]))
    if not temps:
        r.fail("run", "temperature", "empty list")
    dBs = _positive_list(r, "ensemble", "delta_B", r.nums("ensemble", "delta_B", default=[0.0]))
    if not dBs:
        r.fail("ensemble", "delta_B", "empty list")
    mode = (r.raw("pulses", "mode", "pi-train") or "").lower()
    if mode not in ("pi-train", "weak"):
        r.fail("pulses", "mode", f"expected pi-train or weak, got {mode!r}")
    cfg = RunConfig(path=path, reservoir=sd, temperatures=temps, delta_B=dBs, mode=mode)
    cfg.seed = int(r.num("run", "seed", 0, cast=int))
    out = r.raw("run", "out")
    if out is not None and not os.path.isabs(out):
        out = os.path.join(os.path.dirname(path), out)
    cfg.out = out

    cfg.theta0 = math.pi * r.num("pulses", "theta0", 0.5)
    cfg.deltas = _positive_list(r, "pulses", "delta", r.nums("pulses", "delta", default=[]),
                                allow_zero=False)
    M = r.nums("pulses", "M", default=[])
    for m in M:
        if m != int(m) or m < 0:
            r.fail("pulses", "M", f"M must be a non-negative integer, got {m}")
    cfg.M_list = [int(m) for m in M]
    cfg.t0 = r.num("pulses", "t0", 0.0)
    times = r.nums("pulses", "times")
    if times is not None:
        if len(times) != 3 or not (times[0] < times[1] < times[2]):
            r.fail("pulses", "times", "need three strictly increasing times")
        cfg.times = tuple(times)
    thetas = r.nums("pulses", "thetas")
    if thetas is not None:
        if len(thetas) != 3:
            r.fail("pulses", "thetas", "need three pulse areas")
        cfg.thetas = tuple(math.pi * th for th in thetas)
    cfg.t2_list = r.nums("pulses", "t2", default=[])

    for key in ("t", "t_after", "t1"):
        vals = r.nums("grid", key)
        if vals is not None:
            if not vals:
                r.fail("grid", key, "empty grid")
            setattr(cfg, {"t": "t_grid", "t_after": "t_after", "t1": "t1_grid"}[key],
                    np.array(vals))
    if cfg.t_after is not None and np.any(cfg.t_after < 0):
        r.fail("grid", "t_after", "offsets must be >= 0")

    qkw = {}
    for key in ("rel_tol", "abs_tol", "omega_max"):
        v = r.num("quadrature", key, minimum=0, strict=True)
        if v is not None:
            qkw[key] = v
    mp = r.num("quadrature", "max_panels", minimum=1, cast=int)
    if mp is not None:
        qkw["max_panels"] = mp
    cfg.quad = QuadConfig(**qkw)

    text = r.raw("gamma", "coeffs")
    if text:
        for part in text.split(";"):
            try:
                c = tuple(int(x) for x in part.split())
            except ValueError:
                r.fail("gamma", "coeffs", f"bad coefficient triple {part.strip()!r}")
            if len(c) != 3 or any(abs(x) > 1 for x in c):
                r.fail("gamma", "coeffs", f"triples of -1/0/1 expected, got {part.strip()!r}")
            cfg.gamma_coeffs.append(c)

    if r.has("oracle"):
        o = {
            "omega_p": r.num("oracle", "omega_p", 13.0, minimum=0, strict=True),
            "g_sq": r.num("oracle", "g_sq", 8.0, minimum=0),
            "temperatures": _positive_list(r, "oracle", "temperatures",
                                           r.nums("oracle", "temperatures", [0.0, 10.0, 100.0])),
            "thetas": tuple(math.pi * x for x in r.nums("oracle", "thetas", [0.5, 0.5, 0.5])),
            "times": tuple(r.nums("oracle", "times", [0.0, 0.1, 0.25])),
            "t": r.num("oracle", "t", 0.4),
            "n_cut": int(r.num("oracle", "n_cut", 40, minimum=1, cast=int)),
            "tolerance": r.num("oracle", "tolerance", 1e-6, minimum=0, strict=True),
        }
        corrupt = (r.raw("oracle", "corrupt_sign", "false") or "false").lower()
        if corrupt not in ("true", "false", "yes", "no", "1", "0"):
            r.fail("oracle", "corrupt_sign", "expected a boolean")
        o["corrupt_sign"] = corrupt in ("true", "yes", "1")
        if len(o["thetas"]) != 3 or len(o["times"]) != 3:
            r.fail("oracle", None, "thetas and times need three entries")
        if not (o["times"][0] < o["times"][1] < o["times"][2] <= o["t"]):
            r.fail("oracle", "times", "need increasing pulse times before t")
        cfg.oracle = o

    if r.has("fit"):
        free = [x.strip() for x in (r.raw("fit", "free", required=True)).split(",") if x.strip()]
        bounds, initial = {}, {}
        for name in free:
            b = r.nums("fit.bounds", name, required=True)
            if len(b) != 2 or not b[0] < b[1]:
                r.fail("fit.bounds", name, "need lo, hi with lo < hi")
            bounds[name] = tuple(b)
            x0 = r.num("fit.initial", name, default=0.5 * (b[0] + b[1]))
            if not b[0] <= x0 <= b[1]:
                r.fail("fit.initial", name, "initial guess outside bounds")
            initial[name] = x0
        data = r.raw("fit", "data")
        files = []
        if data:
            for i, part in enumerate(p.strip() for p in data.split(",")):
                p = part if os.path.isabs(part) else os.path.join(os.path.dirname(path), part)
                if not os.path.exists(p):
                    r.fail("fit", "data", f"file not found: {part}")
                files.append(p)
        cfg.fit = {
            "free": free, "bounds": bounds, "initial": initial, "data": files,
            "starts": int(r.num("fit", "starts", 8, minimum=1, cast=int)),
            "noise": r.num("fit", "noise", 0.0, minimum=0),
        }
    return cfg
