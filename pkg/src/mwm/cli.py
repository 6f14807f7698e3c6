"""Command-line front end: ``mwm gamma|signal|sweep|oracle-check|fit|gnuplot``.

Every subcommand reads an INI run configuration (see :mod:`mwm.config`)
and writes CSV tables into the output directory. Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 verification breach.
"""
import argparse
import glob
import math
import os
import sys

import numpy as np

from . import io
from .config import load
from .errors import ConfigError, DomainError, MWMError, UnsupportedOperationError
from .fit import Dataset, FitProblem, model_curves, solve
from .gamma import gamma_pi, gamma_weak
from .oracle import (apply_pulse, compare_weak_orders, evolve_free, from_single_mode,
                     qubit_purity)
from .pulses import FOUR_WAVE, FREE_INDUCTION, SIX_WAVE, PulseSequence, phase_matching_direction
from .signals import EnsembleSpec, intensity, map_ordered, sweep_t1
from .spectral import GaussianOhmic, Ohmic, SingleMode
from .units import HBAR

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BREACH = 0, 2, 3, 4
DEFAULT_WEAK_COEFFS = [(-1, 1, 1), (-1, 1, -1)]


def _tag(v):
    return f"{v:g}"


def _t_grid(cfg, t_last):
    if cfg.t_after is not None:
        return t_last + cfg.t_after
    if cfg.t_grid is not None:
        return cfg.t_grid[cfg.t_grid >= t_last]
    raise ConfigError(f"{cfg.path} [grid]: need t or t_after")


def _pi_sequences(cfg):
    for M in cfg.M_list:
        if M > 0 and not cfg.deltas:
            raise ConfigError(f"{cfg.path} [pulses] delta: needed when M > 0")
        for d in (cfg.deltas if M > 0 else cfg.deltas[:1] or [0.0]):
            yield M, d, PulseSequence.equally_spaced(M, d, cfg.t0, cfg.theta0)


def _weak_times(cfg):
    if cfg.times is None:
        raise ConfigError(f"{cfg.path} [pulses] times: required in weak mode")
    return cfg.times, cfg.thetas or (math.pi / 2,) * 3


def cmd_gamma(cfg, out, jobs):
    written = []
    for T in cfg.temperatures:
        if cfg.mode == "pi-train":
            for M, d, seq in _pi_sequences(cfg):
                t = _t_grid(cfg, seq.t_last)
                g = gamma_pi(cfg.reservoir, T, seq.times, t, cfg.quad) if t.size else t
                path = os.path.join(out, f"gamma_pi_M{M}_D{_tag(d)}_T{_tag(T)}.csv")
                io.write_table(path, {"t_ps": t, "gamma": g},
                               {"reservoir": repr(cfg.reservoir), "T_K": T,
                                "times_ps": list(seq.times)})
                written.append(path)
        else:
            times, _ = _weak_times(cfg)
            t = _t_grid(cfg, times[-1])
            cols = {"t_ps": t}
            for c in cfg.gamma_coeffs or DEFAULT_WEAK_COEFFS:
                key = "gamma[" + " ".join(str(x) for x in c) + "]"
                cols[key] = gamma_weak(cfg.reservoir, T, c, times, t, cfg.quad) if t.size else t
            path = os.path.join(out, f"gamma_weak_T{_tag(T)}.csv")
            io.write_table(path, cols, {"reservoir": repr(cfg.reservoir), "T_K": T,
                                        "times_ps": list(times),
                                        "coeffs": "(c2 c1 c0) weights of the three intervals"})
            written.append(path)
    return written


def _signal_job(args):
    seq, sd, T, ens, orders, t, qc = args
    return [np.asarray(intensity(seq, sd, T, ens, o, t, qc), dtype=float) for o in orders]


def cmd_signal(cfg, out, jobs):
    jobs_list, names = [], []
    for T in cfg.temperatures:
        for dB in cfg.delta_B:
            ens = EnsembleSpec(dB)
            if cfg.mode == "pi-train":
                for M, d, seq in _pi_sequences(cfg):
                    pm = phase_matching_direction(M)
                    orders = [pm] if M == 0 else [pm, FREE_INDUCTION]
                    t = _t_grid(cfg, seq.t_last)
                    jobs_list.append((seq, cfg.reservoir, T, ens, orders, t, cfg.quad))
                    names.append(f"signal_M{M}_D{_tag(d)}_T{_tag(T)}_dB{_tag(dB)}.csv")
            else:
                times, thetas = _weak_times(cfg)
                t1s = cfg.t1_grid if cfg.t1_grid is not None else [times[1]]
                for t1 in t1s:
                    seq = PulseSequence.weak((times[0], float(t1), times[2]), thetas)
                    t = _t_grid(cfg, seq.t_last)
                    jobs_list.append((seq, cfg.reservoir, T, ens, [FOUR_WAVE, SIX_WAVE], t,
                                      cfg.quad))
                    names.append(f"signal_t1_{_tag(t1)}_t2_{_tag(times[2])}_T{_tag(T)}"
                                 f"_dB{_tag(dB)}.csv")
    results = map_ordered(_signal_job, jobs_list, jobs)
    written = []
    for (seq, sd, T, ens, orders, t, _), res, name in zip(jobs_list, results, names):
        cols = {"t_ps": t}
        for o, v in zip(orders, res):
            cols[io.intensity_column(o)] = v
        meta = {"sequence": f"{seq.mode.value} times_ps={list(seq.times)} "
                            f"theta_over_pi={[th / math.pi for th in seq.thetas]}",
                "reservoir": repr(sd), "T_K": T, "delta_B_meV": ens.delta_B}
        path = os.path.join(out, name)
        io.write_table(path, cols, meta)
        written.append(path)
    return written


def cmd_sweep(cfg, out, jobs):
    if cfg.t1_grid is None:
        raise ConfigError(f"{cfg.path} [grid] t1: required for sweep")
    thetas = cfg.thetas or (math.pi / 2,) * 3
    t2s = cfg.t2_list or ([cfg.times[2]] if cfg.times else [])
    if not t2s:
        raise ConfigError(f"{cfg.path} [pulses] t2: required for sweep")
    t0 = cfg.times[0] if cfg.times else cfg.t0
    written = []
    for t2 in t2s:
        grid = cfg.t1_grid
        if np.any((grid <= t0) | (grid >= t2)):
            raise ConfigError(f"{cfg.path} [grid] t1: values must lie strictly inside "
                              f"({_tag(t0)}, {_tag(t2)})")
        seq = PulseSequence.weak((t0, 0.5 * (t0 + t2), t2), thetas)
        for T in cfg.temperatures:
            for dB in cfg.delta_B:
                c4, c6 = sweep_t1(seq, cfg.reservoir, T, EnsembleSpec(dB), grid, cfg.quad, jobs)
                path = os.path.join(out, f"sweep_t2_{_tag(t2)}_T{_tag(T)}_dB{_tag(dB)}.csv")
                io.write_curves(path, [c4, c6])
                written.append(path)
    return written


def cmd_oracle_check(cfg, out, jobs):
    o = cfg.oracle
    if not o:
        raise ConfigError(f"{cfg.path}: [oracle] section required")
    sd = SingleMode(o["g_sq"], o["omega_p"])
    lines = [f"single mode: omega_p = {o['omega_p']:g} meV, g_sq = {o['g_sq']:g} meV^2",
             f"pulse areas / pi: {[th / math.pi for th in o['thetas']]}, "
             f"times (ps): {list(o['times'])}, t = {o['t']:g} ps, n_cut = {o['n_cut']}",
             f"tolerance: {o['tolerance']:g} relative per order"]
    if o["corrupt_sign"]:
        lines.append("NEGATIVE CONTROL: analytic phases sign-flipped")
    breach = False
    for T in o["temperatures"]:
        report, stray = compare_weak_orders(sd, T, o["thetas"], o["times"], o["t"], o["n_cut"],
                                            corrupt=o["corrupt_sign"])
        lines.append(f"T = {T:g} K")
        for order, dev in report.items():
            ok = dev <= o["tolerance"]
            breach |= not ok
            lines.append(f"  {order.label():>12s}  max rel dev {dev:.3e}  {'ok' if ok else 'BREACH'}")
        if stray:
            breach = True
            lines.append(f"  unexpected orders present: {sorted(stray)}")
        if T == 0:
            st = apply_pulse(from_single_mode(sd, 0.0, o["n_cut"]), math.pi / 2)
            period = 2 * math.pi / (o["omega_p"] / HBAR)
            st = evolve_free(st, period)
            pur = qubit_purity(st)
            ok = pur >= 1 - 1e-8
            breach |= not ok
            lines.append(f"  qubit purity after one mode period: {pur:.12f}  "
                         f"{'ok' if ok else 'BREACH'}")
    lines.append("RESULT: " + ("BREACH" if breach else "PASS"))
    text = "\n".join(lines) + "\n"
    path = os.path.join(out, "oracle_report.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_BREACH if breach else [path]


def _fit_fixed(cfg):
    sd = cfg.reservoir
    if isinstance(sd, GaussianOhmic):
        fixed = {k: getattr(sd, k) for k in ("alpha", "omega_c", "alpha_p", "omega_p", "gamma_p")}
    elif isinstance(sd, Ohmic):
        fixed = {"alpha": sd.alpha, "omega_c": sd.omega_c}
    else:
        raise ConfigError(f"{cfg.path} [reservoir] kind: fits need ohmic or gaussian-ohmic")
    fixed["T"] = cfg.temperatures[0]
    fixed["delta_B"] = cfg.delta_B[0]
    return fixed


def cmd_fit(cfg, out, jobs):
    f = cfg.fit
    if not f:
        raise ConfigError(f"{cfg.path}: [fit] section required")
    truth = _fit_fixed(cfg)
    thetas = cfg.thetas or (math.pi / 2,) * 3
    t0 = cfg.times[0] if cfg.times else cfg.t0
    datasets = []
    if f["data"]:
        for path in f["data"]:
            for c in io.read_curves(path):
                if c.kind == "t1":
                    t2 = float(c.meta.get("t2_ps", cfg.t2_list[0] if cfg.t2_list else "nan"))
                    seq = PulseSequence.weak((t0, 0.5 * (t0 + t2), t2), thetas)
                elif cfg.mode == "weak":
                    seq = PulseSequence.weak(_weak_times(cfg)[0], thetas)
                else:
                    M, d, seq = next(iter(_pi_sequences(cfg)))
                datasets.append(Dataset.from_curve(c, seq))
    else:
        # synthesize data from the configured reservoir, with optional noise
        rng = np.random.default_rng(cfg.seed)
        sd, T, ens = cfg.reservoir, truth["T"], EnsembleSpec(truth["delta_B"])
        for t2 in cfg.t2_list:
            seq = PulseSequence.weak((t0, 0.5 * (t0 + t2), t2), thetas)
            for c in sweep_t1(seq, sd, T, ens, cfg.t1_grid, cfg.quad, jobs):
                y = c.intensity * (1 + f["noise"] * rng.standard_normal(c.intensity.size))
                datasets.append(Dataset(c.order, "t1", c.x, y, seq))
                io.write_curves(os.path.join(out, f"fit_data_{c.order.label()}_t2_{_tag(t2)}"
                                                  ".csv"),
                                [type(c)(c.order, c.x, y, "t1", c.meta)])
        if not datasets:
            raise ConfigError(f"{cfg.path} [fit] data: no data files and no [pulses] t2 "
                              "to synthesize from")
    fixed = {k: v for k, v in truth.items() if k not in f["free"]}
    try:
        problem = FitProblem(datasets, tuple(f["free"]), f["bounds"], f["initial"], fixed,
                             n_starts=f["starts"], seed=cfg.seed)
    except DomainError as e:
        raise ConfigError(f"{cfg.path} [fit]: {e}") from None
    result = solve(problem)
    with open(os.path.join(out, "fit_report.txt"), "w", newline="\n") as fh:
        fh.write(result.report())
    with open(os.path.join(out, "fit_params.csv"), "w", newline="\n") as fh:
        fh.write("param,estimate,sigma\n")
        for n in result.names:
            fh.write(f"{n},{io.fmt(result.estimates[n])},{io.fmt(result.sigmas[n])}\n")
    x = np.array([result.estimates[n] for n in result.names])
    for k, (ds, m) in enumerate(zip(datasets, model_curves(problem, x))):
        io.write_table(os.path.join(out, f"fit_residuals_{k}.csv"),
                       {io.X_NAMES[ds.kind]: ds.x, "data": ds.y, "model": m,
                        "residual": ds.weight * (m - ds.y)},
                       {"order": ds.order.label(), "weight": io.fmt(ds.weight)})
    sys.stdout.write(result.report())
    return [os.path.join(out, "fit_report.txt")]


def cmd_gnuplot(out):
    files = sorted(glob.glob(os.path.join(out, "*.csv")))
    lines = ["set datafile separator ','", "set datafile commentschars '#'",
             "set key autotitle columnhead", "set logscale y", ""]
    for path in files:
        _, cols = io.read_table(path)
        names = list(cols)
        if names[0] not in ("t_ps", "t1_ps") or len(names) < 2:
            continue
        name = os.path.basename(path)
        lines.append(f"set title '{name}'")
        lines.append(f"set xlabel '{names[0]}'")
        parts = [f"'{name}' using 1:{i + 1} with lines" for i in range(1, len(names))]
        lines.append("plot " + ", \\\n     ".join(parts))
        lines.append("pause -1")
        lines.append("")
    path = os.path.join(out, "plot.gp")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
    return [path]


COMMANDS = {"gamma": cmd_gamma, "signal": cmd_signal, "sweep": cmd_sweep,
            "oracle-check": cmd_oracle_check, "fit": cmd_fit}


def build_parser():
    p = argparse.ArgumentParser(prog="mwm", description="Multiwave-mixing decoherence tools.")
    p.add_argument("command", choices=list(COMMANDS) + ["gnuplot"])
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker processes (default: all cores)")
    p.add_argument("--out", help="output directory (overrides [run] out)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gnuplot":
            out = args.out or (load(args.config).out if args.config else None) or "."
            for path in cmd_gnuplot(out):
                print(path)
            return EXIT_OK
        if not args.config:
            raise ConfigError("--config is required")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load(args.config)
        out = args.out or cfg.out or "."
        os.makedirs(out, exist_ok=True)
        res = COMMANDS[args.command](cfg, out, args.jobs)
        if res == EXIT_BREACH:
            return EXIT_BREACH
        return EXIT_OK
    except ConfigError as e:
        print(f"mwm: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, UnsupportedOperationError) as e:
        print(f"mwm: invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (MWMError, ArithmeticError) as e:
        print(f"mwm: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
