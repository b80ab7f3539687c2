"""Command-line interface.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical-invariant
abort during integration.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunSpec, load_run
from .dynamics import InvariantViolationError
from .io import RunManifest, write_series_csv, write_trajectory_csv
from .model import FRAME_ROTATING, validate_config
from .ode import StepSizeUnderflow
from . import experiments
from .experiments import (
    LINEWIDTH_PER_TAU,
    optimize_drive,
    reproduce,
    run_fidelity_trace,
    sweep_deviation,
    sweep_drive,
    sweep_tau,
)
from .spectral import decompose, single_excitation_basis, target_dark_state


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsim",
        description="Dissipative W-state preparation: simulate, analyze, reproduce figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("config", help="run configuration file")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--samples", type=int, default=None, help="trajectory sample count")
        p.add_argument("--nmax", type=int, default=None, help="override Fock truncation")
        p.add_argument("--frame", choices=["lab", "rotating"], default=None)
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.add_argument("--no-plot", action="store_true", help="skip PNG rendering")

    add_common(sub.add_parser("simulate", help="integrate one driven trajectory"))
    spectrum = sub.add_parser("spectrum", help="print dark/bright states and coefficients")
    spectrum.add_argument("config")
    spectrum.add_argument("--csv", default=None, help="also write the table as CSV")
    add_common(sub.add_parser("sweep-drive", help="peak fidelity vs Rabi amplitude"))
    add_common(sub.add_parser("optimize", help="optimize the Rabi amplitude"))
    add_common(sub.add_parser("sweep-tau", help="re-optimize over collective rates"))
    add_common(sub.add_parser("sweep-deviation", help="robustness against weight deviations"))
    repro = sub.add_parser("reproduce", help="re-run a published figure")
    repro.add_argument("figure", choices=list(experiments.FIGURE_IDS))
    add_common(repro, config=False)
    return parser


def _load(args) -> RunSpec:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    spec = load_run(path.read_text())
    if args.nmax is not None:
        spec.config = dataclasses.replace(spec.config, n_max=args.nmax)
    if args.samples is not None:
        spec.samples = args.samples
    if args.frame is not None:
        spec.frame = FRAME_ROTATING if args.frame == "rotating" else "lab"
    return spec


def _report_warnings(cfg) -> list[str]:
    warnings = validate_config(cfg)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return warnings


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    spec = _load(args)
    cfg = spec.config
    out = _outdir(args)
    target = target_dark_state(cfg).state
    rabi = cfg.drive.rabi
    horizon = spec.horizon or (
        experiments.PEAK_HORIZON_FACTOR / rabi if rabi > 0 else 10.0 / cfg.tau
    )
    traj = run_fidelity_trace(
        cfg,
        target,
        horizon,
        samples=spec.samples or 2000,
        frame=spec.frame or FRAME_ROTATING,
        dephasing_reservoir=spec.dephasing_reservoir,
    )
    manifest = RunManifest.for_config(
        "simulate", cfg, horizon=horizon, frame=spec.frame or FRAME_ROTATING,
        dephasing_reservoir=spec.dephasing_reservoir,
    )
    manifest.warnings = _report_warnings(cfg)
    manifest.add_output(write_trajectory_csv(traj, out / "trajectory.csv"), out)
    if not args.no_plot:
        from . import plotting

        manifest.add_output(
            plotting.plot_trajectories({"trajectory": traj}, out / "trajectory.png"), out
        )
    manifest.write(out)
    print(f"final fidelity {traj.fidelity[-1]:.6f} at t = {traj.times[-1]:g}")
    print(f"outputs in {out}")
    return 0


def _cmd_spectrum(args) -> int:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = load_run(path.read_text()).config
    _report_warnings(cfg)
    dec = decompose(cfg)
    basis = single_excitation_basis(cfg.layout)
    print(f"decomposition method: {dec.method}")
    rows = []
    for name, state in (("D1", dec.d1), ("D2", dec.d2), ("B", dec.bright)):
        amps = [complex(np.vdot(getattr(basis, b), state)) for b in ("e00", "g10", "g01")]
        rows.append((name, amps))
        amp_text = ", ".join(f"{a.real:+.6f}{a.imag:+.6f}j" for a in amps)
        print(f"  {name}: ({amp_text}) over (|e00>, |g10>, |g01>)")
    print(f"eigenvalues: E_D = {dec.e_d:.6g}, E_B = {dec.e_b:.6g}")
    print(f"gram-schmidt k: ({dec.k1:.6g}, {dec.k2:.6g}, {dec.k3:.6g})")
    try:
        tgt = target_dark_state(cfg)
        print(f"overlap coefficients c: ({tgt.c1:.6g}, {tgt.c2:.6g}, {tgt.c3:.6g})")
        amps = [complex(np.vdot(getattr(basis, b), tgt.state)) for b in ("e00", "g10", "g01")]
        amp_text = ", ".join(f"{a.real:+.6f}{a.imag:+.6f}j" for a in amps)
        print(f"target dark state: ({amp_text})")
        rows.append(("target", amps))
    except Exception as exc:
        print(f"no target dark state: {exc}")
    if args.csv:
        table = []
        for name, amps in rows:
            table.append([i for pair in ((a.real, a.imag) for a in amps) for i in pair])
        write_series_csv(
            Path(args.csv),
            ["e00_re", "e00_im", "g10_re", "g10_im", "g01_re", "g01_im"],
            table,
        )
        print(f"wrote {args.csv}")
    return 0


def _cmd_sweep_drive(args) -> int:
    spec = _load(args)
    if not spec.rabi_values:
        raise ConfigError("sweep-drive needs rabi_values in the config")
    cfg = spec.config
    out = _outdir(args)
    target = target_dark_state(cfg).state
    points = sweep_drive(cfg, target, spec.rabi_values, jobs=args.jobs)
    linewidth = LINEWIDTH_PER_TAU * cfg.tau
    manifest = RunManifest.for_config("sweep-drive", cfg, rabi_values=spec.rabi_values)
    manifest.warnings = _report_warnings(cfg)
    manifest.add_output(
        write_series_csv(out / "sweep_drive.csv", ["rabi", "drive_ratio", "f_max", "t_max"],
                         [(r, r / linewidth, p.f_max, p.t_max) for r, p in points]),
        out,
    )
    if not args.no_plot:
        from . import plotting

        manifest.add_output(
            plotting.plot_peak_sweep([(r / linewidth, p) for r, p in points],
                                     out / "sweep_drive.png"), out)
    manifest.write(out)
    for r, p in points:
        print(f"rabi {r:.6g}: F_max = {p.f_max:.6f} at t = {p.t_max:.6g}")
    return 0


def _cmd_optimize(args) -> int:
    spec = _load(args)
    cfg = spec.config
    out = _outdir(args)
    target = target_dark_state(cfg).state
    result = optimize_drive(cfg, target, spec.rabi_bracket, jobs=args.jobs)
    manifest = RunManifest.for_config("optimize", cfg, rabi_bracket=spec.rabi_bracket)
    manifest.warnings = _report_warnings(cfg)
    manifest.parameters["evaluations"] = result.evaluations
    manifest.add_output(
        write_series_csv(out / "optimize.csv",
                         ["rabi_opt", "drive_ratio_opt", "f_opt", "t_opt"],
                         [(result.rabi_opt, result.rabi_opt / (LINEWIDTH_PER_TAU * cfg.tau),
                           result.f_opt, result.t_opt)]),
        out,
    )
    manifest.write(out)
    print(
        f"optimum: rabi = {result.rabi_opt:.6g} (ratio "
        f"{result.rabi_opt / (LINEWIDTH_PER_TAU * cfg.tau):.6g}), F = {result.f_opt:.6f}, "
        f"t = {result.t_opt:.6g} ({result.evaluations} evaluations)"
    )
    return 0


def _cmd_sweep_tau(args) -> int:
    spec = _load(args)
    if not spec.tau_values:
        raise ConfigError("sweep-tau needs tau_values in the config")
    cfg = spec.config
    out = _outdir(args)
    target = target_dark_state(cfg).state
    points = sweep_tau(cfg, target, spec.tau_values, jobs=args.jobs)
    manifest = RunManifest.for_config("sweep-tau", cfg, tau_values=spec.tau_values)
    manifest.warnings = _report_warnings(cfg)
    manifest.add_output(
        write_series_csv(out / "sweep_tau.csv", ["tau", "f_opt", "rabi_opt", "t_opt"],
                         [(t, r.f_opt, r.rabi_opt, r.t_opt) for t, r in points]),
        out,
    )
    manifest.write(out)
    for t, r in points:
        print(f"tau {t:.6g}: F_opt = {r.f_opt:.6f} at rabi {r.rabi_opt:.6g}")
    return 0


def _cmd_sweep_deviation(args) -> int:
    spec = _load(args)
    if not spec.delta_values or not spec.deviation_channel:
        raise ConfigError("sweep-deviation needs delta_values and deviation_channel")
    cfg = spec.config
    out = _outdir(args)
    target = target_dark_state(cfg).state
    points = sweep_deviation(cfg, target, spec.deviation_channel, spec.delta_values,
                             jobs=args.jobs)
    manifest = RunManifest.for_config(
        "sweep-deviation", cfg, deltas=spec.delta_values, channel=spec.deviation_channel
    )
    manifest.warnings = _report_warnings(cfg)
    manifest.add_output(
        write_series_csv(out / "sweep_deviation.csv", ["delta", "f_opt", "rabi_opt", "t_opt"],
                         [(d, r.f_opt, r.rabi_opt, r.t_opt) for d, r in points]),
        out,
    )
    manifest.write(out)
    for d, r in points:
        print(f"delta {d:+.3f}: F_opt = {r.f_opt:.6f}")
    return 0


def _cmd_reproduce(args) -> int:
    out = Path(args.out) / args.figure
    manifest = reproduce(
        args.figure,
        out,
        n_max=args.nmax or 2,
        samples=args.samples or 2000,
        jobs=args.jobs,
        plot=not args.no_plot,
    )
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{args.figure}: wrote {len(manifest.outputs) + 1} files to {out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "spectrum": _cmd_spectrum,
    "sweep-drive": _cmd_sweep_drive,
    "optimize": _cmd_optimize,
    "sweep-tau": _cmd_sweep_tau,
    "sweep-deviation": _cmd_sweep_deviation,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolationError, StepSizeUnderflow) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
