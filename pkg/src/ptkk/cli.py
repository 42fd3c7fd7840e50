"""Command-line front end: every experiment as a subcommand with CSV/JSON output.

Each run writes one data table (CSV) plus a run manifest
(<command>_summary.json) holding the full configuration and the derived
numbers, and prints a one-line summary to stdout.  Outputs carry no
timestamps and use fixed float formatting, so re-running the same command
reproduces the files byte for byte.

Exit codes: 0 success, 2 configuration/validation error (unknown flags,
malformed CSV, invalid parameter domains), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import backend, set_num_threads
from .blaschke import (
    ContourError,
    argument_principle_integral,
    bode_sum,
    winding_number_contour,
)
from .experiments import (
    DEFAULT_SCAN_POINTS,
    FitRefusedError,
    PeakNotDetectableError,
    fit_uhp_pole,
    phase_diagram,
    pole_trajectory,
    scaling_experiment,
    ssh_experiment,
)
from .kk import (
    CSVFormatError,
    DEFAULT_PAD_FACTOR,
    FrequencyGrid,
    corrected_kk,
    kk_residual_report,
    read_spectrum_csv,
    remove_offset,
    sample_response,
    standard_kk,
    uhp_pole_data,
)
from .response import (
    BoundaryPoleError,
    DimerParams,
    EPDegenerateError,
    SP,
    SYM,
    critical_gamma,
    poles,
    reflection_response,
    uhp_threshold,
)

_NUMERICAL_ERRORS = (
    ContourError,
    EPDegenerateError,
    BoundaryPoleError,
    FitRefusedError,
    PeakNotDetectableError,
    ArithmeticError,
    np.linalg.LinAlgError,
)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    return obj


def _write_manifest(path: Path, command: str, config: dict, results: dict) -> None:
    doc = {
        "command": command,
        "config": _json_ready(config),
        "results": _json_ready(results),
        "tool": {"name": "ptkk", "version": __version__, "backend": backend()},
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model(args) -> DimerParams:
    return DimerParams(
        gamma=args.gamma,
        kappa=args.kappa,
        gamma_ex=args.gamma_ex,
        convention=args.convention,
    )


def _grid(args) -> FrequencyGrid:
    return FrequencyGrid(half_width=args.half_width, n_points=args.n_points)


def _model_config(args) -> dict:
    return {
        "gamma": args.gamma,
        "kappa": args.kappa,
        "gamma_ex": args.gamma_ex,
        "convention": args.convention,
    }


def _grid_config(args) -> dict:
    return {
        "half_width": args.half_width,
        "n_points": args.n_points,
        "pad_factor": getattr(args, "pad_factor", None),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_poles(args) -> int:
    model = _model(args)
    ps = poles(model)
    resp = reflection_response(model)
    n_b = int(uhp_threshold(model))
    try:
        raw = argument_principle_integral(resp)
        n_contour = winding_number_contour(resp)
    except BoundaryPoleError:
        # closed-system limit: resonances sit on the real axis and the
        # contour integral is undefined; the threshold count stands alone
        raw = None
        n_contour = None
    uhp = [p for p in ps if p.in_uhp and not p.on_boundary and not p.degenerate]
    weighted, strip = bode_sum(uhp) if uhp else (0.0, 0.0)

    out = _outdir(args)
    _write_csv(
        out / "poles.csv",
        ["re_z", "im_z", "re_rho", "im_rho", "in_uhp", "degenerate"],
        [
            [
                p.location.real,
                p.location.imag,
                p.residue.real if p.residue is not None else float("nan"),
                p.residue.imag if p.residue is not None else float("nan"),
                p.in_uhp,
                p.degenerate,
            ]
            for p in ps
        ],
    )
    results = {
        "poles": [p.location for p in ps],
        "residues": [p.residue for p in ps if p.residue is not None],
        "winding_threshold": n_b,
        "winding_contour": n_contour,
        "argument_principle_raw": raw,
        "bode_sum_weighted": weighted,
        "bode_sum_strip": strip,
    }
    _write_manifest(out / "poles_summary.json", "poles", _model_config(args), results)
    zs = " ".join(f"{p.location:.6g}" for p in ps)
    contour_note = "n/a" if n_contour is None else str(n_contour)
    print(f"poles: z = [{zs}]  N_B = {n_b} (contour {contour_note})")
    return 0


def _cmd_trajectory(args) -> int:
    traj = pole_trajectory(
        args.convention,
        args.gamma_ex,
        gamma_range=(args.gamma_min, args.gamma_max),
        n_steps=args.n_steps,
        kappa=args.kappa,
    )
    gc = critical_gamma(args.gamma_ex, kappa=args.kappa, convention=args.convention)
    out = _outdir(args)
    _write_csv(
        out / "trajectory.csv",
        ["gamma", "re_z_plus", "im_z_plus", "re_z_minus", "im_z_minus"],
        [
            [g, p[0].real, p[0].imag, p[1].real, p[1].imag]
            for g, p in zip(traj.gammas, traj.paths)
        ],
    )
    config = {
        "convention": args.convention,
        "gamma_ex": args.gamma_ex,
        "kappa": args.kappa,
        "gamma_range": [args.gamma_min, args.gamma_max],
        "n_steps": args.n_steps,
    }
    results = {"crossing_gamma": traj.crossing_gamma, "critical_gamma": gc}
    _write_manifest(out / "trajectory_summary.json", "trajectory", config, results)
    cross = "none" if traj.crossing_gamma is None else f"{traj.crossing_gamma:.6g}"
    print(f"trajectory: crossing at gamma = {cross} (threshold {gc:.6g})")
    return 0


def _cmd_phase_diagram(args) -> int:
    gammas = np.linspace(args.gamma_min, args.gamma_max, args.gamma_steps)
    gamma_exs = np.linspace(args.gamma_ex_min, args.gamma_ex_max, args.gamma_ex_steps)
    pmap = phase_diagram(
        args.convention,
        gammas,
        gamma_exs,
        kappa=args.kappa,
        check_fraction=args.check_fraction,
    )
    out = _outdir(args)
    rows = [
        [g, ge, pmap.winding[i, j], pmap.boundary[i, j]]
        for i, g in enumerate(pmap.gammas)
        for j, ge in enumerate(pmap.gamma_exs)
    ]
    _write_csv(out / "phase_diagram.csv", ["gamma", "gamma_ex", "winding", "boundary"], rows)
    config = {
        "convention": args.convention,
        "kappa": args.kappa,
        "gamma_range": [args.gamma_min, args.gamma_max, args.gamma_steps],
        "gamma_ex_range": [args.gamma_ex_min, args.gamma_ex_max, args.gamma_ex_steps],
        "check_fraction": args.check_fraction,
    }
    counts = {str(v): int(np.sum(pmap.winding == v)) for v in np.unique(pmap.winding)}
    results = {"cell_counts_by_winding": counts, "boundary_cells": int(pmap.boundary.sum())}
    _write_manifest(out / "phase_diagram_summary.json", "phase-diagram", config, results)
    print(f"phase-diagram: cells by N_B {counts}, boundary cells {int(pmap.boundary.sum())}")
    return 0


def _cmd_kk_residual(args) -> int:
    model = _model(args)
    resp = reflection_response(model)
    grid = _grid(args)
    res = kk_residual_report(resp, grid=grid, pad_factor=args.pad_factor)
    w = res.grid.omegas
    vals = resp.resolvent(w)
    out = _outdir(args)
    _write_csv(
        out / "kk_residual.csv",
        [
            "omega",
            "re_response",
            "im_response",
            "hilbert_of_imag",
            "standard_residual",
            "correction",
            "corrected_residual",
        ],
        np.column_stack(
            [
                w,
                vals.real,
                vals.imag,
                res.hilbert_of_imag,
                res.standard_residual,
                res.correction,
                res.corrected_residual,
            ]
        ),
    )
    ps = uhp_pole_data(resp)
    results = {
        "l2_standard": res.l2_standard,
        "l2_corrected": res.l2_corrected,
        "reduction_factor": res.reduction_factor,
        "uhp_poles": [p.location for p in ps],
        "uhp_residues": [p.residue for p in ps],
    }
    config = {**_model_config(args), **_grid_config(args)}
    _write_manifest(out / "kk_residual_summary.json", "kk-residual", config, results)
    print(
        f"kk-residual: l2_standard = {res.l2_standard:.6g}  "
        f"l2_corrected = {res.l2_corrected:.6g}  "
        f"reduction_factor = {res.reduction_factor:.3g}"
    )
    return 0


def _cmd_scaling(args) -> int:
    window = None
    if args.window_lo is not None or args.window_hi is not None:
        if args.window_lo is None or args.window_hi is None:
            raise ValueError("give both --window-lo and --window-hi or neither")
        window = (args.window_lo, args.window_hi)
    fit = scaling_experiment(
        args.convention,
        args.gamma_ex,
        window=window,
        n_scan=args.n_scan,
        grid=_grid(args),
        pad_factor=args.pad_factor,
        kappa=args.kappa,
    )
    out = _outdir(args)
    _write_csv(
        out / "scaling.csv",
        ["gamma", "delta_gamma", "dkk", "reduction_factor"],
        [
            [fit.gamma_c + d, d, v, r]
            for (d, v), r in zip(fit.points, fit.reductions)
        ],
    )
    config = {
        "convention": args.convention,
        "gamma_ex": args.gamma_ex,
        "kappa": args.kappa,
        "window": list(fit.window),
        "n_scan": args.n_scan,
        **_grid_config(args),
    }
    results = {
        "gamma_c": fit.gamma_c,
        "nu": fit.exponent,
        "nu_stderr": fit.exponent_stderr,
        "r_squared": fit.r_squared,
        "min_reduction_factor": float(fit.reductions.min()),
    }
    _write_manifest(out / "scaling_summary.json", "scaling", config, results)
    print(
        f"scaling: nu = {fit.exponent:.4f} +- {fit.exponent_stderr:.4f}  "
        f"R^2 = {fit.r_squared:.5f}  gamma_c = {fit.gamma_c:.6f}"
    )
    return 0


def _cmd_ssh_check(args) -> int:
    window = None
    if args.window_lo is not None or args.window_hi is not None:
        if args.window_lo is None or args.window_hi is None:
            raise ValueError("give both --window-lo and --window-hi or neither")
        window = (args.window_lo, args.window_hi)
    res = ssh_experiment(
        t1=args.t1,
        hopping_ratio=args.hopping_ratio,
        gamma_ex=args.gamma_ex,
        window=window,
        n_scan=args.n_scan,
        grid=_grid(args),
        pad_factor=args.pad_factor,
        n_sites=args.n_sites,
    )
    out = _outdir(args)
    _write_csv(
        out / "ssh_check.csv",
        ["gamma", "delta_gamma", "dkk", "reduction_factor", "n_uhp_poles"],
        np.column_stack(
            [res.gammas, res.gammas - res.gamma_c, res.dkk, res.reductions, res.n_uhp]
        ),
    )
    config = {
        "t1": args.t1,
        "hopping_ratio": args.hopping_ratio,
        "gamma_ex": args.gamma_ex,
        "n_sites": args.n_sites,
        "window": None if window is None else list(window),
        "n_scan": args.n_scan,
        **_grid_config(args),
    }
    results = {
        "gamma_c": res.gamma_c,
        "monotonic": res.monotonic,
        "fit": None
        if res.fit is None
        else {
            "nu": res.fit.exponent,
            "nu_stderr": res.fit.exponent_stderr,
            "r_squared": res.fit.r_squared,
        },
    }
    _write_manifest(out / "ssh_check_summary.json", "ssh-check", config, results)
    if res.fit is None:
        print(f"ssh-check: gamma_c = {res.gamma_c:.6f}  fit refused (too few points)")
    else:
        print(
            f"ssh-check: nu = {res.fit.exponent:.4f}  R^2 = {res.fit.r_squared:.4f}  "
            f"monotonic = {res.monotonic}"
        )
    return 0


def _read_named_column(path: str, column: str) -> tuple[np.ndarray, np.ndarray]:
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise CSVFormatError(f"{path}: empty file, expected a header row")
        for name in ("omega", column):
            if name not in header:
                raise CSVFormatError(f"{path}: missing column {name!r}")
        iw, ic = header.index("omega"), header.index(column)
        omega, vals = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                omega.append(float(row[iw]))
                vals.append(float(row[ic]))
            except (ValueError, IndexError):
                raise CSVFormatError(f"{path}:{lineno}: bad row")
    return np.asarray(omega), np.asarray(vals)


def _grid_from_omegas(path: str, omega: np.ndarray) -> FrequencyGrid:
    if omega.size < 3:
        raise CSVFormatError(f"{path}: need at least 3 data rows")
    steps = np.diff(omega)
    if np.any(steps <= 0):
        raise CSVFormatError(f"{path}: omega column must be strictly ascending")
    if np.abs(steps - steps.mean()).max() > 1e-6 * steps.mean():
        raise CSVFormatError(f"{path}: omega grid is not uniform")
    if omega.size % 2 == 0:
        raise CSVFormatError(f"{path}: need an odd number of rows")
    if abs(omega[0] + omega[-1]) > 1e-9 * max(1.0, abs(omega[-1])):
        raise CSVFormatError(f"{path}: omega grid is not symmetric about zero")
    return FrequencyGrid(half_width=float(omega[-1]), n_points=omega.size)


def _cmd_fit_pole(args) -> int:
    omega, residual = _read_named_column(args.input, args.column)
    grid = _grid_from_omegas(args.input, omega)
    fit = fit_uhp_pole(residual, grid)
    out = _outdir(args)
    config = {"input": str(args.input), "column": args.column}
    results = {
        "location": fit.location,
        "residue": fit.residue,
        "rms_misfit": fit.rms_misfit,
        "converged": fit.converged,
    }
    _write_manifest(out / "fit_pole_summary.json", "fit-pole", config, results)
    print(
        f"fit-pole: z0 = {fit.location:.6g}  rho = {fit.residue:.6g}  "
        f"rms = {fit.rms_misfit:.3g}  converged = {fit.converged}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    raw = read_spectrum_csv(args.input)
    samples = remove_offset(raw, args.offset)
    res = standard_kk(samples)
    fit = fit_uhp_pole(res.standard_residual, res.grid)
    out = _outdir(args)
    _write_csv(
        out / "diagnose.csv",
        ["omega", "re", "im", "hilbert_of_imag", "standard_residual"],
        np.column_stack(
            [
                res.grid.omegas,
                samples.values.real,
                samples.values.imag,
                res.hilbert_of_imag,
                res.standard_residual,
            ]
        ),
    )
    config = {"input": str(args.input), "offset": args.offset}
    results = {
        "l2_standard": res.l2_standard,
        "fitted_pole": fit.location,
        "fitted_residue": fit.residue,
        "rms_misfit": fit.rms_misfit,
        "converged": fit.converged,
    }
    _write_manifest(out / "diagnose_summary.json", "diagnose", config, results)
    print(
        f"diagnose: l2_standard = {res.l2_standard:.6g}  "
        f"fitted pole z0 = {fit.location:.6g}  rho = {fit.residue:.6g}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--outdir",
        default=os.environ.get("PTKK_OUTDIR", "."),
        help="output directory (default: $PTKK_OUTDIR or the working directory)",
    )
    p.add_argument("--threads", type=int, default=0, help="cap kernel worker threads")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, required=True, help="gain-loss rate")
    p.add_argument("--kappa", type=float, default=1.0, help="inter-site coupling")
    p.add_argument("--gamma-ex", type=float, default=0.0, help="port coupling rate")
    p.add_argument("--convention", choices=[SP, SYM], default=SP)


def _add_grid(p: argparse.ArgumentParser, pad: bool = True) -> None:
    p.add_argument("--half-width", type=float, default=5.0, help="norm window half-width")
    p.add_argument("--n-points", type=int, default=4001, help="grid points (odd)")
    if pad:
        p.add_argument(
            "--pad-factor",
            type=int,
            default=DEFAULT_PAD_FACTOR,
            help="Hilbert evaluation grid is this many times wider",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptkk",
        description=(
            "Causality diagnostics for open gain-loss resonators: poles, "
            "winding numbers, and residue-corrected dispersion relations."
        ),
    )
    parser.add_argument("--version", action="version", version=f"ptkk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poles", help="pole locations, residues, winding numbers")
    _add_model(p)
    _add_common(p)
    p.set_defaults(func=_cmd_poles)

    p = sub.add_parser("trajectory", help="pole paths over a gain-loss sweep")
    p.add_argument("--convention", choices=[SP, SYM], default=SP)
    p.add_argument("--gamma-ex", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=2.0)
    p.add_argument("--n-steps", type=int, default=201)
    _add_common(p)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("phase-diagram", help="winding number over a parameter grid")
    p.add_argument("--convention", choices=[SP, SYM], default=SP)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--gamma-min", type=float, default=0.04)
    p.add_argument("--gamma-max", type=float, default=2.0)
    p.add_argument("--gamma-steps", type=int, default=50)
    p.add_argument("--gamma-ex-min", type=float, default=0.05)
    p.add_argument("--gamma-ex-max", type=float, default=2.5)
    p.add_argument("--gamma-ex-steps", type=int, default=50)
    p.add_argument("--check-fraction", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=_cmd_phase_diagram)

    p = sub.add_parser("kk-residual", help="standard vs residue-corrected dispersion check")
    _add_model(p)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=_cmd_kk_residual)

    p = sub.add_parser("scaling", help="power-law fit of the residual norm above threshold")
    p.add_argument("--convention", choices=[SP, SYM], default=SP)
    p.add_argument("--gamma-ex", type=float, default=0.05)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--window-lo", type=float, default=None)
    p.add_argument("--window-hi", type=float, default=None)
    p.add_argument("--n-scan", type=int, default=DEFAULT_SCAN_POINTS)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("ssh-check", help="chain scan showing non-universal scaling")
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--hopping-ratio", type=float, default=0.5)
    p.add_argument("--gamma-ex", type=float, default=0.1)
    p.add_argument("--n-sites", type=int, default=4)
    p.add_argument("--window-lo", type=float, default=None)
    p.add_argument("--window-hi", type=float, default=None)
    p.add_argument("--n-scan", type=int, default=DEFAULT_SCAN_POINTS)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=_cmd_ssh_check)

    p = sub.add_parser("fit-pole", help="fit the dominant UHP pole to a residual table")
    p.add_argument("--input", required=True, help="CSV with omega + residual columns")
    p.add_argument("--column", default="standard_residual", help="residual column name")
    _add_common(p)
    p.set_defaults(func=_cmd_fit_pole)

    p = sub.add_parser("diagnose", help="standard KK + pole fit on a measured spectrum")
    p.add_argument("--input", required=True, help="CSV with columns omega, re, im")
    p.add_argument("--offset", type=float, default=1.0, help="high-frequency offset")
    _add_common(p)
    p.set_defaults(func=_cmd_diagnose)

    return parser


def run(argv=None) -> int:
    """Parse arguments and execute one subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message; code 2 on error
        return int(exc.code or 0)
    try:
        if args.threads:
            set_num_threads(args.threads)
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"ptkk: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"ptkk: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
