"""``mrcarray`` command line.

Exit codes: 0 success, 2 config/argument error, 3 validation error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from mrcarray import _backend
from mrcarray.analysis import (
    DEFAULT_PROMINENCE_FLOOR,
    damping_study,
    detect_peaks,
    fit_coupling,
    match_peaks_to_modes,
)
from mrcarray.config import PRESETS, ConfigError, load_config, preset_text, table_text
from mrcarray.eigenmodes import DEFAULT_NODE_TOLERANCE, classify_modes, solve_modes
from mrcarray.errors import ArrayValidationError, EmptySpectrum, NumericalError
from mrcarray.model import CoilCircuit
from mrcarray.twocoil import dispersion_curve, estimate_k_from_split, identical_coupled_frequencies

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _plot_path(plot, out, cfg, arg, suffix):
    if plot is None:
        return None
    if plot is not True:
        return Path(plot)
    if out is not None:
        return Path(out).with_suffix(".svg")
    if cfg is not None and cfg.source is not None:
        return cfg.source.with_name(f"{cfg.source.stem}_{suffix}.svg")
    return Path(f"{Path(str(arg)).stem}_{suffix}.svg")


def cmd_modes(args):
    cfg = load_config(args.config)
    modes = solve_modes(cfg.model)
    cls = classify_modes(modes, args.node_tolerance)
    n = modes.n
    group_of = {m: gi + 1 for gi, g in enumerate(modes.degeneracy_groups) for m in g}
    header = ["mode_index", "frequency_Hz"] + [f"v{e + 1}" for e in range(n)] + ["degeneracy_group", "nodes"]
    rows = []
    for i in range(n):
        nodes = ";".join(str(e + 1) for e in sorted(cls.nodes[i]))
        rows.append([i + 1, modes.frequencies[i], *modes.mode_shapes[:, i], group_of[i], nodes])
    _emit(table_text(header, rows), args.out)
    return EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    drive = cfg.drive if args.drive is None else args.drive - 1
    if not (0 <= drive < cfg.model.n):
        raise ConfigError(f"--drive: element {drive + 1} out of range 1..{cfg.model.n}")
    modes = solve_modes(cfg.model)
    spectrum, peaks = detect_peaks(
        cfg.model, drive, cfg.grid, prominence_floor=args.prominence_floor, backend=args.backend
    )
    peaks = match_peaks_to_modes(peaks, modes, drive)

    n = cfg.model.n
    header = ["frequency_Hz", "Z_abs_ohm", "Z_phase_rad"]
    for e in range(n):
        header += [f"V{e + 1}_abs", f"V{e + 1}_phase_rad"]
    z = spectrum.input_impedance
    v = spectrum.element_voltages
    cols = [spectrum.frequencies, np.abs(z), np.angle(z)]
    for e in range(n):
        cols += [np.abs(v[e]), np.angle(v[e])]
    rows = np.column_stack(cols).tolist()

    comments = [f"drive={drive + 1} peaks={len(peaks)}", "peak,index,frequency_Hz,Z_abs_ohm,prominence_ohm,mode,deviation"]
    for i, p in enumerate(peaks):
        mode = "" if p.matched_mode is None else str(p.matched_mode + 1)
        comments.append(
            f"peak,{i + 1},{p.frequency:.12g},{p.magnitude:.12g},{p.prominence:.12g},{mode},{p.deviation:.12g}"
        )
    for i, f in enumerate(modes.frequencies):
        comments.append(f"eigenfrequency,{i + 1},{f:.12g}")
    _emit(table_text(header, rows, comments), args.out)

    plot = _plot_path(args.plot, args.out, cfg, args.config, "sweep")
    if plot is not None:
        from mrcarray.plotting import plot_sweep

        plot_sweep(plot, spectrum, peaks, modes.frequencies)
    return EXIT_OK


def _coil_from_args(args):
    return CoilCircuit(args.L_uH * 1e-6, args.C_pF * 1e-12, args.R_ohm)


def cmd_two_coil(args):
    coil = _coil_from_args(args)
    if args.k is not None:
        pair = identical_coupled_frequencies(coil.inductance, coil.capacitance, args.k)
        header = ["k", "f_plus_Hz", "f_minus_Hz", "k_from_split"]
        rows = [[args.k, pair.f_plus, pair.f_minus, estimate_k_from_split(pair)]]
        _emit(table_text(header, rows), args.out)
        return EXIT_OK
    start, stop = args.k_range
    return _dispersion(args, coil, start, stop)


def cmd_dispersion(args):
    return _dispersion(args, _coil_from_args(args), 0.0, args.k_max)


def _dispersion(args, coil, start, stop):
    if start != 0.0:
        raise ConfigError("k range must start at 0")
    curve = dispersion_curve(
        coil.inductance, coil.capacitance, coil.resistance, stop, args.steps, dip_factor=args.dip_factor
    )
    header = ["k", "lower_Hz", "upper_Hz", "resolvable"]
    rows = [[k, lo, hi, bool(ok)] for k, lo, hi, ok in zip(curve.k_values, curve.lower_branch, curve.upper_branch, curve.resolvable)]
    _emit(table_text(header, rows), args.out)
    plot = _plot_path(args.plot, args.out, None, "dispersion", "curve")
    if plot is not None:
        from mrcarray.plotting import plot_dispersion

        plot_dispersion(plot, curve)
    return EXIT_OK


def cmd_fit_k(args):
    cfg = load_config(args.config)
    if cfg.layout == "matrix":
        raise ConfigError("fit-k needs a 'chain' or 'close_packed' coupling template")
    observed = np.array(args.observed) * 1e6
    if observed.size > cfg.model.n:
        raise ValueError(f"{observed.size} observed frequencies but the array has only {cfg.model.n} modes")
    fit = fit_coupling(observed, cfg.model.coils, layout=cfg.layout, decay_exponent=cfg.decay_exponent)
    lines = [f"k_estimate,{fit.k:.12g}", f"residual,{fit.residual:.12g}"]
    lines += [f"model_frequency_Hz,{i + 1},{f:.12g}" for i, f in enumerate(fit.model_frequencies)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_damping(args):
    cfg = load_config(args.config)
    r_list = args.r_list if args.r_list is not None else cfg.r_list
    if not r_list:
        raise ConfigError("no resistance list: pass --r-list or add damping.R_ohm to the config")
    study = damping_study(cfg.model, r_list, cfg.drive, cfg.grid, backend=args.backend)
    n = cfg.model.n
    header = ["R_ohm", "peak_count", "merged"] + [f"deviation_mode{m + 1}" for m in range(n)]
    rows = [[r.resistance, r.peak_count, r.merged, *r.deviations] for r in study.rows]
    comments = [f"drive={cfg.drive + 1} predicted_peaks={study.predicted_peaks}"]
    comments += [f"eigenfrequency,{i + 1},{f:.12g}" for i, f in enumerate(study.mode_frequencies)]
    _emit(table_text(header, rows, comments), args.out)
    plot = _plot_path(args.plot, args.out, cfg, args.config, "damping")
    if plot is not None:
        from mrcarray.plotting import plot_damping

        plot_damping(plot, study)
    return EXIT_OK


def cmd_presets(args):
    if args.name:
        sys.stdout.write(preset_text(args.name))
    else:
        sys.stdout.write("\n".join(PRESETS) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="mrcarray", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernel: {_backend.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("config", help="config file path or preset name")
        p.add_argument("--out", help="write the table here instead of stdout")

    p = sub.add_parser("modes", help="resonant frequencies and mode shapes")
    add_config(p)
    p.add_argument("--node-tolerance", type=float, default=DEFAULT_NODE_TOLERANCE)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("sweep", help="input-impedance spectrum with detected peaks")
    add_config(p)
    p.add_argument("--drive", type=int, help="driven element (1-based), overrides the config")
    p.add_argument("--plot", nargs="?", const=True, help="also write an SVG plot (optional path)")
    p.add_argument("--prominence-floor", type=float, default=DEFAULT_PROMINENCE_FLOOR)
    p.add_argument("--backend", choices=sorted(_backend.KERNELS), default=None)
    p.set_defaults(func=cmd_sweep)

    def add_coil(p):
        p.add_argument("--L-uH", dest="L_uH", type=float, default=10.0)
        p.add_argument("--C-pF", dest="C_pF", type=float, default=150.0)
        p.add_argument("--R-ohm", dest="R_ohm", type=float, default=10.0)
        p.add_argument("--out")

    def add_dispersion(p):
        p.add_argument("--steps", type=int, default=41)
        p.add_argument("--dip-factor", type=float, default=0.9)
        p.add_argument("--plot", nargs="?", const=True, help="also write an SVG plot (optional path)")

    p = sub.add_parser("two-coil", help="split frequencies of an identical coil pair")
    add_coil(p)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--k", type=float)
    grp.add_argument("--k-range", type=float, nargs=2, metavar=("START", "STOP"))
    add_dispersion(p)
    p.set_defaults(func=cmd_two_coil, k=None)

    p = sub.add_parser("dispersion", help="split branches and resolvability versus k")
    add_coil(p)
    p.add_argument("--k-max", type=float, default=0.4)
    add_dispersion(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("fit-k", help="fit a scalar coupling coefficient to observed resonances")
    add_config(p)
    p.add_argument("--observed", type=_float_list, required=True, help="comma-separated frequencies in MHz")
    p.set_defaults(func=cmd_fit_k)

    p = sub.add_parser("damping", help="peak deviation from eigenfrequencies versus resistance")
    add_config(p)
    p.add_argument("--r-list", type=_float_list, help="comma-separated resistances in ohms")
    p.add_argument("--plot", nargs="?", const=True, help="also write an SVG plot (optional path)")
    p.add_argument("--backend", choices=sorted(_backend.KERNELS), default=None)
    p.set_defaults(func=cmd_damping)

    p = sub.add_parser("presets", help="list bundled presets or print one")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "two-coil" and args.k is None and args.k_range is None:
        args.k = 0.14
    try:
        return args.func(args)
    except ConfigError as exc:
        code, message = EXIT_CONFIG, f"config error: {exc}"
    except ArrayValidationError as exc:
        code, message = EXIT_VALIDATION, f"validation error: {type(exc).__name__}: {exc}"
    except (NumericalError, EmptySpectrum) as exc:
        code, message = EXIT_NUMERICAL, f"numerical error: {type(exc).__name__}: {exc}"
    except ValueError as exc:
        code, message = EXIT_CONFIG, f"argument error: {exc}"
    print(f"mrcarray: {message}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
