"""Command line front end.

Subcommands: modes, coupling, place, ppf-design, sweep, analyze. All take a
project INI file via --config (analyze can run from an FRF file alone) and
write CSV results into --out-dir. Exit codes: 0 success, 1 validation or
data error, 2 numerical failure, 3 file system error. Floats in CSV files
and reports carry 9 significant digits.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ProjectConfig, load_config
from .errors import (BandwidthError, ConfigError, InvalidInputError,
                     NumericalError, ParseError)
from .frf import (FRF, bode_table, find_peaks, frf_of, gain_sweep,
                  half_power_damping, load_frf_csv)
from .modal import TWO_PI
from .piezo import coupling_factor
from .placement import PlacementProblem, optimize_placement, scan_objective
from .ppf import (LinearSystem, PPFConfig, UNBOUNDED_GAIN, build_plant,
                  close_loop, critical_gain, plant_system, ppf_controller)


def _fmt(v) -> str:
    return f"{float(v):.9g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_state_space_csv(sys_: LinearSystem, path: Path) -> None:
    """Write A, B, C, D as labelled blocks: 'name,rows,cols' then the rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# state-space blocks: 'name,rows,cols' header then row values\n")
        for name, mat in (("A", sys_.A), ("B", sys_.B), ("C", sys_.C),
                          ("D", sys_.D)):
            fh.write(f"{name},{mat.shape[0]},{mat.shape[1]}\n")
            for row in mat:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def _require_config(args) -> ProjectConfig:
    if not args.config:
        raise ConfigError("this command needs --config pointing to a project "
                          "INI file")
    return load_config(args.config)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _mode_weights(cfg: ProjectConfig, n_modes: int) -> dict[int, float]:
    if cfg.mode_weights is not None:
        return cfg.mode_weights
    return {i: 1.0 for i in range(1, n_modes + 1)}


def cmd_modes(args) -> int:
    """Build the configured modal model and export frequencies and shapes."""
    cfg = _require_config(args)
    out = _out_dir(args)
    model = cfg.build_model()
    rows = [[str(m.index), _fmt(m.freq_hz), _fmt(m.omega), _fmt(m.zeta),
             _fmt(m.modal_mass)] for m in model.modes]
    _write_csv(out / "modes.csv",
               ["mode", "freq_hz", "omega_rad_s", "zeta", "modal_mass_kg"],
               rows)
    header = (["x_m"] + [f"phi{m.index}" for m in model.modes]
              + [f"theta{m.index}" for m in model.modes])
    shape_rows = []
    for k, x in enumerate(model.grid):
        row = [_fmt(x)]
        row += [_fmt(m.phi[k]) for m in model.modes]
        row += [_fmt(m.theta[k]) for m in model.modes]
        shape_rows.append(row)
    _write_csv(out / "shapes.csv", header, shape_rows)
    _say(args, f"{model.source} model, {model.n_modes} modes on "
               f"{model.grid.size} points over {_fmt(model.length)} m")
    for m in model.modes:
        _say(args, f"  mode {m.index}: {_fmt(m.freq_hz)} Hz, "
                   f"zeta {_fmt(m.zeta)}")
    _say(args, f"wrote {out / 'modes.csv'} and {out / 'shapes.csv'}")
    return 0


def cmd_coupling(args) -> int:
    """Coupling factor of every mode for the patch at its configured position."""
    cfg = _require_config(args)
    out = _out_dir(args)
    model = cfg.build_model()
    results = [coupling_factor(model, cfg.patch, cfg.material, m.index)
               for m in model.modes]
    rows = [[str(r.mode_index), _fmt(model.mode(r.mode_index).freq_hz),
             _fmt(r.delta_theta), _fmt(r.k2), _fmt(r.f_open_hz),
             "1" if r.relative else "0"] for r in results]
    _write_csv(out / "coupling.csv",
               ["mode", "freq_hz", "delta_theta_per_m", "K2", "f_open_hz",
                "relative"], rows)
    _say(args, f"patch [{_fmt(cfg.patch.x_start)}, "
               f"{_fmt(cfg.patch.x_start + cfg.patch.length)}] m")
    for r in results:
        note = " (relative scale)" if r.relative else ""
        _say(args, f"  mode {r.mode_index}: K2 = {_fmt(r.k2)}, open-circuit "
                   f"{_fmt(r.f_open_hz)} Hz{note}")
    _say(args, f"wrote {out / 'coupling.csv'}")
    return 0


def cmd_place(args) -> int:
    """Scan candidate positions and pick the best patch placement."""
    cfg = _require_config(args)
    out = _out_dir(args)
    if cfg.placement_step <= 0.0:
        raise ConfigError("[analysis] step_m is required for the place command")
    model = cfg.build_model()
    problem = PlacementProblem(model, cfg.patch, cfg.material,
                               _mode_weights(cfg, model.n_modes),
                               cfg.placement_step, cfg.n_patches, cfg.min_gap)
    scan = scan_objective(problem)
    k2_cols = [f"K2_mode{m.index}" for m in model.modes]
    scan_rows = []
    for i, x in enumerate(scan.x_starts):
        scan_rows.append([_fmt(x), _fmt(scan.objective[i])]
                         + [_fmt(v) for v in scan.k2[i]])
    _write_csv(out / "scan.csv", ["x_start_m", "objective"] + k2_cols,
               scan_rows)
    result = optimize_placement(problem)
    placed_rows = []
    for pos, couplings in zip(result.positions, result.couplings):
        i = int(np.flatnonzero(scan.x_starts == pos)[0])
        placed_rows.append([_fmt(pos), _fmt(scan.objective[i])]
                           + [_fmt(c.k2) for c in couplings])
    _write_csv(out / "placement.csv", ["x_start_m", "objective"] + k2_cols,
               placed_rows)
    if any(c.relative for row in result.couplings for c in row):
        _say(args, "note: unit-peak shapes, coupling values are comparative only")
    _say(args, f"scanned {scan.x_starts.size} candidates, step "
               f"{_fmt(problem.step)} m")
    for pos in result.positions:
        _say(args, f"  patch at x_start = {_fmt(pos)} m")
    _say(args, f"total objective {_fmt(result.objective)}")
    _say(args, f"wrote {out / 'scan.csv'} and {out / 'placement.csv'}")
    return 0


def _plant_from_config(cfg: ProjectConfig, model):
    indices = [m.index for m in model.modes]
    return build_plant(model, cfg.patch, cfg.material, indices)


def cmd_ppf_design(args) -> int:
    """Size the filter against the plant and report the critical gain."""
    cfg = _require_config(args)
    out = _out_dir(args)
    model = cfg.build_model()
    plant, psys = _plant_from_config(cfg, model)
    filt = PPFConfig.from_hz(cfg.ppf_freq_hz, cfg.ppf_zeta)
    gcrit = critical_gain(plant, filt)
    _write_csv(out / "ppf_summary.csv",
               ["filter_freq_hz", "filter_zeta", "critical_gain"],
               [[_fmt(cfg.ppf_freq_hz), _fmt(cfg.ppf_zeta), _fmt(gcrit)]])
    rows = [[str(model.modes[i].index), _fmt(plant.omegas[i] / TWO_PI),
             _fmt(plant.zetas[i]), _fmt(plant.b[i])]
            for i in range(plant.n_modes)]
    _write_csv(out / "plant_modes.csv",
               ["mode", "freq_hz", "zeta", "influence"], rows)
    write_state_space_csv(psys, out / "plant_ss.csv")
    write_state_space_csv(ppf_controller(PPFConfig(filt.omega_f, filt.zeta_f,
                                                   1.0)),
                          out / "controller_ss.csv")
    _say(args, f"filter at {_fmt(cfg.ppf_freq_hz)} Hz, zeta "
               f"{_fmt(cfg.ppf_zeta)}")
    if gcrit == UNBOUNDED_GAIN:
        _say(args, "no destabilizing gain found up to 1e+06")
    else:
        _say(args, f"critical gain {_fmt(gcrit)}")
    _say(args, f"wrote {out / 'ppf_summary.csv'}, {out / 'plant_modes.csv'}, "
               f"{out / 'plant_ss.csv'}, {out / 'controller_ss.csv'} "
               "(controller exported at unit gain)")
    return 0


def cmd_sweep(args) -> int:
    """Close the loop over the configured gains and track peak damping."""
    cfg = _require_config(args)
    out = _out_dir(args)
    if not cfg.gains:
        raise ConfigError("[ppf] gains is required for the sweep command")
    model = cfg.build_model()
    plant, psys = _plant_from_config(cfg, model)
    filt = PPFConfig.from_hz(cfg.ppf_freq_hz, cfg.ppf_zeta)
    freqs = np.linspace(cfg.band_hz[0], cfg.band_hz[1], cfg.n_freq)
    target = cfg.target_mode - 1 if cfg.target_mode is not None else None
    rows = gain_sweep(plant, filt, cfg.gains, freqs_hz=freqs,
                      target_mode=target,
                      min_prominence_db=cfg.min_prominence_db)
    table = []
    for row in rows:
        if row.estimate is None:
            table.append([_fmt(row.gain), "0", "", "", "", ""])
        else:
            e = row.estimate
            table.append([_fmt(row.gain), "1", _fmt(e.f_peak),
                          _fmt(e.q_factor), _fmt(e.zeta),
                          _fmt(e.damping_pct)])
    _write_csv(out / "sweep.csv",
               ["gain", "stable", "f_peak_hz", "Q", "zeta", "damping_pct"],
               table)
    for k, row in enumerate(rows):
        if not row.stable:
            _say(args, f"  gain {_fmt(row.gain)}: unstable, no output written")
            continue
        cl = close_loop(psys, ppf_controller(PPFConfig(filt.omega_f,
                                                       filt.zeta_f, row.gain)))
        resp = frf_of(cl, freqs)
        mag_db, phase = bode_table(resp)
        bode_rows = [[_fmt(f), _fmt(m), _fmt(p)]
                     for f, m, p in zip(resp.freqs_hz, mag_db, phase)]
        bode_path = out / f"bode_{k + 1:02d}.csv"
        with open(bode_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# gain = {_fmt(row.gain)}\n")
            fh.write("freq_hz,mag_db,phase_deg\n")
            for r in bode_rows:
                fh.write(",".join(r) + "\n")
        e = row.estimate
        _say(args, f"  gain {_fmt(row.gain)}: peak {_fmt(e.f_peak)} Hz, "
                   f"Q {_fmt(e.q_factor)}, damping {_fmt(e.damping_pct)} %")
    _say(args, f"wrote {out / 'sweep.csv'} and one Bode file per stable gain")
    return 0


def cmd_analyze(args) -> int:
    """Peak table (frequency, Q, damping) of a measured or simulated FRF CSV."""
    out = _out_dir(args)
    frf = load_frf_csv(args.frf)
    if args.band:
        parts = args.band.split(",")
        if len(parts) != 2:
            raise InvalidInputError("--band must look like 'lo,hi' in Hz")
        try:
            band = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise InvalidInputError("--band must look like 'lo,hi' in Hz") from None
    elif args.config:
        band = load_config(args.config).band_hz
    else:
        raise InvalidInputError("analyze needs --band or a --config with an "
                                "[analysis] band_hz")
    prom = args.min_prominence_db if args.min_prominence_db is not None else 3.0
    peaks = find_peaks(frf, band, prom)
    if not peaks:
        raise InvalidInputError(
            f"no peaks with prominence >= {prom:g} dB found in "
            f"[{band[0]:g}, {band[1]:g}] Hz")
    rows = []
    for idx in peaks:
        e = half_power_damping(frf, idx)
        rows.append([_fmt(e.f_peak), _fmt(e.peak_mag), _fmt(e.f_lo),
                     _fmt(e.f_hi), _fmt(e.q_factor), _fmt(e.zeta),
                     _fmt(e.damping_pct)])
        _say(args, f"  peak {_fmt(e.f_peak)} Hz: Q {_fmt(e.q_factor)}, "
                   f"damping {_fmt(e.damping_pct)} %")
    _write_csv(out / "analyze.csv",
               ["f_peak_hz", "peak_mag", "f_lo_hz", "f_hi_hz", "Q", "zeta",
                "damping_pct"], rows)
    _say(args, f"wrote {out / 'analyze.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", "-c", default=argparse.SUPPRESS,
                        help="project INI file")
    shared.add_argument("--out-dir", "-o", default=argparse.SUPPRESS,
                        help="directory for CSV outputs (default: current)")
    shared.add_argument("--quiet", "-q", action="store_true",
                        default=argparse.SUPPRESS,
                        help="suppress the stdout report")
    parser = argparse.ArgumentParser(
        prog="piezodamp",
        description="Design and simulation toolkit for piezoelectric patch "
                    "damping of flexible structures.")
    parser.add_argument("--config", "-c", default=None, help="project INI file")
    parser.add_argument("--out-dir", "-o", default=".",
                        help="directory for CSV outputs (default: current)")
    parser.add_argument("--quiet", "-q", action="store_true", default=False,
                        help="suppress the stdout report")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("modes", parents=[shared],
                   help="export modal frequencies and shapes").set_defaults(
        func=cmd_modes)
    sub.add_parser("coupling", parents=[shared],
                   help="coupling factors at the configured patch position"
                   ).set_defaults(func=cmd_coupling)
    sub.add_parser("place", parents=[shared],
                   help="scan positions and place the patch").set_defaults(
        func=cmd_place)
    sub.add_parser("ppf-design", parents=[shared],
                   help="filter summary and critical gain").set_defaults(
        func=cmd_ppf_design)
    sub.add_parser("sweep", parents=[shared],
                   help="closed-loop damping over the configured gains"
                   ).set_defaults(func=cmd_sweep)
    an = sub.add_parser("analyze", parents=[shared],
                        help="peak table of an FRF CSV file")
    an.add_argument("--frf", required=True, help="FRF CSV file to analyze")
    an.add_argument("--band", default=None, help="frequency band 'lo,hi' in Hz")
    an.add_argument("--min-prominence-db", type=float, default=None,
                    help="peak prominence threshold in dB (default 3)")
    an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, InvalidInputError, BandwidthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
