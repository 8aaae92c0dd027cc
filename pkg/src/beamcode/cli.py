"""Command line entry point: ``beamcode {codes,beams,table,simulate,sweep}``.

Exit codes: 0 ok, 1 invalid configuration, 2 infeasible code, 3 table
capacity exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys
from datetime import datetime
from pathlib import Path

import numpy as np

from . import codes as codes_mod
from .beams import beam_pattern, build_plan, plan_to_dict
from .channel import ArrayGeometry, load_channel, save_channel
from .codes import InfeasibleCodeError
from .config import ConfigError, SimConfig, load_config_file, resolve
from .discovery import (
    DEFAULT_TABLE_BUDGET,
    GainAlphabet,
    TableCapacityError,
    build_table,
    check_table,
    lattice_alphabet,
    save_table,
)
from .evaluate import measurement_count, REFERENCE_FIGURES, run_sweep, run_trial, write_report

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_CAPACITY = 0, 1, 2, 3


def git_describe() -> str:
    """``git describe`` of the source tree, or "unknown" outside a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_config_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration (flags override --config, which overrides defaults)")
    g.add_argument("--config", help="TOML config file, or a config.json echo from an earlier run")
    g.add_argument("--n-t", dest="n_t", type=int)
    g.add_argument("--n-r", dest="n_r", type=int)
    g.add_argument("--delta-t", dest="delta_t", type=float)
    g.add_argument("--delta-r", dest="delta_r", type=float)
    g.add_argument("--L", dest="L", type=int, help="cluster budget (paths per channel)")
    g.add_argument("--snr-grid", dest="snr_grid_db", type=_float_list, help="comma-separated SNR_min values in dB")
    g.add_argument("--snr-spread", dest="snr_spread_db", type=float)
    g.add_argument("--n0-dbm", dest="n0_dbm", type=float)
    g.add_argument("--pilot-dbm", dest="pilot_dbm", type=float)
    g.add_argument("--adc-b", dest="adc_b", type=int, help="ADC resolution; 2^b + 1 levels")
    g.add_argument("--no-adc", dest="quantize", action="store_const", const=False, help="bypass quantization")
    g.add_argument("--noiseless", action="store_const", const=True, help="set N0 = 0 during measurement")
    g.add_argument("--noise-model", dest="noise_model", choices=["antenna", "post_combiner"])
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", dest="master_seed", type=int)
    g.add_argument("--table-cache", dest="table_cache", help="directory for reusable syndrome tables")
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--threads", type=int, help="worker processes (default: all cores)")


_CONFIG_KEYS = [
    "n_t", "n_r", "delta_t", "delta_r", "L", "snr_grid_db", "snr_spread_db", "n0_dbm", "pilot_dbm",
    "adc_b", "quantize", "noiseless", "noise_model", "trials", "master_seed", "table_cache",
    "output_dir", "threads",
]  # fmt: skip


def config_from_args(args) -> SimConfig:
    file_values = load_config_file(args.config) if args.config else None
    return resolve(file_values, {k: getattr(args, k) for k in _CONFIG_KEYS})


def run_directory(base, command: str) -> Path:
    """Fresh timestamped directory under ``base``; never reuses an existing one."""
    base = Path(base)
    stamp = datetime.now().strftime("%Y%m%dT%H%M%S")
    for i in range(1000):
        path = base / (f"{command}-{stamp}" + (f"-{i}" if i else ""))
        try:
            path.mkdir(parents=True, exist_ok=False)
            return path
        except FileExistsError:
            continue
    raise RuntimeError(f"could not allocate a run directory under {base}")


def write_echo(outdir: Path, command: str, config: SimConfig, provenance: str, **extra) -> Path:
    """Config echo; ``--config`` on this file reruns the same computation."""
    doc = {"command": command, "config": config.to_dict(), "provenance": provenance, **extra}
    path = outdir / "config.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _format_matrix(M) -> str:
    return "\n".join(" ".join(str(int(b)) for b in row) for row in M)


def _complex_doc(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


# -- subcommands -------------------------------------------------------------


def cmd_codes(args) -> int:
    try:
        code = codes_mod.code_for(args.n, args.L)
    except InfeasibleCodeError as exc:
        print(f"error: no code of length n={args.n} corrects L={args.L} errors ({exc})", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"code ({code.n},{code.k},{code.d}) e_n={code.e_n}")
    print(f"m={code.m}")
    print("H:")
    print(_format_matrix(code.H))
    if args.out:
        codes_mod.write_matrix(args.out, code.H)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_beams(args) -> int:
    cfg = config_from_args(args)
    geom = ArrayGeometry(cfg.n_t, cfg.n_r, cfg.delta_t, cfg.delta_r)
    plan = build_plan(geom, cfg.L)
    outdir = run_directory(cfg.output_dir, "beams")
    write_echo(outdir, "beams", cfg, git_describe(), phi_samples=args.phi_samples)
    (outdir / "plan.json").write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n")
    beams = [("combiner", i, w, "rx") for i, w in enumerate(plan.combiners)]
    if plan.code_tx is not None:
        beams += [("precoder", j, f, "tx") for j, f in enumerate(plan.precoders)]
    for kind, i, w, side in beams:
        phi, gain = beam_pattern(w, geom, args.phi_samples, side)
        with open(outdir / f"{kind}_{i}.csv", "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["phi_rad", "gain"])
            out.writerows(zip(phi.tolist(), gain.tolist()))
    m_total, m_exh, pct = measurement_count(plan)
    print(f"rx code {plan.code_rx}: m_1={plan.m_1}")
    if plan.code_tx is not None:
        print(f"tx code {plan.code_tx}: m_2={plan.m_2}")
    print(f"measurements {m_total} (exhaustive {m_exh}, {pct:.2f}% fewer)")
    print(f"wrote {outdir}")
    return EXIT_OK


def cmd_table(args) -> int:
    cfg = config_from_args(args)
    geom = ArrayGeometry(cfg.n_t, cfg.n_r, cfg.delta_t, cfg.delta_r)
    plan = build_plan(geom, cfg.L)
    alphabet = lattice_alphabet(cfg.adc_b) if args.alphabet == "lattice" else GainAlphabet((1,))
    sides = [("rx", plan.code_rx)]
    if plan.code_tx is not None:
        sides.append(("tx", plan.code_tx))
    # build everything first so a capacity failure leaves no partial run
    tables = [(side, code, build_table(code, cfg.L, alphabet, args.budget)) for side, code in sides]
    outdir = run_directory(cfg.output_dir, "table")
    write_echo(outdir, "table", cfg, git_describe(), alphabet=args.alphabet, budget=args.budget)
    for side, code, table in tables:
        report = check_table(table)
        save_table(outdir / f"xi_{side}.json", table)
        status = "distinct" if report.passed else f"COLLISION between entries {report.collision}"
        print(f"{side} table for {code}, L={cfg.L}, |alphabet|={len(alphabet)}: "
              f"{report.entries} entries, min pairwise delta {report.min_distance:.6g} ({status})")  # fmt: skip
    print(f"wrote {outdir}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = config_from_args(args)
    paths = None
    if args.channel:
        paths, geom = load_channel(args.channel)
        if (geom.n_t, geom.n_r, geom.delta_t, geom.delta_r) != (cfg.n_t, cfg.n_r, cfg.delta_t, cfg.delta_r):
            raise ConfigError([f"channel: geometry {geom} does not match the configured array"])
    try:
        outcome, result, score = run_trial(cfg, args.snr_index, args.trial, paths)
    except IndexError as exc:
        raise ConfigError([f"snr_index: {exc}"])
    outdir = run_directory(cfg.output_dir, "simulate")
    write_echo(outdir, "simulate", cfg, git_describe(), snr_index=args.snr_index, trial=args.trial)
    save_channel(outdir / "channel.json", outcome.paths, ArrayGeometry(cfg.n_t, cfg.n_r, cfg.delta_t, cfg.delta_r))
    dump = {
        "snr_db": cfg.snr_grid_db[args.snr_index],
        "unit": result.unit,
        "syndromes": _complex_doc(result.syndromes),
        "rx_channels": _complex_doc(result.rx_channels),
        "tx_syndromes": _complex_doc(result.tx_syndromes),
        "xi2_calls": result.xi2_calls,
        "Qa_true": _complex_doc(outcome.Qa_true),
        "Qa_hat": _complex_doc(outcome.Qa_hat),
        "true_detectable_paths": sorted(list(p) for p in outcome.true_paths),
        "estimated_paths": sorted(list(p) for p in outcome.estimated_paths),
        "score": {
            "perfect": score.perfect,
            "all": score.all,
            "partial": score.partial,
            "incorrect": score.incorrect,
            "mse": score.mse,
        },
    }
    (outdir / "discovery.json").write_text(json.dumps(dump, indent=2) + "\n")
    print(f"true detectable paths: {sorted(outcome.true_paths)}")
    print(f"estimated paths:       {sorted(outcome.estimated_paths)}")
    print(f"perfect={score.perfect} all={score.all} partial={score.partial} incorrect={score.incorrect} mse={score.mse:.6g}")
    print(f"wrote {outdir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    outdir = run_directory(cfg.output_dir, "sweep")
    provenance = git_describe()
    write_echo(outdir, "sweep", cfg, provenance)
    report = run_sweep(cfg)
    write_report(report, outdir, provenance)
    print(f"measurements {report.m_total} (exhaustive {report.m_exhaustive})")
    ref = REFERENCE_FIGURES.get((cfg.n_t, cfg.n_r, cfg.L))
    if ref:
        print(f"published reference: {ref['m_total']} vs {ref['m_exhaustive']} exhaustive, {ref['reduction_pct']}% reduction")
    print(f"{'snr_db':>7} {'perfect':>8} {'all':>8} {'partial':>8} {'P(0 inc)':>9} {'mse':>10}")
    for p in report.points:
        print(f"{p.snr_db:7.1f} {p.p_perfect:8.4f} {p.p_all:8.4f} {p.p_partial:8.4f} {p.p_incorrect(0):9.4f} {p.mse_mean:10.4g}")
    print(f"wrote {outdir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamcode", description="Beam discovery with linear block codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes", help="print the code chosen for n antennas and L paths")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--out", help="also write H as a plain-text 0/1 matrix")
    p.set_defaults(func=cmd_codes)

    p = sub.add_parser("beams", help="write the measurement plan and beam pattern CSVs")
    _add_config_args(p)
    p.add_argument("--phi-samples", type=int, default=1024)
    p.set_defaults(func=cmd_beams)

    p = sub.add_parser("table", help="build syndrome tables and report their minimum distance")
    _add_config_args(p)
    p.add_argument("--alphabet", choices=["lattice", "unit"], default="lattice")
    p.add_argument("--budget", type=int, default=DEFAULT_TABLE_BUDGET, help="maximum table entries")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="replay one trial and dump every intermediate step")
    _add_config_args(p)
    p.add_argument("--snr-index", type=int, default=0, help="grid point whose calibration is used")
    p.add_argument("--trial", type=int, default=0, help="trial index within the sweep")
    p.add_argument("--channel", help="channel JSON (from an earlier simulate run) to replay")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over the SNR grid")
    _add_config_args(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleCodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TableCapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (OSError, ValueError) as exc:
        # unreadable config files and malformed values are configuration problems
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
