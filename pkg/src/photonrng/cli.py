"""Command-line pipeline: generate -> extract/mix -> test -> analyze.

Every subcommand writes its effective configuration (INI) next to its
outputs, so a run can be reproduced from the artifacts alone.  One
``--seed`` governs a pipeline stage; sub-streams derive their seeds as
the low 63 bits of SHA-256("<seed>:<label>"), so stages can be re-run
independently.

Exit codes: 0 success, 2 configuration/validation error, 3 I/O error,
4 analysis not applicable (e.g. every test too short).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis as ana
from .bitstream import ASCII01, PACKED, BitSequence, read_bits, write_bits
from .errors import (
    DomainError,
    EmptyProfile,
    Inapplicable,
    InsufficientPoints,
    InsufficientQuantumBits,
    IoFailure,
    LengthMismatch,
    MalformedFile,
    TooShort,
)
from .extractors import babkin_stream, digital_mix, von_neumann
from .physics import dip_model, hom_fit
from .sources import (
    CoherentSourceConfig,
    GenerationLog,
    HeraldedSourceConfig,
    HybridSourceConfig,
    simulate_coherent,
    simulate_coherent_bits,
    simulate_heralded,
    simulate_hybrid_with_log,
    software_source,
)
from .stattests import TestParams, TestReport, run_battery

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INAPPLICABLE = 4

_CONFIG_ERRORS = (
    DomainError,
    LengthMismatch,
    InsufficientQuantumBits,
    InsufficientPoints,
    ValueError,
    configparser.Error,
)
_ANALYSIS_ERRORS = (TooShort, Inapplicable, EmptyProfile)


def derive_seed(master: int, label: str) -> int:
    """Stable per-stage sub-seed: low 63 bits of SHA-256('<master>:<label>')."""
    digest = hashlib.sha256(f"{master}:{label}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config_section(path: str | None, section: str) -> dict[str, str]:
    if not path:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise IoFailure(f"cannot read config file {path}")
    if not parser.has_section(section):
        return {}
    return dict(parser.items(section))


def _fill(args: argparse.Namespace, section: dict[str, str], casts: dict) -> None:
    """Fill argparse values that are None from the config section, with casts."""
    for key, cast in casts.items():
        if getattr(args, key, None) is None and key in section:
            raw = section[key]
            if cast is bool:
                setattr(args, key, raw.strip().lower() in ("1", "true", "yes", "on"))
            elif raw.strip().lower() == "none":
                setattr(args, key, None)
            else:
                setattr(args, key, cast(raw))


def _write_effective_config(outdir: Path, section: str, values: dict) -> None:
    parser = configparser.ConfigParser()
    parser[section] = {
        k: ("none" if v is None else str(v)) for k, v in values.items()
    }
    with open(outdir / "config.ini", "w", encoding="utf-8") as fh:
        parser.write(fh)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


# -- generate ----------------------------------------------------------------


def _coherent_config(args, seed: int) -> CoherentSourceConfig:
    return CoherentSourceConfig(
        mean_photons=args.mean_photons,
        clock_rate=args.clock_rate,
        bias_amplitude=args.bias_amplitude,
        bias_period=args.bias_period,
        bias_offset=args.bias_offset,
        seed=seed,
    )


def _heralded_config(args, seed: int) -> HeraldedSourceConfig:
    return HeraldedSourceConfig(
        base_p=args.base_p,
        drift_step=args.drift_step,
        drift_bounds=(args.drift_lo, args.drift_hi),
        seed=seed,
    )


def cmd_generate(args) -> int:
    section = _load_config_section(args.config, "generate")
    _fill(
        args,
        section,
        {
            "bits": int,
            "cycles": int,
            "seed": int,
            "mean_photons": float,
            "clock_rate": float,
            "bias_amplitude": float,
            "bias_period": float,
            "bias_offset": float,
            "base_p": float,
            "drift_step": float,
            "drift_lo": float,
            "drift_hi": float,
            "omega": float,
            "interleave": str,
            "rebalance": bool,
            "format": str,
        },
    )
    _apply_generate_defaults(args)
    outdir = _outdir(args)
    source = args.source
    seed = args.seed

    if source == "coherent":
        cfg = _coherent_config(args, seed)
        if args.bits is not None:
            seq, log = simulate_coherent_bits(cfg, args.bits)
        else:
            if args.cycles is None:
                raise DomainError("coherent generation needs --bits or --cycles")
            seq, log = simulate_coherent(cfg, args.cycles)
    elif source == "heralded":
        if args.bits is None:
            raise DomainError("heralded generation needs --bits")
        cfg = _heralded_config(args, seed)
        seq = simulate_heralded(cfg, args.bits)
        log = GenerationLog(len(seq), 0, 0, len(seq))
    elif source == "hybrid":
        if args.bits is None:
            raise DomainError("hybrid generation needs --bits")
        cfg = HybridSourceConfig(
            coherent=_coherent_config(args, derive_seed(seed, "coherent")),
            heralded=_heralded_config(args, derive_seed(seed, "heralded")),
            mean_spacing=args.omega,
            interleave=args.interleave,
            rebalance=args.rebalance,
            seed=derive_seed(seed, "interleave"),
        )
        seq, log = simulate_hybrid_with_log(cfg, args.bits)
    else:  # software
        if args.bits is None:
            raise DomainError("software generation needs --bits")
        seq = software_source(args.bits, seed)
        log = GenerationLog(len(seq), 0, 0, len(seq))

    write_bits(seq, outdir / "stream.bits", args.format)
    _write_json(outdir / "generation_log.json", log.as_dict())
    _write_effective_config(outdir, "generate", _generate_effective(args))
    if len(seq) == 0:
        print("warning: generated an empty stream", file=sys.stderr)
    print(f"wrote {len(seq)} bits to {outdir / 'stream.bits'}")
    return EXIT_OK


def _apply_generate_defaults(args) -> None:
    defaults = {
        "seed": 0,
        "mean_photons": 0.1,
        "clock_rate": 20e6,
        "bias_amplitude": 0.0,
        "bias_period": None,
        "bias_offset": 0.0,
        "base_p": 0.5,
        "drift_step": 0.0,
        "drift_lo": 0.01,
        "drift_hi": 0.99,
        "omega": 20.0,
        "interleave": "stochastic",
        "rebalance": True,
        "format": PACKED,
    }
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _generate_effective(args) -> dict:
    keys = [
        "source", "bits", "cycles", "seed", "format",
        "mean_photons", "clock_rate", "bias_amplitude", "bias_period", "bias_offset",
        "base_p", "drift_step", "drift_lo", "drift_hi",
        "omega", "interleave", "rebalance",
    ]
    return {k: getattr(args, k, None) for k in keys}


# -- extract / mix -------------------------------------------------------------


def cmd_extract(args) -> int:
    section = _load_config_section(args.config, "extract")
    _fill(args, section, {"n": int, "format": str})
    if args.n is None:
        args.n = 300
    if args.format is None:
        args.format = PACKED
    outdir = _outdir(args)
    seq = read_bits(args.input)
    if args.method == "vonneumann":
        out, stats = von_neumann(seq)
    else:
        out, stats = babkin_stream(seq, args.n)
    write_bits(out, outdir / "extracted.bits", args.format)
    _write_json(outdir / "extraction_stats.json", stats.as_dict())
    _write_effective_config(
        outdir,
        "extract",
        {"method": args.method, "input": args.input, "n": args.n, "format": args.format},
    )
    print(
        f"extracted {stats.output_bits} bits from {stats.input_bits} "
        f"(yield {stats.yield_ratio:.4f})"
    )
    return EXIT_OK


def cmd_mix(args) -> int:
    outdir = _outdir(args)
    base = read_bits(args.base)
    quantum = read_bits(args.quantum)
    out = digital_mix(base, quantum, args.period)
    write_bits(out, outdir / "mixed.bits", args.format or PACKED)
    _write_effective_config(
        outdir,
        "mix",
        {
            "base": args.base,
            "quantum": args.quantum,
            "period": args.period,
            "format": args.format or PACKED,
        },
    )
    print(f"mixed every {args.period}-th bit; wrote {len(out)} bits")
    return EXIT_OK


# -- test ------------------------------------------------------------------------


def _battery_job(payload):
    data, nbits, params, label = payload
    seq = BitSequence(data, nbits)
    return run_battery(seq, params, sequence_id=label).to_json_dict()


def cmd_test(args) -> int:
    section = _load_config_section(args.config, "test")
    _fill(args, section, {"profile": str, "split": int, "jobs": int})
    if args.profile is None:
        args.profile = "full"
    if args.jobs is None:
        args.jobs = 1
    outdir = _outdir(args)
    seq = read_bits(args.input)
    label = args.id or Path(args.input).stem

    if args.split:
        sub = args.split
        count = len(seq) // sub
        if count == 0:
            raise TooShort(
                f"{len(seq)} bits cannot be split into {sub}-bit subsequences"
            )
        params = TestParams.for_length(sub, template_profile=args.profile)
        arr = seq.array
        jobs = []
        for i in range(count):
            part = BitSequence.from_array(arr[i * sub : (i + 1) * sub])
            jobs.append((part.packed, len(part), params, f"{label}_sub{i:04d}"))
        reports_dir = outdir / "reports"
        reports_dir.mkdir(exist_ok=True)
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                dicts = list(pool.map(_battery_job, jobs))
        else:
            dicts = [_battery_job(j) for j in jobs]
        applicable = 0
        for i, payload in enumerate(dicts):
            _write_json(reports_dir / f"{label}_sub{i:04d}.json", payload)
            applicable += sum(1 for t in payload["tests"] if t["applicable"])
        print(f"wrote {count} subsequence reports to {reports_dir}")
    else:
        params = TestParams.for_length(len(seq), template_profile=args.profile)
        report = run_battery(seq, params, sequence_id=label)
        report.save(outdir / "report.json")
        applicable = len(report.applicable_ids())
        print(
            f"wrote report.json: {applicable}/15 tests applicable, "
            f"{len(report.pooled_p_values())} p-values"
        )
    _write_effective_config(
        outdir,
        "test",
        {
            "input": args.input,
            "profile": args.profile,
            "split": args.split,
            "jobs": args.jobs,
            "id": label,
        },
    )
    if applicable == 0:
        print("no test was applicable to the input", file=sys.stderr)
        return EXIT_INAPPLICABLE
    return EXIT_OK


# -- analyze -----------------------------------------------------------------------


def _collect_reports(paths: list[str]) -> list[TestReport]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.rglob("*.json")))
        else:
            files.append(p)
    reports = []
    for f in files:
        try:
            reports.append(TestReport.load(f))
        except (ValueError, KeyError):
            continue  # not a report file (e.g. a generation log)
    return reports


def cmd_analyze(args) -> int:
    outdir = _outdir(args)
    reports = _collect_reports(args.reports)
    if not reports:
        raise EmptyProfile("no battery reports found under the given paths")
    profile = ana.median_profile(reports)
    mae_value = ana.mae(profile)
    hist = ana.aggregate_histogram(reports)
    rates = ana.pass_rates_from_reports(reports, args.alpha)

    payload = profile.as_dict()
    payload["mae"] = mae_value
    payload["report_count"] = len(reports)
    _write_json(outdir / "medians.json", payload)
    ana.write_histogram_csv(hist, outdir / "histogram.csv")
    ana.write_pass_rates_csv(rates, outdir / "pass_rates.csv")
    if args.figures:
        from . import plotting

        figdir = outdir / "figures"
        figdir.mkdir(exist_ok=True)
        plotting.save_median_profile(profile, figdir / "median_profile.png", mae_value)
        plotting.save_histogram(hist, figdir / "histogram.png")
        plotting.save_pass_rates(rates, figdir / "pass_rates.png")
    _write_effective_config(
        outdir,
        "analyze",
        {"reports": ";".join(args.reports), "alpha": args.alpha, "figures": args.figures},
    )
    print(f"analyzed {len(reports)} reports: MAE = {mae_value:.4f}")
    return EXIT_OK


# -- fit-hom ------------------------------------------------------------------------


def _read_dip_csv(path) -> list[tuple[float, float]]:
    points = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or len(row) < 2:
                    continue
                try:
                    points.append((float(row[0]), float(row[1])))
                except ValueError:
                    continue  # header row
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return points


def cmd_fit_hom(args) -> int:
    outdir = _outdir(args)
    points = _read_dip_csv(args.input)
    fit = hom_fit(points, center_wavelength=args.wavelength)
    _write_json(outdir / "fit.json", fit.as_dict())
    pts = np.asarray(points)
    grid = np.linspace(pts[:, 0].min(), pts[:, 0].max(), 400)
    curve = dip_model(grid, fit.baseline, fit.amplitude, fit.width)
    with open(outdir / "curve.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position_m", "fitted_coincidences"])
        for x, y in zip(grid, curve):
            writer.writerow([f"{x:.9e}", f"{y:.6f}"])
    if args.figures:
        from . import plotting

        figdir = outdir / "figures"
        figdir.mkdir(exist_ok=True)
        plotting.save_dip_fit(points, fit, figdir / "dip_fit.png")
    _write_effective_config(
        outdir,
        "fit-hom",
        {"input": args.input, "wavelength": args.wavelength, "figures": args.figures},
    )
    print(
        f"fit: C={fit.baseline:.4g} A={fit.amplitude:.4g} w={fit.width:.4g} m "
        f"(rms {fit.residual_rms:.3g})"
    )
    return EXIT_OK


# -- thresholds -----------------------------------------------------------------------


def cmd_thresholds(args) -> int:
    outdir = _outdir(args)
    rows = ana.threshold_table([int(float(x)) for x in args.lengths], args.alpha)
    ana.write_threshold_csv(rows, outdir / "thresholds.csv")
    _write_effective_config(
        outdir,
        "thresholds",
        {"lengths": " ".join(args.lengths), "alpha": args.alpha},
    )
    for row in rows:
        print(f"N={row.length:>12d}  B_max={row.b_max:.6f}  Sz_max={row.sz_max:.6f}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonrng",
        description="Simulate photonic RNG sources, extract, test, and analyze bitstreams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate a bit source")
    gen.add_argument("source", choices=["coherent", "heralded", "hybrid", "software"])
    gen.add_argument("--bits", type=int)
    gen.add_argument("--cycles", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--mean-photons", "--lambda", dest="mean_photons", type=float)
    gen.add_argument("--clock-rate", dest="clock_rate", type=float)
    gen.add_argument("--bias-amplitude", dest="bias_amplitude", type=float)
    gen.add_argument("--bias-period", dest="bias_period", type=float)
    gen.add_argument("--bias-offset", dest="bias_offset", type=float)
    gen.add_argument("--base-p", dest="base_p", type=float)
    gen.add_argument("--drift-step", dest="drift_step", type=float)
    gen.add_argument("--drift-lo", dest="drift_lo", type=float)
    gen.add_argument("--drift-hi", dest="drift_hi", type=float)
    gen.add_argument("--omega", type=float)
    gen.add_argument("--interleave", choices=["stochastic", "periodic"])
    gen.add_argument("--rebalance", dest="rebalance", action="store_true", default=None)
    gen.add_argument("--no-rebalance", dest="rebalance", action="store_false")
    gen.add_argument("--format", choices=[PACKED, ASCII01])
    gen.add_argument("--config")
    gen.add_argument("-o", "--outdir", default="out")
    gen.set_defaults(func=cmd_generate)

    ext = sub.add_parser("extract", help="post-process a bitstream")
    ext.add_argument("method", choices=["vonneumann", "babkin"])
    ext.add_argument("input")
    ext.add_argument("--n", type=int, help="block length for the stream numbering")
    ext.add_argument("--format", choices=[PACKED, ASCII01])
    ext.add_argument("--config")
    ext.add_argument("-o", "--outdir", default="out")
    ext.set_defaults(func=cmd_extract)

    mix = sub.add_parser("mix", help="replace every i-th bit with quantum bits")
    mix.add_argument("base")
    mix.add_argument("quantum")
    mix.add_argument("--period", type=int, required=True)
    mix.add_argument("--format", choices=[PACKED, ASCII01])
    mix.add_argument("-o", "--outdir", default="out")
    mix.set_defaults(func=cmd_mix)

    tst = sub.add_parser("test", help="run the statistical battery")
    tst.add_argument("input")
    tst.add_argument("--profile", choices=["full", "reduced"])
    tst.add_argument("--split", type=int, help="split into subsequences of this length")
    tst.add_argument("--jobs", type=int)
    tst.add_argument("--id", help="sequence identifier recorded in the report")
    tst.add_argument("--config")
    tst.add_argument("-o", "--outdir", default="out")
    tst.set_defaults(func=cmd_test)

    anl = sub.add_parser("analyze", help="aggregate battery reports")
    anl.add_argument("reports", nargs="+", help="report files or directories")
    anl.add_argument("--alpha", type=float, default=0.01)
    anl.add_argument("--figures", dest="figures", action="store_true", default=True)
    anl.add_argument("--no-figures", dest="figures", action="store_false")
    anl.add_argument("-o", "--outdir", default="out")
    anl.set_defaults(func=cmd_analyze)

    fit = sub.add_parser("fit-hom", help="fit the interference dip model to CSV data")
    fit.add_argument("input", help="CSV of position,coincidences")
    fit.add_argument("--wavelength", type=float, default=810e-9)
    fit.add_argument("--figures", dest="figures", action="store_true", default=True)
    fit.add_argument("--no-figures", dest="figures", action="store_false")
    fit.add_argument("-o", "--outdir", default="out")
    fit.set_defaults(func=cmd_fit_hom)

    thr = sub.add_parser("thresholds", help="balance thresholds for given lengths")
    thr.add_argument("--lengths", nargs="+", required=True)
    thr.add_argument("--alpha", type=float, default=0.01)
    thr.add_argument("-o", "--outdir", default="out")
    thr.set_defaults(func=cmd_thresholds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ANALYSIS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (IoFailure, MalformedFile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
