"""Command-line front door.

Subcommands: ``run`` (one training/testing run), ``sweep`` (the full
parameter grid, streamed to CSV with a manifest), ``analyze`` (population
statistics), and ``plot`` (SVG figures plus their underlying CSV grids).

Option values resolve in precedence order: explicit command-line flag, then
environment variable (prefix ``MISTAKELAB_``, e.g. ``MISTAKELAB_KSTAR``),
then a ``key=value`` config file given with ``--config``, then scale presets,
then built-in defaults.  Exit codes: 0 success, 1 runtime failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analysis import analyze_records, headlines, write_analysis_csv
from .compressors import CompressorKind
from .harness import (
    CSV_HEADER,
    DEFAULT_BASE_SEED,
    DEFAULT_KSTAR,
    DEFAULT_N,
    DESK_K_RANGE,
    DESK_M_GRID,
    DESK_REPEATS,
    FULL_M_GRID,
    FULL_REPEATS,
    RecordParseError,
    RunConfig,
    record_csv_row,
    read_records_csv,
    run_once,
    sweep,
    write_records_csv,
)

ENV_PREFIX = "MISTAKELAB_"


class UsageError(Exception):
    """Bad flag or option value; maps to exit code 2."""


@dataclass(frozen=True)
class Opt:
    name: str
    parse: type
    default: object
    help: str


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}")


_RUN_OPTS = [
    Opt("kstar", int, DEFAULT_KSTAR, "source model order"),
    Opt("k", int, 5, "learner model order"),
    Opt("m", int, 1000, "training sequence length"),
    Opt("n", int, DEFAULT_N, "test sequence length"),
    Opt("seed", int, 1, "run seed"),
    Opt("word-len", int, 4, "divergence word length"),
    Opt("word-scheme", str, "sliding", "word counting: sliding or disjoint"),
    Opt(
        "kl-direction",
        str,
        "empirical-model",
        "divergence direction: empirical-model or model-empirical",
    ),
    Opt("ppm-order", int, 4, "maximum PPM context order"),
]

_SWEEP_OPTS = [
    Opt("kstar", int, DEFAULT_KSTAR, "source model order"),
    Opt("k-list", _parse_int_list, DESK_K_RANGE, "learner orders, e.g. 1,2,3"),
    Opt("m-list", _parse_int_list, DESK_M_GRID, "training lengths, e.g. 100,1000"),
    Opt("repeats", int, DESK_REPEATS, "runs per (k, m) cell"),
    Opt("n", int, DEFAULT_N, "test sequence length"),
    Opt("base-seed", int, DEFAULT_BASE_SEED, "sweep base seed"),
    Opt("workers", int, 1, "parallel worker processes"),
    Opt("out", str, "sweep-out", "output directory"),
    Opt("word-len", int, 4, "divergence word length"),
    Opt("word-scheme", str, "sliding", "word counting: sliding or disjoint"),
    Opt(
        "kl-direction",
        str,
        "empirical-model",
        "divergence direction: empirical-model or model-empirical",
    ),
    Opt("ppm-order", int, 4, "maximum PPM context order"),
]

_ANALYZE_OPTS = [
    Opt("records", str, "sweep-out/records.csv", "records CSV from a sweep"),
    Opt("out", str, "", "analysis CSV path (default: next to the records)"),
]

_PLOT_OPTS = [
    Opt("records", str, "sweep-out/records.csv", "records CSV from a sweep"),
    Opt("out", str, "figures", "output directory for SVG and CSV files"),
    Opt("figure", str, "all", "figure name or 'all'"),
    Opt("kind", str, "lz", "compressor for complexity axes: lz or ppm"),
]


def _attr(name: str) -> str:
    return name.replace("-", "_")


def _add_opts(parser: argparse.ArgumentParser, opts: list[Opt]) -> None:
    parser.add_argument("--config", default=None, help="key=value config file")
    for opt in opts:
        parser.add_argument(f"--{opt.name}", default=None, help=opt.help)


def _load_config_file(path: str, known: set) -> dict:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _attr(key)
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        values[key] = value
    return values


def _resolve(args, opts: list[Opt], presets: dict | None = None):
    """Apply the flag > environment > config file > preset > default chain."""
    known = {_attr(opt.name) for opt in opts}
    from_file = _load_config_file(args.config, known) if args.config else {}
    resolved = argparse.Namespace()
    for opt in opts:
        attr = _attr(opt.name)
        raw = getattr(args, attr)
        if raw is None:
            raw = os.environ.get(ENV_PREFIX + attr.upper())
        if raw is None:
            raw = from_file.get(attr)
        if raw is None:
            value = (presets or {}).get(attr, opt.default)
        else:
            try:
                value = opt.parse(raw)
            except UsageError:
                raise
            except (TypeError, ValueError):
                raise UsageError(f"--{opt.name}: cannot parse {raw!r}")
        setattr(resolved, attr, value)
    return resolved


def _build_run_config(ns, seed: int) -> RunConfig:
    try:
        return RunConfig(
            k_star=ns.kstar,
            k=ns.k if hasattr(ns, "k") else 1,
            m=ns.m if hasattr(ns, "m") else 1,
            n=ns.n,
            seed=seed,
            word_len=ns.word_len,
            word_scheme=ns.word_scheme,
            kl_direction=ns.kl_direction,
            ppm_order=ns.ppm_order,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _summary_line(record) -> str:
    parts = [f"k={record.k}", f"m={record.m}", f"seed={record.seed}"]
    parts.append(f"overall_error={record.overall_error:.4f}")
    parts.append(
        "p0_hat=undefined" if record.p0_hat is None else f"p0_hat={record.p0_hat:.4f}"
    )
    parts.append(f"n0={record.n0}")
    if record.rho_lz is not None:
        parts.append(f"rho[lz]={record.rho_lz:.4f}")
    if record.rho_ppm is not None:
        parts.append(f"rho[ppm]={record.rho_ppm:.4f}")
    if record.l0_lz_bytes is not None:
        parts.append(f"l0[lz]={record.l0_lz_bytes}B")
    if record.l0_ppm_bytes is not None:
        parts.append(f"l0[ppm]={record.l0_ppm_bytes}B")
    if record.delta0_bits is None:
        parts.append("delta0=missing")
    else:
        parts.append(f"delta0={record.delta0_bits:.4f}bits")
    return " ".join(parts)


def _cmd_run(args) -> int:
    ns = _resolve(args, _RUN_OPTS)
    for flag in ("kstar", "k"):
        if getattr(ns, flag) < 1:
            raise UsageError(f"--{flag} must be >= 1, got {getattr(ns, flag)}")
    if ns.m < 1:
        raise UsageError(f"--m must be >= 1, got {ns.m}")
    if ns.n <= ns.k:
        raise UsageError(f"--n must exceed --k, got n={ns.n} k={ns.k}")
    cfg = _build_run_config(ns, ns.seed)
    record = run_once(cfg)
    print(",".join(CSV_HEADER))
    print(",".join(record_csv_row(record)))
    print(_summary_line(record))
    return 0


def _progress(done: int, total: int) -> None:
    if done == total or done % 10 == 0:
        print(f"\rcompleted {done}/{total} runs", end="", file=sys.stderr)
        if done == total:
            print(file=sys.stderr)


def _cmd_sweep(args) -> int:
    presets = {}
    if args.desk_scale and args.paper_scale:
        raise UsageError("--desk-scale and --paper-scale are mutually exclusive")
    if args.desk_scale:
        presets = {
            "k_list": DESK_K_RANGE,
            "m_list": DESK_M_GRID,
            "repeats": DESK_REPEATS,
            "n": DEFAULT_N,
        }
    elif args.paper_scale:
        presets = {
            "k_list": DESK_K_RANGE,
            "m_list": FULL_M_GRID,
            "repeats": FULL_REPEATS,
            "n": DEFAULT_N,
        }
    ns = _resolve(args, _SWEEP_OPTS, presets)
    if ns.kstar < 1:
        raise UsageError(f"--kstar must be >= 1, got {ns.kstar}")
    if ns.repeats < 0:
        raise UsageError(f"--repeats must be >= 0, got {ns.repeats}")
    if not ns.k_list or not ns.m_list:
        raise UsageError("--k-list and --m-list must be nonempty")

    outdir = Path(ns.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return 1

    records_path = outdir / "records.csv"
    started = time.time()
    records = sweep(
        k_star=ns.kstar,
        k_range=ns.k_list,
        m_range=ns.m_list,
        repeats=ns.repeats,
        n=ns.n,
        base_seed=ns.base_seed,
        workers=ns.workers,
        stream_path=records_path,
        progress=_progress,
        word_len=ns.word_len,
        word_scheme=ns.word_scheme,
        kl_direction=ns.kl_direction,
        ppm_order=ns.ppm_order,
    )
    # Rewrite in canonical (k, m, repeat) order now that the sweep is done.
    write_records_csv(records, records_path)
    manifest = {
        "command": "sweep",
        "version": __version__,
        "config": {
            "kstar": ns.kstar,
            "k_list": list(ns.k_list),
            "m_list": list(ns.m_list),
            "repeats": ns.repeats,
            "n": ns.n,
            "base_seed": ns.base_seed,
            "workers": ns.workers,
            "word_len": ns.word_len,
            "word_scheme": ns.word_scheme,
            "kl_direction": ns.kl_direction,
            "ppm_order": ns.ppm_order,
        },
        "n_records": len(records),
        "wall_time_s": round(time.time() - started, 3),
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(records)} records to {records_path}")
    return 0


def _read_records_or_fail(path: str):
    try:
        records = read_records_csv(path)
    except OSError as exc:
        print(f"error: cannot read records: {exc}", file=sys.stderr)
        return None
    except RecordParseError as exc:
        print(f"error: malformed records file: {exc}", file=sys.stderr)
        return None
    if not records:
        print(f"error: {path} holds no records", file=sys.stderr)
        return None
    return records


def _cmd_analyze(args) -> int:
    ns = _resolve(args, _ANALYZE_OPTS)
    records = _read_records_or_fail(ns.records)
    if records is None:
        return 1
    analysis = analyze_records(records)
    out = Path(ns.out) if ns.out else Path(ns.records).parent / "analysis.csv"
    write_analysis_csv(analysis, out)
    for line in headlines(analysis):
        print(line)
    print(f"wrote {out}")
    return 0


def _cmd_plot(args) -> int:
    from .figures import FIGURE_NAMES, render_figures

    ns = _resolve(args, _PLOT_OPTS)
    if ns.kind not in ("lz", "ppm"):
        raise UsageError(f"--kind must be lz or ppm, got {ns.kind!r}")
    kind = CompressorKind.LZ_FAMILY if ns.kind == "lz" else CompressorKind.PPM
    if ns.figure != "all" and ns.figure not in FIGURE_NAMES:
        raise UsageError(
            f"--figure must be 'all' or one of {', '.join(sorted(FIGURE_NAMES))}"
        )
    records = _read_records_or_fail(ns.records)
    if records is None:
        return 1
    names = sorted(FIGURE_NAMES) if ns.figure == "all" else [ns.figure]
    try:
        paths = render_figures(records, ns.out, names, kind)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mistakelab",
        description="Markov prediction-mistake randomness laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one training/testing run")
    _add_opts(p_run, _RUN_OPTS)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="full (k, m, repeat) grid")
    _add_opts(p_sweep, _SWEEP_OPTS)
    p_sweep.add_argument(
        "--desk-scale",
        action="store_true",
        help="preset: k 1..10, m {100,500,1000,2000,5000,10000}, 5 repeats",
    )
    p_sweep.add_argument(
        "--paper-scale",
        action="store_true",
        help="preset: k 1..10, m {100,200,...,10000}, 10 repeats",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_analyze = sub.add_parser("analyze", help="population statistics")
    _add_opts(p_analyze, _ANALYZE_OPTS)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_plot = sub.add_parser("plot", help="render figures from a records CSV")
    _add_opts(p_plot, _PLOT_OPTS)
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
