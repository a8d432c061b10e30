"""Experiment orchestration: single runs, parameter sweeps, aggregation,
regression, surfaces, and CSV persistence.

Every run is a pure function of its config.  The run seed expands into
sub-streams for the training sequence, the test sequence, and the source
start states, so a recorded seed is enough to replay a run exactly.  Sweeps
derive per-run seeds from the base seed and the (k, m, repeat) coordinates,
which makes the output independent of execution order and worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .compressors import CompressorKind, compress_bytes
from .markov import generate, half_split_source, predict, train
from .metrics import (
    DivergenceUndefinedError,
    bernoulli_word_dist,
    empirical_word_dist,
    kl_divergence,
)
from .ppm import PPM_DEFAULT_ORDER
from .sequences import encode_ascii

__all__ = [
    "CSV_HEADER",
    "DESK_K_RANGE",
    "DESK_M_GRID",
    "DESK_REPEATS",
    "DEFAULT_KSTAR",
    "DEFAULT_N",
    "DEFAULT_BASE_SEED",
    "KAggregate",
    "FULL_M_GRID",
    "FULL_REPEATS",
    "RecordParseError",
    "record_csv_row",
    "RunConfig",
    "RunRecord",
    "SurfaceGrid",
    "aggregate_by_k",
    "build_surface",
    "read_records_csv",
    "regress_quadratic",
    "run_once",
    "run_seed_for",
    "sweep",
    "write_records_csv",
    "write_surface_csv",
]

BOTH_COMPRESSORS = (CompressorKind.LZ_FAMILY, CompressorKind.PPM)

DESK_K_RANGE = tuple(range(1, 11))
DESK_M_GRID = (100, 500, 1000, 2000, 5000, 10000)
DESK_REPEATS = 5
FULL_M_GRID = tuple(range(100, 10001, 100))
FULL_REPEATS = 10
DEFAULT_KSTAR = 5
DEFAULT_N = 1000
DEFAULT_BASE_SEED = 1


class RecordParseError(ValueError):
    """Records CSV is malformed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one training/testing run."""

    k_star: int
    k: int
    m: int
    n: int
    seed: int
    compressors: tuple = BOTH_COMPRESSORS
    word_len: int = 4
    word_scheme: str = "sliding"
    kl_direction: str = "empirical-model"
    ppm_order: int = PPM_DEFAULT_ORDER

    def __post_init__(self):
        if self.k_star < 1 or self.k < 1:
            raise ValueError("model orders must be >= 1")
        if self.m < 1 or self.n < 1:
            raise ValueError("sequence lengths must be >= 1")
        if self.n <= self.k:
            raise ValueError(
                f"test length {self.n} must exceed the learner order {self.k}"
            )
        if self.kl_direction not in ("empirical-model", "model-empirical"):
            raise ValueError(f"unknown kl_direction: {self.kl_direction!r}")


@dataclass(frozen=True)
class RunRecord:
    """Measured quantities of one run; all fields survive a CSV round trip."""

    k: int
    m: int
    repeat: int
    seed: int
    rho_lz: float | None
    rho_ppm: float | None
    l0_lz_bytes: int | None
    l0_ppm_bytes: int | None
    delta0_bits: float | None
    p0_hat: float | None
    n0: int
    overall_error: float
    effective_n: int

    @property
    def delta0_valid(self) -> bool:
        return self.delta0_bits is not None

    @property
    def l0_lz_bits(self) -> int | None:
        return None if self.l0_lz_bytes is None else 8 * self.l0_lz_bytes

    @property
    def l0_ppm_bits(self) -> int | None:
        return None if self.l0_ppm_bytes is None else 8 * self.l0_ppm_bytes

    def rho(self, kind: CompressorKind) -> float | None:
        return self.rho_lz if kind is CompressorKind.LZ_FAMILY else self.rho_ppm

    def l0_bytes(self, kind: CompressorKind) -> int | None:
        return (
            self.l0_lz_bytes
            if kind is CompressorKind.LZ_FAMILY
            else self.l0_ppm_bytes
        )


def _sub_seeds(seed: int) -> tuple[int, int, int]:
    words = np.random.SeedSequence(seed).generate_state(3, np.uint64)
    return int(words[0]), int(words[1]), int(words[2])


def run_seed_for(base_seed: int, k: int, m: int, repeat: int) -> int:
    """Per-run seed derived from the sweep base seed and run coordinates."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(k, m, repeat))
    return int(ss.generate_state(1, np.uint64)[0])


def run_once(cfg: RunConfig, repeat: int = 0) -> RunRecord:
    """Train on a fresh sequence, predict on another, measure everything.

    When the mistake subsequence is shorter than the divergence word length
    the divergence is recorded as missing rather than imputed.
    """
    source = half_split_source(cfg.k_star)
    train_seed, test_seed, init_seed = _sub_seeds(cfg.seed)
    init_rng = np.random.default_rng(np.random.SeedSequence(init_seed))
    train_init, test_init = init_rng.integers(0, source.n_states, 2)
    x_train = generate(source, cfg.m, train_seed, int(train_init))
    x_test = generate(source, cfg.n, test_seed, int(test_init))

    model = train(x_train, cfg.k)
    outcome = predict(model.decisions, x_test)

    system_bytes = encode_ascii(model.decisions.decisions)
    xi0_bytes = encode_ascii(outcome.mistakes_on_zero)
    rho = {}
    l0 = {}
    for kind in cfg.compressors:
        rho[kind] = len(compress_bytes(system_bytes, kind, cfg.ppm_order)) / (
            2**cfg.k
        )
        l0[kind] = len(compress_bytes(xi0_bytes, kind, cfg.ppm_order))

    delta0 = None
    if outcome.n0 >= cfg.word_len:
        empirical = empirical_word_dist(
            outcome.mistakes_on_zero, cfg.word_len, cfg.word_scheme
        )
        model_dist = bernoulli_word_dist(outcome.p0_hat, cfg.word_len)
        try:
            if cfg.kl_direction == "empirical-model":
                delta0 = kl_divergence(empirical, model_dist)
            else:
                delta0 = kl_divergence(model_dist, empirical)
        except DivergenceUndefinedError:
            delta0 = None

    lz, ppm = CompressorKind.LZ_FAMILY, CompressorKind.PPM
    return RunRecord(
        k=cfg.k,
        m=cfg.m,
        repeat=repeat,
        seed=cfg.seed,
        rho_lz=rho.get(lz),
        rho_ppm=rho.get(ppm),
        l0_lz_bytes=l0.get(lz),
        l0_ppm_bytes=l0.get(ppm),
        delta0_bits=delta0,
        p0_hat=outcome.p0_hat,
        n0=outcome.n0,
        overall_error=outcome.overall_error,
        effective_n=outcome.effective_length,
    )


def _sweep_task(args):
    cfg, repeat = args
    return run_once(cfg, repeat)


def sweep(
    k_star: int = DEFAULT_KSTAR,
    k_range=DESK_K_RANGE,
    m_range=DESK_M_GRID,
    repeats: int = DESK_REPEATS,
    n: int = DEFAULT_N,
    base_seed: int = DEFAULT_BASE_SEED,
    workers: int = 1,
    stream_path=None,
    progress=None,
    **config_kwargs,
) -> list[RunRecord]:
    """Run the full (k, m, repeat) grid and return records sorted by
    (k, m, repeat).

    With ``stream_path`` set, finished records are appended to that CSV in
    completion order, one flushed line per record, so an interrupted sweep
    leaves a parseable file.  The returned (and finally persisted) order is
    canonical regardless of ``workers``.
    """
    tasks = []
    for k in k_range:
        for m in m_range:
            for rep in range(repeats):
                cfg = RunConfig(
                    k_star=k_star,
                    k=k,
                    m=m,
                    n=n,
                    seed=run_seed_for(base_seed, k, m, rep),
                    **config_kwargs,
                )
                tasks.append((cfg, rep))

    records = []
    stream = _RecordStream(stream_path) if stream_path else None
    done = 0
    try:
        if workers <= 1:
            for task in tasks:
                rec = _sweep_task(task)
                records.append(rec)
                if stream:
                    stream.write(rec)
                done += 1
                if progress:
                    progress(done, len(tasks))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_sweep_task, task) for task in tasks]
                for fut in as_completed(futures):
                    rec = fut.result()
                    records.append(rec)
                    if stream:
                        stream.write(rec)
                    done += 1
                    if progress:
                        progress(done, len(tasks))
    finally:
        if stream:
            stream.close()
    records.sort(key=lambda r: (r.k, r.m, r.repeat))
    return records


# --- CSV persistence -------------------------------------------------------

CSV_HEADER = [
    "k",
    "m",
    "repeat",
    "seed",
    "rho_lz",
    "rho_ppm",
    "l0_lz_bytes",
    "l0_ppm_bytes",
    "delta0_bits",
    "p0_hat",
    "n0",
    "overall_error",
    "effective_n",
    "delta0_valid",
]

_INT_FIELDS = {"k", "m", "repeat", "seed", "l0_lz_bytes", "l0_ppm_bytes", "n0", "effective_n"}
_FLOAT_FIELDS = {"rho_lz", "rho_ppm", "delta0_bits", "p0_hat", "overall_error"}
# p0_hat is empty for runs that made no 0-prediction (the rate is 0/0 there).
_OPTIONAL_FIELDS = {"rho_lz", "rho_ppm", "l0_lz_bytes", "l0_ppm_bytes", "delta0_bits", "p0_hat"}


def _format_cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _FLOAT_FIELDS:
        return format(value, ".17g")
    return str(value)


def record_csv_row(record: RunRecord) -> list[str]:
    row = []
    for name in CSV_HEADER[:-1]:
        row.append(_format_cell(name, getattr(record, name)))
    row.append("1" if record.delta0_valid else "0")
    return row


class _RecordStream:
    """Append-only CSV writer flushing one complete line per record."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_HEADER)
        self._fh.flush()

    def write(self, record: RunRecord) -> None:
        self._writer.writerow(record_csv_row(record))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record_csv_row(record))


def read_records_csv(path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RecordParseError(1, "empty file, expected a header row")
        if header != CSV_HEADER:
            raise RecordParseError(1, f"unexpected header {header!r}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise RecordParseError(
                    line_number,
                    f"expected {len(CSV_HEADER)} columns, found {len(row)}",
                )
            values = {}
            for name, cell in zip(CSV_HEADER[:-1], row[:-1]):
                if cell == "":
                    if name not in _OPTIONAL_FIELDS:
                        raise RecordParseError(
                            line_number, f"missing value for {name}"
                        )
                    values[name] = None
                    continue
                try:
                    values[name] = (
                        int(cell) if name in _INT_FIELDS else float(cell)
                    )
                except ValueError:
                    raise RecordParseError(
                        line_number, f"bad value {cell!r} for {name}"
                    )
            if row[-1] not in ("0", "1"):
                raise RecordParseError(
                    line_number, f"bad delta0_valid flag {row[-1]!r}"
                )
            if (row[-1] == "1") != (values["delta0_bits"] is not None):
                raise RecordParseError(
                    line_number, "delta0_valid flag contradicts delta0_bits"
                )
            records.append(RunRecord(**values))
    return records


# --- Aggregation -----------------------------------------------------------


@dataclass(frozen=True)
class KAggregate:
    """Per-order means and standard deviations over a record population.

    Standard deviations are population-style (ddof=0), so a single-record
    group reports zero spread.  Divergence statistics cover only the records
    where it is defined.
    """

    k: int
    n_runs: int
    n_delta0_valid: int
    mean_rho_lz: float | None
    std_rho_lz: float | None
    mean_rho_ppm: float | None
    std_rho_ppm: float | None
    mean_l0_lz: float | None
    std_l0_lz: float | None
    mean_l0_ppm: float | None
    std_l0_ppm: float | None
    mean_delta0: float | None
    std_delta0: float | None
    mean_p0_hat: float | None = None
    mean_overall_error: float = 0.0


def _mean_std(values) -> tuple[float | None, float | None]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def aggregate_by_k(records) -> list[KAggregate]:
    if not records:
        raise ValueError("no records to aggregate")
    by_k: dict[int, list[RunRecord]] = {}
    for rec in records:
        by_k.setdefault(rec.k, []).append(rec)
    out = []
    for k in sorted(by_k):
        group = by_k[k]
        mean_rho_lz, std_rho_lz = _mean_std(r.rho_lz for r in group)
        mean_rho_ppm, std_rho_ppm = _mean_std(r.rho_ppm for r in group)
        mean_l0_lz, std_l0_lz = _mean_std(r.l0_lz_bytes for r in group)
        mean_l0_ppm, std_l0_ppm = _mean_std(r.l0_ppm_bytes for r in group)
        mean_delta0, std_delta0 = _mean_std(r.delta0_bits for r in group)
        out.append(
            KAggregate(
                k=k,
                n_runs=len(group),
                n_delta0_valid=sum(1 for r in group if r.delta0_valid),
                mean_rho_lz=mean_rho_lz,
                std_rho_lz=std_rho_lz,
                mean_rho_ppm=mean_rho_ppm,
                std_rho_ppm=std_rho_ppm,
                mean_l0_lz=mean_l0_lz,
                std_l0_lz=std_l0_lz,
                mean_l0_ppm=mean_l0_ppm,
                std_l0_ppm=std_l0_ppm,
                mean_delta0=mean_delta0,
                std_delta0=std_delta0,
                mean_p0_hat=_mean_std(r.p0_hat for r in group)[0],
                mean_overall_error=float(
                    np.mean([r.overall_error for r in group])
                ),
            )
        )
    return out


def max_step_up(values) -> float:
    """Largest increase between consecutive entries (<= 0 means monotone
    non-increasing)."""
    vals = list(values)
    if len(vals) < 2:
        return 0.0
    return max(b - a for a, b in zip(vals, vals[1:]))


# --- Regression ------------------------------------------------------------


def regress_quadratic(points) -> tuple[float, float, float]:
    """Least-squares coefficients (a, b, c) of a*x**2 + b*x + c."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least three points")
    xs = np.array([p[0] for p in pts], dtype=np.float64)
    ys = np.array([p[1] for p in pts], dtype=np.float64)
    if np.unique(xs).size < 3:
        raise ValueError("design is rank deficient: need three distinct x values")
    a, b, c = np.polyfit(xs, ys, 2)
    return float(a), float(b), float(c)


# --- Surfaces --------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceGrid:
    """Scalar field over the divergence/complexity plane.

    ``values[iy, ix]`` covers the cell spanned by ``x_edges[ix:ix+2]`` and
    ``y_edges[iy:iy+2]`` and is NaN wherever ``admissible`` is False.  A cell
    is admissible exactly when at least one sample landed inside it.
    """

    x_edges: np.ndarray
    y_edges: np.ndarray
    values: np.ndarray
    admissible: np.ndarray


def _axis_edges(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)


def build_surface(
    records,
    value: str,
    kind: CompressorKind = CompressorKind.LZ_FAMILY,
    bins: int = 40,
    radius: float = 2.0,
    power: float = 1.0,
) -> SurfaceGrid:
    """Interpolate a per-run scalar onto a regular grid over the
    (divergence, complexity) plane.

    ``value`` selects the field: "p0" for the 0-prediction error rate or
    "rho" for the information density.  Cell values are inverse-distance
    weighted means of all samples within ``radius`` cell widths of the cell
    center; cells that contain no sample are inadmissible and stay NaN.
    """
    if value not in ("p0", "rho"):
        raise ValueError(f"value must be 'p0' or 'rho', got {value!r}")
    xs, ys, zs = [], [], []
    for rec in records:
        if not rec.delta0_valid or rec.l0_bytes(kind) is None:
            continue
        z = rec.p0_hat if value == "p0" else rec.rho(kind)
        if z is None:
            continue
        xs.append(rec.delta0_bits)
        ys.append(rec.l0_bytes(kind))
        zs.append(z)
    if len(zs) < 10:
        raise ValueError(
            f"need at least 10 records with a defined divergence, have {len(zs)}"
        )
    xs = np.asarray(xs)
    ys = np.asarray(ys, dtype=np.float64)
    zs = np.asarray(zs)

    x_edges = _axis_edges(xs, bins)
    y_edges = _axis_edges(ys, bins)
    ix = np.clip(np.searchsorted(x_edges, xs, side="right") - 1, 0, bins - 1)
    iy = np.clip(np.searchsorted(y_edges, ys, side="right") - 1, 0, bins - 1)

    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (iy, ix), 1)
    admissible = counts > 0

    # Sample coordinates in cell units, for the radius test and the weights.
    cell_w = x_edges[1] - x_edges[0]
    cell_h = y_edges[1] - y_edges[0]
    sx = (xs - x_edges[0]) / cell_w
    sy = (ys - y_edges[0]) / cell_h

    values = np.full((bins, bins), np.nan)
    for cy, cx in zip(*np.nonzero(admissible)):
        dx = sx - (cx + 0.5)
        dy = sy - (cy + 0.5)
        dist = np.hypot(dx, dy)
        near = dist <= radius
        weights = 1.0 / np.maximum(dist[near], 1e-12) ** power
        values[cy, cx] = float(np.sum(weights * zs[near]) / np.sum(weights))
    values.setflags(write=False)
    admissible.setflags(write=False)
    return SurfaceGrid(
        x_edges=x_edges, y_edges=y_edges, values=values, admissible=admissible
    )


def write_surface_csv(grid: SurfaceGrid, base_path) -> list[str]:
    """Persist the value matrix plus axis-edge sidecars; NaN cells are empty."""
    base = str(base_path)
    paths = [base + ".csv", base + ".x_edges.csv", base + ".y_edges.csv"]
    with open(paths[0], "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in grid.values:
            writer.writerow(
                ["" if math.isnan(v) else format(v, ".17g") for v in row]
            )
    for path, edges in zip(paths[1:], (grid.x_edges, grid.y_edges)):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for edge in edges:
                writer.writerow([format(edge, ".17g")])
    return paths
