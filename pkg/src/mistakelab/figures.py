"""Figure rendering: each figure is written as a standalone SVG next to a CSV
holding the plotted (aggregated or gridded) data.

All rendering is headless and deterministic (fixed SVG hash salt, no
timestamps in the data files).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mistakelab"

import numpy as np
import matplotlib.pyplot as plt

from .compressors import CompressorKind, entropy_bound
from .harness import aggregate_by_k, build_surface, regress_quadratic, write_surface_csv
from .metrics import skewness_kurtosis

__all__ = ["FIGURE_NAMES", "render_figure", "render_figures"]


def _kind_label(kind: CompressorKind) -> str:
    return "gzip-style LZ" if kind is CompressorKind.LZ_FAMILY else "PPM"


def _mean_rho(agg, kind):
    return agg.mean_rho_lz if kind is CompressorKind.LZ_FAMILY else agg.mean_rho_ppm


def _std_rho(agg, kind):
    return agg.std_rho_lz if kind is CompressorKind.LZ_FAMILY else agg.std_rho_ppm


def _mean_l0(agg, kind):
    return agg.mean_l0_lz if kind is CompressorKind.LZ_FAMILY else agg.mean_l0_ppm


def _std_l0(agg, kind):
    return agg.std_l0_lz if kind is CompressorKind.LZ_FAMILY else agg.std_l0_ppm


def _l0_bytes(rec, kind):
    return rec.l0_lz_bytes if kind is CompressorKind.LZ_FAMILY else rec.l0_ppm_bytes


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format(v, ".17g") if isinstance(v, float) else v for v in row]
            )


def _save(fig, path):
    fig.savefig(path, format="svg")
    plt.close(fig)


def _cell_means(records, field):
    cells: dict[tuple[int, int], list[float]] = {}
    for rec in records:
        value = getattr(rec, field)
        if value is not None:
            cells.setdefault((rec.k, rec.m), []).append(value)
    return {key: float(np.mean(vals)) for key, vals in sorted(cells.items())}


def fig_learning_curves(records, outdir, kind):
    """Mean prediction error as contours over the (k, m) grid."""
    cells = _cell_means(records, "overall_error")
    ks = sorted({k for k, _ in cells})
    ms = sorted({m for _, m in cells})
    grid = np.full((len(ms), len(ks)), np.nan)
    for (k, m), err in cells.items():
        grid[ms.index(m), ks.index(k)] = err
    fig, ax = plt.subplots()
    contours = ax.contourf(ks, ms, np.ma.masked_invalid(grid), levels=12, cmap="jet")
    fig.colorbar(contours, ax=ax, label="mean prediction error")
    ax.set_xlabel("learner order k")
    ax.set_ylabel("training length m")
    ax.set_title("Prediction error over learner order and training length")
    svg = outdir / "learning-curves.svg"
    _save(fig, svg)
    data = outdir / "learning-curves.csv"
    _write_rows(
        data,
        ["k", "m", "mean_overall_error"],
        [(k, m, v) for (k, m), v in cells.items()],
    )
    return [svg, data]


def fig_rho_vs_k(records, outdir, kind):
    """Mean information density of the decision file against learner order."""
    aggs = aggregate_by_k(records)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, which in zip(axes, (CompressorKind.LZ_FAMILY, CompressorKind.PPM)):
        ks = [a.k for a in aggs]
        means = [_mean_rho(a, which) for a in aggs]
        ax.plot(ks, means, "x-")
        ax.axhline(1.0, color="gray", lw=0.5)
        ax.set_xlabel("learner order k")
        ax.set_ylabel("mean sysRatio")
        ax.set_title(_kind_label(which))
    fig.suptitle("Decision-file information density vs learner order")
    fig.tight_layout()
    svg = outdir / "rho-vs-k.svg"
    _save(fig, svg)
    data = outdir / "rho-vs-k.csv"
    _write_rows(
        data,
        ["k", "mean_rho_lz", "std_rho_lz", "mean_rho_ppm", "std_rho_ppm"],
        [
            (a.k, a.mean_rho_lz, a.std_rho_lz, a.mean_rho_ppm, a.std_rho_ppm)
            for a in aggs
        ],
    )
    return [svg, data]


def fig_error_vs_rho(records, outdir, kind):
    """Mean error as contours over per-cell mean sysRatio and m."""
    err_cells = _cell_means(records, "overall_error")
    rho_field = "rho_lz" if kind is CompressorKind.LZ_FAMILY else "rho_ppm"
    rho_cells = _cell_means(records, rho_field)
    triples = [
        (rho_cells[key], key[1], err_cells[key])
        for key in err_cells
        if key in rho_cells
    ]
    if len(triples) < 4:
        raise ValueError("too few (k, m) cells for a contour plot")
    rho, m, err = (np.array(t) for t in zip(*triples))
    fig, ax = plt.subplots()
    tri = ax.tricontourf(rho, m, err, levels=12, cmap="jet")
    fig.colorbar(tri, ax=ax, label="mean prediction error")
    ax.set_xlabel(f"mean sysRatio ({_kind_label(kind)})")
    ax.set_ylabel("training length m")
    ax.set_title("Prediction error over information density and training length")
    svg = outdir / "error-vs-rho.svg"
    _save(fig, svg)
    data = outdir / "error-vs-rho.csv"
    _write_rows(data, ["rho", "m", "mean_overall_error"], triples)
    return [svg, data]


def _envelope_plot(records, outdir, kind, field_mean, field_std, ylabel, stem):
    aggs = aggregate_by_k(records)
    points = [
        (_mean_rho(a, kind), field_mean(a), field_std(a), a.k)
        for a in aggs
        if field_mean(a) is not None
    ]
    points.sort()
    rho = [p[0] for p in points]
    mean = np.array([p[1] for p in points])
    std = np.array([p[2] for p in points])
    fig, ax = plt.subplots()
    ax.plot(rho, mean, "x-", label="mean")
    ax.plot(rho, mean + std, "--", color="gray", label="+/- std envelope")
    ax.plot(rho, mean - std, "--", color="gray")
    ax.set_xlabel(f"mean sysRatio ({_kind_label(kind)})")
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.set_title(f"{ylabel} vs information density (one point per k)")
    svg = outdir / f"{stem}.svg"
    _save(fig, svg)
    data = outdir / f"{stem}.csv"
    _write_rows(
        data,
        ["k", "mean_rho", "mean", "std"],
        [(p[3], p[0], p[1], p[2]) for p in points],
    )
    return [svg, data]


def fig_l0_vs_rho(records, outdir, kind):
    """Mean complexity estimate of the mistake subsequence vs mean sysRatio."""
    return _envelope_plot(
        records,
        outdir,
        kind,
        lambda a: _mean_l0(a, kind),
        lambda a: _std_l0(a, kind),
        "mean complexity estimate l0 (bytes)",
        "l0-vs-rho",
    )


def fig_delta0_vs_rho(records, outdir, kind):
    """Mean divergence of the mistake subsequence vs mean sysRatio."""
    return _envelope_plot(
        records,
        outdir,
        kind,
        lambda a: a.mean_delta0,
        lambda a: a.std_delta0,
        "mean divergence (bits)",
        "delta0-vs-rho",
    )


def fig_regressions(records, outdir, kind, orders=(3, 6, 10)):
    """Complexity of the mistake subsequence against the 0-prediction error
    rate, with quadratic fits, for selected learner orders."""
    fig, ax = plt.subplots()
    rows = []
    plotted = 0
    for k, color in zip(orders, ("tab:green", "tab:blue", "tab:red")):
        pts = [
            (r.p0_hat, _l0_bytes(r, kind))
            for r in records
            if r.k == k and r.p0_hat is not None and _l0_bytes(r, kind) is not None
        ]
        if not pts:
            continue
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        ax.plot(xs, ys, ".", ms=4, color=color, label=f"k={k}")
        try:
            a, b, c = regress_quadratic(pts)
        except ValueError:
            continue
        grid = np.linspace(xs.min(), xs.max(), 100)
        ax.plot(grid, a * grid**2 + b * grid + c, "-", color=color)
        rows.append((k, a, b, c))
        plotted += 1
    if not plotted:
        raise ValueError("no learner order has enough points for a fit")
    ax.set_xlabel("0-prediction error rate")
    ax.set_ylabel(f"complexity estimate l0 (bytes, {_kind_label(kind)})")
    ax.legend()
    ax.set_title("Mistake-subsequence complexity vs error rate, quadratic fits")
    svg = outdir / "regressions.svg"
    _save(fig, svg)
    data = outdir / "regressions.csv"
    _write_rows(data, ["k", "a", "b", "c"], rows)
    return [svg, data]


def fig_entropy_correlation(records, outdir, kind):
    """Complexity estimate beside its entropy-based bound, and beside the
    divergence, both against the 0-prediction error rate."""
    usable = [
        r for r in records if r.delta0_valid and _l0_bytes(r, kind) is not None
    ]
    if not usable:
        raise ValueError("no records with a measurable mistake subsequence")
    p0 = np.array([r.p0_hat for r in usable])
    l0_bits = np.array([8 * _l0_bytes(r, kind) for r in usable])
    bound = np.array([entropy_bound(r.n0, r.p0_hat) for r in usable])
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    axes[0].plot(p0, l0_bits, "x", color="red", ms=4, label="l0 (bits)")
    axes[0].plot(p0, bound, "+", color="blue", ms=4, label="entropy bound (bits)")
    axes[0].set_xlabel("0-prediction error rate")
    axes[0].set_ylabel("bits")
    axes[0].legend()
    axes[1].plot(p0, l0_bits, "x", color="red", ms=4, label="l0 (bits)")
    axes[1].set_xlabel("0-prediction error rate")
    axes[1].set_ylabel("bits")
    twin = axes[1].twinx()
    deltas = [(r.p0_hat, r.delta0_bits) for r in usable if r.delta0_valid]
    twin.plot(
        [d[0] for d in deltas],
        [d[1] for d in deltas],
        "o",
        mfc="none",
        ms=4,
        color="black",
        label="divergence (bits)",
    )
    twin.set_ylabel("divergence (bits)")
    fig.suptitle("Complexity estimate vs entropy bound and divergence")
    fig.tight_layout()
    svg = outdir / "entropy-correlation.svg"
    _save(fig, svg)
    data = outdir / "entropy-correlation.csv"
    _write_rows(
        data,
        ["p0_hat", "l0_bits", "entropy_bound_bits", "delta0_bits"],
        [
            (r.p0_hat, 8 * _l0_bytes(r, kind), entropy_bound(r.n0, r.p0_hat),
             r.delta0_bits if r.delta0_valid else "")
            for r in usable
        ],
    )
    return [svg, data]


def fig_histogram_l0(records, outdir, kind):
    """Distribution of the complexity estimate over the population of runs
    with a measurable mistake subsequence."""
    l0s = [
        _l0_bytes(r, kind)
        for r in records
        if r.delta0_valid and _l0_bytes(r, kind) is not None
    ]
    if len(l0s) < 3:
        raise ValueError("too few records for a histogram")
    g1, g2 = skewness_kurtosis(l0s)
    fig, ax = plt.subplots()
    ax.hist(l0s, bins=30, color="tab:blue", edgecolor="white")
    tail = "right" if g1 > 0 else "left"
    ax.annotate(
        f"skewness {g1:.2f} ({tail}-heavy tail), excess kurtosis {g2:.2f}",
        xy=(0.98, 0.95),
        xycoords="axes fraction",
        ha="right",
    )
    ax.set_xlabel(f"complexity estimate l0 (bytes, {_kind_label(kind)})")
    ax.set_ylabel("runs")
    ax.set_title("Histogram of the mistake-subsequence complexity estimate")
    svg = outdir / "histogram-l0.svg"
    _save(fig, svg)
    data = outdir / "histogram-l0.csv"
    counts, edges = np.histogram(l0s, bins=30)
    _write_rows(
        data,
        ["bin_left", "bin_right", "count"],
        [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(counts)],
    )
    return [svg, data]


def _surface_figure(records, outdir, kind, value, label, stem):
    grid = build_surface(records, value=value, kind=kind)
    masked = np.ma.masked_invalid(grid.values)
    fig, ax = plt.subplots()
    mesh = ax.pcolormesh(grid.x_edges, grid.y_edges, masked, cmap="jet")
    cx = (grid.x_edges[:-1] + grid.x_edges[1:]) / 2
    cy = (grid.y_edges[:-1] + grid.y_edges[1:]) / 2
    ax.contour(cx, cy, masked, levels=8, colors="black", linewidths=0.5)
    fig.colorbar(mesh, ax=ax, label=label)
    ax.set_xlabel("divergence from Bernoulli (bits)")
    ax.set_ylabel(f"complexity estimate l0 (bytes, {_kind_label(kind)})")
    ax.set_title(f"{label} over the divergence-complexity plane")
    svg = outdir / f"{stem}.svg"
    _save(fig, svg)
    paths = [svg]
    paths.extend(Path(p) for p in write_surface_csv(grid, outdir / stem))
    return paths


def fig_error_surface(records, outdir, kind):
    """0-prediction error rate over the divergence-complexity plane."""
    return _surface_figure(
        records, outdir, kind, "p0", "0-prediction error rate", "error-surface"
    )


def fig_rho_surface(records, outdir, kind):
    """Information density over the divergence-complexity plane."""
    return _surface_figure(
        records, outdir, kind, "rho", "sysRatio", "rho-surface"
    )


def fig_rho_rate(records, outdir, kind):
    """Discrete rate of change of the mean sysRatio with respect to k."""
    aggs = aggregate_by_k(records)
    ks = [a.k for a in aggs]
    means = [_mean_rho(a, kind) for a in aggs]
    if len(ks) < 3:
        raise ValueError("need at least three orders for a rate plot")
    rates = np.diff(means)
    fig, ax = plt.subplots()
    ax.plot(ks[1:], rates, "x-")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("learner order k")
    ax.set_ylabel("change of mean sysRatio per unit k")
    ax.set_title(f"Rate of change of the mean sysRatio ({_kind_label(kind)})")
    svg = outdir / "rho-rate.svg"
    _save(fig, svg)
    data = outdir / "rho-rate.csv"
    _write_rows(
        data, ["k", "rate"], [(k, float(r)) for k, r in zip(ks[1:], rates)]
    )
    return [svg, data]


FIGURE_NAMES = {
    "learning-curves": fig_learning_curves,
    "rho-vs-k": fig_rho_vs_k,
    "error-vs-rho": fig_error_vs_rho,
    "l0-vs-rho": fig_l0_vs_rho,
    "delta0-vs-rho": fig_delta0_vs_rho,
    "regressions": fig_regressions,
    "entropy-correlation": fig_entropy_correlation,
    "histogram-l0": fig_histogram_l0,
    "error-surface": fig_error_surface,
    "rho-surface": fig_rho_surface,
    "rho-rate": fig_rho_rate,
}


def render_figure(name, records, outdir, kind=CompressorKind.LZ_FAMILY):
    if name not in FIGURE_NAMES:
        raise KeyError(f"unknown figure {name!r}; choose from {sorted(FIGURE_NAMES)}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return FIGURE_NAMES[name](records, outdir, kind)


def render_figures(records, outdir, names=None, kind=CompressorKind.LZ_FAMILY):
    paths = []
    for name in names or sorted(FIGURE_NAMES):
        paths.extend(render_figure(name, records, outdir, kind))
    return paths
