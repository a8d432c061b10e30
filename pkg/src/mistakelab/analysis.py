"""Population statistics over a sweep's records: correlations between the
complexity estimate and its entropy-based bound, shape of the complexity
distribution, per-order trends, per-cell error means, and quadratic fits of
complexity against the 0-prediction error rate.

Population-level statistics cover the runs whose mistake subsequence is long
enough to carry a divergence measurement (the flagged short ones are
excluded, matching the aggregate rules elsewhere); a run that never
predicted 0 contributes an empty mistake file whose compressed size would
say nothing about mistake randomness.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .compressors import CompressorKind, entropy_bound
from .harness import KAggregate, RunRecord, aggregate_by_k, max_step_up, regress_quadratic
from .metrics import pearson, skewness_kurtosis

__all__ = ["Analysis", "analyze_records", "headlines", "write_analysis_csv"]

KINDS = (CompressorKind.LZ_FAMILY, CompressorKind.PPM)


@dataclass(frozen=True)
class Analysis:
    n_records: int
    n_delta0_valid: int
    per_k: list
    pearson_l0_entropy: dict
    pearson_l0_delta0: dict
    skewness_l0: dict
    kurtosis_l0: dict
    quad_fits: dict
    cell_p0_means: dict
    rho_max_step_up: dict

    def aggregate_for(self, k: int) -> KAggregate:
        for agg in self.per_k:
            if agg.k == k:
                return agg
        raise KeyError(f"no records with k={k}")


def _l0_bits(rec: RunRecord, kind: CompressorKind) -> int | None:
    return rec.l0_lz_bits if kind is CompressorKind.LZ_FAMILY else rec.l0_ppm_bits


def analyze_records(records: list[RunRecord]) -> Analysis:
    if not records:
        raise ValueError("no records to analyze")
    per_k = aggregate_by_k(records)
    population = [r for r in records if r.delta0_valid]

    pearson_l0_entropy = {}
    pearson_l0_delta0 = {}
    skew = {}
    kurt = {}
    rho_step = {}
    for kind in KINDS:
        pairs = [
            (_l0_bits(r, kind), entropy_bound(r.n0, r.p0_hat))
            for r in population
            if _l0_bits(r, kind) is not None
        ]
        if len(pairs) >= 2:
            pearson_l0_entropy[kind] = pearson(
                [p[0] for p in pairs], [p[1] for p in pairs]
            )
        dpairs = [
            (_l0_bits(r, kind), r.delta0_bits)
            for r in population
            if _l0_bits(r, kind) is not None
        ]
        if len(dpairs) >= 2:
            pearson_l0_delta0[kind] = pearson(
                [p[0] for p in dpairs], [p[1] for p in dpairs]
            )
        l0s = [r.l0_bytes(kind) for r in population if r.l0_bytes(kind) is not None]
        if len(l0s) >= 3:
            skew[kind], kurt[kind] = skewness_kurtosis(l0s)
        means = [a.mean_rho_lz if kind is CompressorKind.LZ_FAMILY else a.mean_rho_ppm
                 for a in per_k]
        means = [m for m in means if m is not None]
        if len(means) >= 2:
            rho_step[kind] = max_step_up(means)

    quad_fits = {}
    by_k: dict[int, list[RunRecord]] = {}
    for rec in records:
        by_k.setdefault(rec.k, []).append(rec)
    for k, group in sorted(by_k.items()):
        points = [
            (r.p0_hat, r.l0_lz_bytes)
            for r in group
            if r.p0_hat is not None and r.l0_lz_bytes is not None
        ]
        try:
            quad_fits[k] = regress_quadratic(points)
        except ValueError:
            quad_fits[k] = None

    cell_p0_means = {}
    cells: dict[tuple[int, int], list[float]] = {}
    for rec in records:
        if rec.p0_hat is not None:
            cells.setdefault((rec.k, rec.m), []).append(rec.p0_hat)
    for key in sorted(cells):
        vals = cells[key]
        cell_p0_means[key] = sum(vals) / len(vals)

    return Analysis(
        n_records=len(records),
        n_delta0_valid=sum(1 for r in records if r.delta0_valid),
        per_k=per_k,
        pearson_l0_entropy=pearson_l0_entropy,
        pearson_l0_delta0=pearson_l0_delta0,
        skewness_l0=skew,
        kurtosis_l0=kurt,
        quad_fits=quad_fits,
        cell_p0_means=cell_p0_means,
        rho_max_step_up=rho_step,
    )


def _rows(analysis: Analysis):
    yield ("n_records", "", analysis.n_records)
    yield ("n_delta0_valid", "", analysis.n_delta0_valid)
    for agg in analysis.per_k:
        group = f"k={agg.k}"
        yield ("n_runs", group, agg.n_runs)
        for name in (
            "mean_rho_lz",
            "std_rho_lz",
            "mean_rho_ppm",
            "std_rho_ppm",
            "mean_l0_lz",
            "std_l0_lz",
            "mean_l0_ppm",
            "std_l0_ppm",
            "mean_delta0",
            "std_delta0",
            "mean_p0_hat",
            "mean_overall_error",
        ):
            value = getattr(agg, name)
            if value is not None:
                yield (name, group, value)
    for kind in KINDS:
        tag = kind.value
        if kind in analysis.pearson_l0_entropy:
            yield ("pearson_l0_entropy", tag, analysis.pearson_l0_entropy[kind])
        if kind in analysis.pearson_l0_delta0:
            yield ("pearson_l0_delta0", tag, analysis.pearson_l0_delta0[kind])
        if kind in analysis.skewness_l0:
            yield ("skewness_l0", tag, analysis.skewness_l0[kind])
            yield ("kurtosis_l0", tag, analysis.kurtosis_l0[kind])
        if kind in analysis.rho_max_step_up:
            yield ("rho_max_step_up", tag, analysis.rho_max_step_up[kind])
    for k, fit in analysis.quad_fits.items():
        if fit is None:
            continue
        a, b, c = fit
        yield ("quadfit_a", f"k={k}", a)
        yield ("quadfit_b", f"k={k}", b)
        yield ("quadfit_c", f"k={k}", c)
    for (k, m), value in analysis.cell_p0_means.items():
        yield ("cell_mean_p0", f"k={k},m={m}", value)


def write_analysis_csv(analysis: Analysis, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "group", "value"])
        for metric, group, value in _rows(analysis):
            if isinstance(value, float):
                value = format(value, ".17g")
            writer.writerow([metric, group, value])


def headlines(analysis: Analysis) -> list[str]:
    """Short human-readable summary lines for the terminal."""
    lines = [
        f"records: {analysis.n_records} "
        f"({analysis.n_delta0_valid} with a defined divergence)"
    ]
    for kind in KINDS:
        tag = kind.value
        if kind in analysis.pearson_l0_entropy:
            lines.append(
                f"pearson(l0 bits, entropy bound) [{tag}]: "
                f"{analysis.pearson_l0_entropy[kind]:.3f}"
            )
        if kind in analysis.pearson_l0_delta0:
            lines.append(
                f"pearson(l0 bits, divergence) [{tag}]: "
                f"{analysis.pearson_l0_delta0[kind]:.3f}"
            )
        if kind in analysis.skewness_l0:
            lines.append(
                f"l0 skewness/kurtosis [{tag}]: "
                f"{analysis.skewness_l0[kind]:.2f} / {analysis.kurtosis_l0[kind]:.2f}"
            )
        if kind in analysis.rho_max_step_up:
            lines.append(
                f"max upward step of mean rho vs k [{tag}]: "
                f"{analysis.rho_max_step_up[kind]:+.4f}"
            )
    for k in (6, 10):
        fit = analysis.quad_fits.get(k)
        if fit:
            a, b, c = fit
            lines.append(
                f"quadratic l0(p0) fit at k={k}: {a:.0f}x^2 {b:+.0f}x {c:+.0f}"
            )
    return lines
