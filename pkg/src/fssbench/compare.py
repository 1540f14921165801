"""Distortion analysis over a (supervised, unsupervised) score pair.

Distribution statistics per researcher population, university rank
tables with percentiles and quartiles, the quartile confusion matrix,
two-quartile rank jumps, correlation batteries, and the percentage
deviation correlations that relate staff-count inflation to score
distortion.

Fixed conventions (see README): sample standard deviation (ddof 1),
population-moment skewness m3/m2^1.5 and non-excess kurtosis m4/m2^2
(NaN on constant input), linear-interpolation percentiles, percentile of
a rank = round-half-up of 100*(n-rank)/(n-1), quartiles cut at the
unrounded 75/50/25 percentile thresholds, and delta_rank = supervised
rank minus unsupervised rank (negative when the unsupervised ranking is
too generous).
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .fss import ResearcherScore, UniversityScore

log = logging.getLogger(__name__)

PERCENTILE_POINTS = (1, 5, 10, 25, 50, 75, 90, 95, 99)


@dataclass(frozen=True)
class DistributionStats:
    obs: int
    mean: float
    std_dev: float
    variance: float
    skewness: float
    kurtosis: float
    percentiles: tuple[float, ...]   # at PERCENTILE_POINTS
    max: float

    @property
    def median(self) -> float:
        return self.percentiles[PERCENTILE_POINTS.index(50)]


def distribution_stats(values) -> DistributionStats:
    """Descriptive statistics of one score distribution.

    Skewness and kurtosis use population moments; on a constant vector
    both are NaN (m2 = 0). A single observation also gives NaN sample
    std/variance.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot describe an empty distribution")
    mean = float(arr.mean())
    if arr.size > 1:
        variance = float(arr.var(ddof=1))
        std_dev = math.sqrt(variance)
    else:
        variance = std_dev = float("nan")
    centered = arr - mean
    m2 = float((centered ** 2).mean())
    if m2 > 0.0:
        skewness = float((centered ** 3).mean()) / m2 ** 1.5
        kurtosis = float((centered ** 4).mean()) / m2 ** 2
    else:
        skewness = kurtosis = float("nan")
    return DistributionStats(
        obs=int(arr.size),
        mean=mean,
        std_dev=std_dev,
        variance=variance,
        skewness=skewness,
        kurtosis=kurtosis,
        percentiles=tuple(float(p) for p in np.percentile(arr, PERCENTILE_POINTS)),
        max=float(arr.max()),
    )


# ---------------------------------------------------------------------------
# ranks, percentiles, quartiles

def percentile_of_rank(rank: int, n: int) -> int:
    """round_half_up(100 * (n - rank) / (n - 1)), computed in exact integer
    arithmetic so .5 cases always round up; rank 1 -> 100, rank n -> 0."""
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} out of range 1..{n}")
    if n == 1:
        return 100
    return (200 * (n - rank) + (n - 1)) // (2 * (n - 1))


def assign_quartile(rank: int, n: int) -> int:
    """Quartile 1..4 by the unrounded percentile: Q1 at >= 75, Q2 at
    >= 50, Q3 at >= 25. Integer comparisons, no floating point."""
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} out of range 1..{n}")
    if n == 1:
        return 1
    above = n - rank            # percentile = 100 * above / (n - 1)
    if 100 * above >= 75 * (n - 1):
        return 1
    if 2 * above >= n - 1:
        return 2
    if 4 * above >= n - 1:
        return 3
    return 4


@dataclass(frozen=True)
class RankRow:
    university_id: str
    sup_obs: int
    sup_fss_u: float
    sup_rank: int
    sup_percentile: int
    sup_quartile: int
    unsup_obs: int
    unsup_fss_u: float
    unsup_rank: int
    unsup_percentile: int
    unsup_quartile: int
    delta_rank: int              # sup_rank - unsup_rank


@dataclass(frozen=True)
class RankTable:
    rows: tuple[RankRow, ...]    # sorted by unsupervised rank

    @property
    def n(self) -> int:
        return len(self.rows)

    def row(self, university_id: str) -> RankRow:
        for r in self.rows:
            if r.university_id == university_id:
                return r
        raise KeyError(university_id)


def build_rank_table(rows: list[dict]) -> RankTable:
    """Assemble a RankTable from explicit per-mode ranks.

    Each input row needs university_id, sup_obs, sup_fss_u, sup_rank,
    unsup_obs, unsup_fss_u, unsup_rank; percentiles, quartiles, and
    delta_rank are derived here. Each mode's ranks must be exactly 1..n.
    """
    n = len(rows)
    for mode in ("sup_rank", "unsup_rank"):
        if sorted(r[mode] for r in rows) != list(range(1, n + 1)):
            raise ValueError(f"{mode} values are not a permutation of 1..{n}")
    out = []
    for r in rows:
        out.append(RankRow(
            university_id=r["university_id"],
            sup_obs=int(r["sup_obs"]),
            sup_fss_u=float(r["sup_fss_u"]),
            sup_rank=int(r["sup_rank"]),
            sup_percentile=percentile_of_rank(int(r["sup_rank"]), n),
            sup_quartile=assign_quartile(int(r["sup_rank"]), n),
            unsup_obs=int(r["unsup_obs"]),
            unsup_fss_u=float(r["unsup_fss_u"]),
            unsup_rank=int(r["unsup_rank"]),
            unsup_percentile=percentile_of_rank(int(r["unsup_rank"]), n),
            unsup_quartile=assign_quartile(int(r["unsup_rank"]), n),
            delta_rank=int(r["sup_rank"]) - int(r["unsup_rank"]),
        ))
    out.sort(key=lambda r: r.unsup_rank)
    return RankTable(rows=tuple(out))


def _ranks_desc(values: dict[str, float]) -> dict[str, int]:
    ordered = sorted(values, key=lambda u: (-values[u], u))
    return {u: i + 1 for i, u in enumerate(ordered)}


def rank_universities(supervised: list[UniversityScore],
                      unsupervised: list[UniversityScore]) -> RankTable:
    """Rank both modes' overall scores on the shared university set.

    Descending by score, ties broken by full-precision value and then by
    university_id. The two modes must cover the same universities.
    """
    sup = {s.university_id: s for s in supervised}
    unsup = {s.university_id: s for s in unsupervised}
    if set(sup) != set(unsup):
        only_sup = sorted(set(sup) - set(unsup))
        only_unsup = sorted(set(unsup) - set(sup))
        raise ValueError(
            "university sets differ between modes: only supervised "
            f"{only_sup}, only unsupervised {only_unsup}")
    sup_ranks = _ranks_desc({u: s.fss_u for u, s in sup.items()})
    unsup_ranks = _ranks_desc({u: s.fss_u for u, s in unsup.items()})
    rows = [{
        "university_id": u,
        "sup_obs": sup[u].rs_u,
        "sup_fss_u": sup[u].fss_u,
        "sup_rank": sup_ranks[u],
        "unsup_obs": unsup[u].rs_u,
        "unsup_fss_u": unsup[u].fss_u,
        "unsup_rank": unsup_ranks[u],
    } for u in sorted(sup)]
    return build_rank_table(rows)


FIXTURE_COLUMNS = ("university", "unsup_obs", "unsup_fss_u", "unsup_rank",
                   "unsup_perc", "sup_obs", "sup_fss_u", "sup_rank", "sup_perc",
                   "delta_rank")


def load_fixture_rows(path: str | Path | None = None) -> list[dict]:
    """Raw rows of the bundled 65-university reference table (every value
    as published: scores at 3 decimals, ranks, percentiles, rank deltas)."""
    if path is None:
        source = resources.files("fssbench.data").joinpath("reference_table.csv")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.DictReader(text.splitlines()))
    for row in rows:
        missing = [c for c in FIXTURE_COLUMNS if c not in row]
        if missing:
            raise ValueError(f"fixture is missing columns {missing}")
    return rows


def load_reference_table(path: str | Path | None = None) -> RankTable:
    """The bundled reference table as a RankTable, using its published
    ranks (two unsupervised scores tie at 3 decimals, so re-ranking the
    rounded scores would be ambiguous)."""
    rows = [{
        "university_id": r["university"],
        "sup_obs": int(r["sup_obs"]),
        "sup_fss_u": float(r["sup_fss_u"]),
        "sup_rank": int(r["sup_rank"]),
        "unsup_obs": int(r["unsup_obs"]),
        "unsup_fss_u": float(r["unsup_fss_u"]),
        "unsup_rank": int(r["unsup_rank"]),
    } for r in load_fixture_rows(path)]
    return build_rank_table(rows)


# ---------------------------------------------------------------------------
# confusion, jumps

@dataclass(frozen=True)
class QuartileMatrix:
    """counts[i][j] = universities in unsupervised quartile i+1 and
    supervised quartile j+1."""

    counts: tuple[tuple[int, ...], ...]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def diagonal_total(self) -> int:
        return sum(self.counts[i][i] for i in range(4))

    @property
    def above_diagonal(self) -> int:
        """Universities placed in a better quartile by the supervised
        ranking (column index beyond row index)."""
        return sum(self.counts[i][j] for i in range(4) for j in range(4) if j > i)

    @property
    def below_diagonal(self) -> int:
        return sum(self.counts[i][j] for i in range(4) for j in range(4) if j < i)


def quartile_confusion(table: RankTable) -> QuartileMatrix:
    counts = [[0] * 4 for _ in range(4)]
    for row in table.rows:
        counts[row.unsup_quartile - 1][row.sup_quartile - 1] += 1
    return QuartileMatrix(counts=tuple(tuple(r) for r in counts))


@dataclass(frozen=True)
class RankJumpReport:
    jumps: tuple[tuple[str, int, int], ...]   # (university, q_unsup, q_sup)
    threshold: int
    max_abs_delta: int
    top_k: int
    max_abs_delta_top: int


def rank_jumps(table: RankTable, threshold_quartiles: int = 2,
               top_k: int = 11) -> RankJumpReport:
    """Universities whose quartile differs by at least the threshold,
    ordered by (unsupervised quartile, supervised rank); also the largest
    rank move overall and within the supervised top-k."""
    jumps = [(r.university_id, r.unsup_quartile, r.sup_quartile)
             for r in sorted(table.rows, key=lambda r: (r.unsup_quartile, r.sup_rank))
             if abs(r.unsup_quartile - r.sup_quartile) >= threshold_quartiles]
    deltas = [abs(r.delta_rank) for r in table.rows]
    top = [abs(r.delta_rank) for r in table.rows if r.sup_rank <= top_k]
    return RankJumpReport(
        jumps=tuple(jumps),
        threshold=threshold_quartiles,
        max_abs_delta=max(deltas, default=0),
        top_k=top_k,
        max_abs_delta_top=max(top, default=0),
    )


# ---------------------------------------------------------------------------
# correlations

@dataclass(frozen=True)
class GroupCorrelation:
    group: str
    n: int
    pearson_scores: float
    spearman_ranks: float


def correlation_battery(table: RankTable,
                        groups: dict[str, list[str]] | None = None,
                        ) -> dict[str, GroupCorrelation]:
    """Pearson on scores and Spearman on ranks (average-rank ties), per
    group of universities; default is one overall group. Groups with
    fewer than 3 members are skipped with a warning."""
    if groups is None:
        groups = {"overall": [r.university_id for r in table.rows]}
    out: dict[str, GroupCorrelation] = {}
    for name in sorted(groups):
        rows = [table.row(u) for u in groups[name]]
        if len(rows) < 3:
            log.warning("group %r has %d universities, need 3; skipped",
                        name, len(rows))
            continue
        sup_scores = [r.sup_fss_u for r in rows]
        unsup_scores = [r.unsup_fss_u for r in rows]
        pearson = float(sps.pearsonr(sup_scores, unsup_scores).statistic)
        spearman = float(sps.spearmanr([r.sup_rank for r in rows],
                                       [r.unsup_rank for r in rows]).statistic)
        out[name] = GroupCorrelation(group=name, n=len(rows),
                                     pearson_scores=pearson, spearman_ranks=spearman)
    return out


def percent_deviation(supervised: float, unsupervised: float) -> float:
    """100 * (unsupervised - supervised) / supervised."""
    if supervised == 0:
        raise ValueError("percent deviation needs a nonzero supervised value")
    return 100.0 * (unsupervised - supervised) / supervised


def university_deviation_correlations(table: RankTable) -> dict[str, float]:
    """Pearson correlations of staff-count deviation against score
    deviation and against rank movement, across universities."""
    obs_dev = [percent_deviation(r.sup_obs, r.unsup_obs) for r in table.rows]
    fss_dev = [percent_deviation(r.sup_fss_u, r.unsup_fss_u) for r in table.rows]
    delta = [float(r.delta_rank) for r in table.rows]
    return {
        "obs_vs_fss_u": float(sps.pearsonr(obs_dev, fss_dev).statistic),
        "obs_vs_delta_rank": float(sps.pearsonr(obs_dev, delta).statistic),
    }


def sc_deviation_correlations(supervised: list[ResearcherScore],
                              unsupervised: list[ResearcherScore],
                              min_obs: int = 2) -> dict[str, float]:
    """Per-SC percentage deviations of researcher counts against the
    deviations of mean and median scores (Pearson, across SCs present in
    both modes)."""
    def by_sc(scores):
        acc: dict[str, list[float]] = {}
        for s in scores:
            acc.setdefault(s.sc_id, []).append(s.fss_r)
        return acc

    sup, unsup = by_sc(supervised), by_sc(unsupervised)
    obs_dev, mean_dev, median_dev = [], [], []
    for sc in sorted(set(sup) & set(unsup)):
        a, b = sup[sc], unsup[sc]
        if len(a) < min_obs or len(b) < min_obs:
            continue
        mean_a, mean_b = float(np.mean(a)), float(np.mean(b))
        med_a, med_b = float(np.median(a)), float(np.median(b))
        if mean_a == 0 or med_a == 0:
            continue
        obs_dev.append(percent_deviation(len(a), len(b)))
        mean_dev.append(percent_deviation(mean_a, mean_b))
        median_dev.append(percent_deviation(med_a, med_b))
    if len(obs_dev) < 3:
        return {"obs_vs_mean_fss": float("nan"), "obs_vs_median_fss": float("nan")}
    return {
        "obs_vs_mean_fss": float(sps.pearsonr(obs_dev, mean_dev).statistic),
        "obs_vs_median_fss": float(sps.pearsonr(obs_dev, median_dev).statistic),
    }


# ---------------------------------------------------------------------------
# report assembly

def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def comparison_report(table: RankTable,
                      groups: dict[str, list[str]] | None = None,
                      supervised_researchers: list[ResearcherScore] | None = None,
                      unsupervised_researchers: list[ResearcherScore] | None = None,
                      ) -> dict:
    """The full battery as one JSON-ready dictionary."""
    matrix = quartile_confusion(table)
    jumps = rank_jumps(table)
    battery = correlation_battery(table, groups)
    report = {
        "n_universities": table.n,
        "correlations": {
            name: {"n": c.n, "pearson_scores": c.pearson_scores,
                   "spearman_ranks": c.spearman_ranks}
            for name, c in battery.items()
        },
        "quartile_matrix": [list(row) for row in matrix.counts],
        "quartile_diagonal": matrix.diagonal_total,
        "quartile_above_diagonal": matrix.above_diagonal,
        "quartile_below_diagonal": matrix.below_diagonal,
        "rank_jumps": {
            "threshold": jumps.threshold,
            "universities": [list(j) for j in jumps.jumps],
            "max_abs_delta_rank": jumps.max_abs_delta,
            "top_k": jumps.top_k,
            "max_abs_delta_rank_top": jumps.max_abs_delta_top,
        },
        "university_deviation_correlations": university_deviation_correlations(table),
    }
    if supervised_researchers is not None and unsupervised_researchers is not None:
        report["sc_deviation_correlations"] = sc_deviation_correlations(
            supervised_researchers, unsupervised_researchers)
        report["researcher_distributions"] = {
            "supervised": _stats_dict(distribution_stats(
                [s.fss_r for s in supervised_researchers])),
            "unsupervised": _stats_dict(distribution_stats(
                [s.fss_r for s in unsupervised_researchers])),
        }
    return _json_safe(report)


def _stats_dict(stats: DistributionStats) -> dict:
    return {
        "obs": stats.obs,
        "mean": stats.mean,
        "std_dev": stats.std_dev,
        "variance": stats.variance,
        "skewness": stats.skewness,
        "kurtosis": stats.kurtosis,
        "percentiles": {str(p): v for p, v in zip(PERCENTILE_POINTS, stats.percentiles)},
        "max": stats.max,
    }


def write_report_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def write_rank_table_csv(table: RankTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["university_id",
                         "unsup_obs", "unsup_fss_u", "unsup_rank", "unsup_percentile",
                         "unsup_quartile",
                         "sup_obs", "sup_fss_u", "sup_rank", "sup_percentile",
                         "sup_quartile", "delta_rank"])
        for r in table.rows:
            writer.writerow([r.university_id,
                             r.unsup_obs, repr(r.unsup_fss_u), r.unsup_rank,
                             r.unsup_percentile, r.unsup_quartile,
                             r.sup_obs, repr(r.sup_fss_u), r.sup_rank,
                             r.sup_percentile, r.sup_quartile, r.delta_rank])


def write_quartile_matrix_csv(matrix: QuartileMatrix, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unsup_quartile", "sup_q1", "sup_q2", "sup_q3", "sup_q4"])
        for i, row in enumerate(matrix.counts, start=1):
            writer.writerow([f"Q{i}", *row])


def write_distribution_stats_csv(stats_by_group: dict[str, DistributionStats],
                                 path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "obs", "mean", "std_dev", "variance", "skewness",
                         "kurtosis", *(f"p{p}" for p in PERCENTILE_POINTS), "max"])
        for name in sorted(stats_by_group):
            s = stats_by_group[name]
            writer.writerow([name, s.obs, repr(s.mean), repr(s.std_dev),
                             repr(s.variance), repr(s.skewness), repr(s.kurtosis),
                             *(repr(p) for p in s.percentiles), repr(s.max)])
