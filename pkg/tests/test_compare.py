import json
import math

import numpy as np
import pytest

from fssbench.compare import (
    assign_quartile,
    build_rank_table,
    comparison_report,
    correlation_battery,
    distribution_stats,
    load_fixture_rows,
    load_reference_table,
    percent_deviation,
    percentile_of_rank,
    quartile_confusion,
    rank_jumps,
    rank_universities,
    sc_deviation_correlations,
    university_deviation_correlations,
    write_quartile_matrix_csv,
    write_rank_table_csv,
    write_report_json,
)
from fssbench.fss import MODE_SUPERVISED, MODE_UNSUPERVISED, ResearcherScore, UniversityScore


def uscore(uid, fss_u, rs_u=10, mode_level="overall"):
    return UniversityScore(university_id=uid, level=mode_level,
                           level_key=mode_level, rs_u=rs_u, fss_u=fss_u)


def rscore(sid, sc, fss, mode=MODE_SUPERVISED):
    return ResearcherScore(subject_id=sid, mode=mode, university_id="U1",
                           sc_id=sc, t=5.0, n_pubs=1, fss_r=fss, terms=())


# ---------------------------------------------------------------------------
# percentiles and quartiles

def test_percentile_of_rank_anchors():
    assert percentile_of_rank(1, 65) == 100
    assert percentile_of_rank(65, 65) == 0
    assert percentile_of_rank(5, 65) == 94
    assert percentile_of_rank(9, 65) == 88
    assert percentile_of_rank(33, 65) == 50
    assert percentile_of_rank(1, 1) == 100


def test_percentile_of_rank_rounds_half_up():
    # n=5: rank 2 -> 75.0 exactly; rank 4 -> 25.0 exactly
    assert percentile_of_rank(2, 5) == 75
    assert percentile_of_rank(4, 5) == 25
    # n=9: rank 5 -> 50.0; rank 3 -> 75.0
    assert percentile_of_rank(5, 9) == 50
    # a true .5 case: n=3, rank 2 -> 50.0; n=201, rank 100 -> 50.25
    assert percentile_of_rank(2, 3) == 50


def test_percentile_of_rank_range_errors():
    with pytest.raises(ValueError):
        percentile_of_rank(0, 10)
    with pytest.raises(ValueError):
        percentile_of_rank(11, 10)


def test_quartile_marginals_at_65():
    counts = [0, 0, 0, 0]
    for rank in range(1, 66):
        counts[assign_quartile(rank, 65) - 1] += 1
    assert counts == [17, 16, 16, 16]


def test_quartile_thresholds_consistent_with_percentiles():
    for n in (4, 5, 13, 64, 65, 66, 100):
        for rank in range(1, n + 1):
            q = assign_quartile(rank, n)
            p = 100 * (n - rank) / (n - 1)
            if p >= 75:
                assert q == 1
            elif p >= 50:
                assert q == 2
            elif p >= 25:
                assert q == 3
            else:
                assert q == 4


# ---------------------------------------------------------------------------
# distribution statistics

def test_distribution_stats_hand_values():
    stats = distribution_stats([1.0, 2.0, 3.0, 4.0])
    assert stats.obs == 4
    assert stats.mean == pytest.approx(2.5)
    assert stats.variance == pytest.approx(5 / 3)       # ddof=1
    assert stats.std_dev == pytest.approx(math.sqrt(5 / 3))
    assert stats.median == pytest.approx(2.5)
    assert stats.max == 4.0
    assert stats.skewness == pytest.approx(0.0)


def test_distribution_stats_skew_kurt_population_moments():
    values = [0.0, 0.0, 0.0, 10.0]
    arr = np.array(values)
    m2 = float(((arr - arr.mean()) ** 2).mean())
    m3 = float(((arr - arr.mean()) ** 3).mean())
    m4 = float(((arr - arr.mean()) ** 4).mean())
    stats = distribution_stats(values)
    assert stats.skewness == pytest.approx(m3 / m2 ** 1.5)
    assert stats.kurtosis == pytest.approx(m4 / m2 ** 2)


def test_distribution_stats_degenerate_cases():
    one = distribution_stats([2.0])
    assert math.isnan(one.std_dev) and math.isnan(one.variance)
    const = distribution_stats([3.0, 3.0, 3.0])
    assert math.isnan(const.skewness) and math.isnan(const.kurtosis)
    assert const.std_dev == 0.0
    with pytest.raises(ValueError):
        distribution_stats([])


def test_distribution_stats_percentiles_match_numpy():
    rng = np.random.default_rng(5)
    values = rng.lognormal(0.5, 1.0, size=200)
    stats = distribution_stats(values)
    expected = np.percentile(values, (1, 5, 10, 25, 50, 75, 90, 95, 99))
    assert stats.percentiles == pytest.approx(tuple(expected))


# ---------------------------------------------------------------------------
# rank table construction

def test_rank_universities_ranks_and_delta_sign():
    supervised = [uscore("A", 2.0, rs_u=10), uscore("B", 1.0, rs_u=20),
                  uscore("C", 3.0, rs_u=30)]
    unsupervised = [uscore("A", 1.0, rs_u=12), uscore("B", 3.0, rs_u=18),
                    uscore("C", 2.0, rs_u=33)]
    table = rank_universities(supervised, unsupervised)
    assert [r.university_id for r in table.rows] == ["B", "C", "A"]
    row_a = table.row("A")
    assert (row_a.sup_rank, row_a.unsup_rank) == (2, 3)
    assert row_a.delta_rank == -1                      # sup minus unsup
    assert row_a.sup_obs == 10 and row_a.unsup_obs == 12


def test_rank_universities_mismatched_sets_error_names_both_sides():
    with pytest.raises(ValueError, match=r"only supervised \['A'\].*only unsupervised \['B'\]"):
        rank_universities([uscore("A", 1.0)], [uscore("B", 1.0)])


def test_build_rank_table_requires_permutations():
    rows = [dict(university_id="A", sup_obs=1, sup_fss_u=1.0, sup_rank=1,
                 unsup_obs=1, unsup_fss_u=1.0, unsup_rank=1),
            dict(university_id="B", sup_obs=1, sup_fss_u=0.5, sup_rank=3,
                 unsup_obs=1, unsup_fss_u=0.5, unsup_rank=2)]
    with pytest.raises(ValueError, match="sup_rank"):
        build_rank_table(rows)


def test_rank_ties_break_by_university_id():
    table = rank_universities(
        [uscore("A", 1.0), uscore("B", 1.0), uscore("C", 0.5)],
        [uscore("A", 1.0), uscore("B", 2.0), uscore("C", 0.5)])
    assert table.row("A").sup_rank == 1
    assert table.row("B").sup_rank == 2


# ---------------------------------------------------------------------------
# fixture

def test_fixture_has_65_rows_and_all_columns():
    rows = load_fixture_rows()
    assert len(rows) == 65
    assert rows[0]["university"] == "Vita - Salute San Raffaele"


def test_reference_table_reproduces_published_percentiles():
    table = load_reference_table()
    for raw in load_fixture_rows():
        row = table.row(raw["university"])
        assert row.sup_percentile == int(raw["sup_perc"])
        assert row.unsup_percentile == int(raw["unsup_perc"])


def test_reference_table_reproduces_published_delta_rank():
    table = load_reference_table()
    for raw in load_fixture_rows():
        assert table.row(raw["university"]).delta_rank == int(raw["delta_rank"])


# ---------------------------------------------------------------------------
# confusion and jumps

def _small_table():
    # 8 universities, a mix of agreements and jumps
    sup_scores = {"A": 8.0, "B": 7.0, "C": 6.0, "D": 5.0,
                  "E": 4.0, "F": 3.0, "G": 2.0, "H": 1.0}
    unsup_scores = {"A": 8.0, "B": 1.0, "C": 6.0, "D": 5.0,
                    "E": 4.0, "F": 3.0, "G": 2.0, "H": 7.0}
    return rank_universities([uscore(u, s) for u, s in sup_scores.items()],
                             [uscore(u, s) for u, s in unsup_scores.items()])


def test_quartile_confusion_counts_sum_to_n():
    table = _small_table()
    matrix = quartile_confusion(table)
    assert matrix.total == 8
    assert matrix.diagonal_total + matrix.above_diagonal + matrix.below_diagonal == 8


def test_rank_jumps_threshold_and_order():
    table = _small_table()
    report = rank_jumps(table, threshold_quartiles=2, top_k=3)
    jumped = {j[0] for j in report.jumps}
    assert jumped == {"B", "H"}
    # B: unsup rank 8 (Q4) sup rank 2 (Q1); H: unsup 2 (Q1) sup 8 (Q4)
    assert report.jumps[0][0] == "H"          # ordered by unsup quartile
    assert report.max_abs_delta == 6
    assert report.max_abs_delta_top == 6      # B is in the supervised top 3


def test_rank_jumps_high_threshold_empty():
    report = rank_jumps(_small_table(), threshold_quartiles=4)
    assert report.jumps == ()


# ---------------------------------------------------------------------------
# correlations

def test_correlation_battery_perfect_agreement():
    scores = {"A": 3.0, "B": 2.0, "C": 1.0, "D": 0.5}
    table = rank_universities([uscore(u, s) for u, s in scores.items()],
                              [uscore(u, s) for u, s in scores.items()])
    battery = correlation_battery(table)
    assert battery["overall"].pearson_scores == pytest.approx(1.0)
    assert battery["overall"].spearman_ranks == pytest.approx(1.0)


def test_correlation_battery_skips_tiny_groups(caplog):
    table = _small_table()
    battery = correlation_battery(table, {"tiny": ["A", "B"],
                                          "ok": ["A", "B", "C", "D"]})
    assert "tiny" not in battery
    assert battery["ok"].n == 4
    assert any("tiny" in r.getMessage() for r in caplog.records)


def test_percent_deviation():
    assert percent_deviation(200.0, 150.0) == pytest.approx(-25.0)
    with pytest.raises(ValueError):
        percent_deviation(0.0, 5.0)


@pytest.mark.filterwarnings("ignore::scipy.stats.ConstantInputWarning")
def test_university_deviation_correlations_sign():
    # staff inflation moves with score deflation -> negative correlation
    sup = [uscore("A", 2.0, rs_u=100), uscore("B", 2.0, rs_u=100),
           uscore("C", 2.0, rs_u=100), uscore("D", 2.0, rs_u=100)]
    unsup = [uscore("A", 2.0, rs_u=100), uscore("B", 1.8, rs_u=110),
             uscore("C", 1.6, rs_u=120), uscore("D", 1.4, rs_u=130)]
    corr = university_deviation_correlations(rank_universities(sup, unsup))
    assert corr["obs_vs_fss_u"] < -0.9


def test_reference_table_deviation_correlations():
    corr = university_deviation_correlations(load_reference_table())
    assert corr["obs_vs_fss_u"] == pytest.approx(-0.526, abs=5e-4)
    assert corr["obs_vs_delta_rank"] == pytest.approx(-0.361, abs=5e-4)


def test_sc_deviation_correlations_needs_three_scs():
    sup = [rscore("P1", "SC1", 1.0), rscore("P2", "SC2", 1.0)]
    unsup = [rscore("C1", "SC1", 1.0, MODE_UNSUPERVISED),
             rscore("C2", "SC2", 1.0, MODE_UNSUPERVISED)]
    out = sc_deviation_correlations(sup, unsup)
    assert math.isnan(out["obs_vs_mean_fss"])


def test_sc_deviation_correlations_direction():
    rng = np.random.default_rng(11)
    sup, unsup = [], []
    for k, sc in enumerate(["SC1", "SC2", "SC3", "SC4", "SC5"]):
        n_sup = 10
        n_extra = k * 3          # more contamination in later SCs
        for i in range(n_sup):
            fss = float(rng.uniform(0.8, 1.2))
            sup.append(rscore(f"P{sc}{i}", sc, fss))
            unsup.append(rscore(f"C{sc}{i}", sc, fss, MODE_UNSUPERVISED))
        for i in range(n_extra):  # false positives: low scores
            unsup.append(rscore(f"X{sc}{i}", sc, float(rng.uniform(0.0, 0.2)),
                                MODE_UNSUPERVISED))
    out = sc_deviation_correlations(sup, unsup)
    assert out["obs_vs_mean_fss"] < 0
    assert out["obs_vs_median_fss"] < 0


# ---------------------------------------------------------------------------
# report assembly and writers

@pytest.mark.filterwarnings("ignore::scipy.stats.ConstantInputWarning")
def test_comparison_report_json_round_trip(tmp_path):
    table = _small_table()
    sup_res = [rscore("P1", "SC1", 1.0), rscore("P2", "SC1", 0.0)]
    unsup_res = [rscore("C1", "SC1", 1.0, MODE_UNSUPERVISED)]
    report = comparison_report(table, supervised_researchers=sup_res,
                               unsupervised_researchers=unsup_res)
    path = tmp_path / "report.json"
    write_report_json(report, path)
    back = json.loads(path.read_text())
    assert back["n_universities"] == 8
    assert back["quartile_matrix"][0][0] >= 0
    # NaN correlations become null, never the string "NaN"
    assert back["sc_deviation_correlations"]["obs_vs_mean_fss"] is None
    assert "NaN" not in path.read_text()


def test_rank_table_and_matrix_csv(tmp_path):
    table = _small_table()
    write_rank_table_csv(table, tmp_path / "rank.csv")
    text = (tmp_path / "rank.csv").read_text()
    header = text.splitlines()[0]
    assert header.startswith("university_id,unsup_obs")
    assert "delta_rank" in header
    write_quartile_matrix_csv(quartile_confusion(table), tmp_path / "matrix.csv")
    lines = (tmp_path / "matrix.csv").read_text().strip().splitlines()
    assert len(lines) == 5
