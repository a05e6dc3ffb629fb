"""Tests for the evaluation protocol: rates, histograms, stability, ablation."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invmatch.corpus import (
    LinkMatrix,
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    split_links,
)
from invmatch.embed import COMPANY_BLOCKS, EmbedConfig
from invmatch.evaluation import (
    HISTOGRAM_BINS,
    EvalError,
    ablation_run,
    assert_no_leakage,
    evaluate,
    feature_subsets,
    link_rate_and_histogram,
    stability_run,
    write_ablation_report,
    write_eval_report,
    write_stability_report,
)
from invmatch.score import ScoreBreakdown, ScoreConfig


def fake_breakdown(fs: float) -> ScoreBreakdown:
    return ScoreBreakdown(
        investor_id="inv_x", company_id="comp_y", cbs=fs, cc="", ccb="",
        cb=0.0, ci="", sim1=0.0, sim2=0.0, fs=fs, gate_open=False,
        link_predicted=fs > 0.75,
    )


SMALL = SyntheticConfig(
    clusters=2, investors=40, companies=80, p_in=0.35, p_out=0.03,
    taste_groups=2, taste_strength=0.6, variants=4, seed=9,
)


@pytest.fixture(scope="module")
def small_corpus():
    return generate_synthetic(SMALL)


class TestLinkRateAndHistogram:
    def test_hand_counted_rate(self):
        scores = [0.1, 0.5, 0.76, 0.9, 1.0]
        rate, hist = link_rate_and_histogram(
            [fake_breakdown(v) for v in scores], 0.75
        )
        assert rate == 3 / 5
        assert sum(hist) == 5

    def test_threshold_is_strict(self):
        rate, _ = link_rate_and_histogram([fake_breakdown(0.75)], 0.75)
        assert rate == 0.0

    def test_bin_placement(self):
        _, hist = link_rate_and_histogram(
            [fake_breakdown(v) for v in (0.0, 0.049, 0.05, 0.999, 1.0)], 0.75
        )
        assert hist[0] == 2      # 0.0 and 0.049
        assert hist[1] == 1      # 0.05 lands in the second bin
        assert hist[19] == 2     # top scores clamp into the last bin
        assert len(hist) == HISTOGRAM_BINS

    def test_empty_set_rejected(self):
        with pytest.raises(EvalError, match="empty"):
            link_rate_and_histogram([], 0.75)

    def test_out_of_range_score_rejected(self):
        with pytest.raises(EvalError, match="outside"):
            link_rate_and_histogram([fake_breakdown(1.2)], 0.75)
        with pytest.raises(EvalError, match="outside"):
            link_rate_and_histogram([fake_breakdown(-0.1)], 0.75)

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1,
                    max_size=60))
    def test_mass_conservation(self, scores):
        rate, hist = link_rate_and_histogram(
            [fake_breakdown(v) for v in scores], 0.75
        )
        assert sum(hist) == len(scores)
        assert 0.0 <= rate <= 1.0

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1,
                    max_size=40),
           st.floats(min_value=0.0, max_value=1.0),
           st.floats(min_value=0.0, max_value=1.0))
    def test_rate_monotone_in_threshold(self, scores, t_lo, t_hi):
        if t_lo > t_hi:
            t_lo, t_hi = t_hi, t_lo
        breakdowns = [fake_breakdown(v) for v in scores]
        rate_lo, _ = link_rate_and_histogram(breakdowns, t_lo)
        rate_hi, _ = link_rate_and_histogram(breakdowns, t_hi)
        assert rate_hi <= rate_lo


class TestNoLeakage:
    def test_clean_split_passes(self, small_corpus):
        _, _, matrix = small_corpus
        train, pos, _ = split_links(matrix, SplitSpec(0.7, 0))
        assert_no_leakage(train, pos)

    def test_leaked_pair_raises(self, small_corpus):
        _, _, matrix = small_corpus
        train, pos, _ = split_links(matrix, SplitSpec(0.7, 0))
        i, j = sorted(train.links)[0]
        leaked = pos + [(train.investor_ids[i], train.company_ids[j])]
        with pytest.raises(EvalError, match="leakage"):
            assert_no_leakage(train, leaked)


class TestEvaluate:
    def test_report_shape(self, small_corpus):
        companies, investors, matrix = small_corpus
        rep = evaluate(companies, investors, matrix, SplitSpec(0.7, 1),
                       ScoreConfig(), EmbedConfig(stub_dimension=32), rank=8)
        assert 0.0 <= rep.positive_link_rate <= 1.0
        assert 0.0 <= rep.negative_link_rate <= 1.0
        assert sum(rep.histogram_positive) == rep.n_positive
        assert sum(rep.histogram_negative) == rep.n_negative
        assert rep.separation == rep.positive_link_rate - rep.negative_link_rate

    def test_deterministic(self, small_corpus):
        companies, investors, matrix = small_corpus
        args = (companies, investors, matrix, SplitSpec(0.7, 1),
                ScoreConfig(), EmbedConfig(stub_dimension=32))
        assert evaluate(*args, rank=8) == evaluate(*args, rank=8)

    def test_planted_structure_separates(self, small_corpus):
        companies, investors, matrix = small_corpus
        rep = evaluate(companies, investors, matrix, SplitSpec(0.7, 1),
                       ScoreConfig(), EmbedConfig(stub_dimension=32), rank=8)
        assert rep.separation > 0.0

    def test_empty_test_set_rejected(self):
        matrix = LinkMatrix(("inv_a",), ("comp_a", "comp_b"), frozenset({(0, 0)}))
        companies, investors, _ = generate_synthetic(
            SyntheticConfig(investors=1, companies=2, p_in=0.9, p_out=0.5, seed=0)
        )
        with pytest.raises(EvalError, match="empty test set"):
            evaluate(companies, investors, matrix, SplitSpec(0.99, 0),
                     ScoreConfig(), EmbedConfig(stub_dimension=16))

    def test_keep_all_blocks_matches_plain(self, small_corpus):
        companies, investors, matrix = small_corpus
        args = (companies, investors, matrix, SplitSpec(0.7, 1),
                ScoreConfig(), EmbedConfig(stub_dimension=32))
        plain = evaluate(*args, rank=8)
        kept = evaluate(*args, rank=8, keep_blocks=COMPANY_BLOCKS)
        assert plain == kept

    def test_dropping_blocks_changes_rates(self, small_corpus):
        companies, investors, matrix = small_corpus
        args = (companies, investors, matrix, SplitSpec(0.7, 1),
                ScoreConfig(), EmbedConfig(stub_dimension=32))
        plain = evaluate(*args, rank=8)
        only_location = evaluate(*args, rank=8, keep_blocks=("location",))
        assert plain != only_location


class TestFeatureSubsets:
    def test_four_blocks_give_fifteen_subsets(self):
        subsets = feature_subsets(COMPANY_BLOCKS)
        assert len(subsets) == 15
        assert subsets[-1] == tuple(sorted(COMPANY_BLOCKS))

    def test_ordering_size_then_lexicographic(self):
        subsets = feature_subsets(("b", "a", "c"))
        assert subsets == [
            ("a",), ("b",), ("c",),
            ("a", "b"), ("a", "c"), ("b", "c"),
            ("a", "b", "c"),
        ]

    @given(st.integers(min_value=1, max_value=6))
    def test_count_is_two_to_n_minus_one(self, n):
        blocks = [f"blk{i}" for i in range(n)]
        assert len(feature_subsets(blocks)) == 2 ** n - 1


class TestAblation:
    def test_full_protocol(self, small_corpus, tmp_path):
        companies, investors, matrix = small_corpus
        spec = SplitSpec(0.7, 1)
        embed = EmbedConfig(stub_dimension=32)
        report = ablation_run(companies, investors, matrix, spec,
                              ScoreConfig(), embed, rank=8)
        assert len(report.rows) == 15
        # Feature identity, not just count: one row per nonempty subset.
        assert [r.features for r in report.rows] == feature_subsets(COMPANY_BLOCKS)

        plain = evaluate(companies, investors, matrix, spec,
                         ScoreConfig(), embed, rank=8)
        full_row = report.rows[-1]
        assert full_row.positive_link_rate == pytest.approx(
            plain.positive_link_rate, abs=1e-12)
        assert full_row.negative_link_rate == pytest.approx(
            plain.negative_link_rate, abs=1e-12)

        out = tmp_path / "ablation.tsv"
        write_ablation_report(out, report)
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "features\tpositive_link_rate\tnegative_link_rate"
        assert len(lines) == 16
        assert lines[-1].startswith("+".join(sorted(COMPANY_BLOCKS)) + "\t")

    def test_no_blocks_rejected(self, small_corpus):
        companies, investors, matrix = small_corpus
        with pytest.raises(EvalError, match="feature block"):
            ablation_run(companies, investors, matrix, SplitSpec(0.7, 1),
                         ScoreConfig(), EmbedConfig(stub_dimension=16),
                         feature_blocks=())


class TestStability:
    def test_sample_accounting(self, small_corpus):
        companies, investors, matrix = small_corpus
        report = stability_run(companies, investors, matrix,
                               n_samples=3, investors_per_sample=20, seed=5,
                               split_spec=SplitSpec(0.7, 0),
                               score_config=ScoreConfig(),
                               embed_config=EmbedConfig(stub_dimension=32),
                               rank=8)
        assert len(report.samples) == 3
        assert [s.sample_index for s in report.samples] == [0, 1, 2]
        for s in report.samples:
            assert s.n_investors == 20
            assert s.mean_companies_per_investor > 0
        mean = sum(s.positive_link_rate for s in report.samples) / 3
        assert report.positive_rate_mean == pytest.approx(mean)

    def test_population_std(self, small_corpus):
        companies, investors, matrix = small_corpus
        report = stability_run(companies, investors, matrix,
                               n_samples=3, investors_per_sample=20, seed=5,
                               split_spec=SplitSpec(0.7, 0),
                               score_config=ScoreConfig(),
                               embed_config=EmbedConfig(stub_dimension=32),
                               rank=8)
        rates = [s.positive_link_rate for s in report.samples]
        mu = sum(rates) / len(rates)
        expected = math.sqrt(sum((r - mu) ** 2 for r in rates) / len(rates))
        assert report.positive_rate_std == pytest.approx(expected)

    def test_single_sample_has_no_std_or_trend(self, small_corpus):
        companies, investors, matrix = small_corpus
        report = stability_run(companies, investors, matrix,
                               n_samples=1, investors_per_sample=20, seed=5,
                               split_spec=SplitSpec(0.7, 0),
                               score_config=ScoreConfig(),
                               embed_config=EmbedConfig(stub_dimension=32),
                               rank=8)
        assert report.positive_rate_std is None
        assert report.negative_rate_std is None
        assert report.spearman_degree_vs_positive_rate is None

    def test_deterministic(self, small_corpus):
        companies, investors, matrix = small_corpus
        kwargs = dict(n_samples=2, investors_per_sample=20, seed=5,
                      split_spec=SplitSpec(0.7, 0),
                      score_config=ScoreConfig(),
                      embed_config=EmbedConfig(stub_dimension=32),
                      rank=8)
        a = stability_run(companies, investors, matrix, **kwargs)
        b = stability_run(companies, investors, matrix, **kwargs)
        assert a == b

    def test_oversized_sample_rejected(self, small_corpus):
        companies, investors, matrix = small_corpus
        with pytest.raises(EvalError, match="exceeds population"):
            stability_run(companies, investors, matrix,
                          n_samples=2, investors_per_sample=999, seed=5,
                          split_spec=SplitSpec(0.7, 0),
                          score_config=ScoreConfig(),
                          embed_config=EmbedConfig(stub_dimension=16))

    def test_zero_samples_rejected(self, small_corpus):
        companies, investors, matrix = small_corpus
        with pytest.raises(EvalError, match="n_samples"):
            stability_run(companies, investors, matrix,
                          n_samples=0, investors_per_sample=10, seed=5,
                          split_spec=SplitSpec(0.7, 0),
                          score_config=ScoreConfig(),
                          embed_config=EmbedConfig(stub_dimension=16))


class TestReportWriters:
    def test_eval_report_round_numbers(self, small_corpus, tmp_path):
        companies, investors, matrix = small_corpus
        rep = evaluate(companies, investors, matrix, SplitSpec(0.7, 1),
                       ScoreConfig(), EmbedConfig(stub_dimension=32), rank=8)
        out = tmp_path / "eval.tsv"
        write_eval_report(out, rep)
        fields = dict(
            line.split("\t", 1) for line in
            out.read_text(encoding="utf-8").splitlines()
        )
        assert int(fields["n_positive"]) == rep.n_positive
        assert float(fields["positive_link_rate"]) == pytest.approx(
            rep.positive_link_rate, abs=1e-6)
        hist = [int(v) for v in fields["histogram_positive"].split(",")]
        assert tuple(hist) == rep.histogram_positive

    def test_stability_report_file(self, small_corpus, tmp_path):
        companies, investors, matrix = small_corpus
        report = stability_run(companies, investors, matrix,
                               n_samples=1, investors_per_sample=20, seed=5,
                               split_spec=SplitSpec(0.7, 0),
                               score_config=ScoreConfig(),
                               embed_config=EmbedConfig(stub_dimension=32),
                               rank=8)
        out = tmp_path / "stability.tsv"
        write_stability_report(out, report)
        text = out.read_text(encoding="utf-8")
        assert text.startswith("n_samples\t1\n")
        assert "positive_rate_std\tn/a" in text
        assert "spearman_degree_vs_positive_rate\tn/a" in text
        assert len([l for l in text.splitlines() if l.startswith("sample\t")]) == 1
