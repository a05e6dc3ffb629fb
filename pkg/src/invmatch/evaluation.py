"""Evaluation protocol: link rates, histograms, stability, ablation.

The protocol scores held-out positive pairs (real links hidden from
training) and sampled negative pairs (absent from the full matrix). A good
model clears the link threshold for most positives and few negatives.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from scipy import stats

from .collab import factorize
from .corpus import (
    DEFAULT_ROUND_VOCABULARY,
    CompanyRecord,
    InvestorRecord,
    LinkMatrix,
    SplitSpec,
    split_links,
)
from .embed import COMPANY_BLOCKS, EmbedConfig, build_all_vectors
from .score import ScoreBreakdown, ScoreConfig, Scorer

HISTOGRAM_BINS = 20
HISTOGRAM_WIDTH = 0.05


class EvalError(Exception):
    """Raised for protocol violations, including train/test leakage."""


@dataclass(frozen=True)
class EvalReport:
    positive_link_rate: float
    negative_link_rate: float
    histogram_positive: tuple[int, ...]
    histogram_negative: tuple[int, ...]
    n_positive: int
    n_negative: int

    @property
    def separation(self) -> float:
        return self.positive_link_rate - self.negative_link_rate


@dataclass(frozen=True)
class SampleStats:
    sample_index: int
    n_investors: int
    mean_companies_per_investor: float
    positive_link_rate: float
    negative_link_rate: float


@dataclass(frozen=True)
class StabilityReport:
    samples: tuple[SampleStats, ...]
    positive_rate_mean: float
    positive_rate_std: float | None
    negative_rate_mean: float
    negative_rate_std: float | None
    spearman_degree_vs_positive_rate: float | None


@dataclass(frozen=True)
class AblationRow:
    features: tuple[str, ...]
    positive_link_rate: float
    negative_link_rate: float


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[AblationRow, ...]


def link_rate_and_histogram(
    breakdowns: Sequence[ScoreBreakdown], threshold: float
) -> tuple[float, tuple[int, ...]]:
    """Fraction of pairs with FS above threshold, plus 20 bins of width 0.05.

    Final scores are blends of nonnegative maxima of cosines, so they live
    in [0, 1]; anything outside (beyond float noise) is a bug upstream.
    """
    if not breakdowns:
        raise EvalError("empty pair set")
    hist = [0] * HISTOGRAM_BINS
    hits = 0
    for b in breakdowns:
        if not (-1e-9 <= b.fs <= 1.0 + 1e-9):
            raise EvalError(f"final score {b.fs} outside [0, 1] for "
                            f"({b.investor_id}, {b.company_id})")
        hist[min(int(b.fs / HISTOGRAM_WIDTH), HISTOGRAM_BINS - 1)] += 1
        if b.fs > threshold:
            hits += 1
    return hits / len(breakdowns), tuple(hist)


def assert_no_leakage(train: LinkMatrix, test_positive: list[tuple[str, str]]) -> None:
    """Hard check: no held-out positive pair is present in the train matrix."""
    for inv_id, comp_id in test_positive:
        i = train.investor_index[inv_id]
        j = train.company_index[comp_id]
        if train.has_link(i, j):
            raise EvalError(f"leakage: test pair ({inv_id}, {comp_id}) is in train")


def _build_eval_scorer(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    train: LinkMatrix,
    score_config: ScoreConfig,
    embed_config: EmbedConfig,
    rank: int | None,
    vocab: tuple[str, ...],
    keep_blocks: tuple[str, ...] | None = None,
) -> Scorer:
    company_vectors, investor_vectors = build_all_vectors(
        companies, investors, embed_config, vocab
    )
    if keep_blocks is not None:
        drop = [name for name in COMPANY_BLOCKS if name not in keep_blocks]
        company_vectors = {
            cid: vec.zero_blocks(drop) for cid, vec in company_vectors.items()
        }
    factors = factorize(train, rank)
    descriptions = {rec.id: rec.description for rec in companies}
    return Scorer(
        train, company_vectors, investor_vectors, factors, score_config, descriptions
    )


def evaluate(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    matrix: LinkMatrix,
    split_spec: SplitSpec,
    score_config: ScoreConfig,
    embed_config: EmbedConfig,
    rank: int | None = None,
    jobs: int = 1,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
    keep_blocks: tuple[str, ...] | None = None,
) -> EvalReport:
    """Split, train on the train portion only, and score both test sets."""
    train, test_positive, test_negative = split_links(matrix, split_spec)
    if not test_positive or not test_negative:
        raise EvalError("split produced an empty test set")
    assert_no_leakage(train, test_positive)
    scorer = _build_eval_scorer(
        companies, investors, train, score_config, embed_config, rank, vocab,
        keep_blocks,
    )
    pos = scorer.score_pairs(test_positive, jobs=jobs)
    neg = scorer.score_pairs(test_negative, jobs=jobs)
    pos_rate, pos_hist = link_rate_and_histogram(pos, score_config.link_threshold)
    neg_rate, neg_hist = link_rate_and_histogram(neg, score_config.link_threshold)
    return EvalReport(
        positive_link_rate=pos_rate,
        negative_link_rate=neg_rate,
        histogram_positive=pos_hist,
        histogram_negative=neg_hist,
        n_positive=len(pos),
        n_negative=len(neg),
    )


def stability_run(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    matrix: LinkMatrix,
    n_samples: int,
    investors_per_sample: int,
    seed: int,
    split_spec: SplitSpec,
    score_config: ScoreConfig,
    embed_config: EmbedConfig,
    rank: int | None = None,
    jobs: int = 1,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> StabilityReport:
    """Full pipeline on independent investor subsamples.

    Each sample draws its own investors and its own split seed, so the
    samples differ in link density; the report pairs each sample's mean
    portfolio size with its rates to expose the density/performance trend.
    """
    if n_samples < 1:
        raise EvalError("n_samples must be >= 1")
    if investors_per_sample > matrix.n_investors:
        raise EvalError(
            f"sample of {investors_per_sample} investors exceeds population "
            f"of {matrix.n_investors}"
        )
    rng = random.Random(seed)
    by_id = {rec.id: rec for rec in investors}
    all_ids = sorted(matrix.investor_ids)

    samples = []
    for index in range(n_samples):
        ids = sorted(rng.sample(all_ids, investors_per_sample))
        sub_matrix = matrix.restrict_investors(ids)
        sub_investors = [by_id[iid] for iid in ids]
        sub_spec = SplitSpec(
            train_fraction=split_spec.train_fraction,
            rng_seed=rng.randrange(2**31),
            negatives_per_positive=split_spec.negatives_per_positive,
        )
        report = evaluate(
            companies, sub_investors, sub_matrix, sub_spec,
            score_config, embed_config, rank, jobs, vocab,
        )
        samples.append(
            SampleStats(
                sample_index=index,
                n_investors=investors_per_sample,
                mean_companies_per_investor=sub_matrix.n_links / investors_per_sample,
                positive_link_rate=report.positive_link_rate,
                negative_link_rate=report.negative_link_rate,
            )
        )

    pos_rates = [s.positive_link_rate for s in samples]
    neg_rates = [s.negative_link_rate for s in samples]
    degrees = [s.mean_companies_per_investor for s in samples]

    def std(values: list[float]) -> float | None:
        if len(values) < 2:
            return None
        mu = sum(values) / len(values)
        return math.sqrt(sum((v - mu) ** 2 for v in values) / len(values))

    spearman = None
    if n_samples >= 2:
        rho = stats.spearmanr(degrees, pos_rates).statistic
        spearman = None if math.isnan(rho) else float(rho)

    return StabilityReport(
        samples=tuple(samples),
        positive_rate_mean=sum(pos_rates) / len(pos_rates),
        positive_rate_std=std(pos_rates),
        negative_rate_mean=sum(neg_rates) / len(neg_rates),
        negative_rate_std=std(neg_rates),
        spearman_degree_vs_positive_rate=spearman,
    )


def feature_subsets(blocks: Sequence[str]) -> list[tuple[str, ...]]:
    """All nonempty subsets, smallest first, lexicographic within a size."""
    ordered = sorted(blocks)
    out: list[tuple[str, ...]] = []
    for size in range(1, len(ordered) + 1):
        out.extend(combinations(ordered, size))
    return out


def ablation_run(
    companies: list[CompanyRecord],
    investors: list[InvestorRecord],
    matrix: LinkMatrix,
    split_spec: SplitSpec,
    score_config: ScoreConfig,
    embed_config: EmbedConfig,
    feature_blocks: Sequence[str] = COMPANY_BLOCKS,
    rank: int | None = None,
    jobs: int = 1,
    vocab: tuple[str, ...] = DEFAULT_ROUND_VOCABULARY,
) -> AblationReport:
    """One evaluation per nonempty feature subset; dropped blocks are zeroed."""
    if not feature_blocks:
        raise EvalError("need at least one feature block")
    rows = []
    for subset in feature_subsets(feature_blocks):
        report = evaluate(
            companies, investors, matrix, split_spec, score_config, embed_config,
            rank, jobs, vocab, keep_blocks=subset,
        )
        rows.append(
            AblationRow(
                features=subset,
                positive_link_rate=report.positive_link_rate,
                negative_link_rate=report.negative_link_rate,
            )
        )
    return AblationReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Report serialization (stable text formats for the CLI)


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.6f}"


def write_eval_report(path: str | Path, report: EvalReport) -> None:
    lines = [
        f"n_positive\t{report.n_positive}",
        f"n_negative\t{report.n_negative}",
        f"positive_link_rate\t{report.positive_link_rate:.6f}",
        f"negative_link_rate\t{report.negative_link_rate:.6f}",
        f"separation\t{report.separation:.6f}",
        "histogram_positive\t" + ",".join(str(c) for c in report.histogram_positive),
        "histogram_negative\t" + ",".join(str(c) for c in report.histogram_negative),
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_stability_report(path: str | Path, report: StabilityReport) -> None:
    lines = [f"n_samples\t{len(report.samples)}"]
    for s in report.samples:
        lines.append(
            f"sample\t{s.sample_index}\t{s.n_investors}\t"
            f"{s.mean_companies_per_investor:.6f}\t"
            f"{s.positive_link_rate:.6f}\t{s.negative_link_rate:.6f}"
        )
    lines += [
        f"positive_rate_mean\t{report.positive_rate_mean:.6f}",
        f"positive_rate_std\t{_fmt(report.positive_rate_std)}",
        f"negative_rate_mean\t{report.negative_rate_mean:.6f}",
        f"negative_rate_std\t{_fmt(report.negative_rate_std)}",
        f"spearman_degree_vs_positive_rate\t{_fmt(report.spearman_degree_vs_positive_rate)}",
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_ablation_report(path: str | Path, report: AblationReport) -> None:
    lines = ["features\tpositive_link_rate\tnegative_link_rate"]
    for row in report.rows:
        lines.append(
            f"{'+'.join(row.features)}\t{row.positive_link_rate:.6f}"
            f"\t{row.negative_link_rate:.6f}"
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
