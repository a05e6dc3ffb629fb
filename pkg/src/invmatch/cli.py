"""Command-line pipeline: generate, validate, train, score, explain, evaluate.

Stages communicate through files (corpus JSONL/TSV, embedding TSV, factors
binary, breakdown TSV), so every stage can run in a separate invocation as
long as it sees the same config and seed. Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Sequence

from .collab import CollabError, load_factors, save_factors, factorize
from .config import ConfigError, load_config_file
from .corpus import (
    DEFAULT_ROUND_VOCABULARY,
    CorpusError,
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    load_corpus,
    read_pairs_tsv,
    save_corpus,
    split_links,
)
from .embed import (
    EmbedConfig,
    EmbedError,
    HashingTextProvider,
    write_embedding_file,
)
from .evaluation import (
    EvalError,
    ablation_run,
    evaluate,
    stability_run,
    write_ablation_report,
    write_eval_report,
    write_stability_report,
)
from .explain import ExplainError, explain_pair, write_params_tsv
from .score import ScoreConfig, ScoreError, build_scorer, write_breakdowns

_DATA_ERRORS = (
    CorpusError, ConfigError, EmbedError, CollabError, ScoreError,
    ExplainError, EvalError, OSError,
)


class UsageError(Exception):
    """Bad flags or arguments; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="flat key=value config file")
    common.add_argument("--seed", type=int, metavar="N",
                        help="random seed for this stage (overrides config)")

    scoring = argparse.ArgumentParser(add_help=False)
    scoring.add_argument("--w1", type=float, metavar="X",
                         help="latent-similarity weight inside CB (default 0.5)")
    scoring.add_argument("--w2", type=float, metavar="X",
                         help="feature-similarity weight inside CB (default 0.5)")
    scoring.add_argument("--w-cbs", type=float, metavar="X",
                         help="content score weight in the blend (default 0.5)")
    scoring.add_argument("--w-cb", type=float, metavar="X",
                         help="collaborative score weight in the blend (default 0.5)")
    scoring.add_argument("--cb-thresh", type=float, metavar="X",
                         help="gate: blend only when CB exceeds this (default 0.5)")
    scoring.add_argument("--link-threshold", type=float, metavar="X",
                         help="predict a link when FS exceeds this (default 0.75)")
    scoring.add_argument("--embeddings", metavar="PATH",
                         help="embedding TSV for text fields (default: built-in "
                              "hashing encoder)")
    scoring.add_argument("--rank", type=int, metavar="K",
                         help="latent factor count (default min(64, matrix dims))")

    parser = _Parser(prog="invmatch",
                     description="Explainable investor-company matching over "
                                 "portfolio and attribute data.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common],
                       help="generate a seeded synthetic corpus directory")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--investors", type=int, metavar="N")
    p.add_argument("--companies", type=int, metavar="N")
    p.add_argument("--clusters", type=int, metavar="N")
    p.add_argument("--p-in", type=float, metavar="X",
                   help="intra-cluster link probability")
    p.add_argument("--p-out", type=float, metavar="X",
                   help="cross-cluster link probability")
    p.add_argument("--taste-groups", type=int, metavar="N")
    p.add_argument("--taste-strength", type=float, metavar="X")
    p.add_argument("--variants", type=int, metavar="N")

    p = sub.add_parser("ingest", parents=[common],
                       help="load and validate a corpus directory")
    p.add_argument("--corpus", required=True, metavar="DIR")

    p = sub.add_parser("embed", parents=[common],
                       help="write the embedding TSV for all corpus texts")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--dim", type=int, metavar="D",
                   help="encoder dimension (default 64)")

    p = sub.add_parser("train", parents=[common],
                       help="factorize the train split and save latent factors")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--rank", type=int, metavar="K",
                   help="latent factor count (default min(64, matrix dims))")

    p = sub.add_parser("score", parents=[common, scoring],
                       help="score pairs and write the breakdown TSV")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--factors", metavar="PATH",
                   help="saved factors (default: factorize in process)")
    p.add_argument("--pairs", metavar="PATH",
                   help="pair TSV to score (default: held-out test pairs)")
    p.add_argument("--jobs", type=int, default=1, metavar="N")

    p = sub.add_parser("recommend", parents=[common, scoring],
                       help="rank counterparts for one investor or company")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--factors", metavar="PATH")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--for-investor", metavar="ID",
                       help="rank companies for this investor")
    group.add_argument("--for-company", metavar="ID",
                       help="rank investors for this company")
    p.add_argument("--top", type=int, default=25, metavar="N")
    p.add_argument("--out", metavar="PATH", help="write TSV here instead of stdout")

    p = sub.add_parser("explain", parents=[common, scoring],
                       help="explain the final score of one pair")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--factors", metavar="PATH")
    p.add_argument("--investor", required=True, metavar="ID")
    p.add_argument("--company", required=True, metavar="ID")
    p.add_argument("--out", metavar="PATH", help="write text here instead of stdout")
    p.add_argument("--params-out", metavar="PATH",
                   help="also write the template parameters as TSV")

    p = sub.add_parser("evaluate", parents=[common, scoring],
                       help="hold out links, score test pairs, report link rates")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--jobs", type=int, default=1, metavar="N")

    p = sub.add_parser("stability", parents=[common, scoring],
                       help="repeat evaluation over investor subsamples")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--samples", type=int, default=10, metavar="N")
    p.add_argument("--investors-per-sample", type=int, required=True, metavar="N")
    p.add_argument("--jobs", type=int, default=1, metavar="N")

    p = sub.add_parser("ablate", parents=[common, scoring],
                       help="evaluate every nonempty company feature subset")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--jobs", type=int, default=1, metavar="N")

    return parser


# ---------------------------------------------------------------------------
# Config assembly. Flags override file values; file values override defaults.


def _mapping(args: argparse.Namespace) -> dict[str, str]:
    return load_config_file(args.config) if args.config else {}


def _score_config(mapping: dict[str, str], args: argparse.Namespace) -> ScoreConfig:
    config = ScoreConfig.from_mapping(mapping)
    overrides = {
        name: getattr(args, flag)
        for name, flag in (
            ("w1", "w1"), ("w2", "w2"), ("w_cbs", "w_cbs"), ("w_cb", "w_cb"),
            ("cb_thresh", "cb_thresh"), ("link_threshold", "link_threshold"),
        )
        if getattr(args, flag) is not None
    }
    return dataclasses.replace(config, **overrides) if overrides else config


def _embed_config(mapping: dict[str, str], args: argparse.Namespace) -> EmbedConfig:
    config = EmbedConfig.from_mapping(mapping)
    embeddings = getattr(args, "embeddings", None)
    if embeddings:
        config = dataclasses.replace(config, embeddings_file=embeddings)
    return config


def _split_spec(mapping: dict[str, str], args: argparse.Namespace) -> SplitSpec:
    return SplitSpec.from_mapping(mapping, seed=args.seed)


def _train_matrix(args, mapping):
    companies, investors, matrix = load_corpus(args.corpus)
    train, _, _ = split_links(matrix, _split_spec(mapping, args))
    return companies, investors, matrix, train


def _scorer(args, mapping):
    companies, investors, matrix, train = _train_matrix(args, mapping)
    factors = load_factors(args.factors) if getattr(args, "factors", None) else None
    scorer = build_scorer(
        companies, investors, train,
        _score_config(mapping, args), _embed_config(mapping, args),
        rank=getattr(args, "rank", None), factors=factors,
    )
    return scorer, matrix


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_synth(args) -> int:
    mapping = _mapping(args)
    config = SyntheticConfig.from_mapping(mapping, seed=args.seed)
    overrides = {
        name: getattr(args, name)
        for name in ("investors", "companies", "clusters", "p_in", "p_out",
                     "taste_groups", "taste_strength", "variants")
        if getattr(args, name) is not None
    }
    if overrides:
        config = dataclasses.replace(config, **overrides)
    companies, investors, matrix = generate_synthetic(config)
    save_corpus(args.out, companies, investors, matrix)
    print(f"wrote {len(companies)} companies, {len(investors)} investors, "
          f"{matrix.n_links} links to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    companies, investors, matrix = load_corpus(args.corpus)
    for rec in companies:
        rec.validate_rounds(DEFAULT_ROUND_VOCABULARY)
    print(f"ok: {len(companies)} companies, {len(investors)} investors, "
          f"{matrix.n_links} links")
    return 0


def _cmd_embed(args) -> int:
    mapping = _mapping(args)
    config = _embed_config(mapping, args)
    dim = args.dim if args.dim is not None else config.stub_dimension
    companies, investors, _ = load_corpus(args.corpus)
    texts = set()
    for rec in companies:
        texts.add(rec.description)
        texts.update(rec.industry_focus)
        texts.add(rec.location)
    for rec in investors:
        texts.update(rec.industry_deal_counts)
        texts.add(rec.location)
    texts.discard("")
    provider = HashingTextProvider(dim=dim, seed=config.stub_seed)
    table = {text: provider.embed(text) for text in sorted(texts)}
    write_embedding_file(args.out, table, dim)
    print(f"wrote {len(table)} texts at dim={dim} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    mapping = _mapping(args)
    _, _, _, train = _train_matrix(args, mapping)
    factors = factorize(train, args.rank)
    save_factors(args.out, factors)
    print(f"wrote rank-{factors.rank} factors for "
          f"{factors.n_investors}x{factors.n_companies} matrix to {args.out}")
    return 0


def _cmd_score(args) -> int:
    mapping = _mapping(args)
    companies, investors, matrix, train = _train_matrix(args, mapping)
    factors = load_factors(args.factors) if args.factors else None
    scorer = build_scorer(
        companies, investors, train,
        _score_config(mapping, args), _embed_config(mapping, args),
        rank=args.rank, factors=factors,
    )
    if args.pairs:
        pairs = read_pairs_tsv(args.pairs)
    else:
        _, pos, neg = split_links(matrix, _split_spec(mapping, args))
        pairs = pos + neg
    rows = scorer.score_pairs(pairs, jobs=args.jobs)
    write_breakdowns(args.out, rows)
    print(f"scored {len(rows)} pairs to {args.out}")
    return 0


def _cmd_recommend(args) -> int:
    scorer, _ = _scorer(args, _mapping(args))
    if args.for_investor:
        ranked = scorer.recommend(args.for_investor, "companies_for_investor",
                                  args.top)
    else:
        ranked = scorer.recommend(args.for_company, "investors_for_company",
                                  args.top)
    lines = [f"{entity_id}\t{fs:.6f}" for entity_id, fs in ranked]
    body = "".join(line + "\n" for line in lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


def _cmd_explain(args) -> int:
    scorer, _ = _scorer(args, _mapping(args))
    explanation = explain_pair(scorer, args.investor, args.company)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(explanation.text + "\n")
    else:
        print(explanation.text)
    if args.params_out:
        write_params_tsv(args.params_out, [explanation])
    return 0


def _cmd_evaluate(args) -> int:
    mapping = _mapping(args)
    companies, investors, matrix = load_corpus(args.corpus)
    report = evaluate(
        companies, investors, matrix, _split_spec(mapping, args),
        _score_config(mapping, args), _embed_config(mapping, args),
        rank=args.rank, jobs=args.jobs,
    )
    write_eval_report(args.out, report)
    print(f"positive_link_rate={report.positive_link_rate:.3f} "
          f"negative_link_rate={report.negative_link_rate:.3f} "
          f"separation={report.separation:.3f}")
    return 0


def _cmd_stability(args) -> int:
    mapping = _mapping(args)
    companies, investors, matrix = load_corpus(args.corpus)
    report = stability_run(
        companies, investors, matrix,
        n_samples=args.samples,
        investors_per_sample=args.investors_per_sample,
        seed=args.seed if args.seed is not None else 0,
        split_spec=_split_spec(mapping, args),
        score_config=_score_config(mapping, args),
        embed_config=_embed_config(mapping, args),
        rank=args.rank, jobs=args.jobs,
    )
    write_stability_report(args.out, report)
    trend = report.spearman_degree_vs_positive_rate
    print(f"positive_rate_mean={report.positive_rate_mean:.3f} "
          f"spearman={'n/a' if trend is None else f'{trend:.3f}'}")
    return 0


def _cmd_ablate(args) -> int:
    mapping = _mapping(args)
    companies, investors, matrix = load_corpus(args.corpus)
    report = ablation_run(
        companies, investors, matrix, _split_spec(mapping, args),
        _score_config(mapping, args), _embed_config(mapping, args),
        rank=args.rank, jobs=args.jobs,
    )
    write_ablation_report(args.out, report)
    print(f"wrote {len(report.rows)} ablation rows to {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "embed": _cmd_embed,
    "train": _cmd_train,
    "score": _cmd_score,
    "recommend": _cmd_recommend,
    "explain": _cmd_explain,
    "evaluate": _cmd_evaluate,
    "stability": _cmd_stability,
    "ablate": _cmd_ablate,
}


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
