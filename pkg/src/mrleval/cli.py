"""Command-line entry point.

Exit codes: 0 success, 1 invalid arguments or input data, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import corpus, metaeval, metrics, qc
from .textnorm import PROFILES, get_profile

logger = logging.getLogger("mrleval")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for I/O failures here
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _ratios(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratios {text!r}") from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="mrleval",
        description="Evaluate extractive QA predictions (EM, F1, TLNLS) and run dataset QC.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def norm_flags(p):
        p.add_argument("--norm-profile", choices=sorted(PROFILES), default="hebrew-default")
        p.add_argument("--f1-mode", choices=metrics.F1_MODES, default="paper")

    p = sub.add_parser("evaluate", help="score predictions against a dataset")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--predictions", required=True, type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--jobs", type=_positive_int, default=None)
    norm_flags(p)

    me = sub.add_parser("meta-eval", help="positive/negative metric meta-evaluation")
    me_sub = me.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = me_sub.add_parser("positive")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--out", type=Path)
    norm_flags(p)
    p = me_sub.add_parser("negative")
    p.add_argument("--pairs", required=True, type=Path)
    p.add_argument("--out", type=Path)
    norm_flags(p)
    p = me_sub.add_parser("collect")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--predictions", required=True, type=Path)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--norm-profile", choices=sorted(PROFILES), default="hebrew-default")
    p = me_sub.add_parser("gaps")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--top", type=_positive_int, default=20)
    p.add_argument("--out", type=Path)
    p.add_argument("--norm-profile", choices=sorted(PROFILES), default="hebrew-default")

    q = sub.add_parser("qc", help="dataset diagnostics")
    q_sub = q.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = q_sub.add_parser("overlap")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--target", choices=("context", "answer"), default="context")
    p.add_argument("--bins", type=_positive_int, default=10)
    p.add_argument("--out", type=Path)
    p.add_argument("--csv", type=Path)
    p.add_argument("--norm-profile", choices=sorted(PROFILES), default="hebrew-default")
    p = q_sub.add_parser("positions")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--bins", type=_positive_int, default=10)
    p.add_argument("--out", type=Path)
    p.add_argument("--csv", type=Path)
    p = q_sub.add_parser("quality")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("split", help="article-grouped train/dev/test split")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--ratios", type=_ratios, default=qc.DEFAULT_RATIOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("filter-pool", help="apply paragraph-pool constraints")
    p.add_argument("--source", choices=sorted(qc.POOL_FILTERS), required=True)
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--rejected", type=Path)
    return parser


def _check_inputs(args: argparse.Namespace) -> None:
    for name in ("dataset", "predictions", "pairs", "input"):
        path = getattr(args, name, None)
        if path is not None and not path.is_file():
            raise FileNotFoundError(f"{name} file not found: {path}")


def _emit(report, out: Path | None) -> None:
    if out is not None:
        corpus.write_report(report, out)
        print(f"report written to {out}")


def _cmd_evaluate(args) -> None:
    dataset = corpus.load_dataset(args.dataset)
    predictions = corpus.load_predictions(args.predictions)
    report = metrics.evaluate(
        dataset, predictions, get_profile(args.norm_profile), args.f1_mode, args.jobs
    )
    print(report.summary())
    _emit(report, args.out)


def _cmd_meta_eval(args) -> None:
    profile = get_profile(args.norm_profile)
    if args.action == "positive":
        dataset = corpus.load_dataset(args.dataset)
        result = metaeval.meta_eval_report(dataset=dataset, profile=profile, f1_mode=args.f1_mode)
        for m, v in result.positive.items():
            print(f"positive {m}: {v:.3f}")
        print(f"pairs: {result.n_positive_pairs}")
        _emit(
            corpus.QCReport(
                "meta-eval-positive", result.n_positive_pairs, {"means": dict(result.positive)}
            ),
            args.out,
        )
    elif args.action == "negative":
        pairs = metaeval.load_negative_pairs(args.pairs)
        result = metaeval.meta_eval_report(pairs=pairs, profile=profile, f1_mode=args.f1_mode)
        for m, v in result.negative.items():
            print(f"negative {m}: {v:.3f}")
        print(f"pairs: {result.n_negative_pairs}")
        _emit(
            corpus.QCReport(
                "meta-eval-negative", result.n_negative_pairs, {"means": dict(result.negative)}
            ),
            args.out,
        )
    elif args.action == "collect":
        dataset = corpus.load_dataset(args.dataset)
        predictions = corpus.load_predictions(args.predictions)
        pairs = metaeval.collect_negative_candidates(dataset, predictions, args.threshold, profile)
        metaeval.write_negative_pairs(pairs, args.out)
        print(f"{len(pairs)} candidate(s) written to {args.out}; set verified=true after review")
    else:
        dataset = corpus.load_dataset(args.dataset)
        ranking = metaeval.score_gap_ranking(dataset, profile)[: args.top]
        if not ranking:
            raise metaeval.MetaEvalError("no sample has two or more gold spans")
        for e in ranking:
            print(f"{e.id}\t{e.span_a}\t{e.span_b}\tTLNLS={e.tlnls:.3f}\tF1={e.f1:.3f}")
        _emit(
            corpus.QCReport(
                "meta-eval-gaps", len(ranking), {"pairs": [metaeval.gap_entry_dict(e) for e in ranking]}
            ),
            args.out,
        )


def _cmd_qc(args) -> None:
    dataset = corpus.load_dataset(args.dataset)
    if args.action == "overlap":
        stats = qc.overlap_stats(dataset, args.target, get_profile(args.norm_profile), args.bins)
        print(f"question/{args.target} overlap: mean={stats.mean:.4f} n={len(stats.values)}")
        hist = stats.histogram
        report = corpus.QCReport(
            f"overlap-{args.target}",
            len(stats.values),
            {"mean": stats.mean, "skipped": stats.skipped, "histogram": hist.to_dict()},
        )
    elif args.action == "positions":
        hist = qc.position_histogram(dataset, args.bins)
        print("answer position masses: " + " ".join(f"{m:.3f}" for m in hist.masses))
        report = corpus.QCReport("positions", sum(hist.counts), {"histogram": hist.to_dict()})
    else:
        breakdown = qc.quality_breakdown(dataset)
        for label, n in breakdown["counts"].items():
            print(f"{label}: {n}")
        print(f"unlabeled: {breakdown['unlabeled']}")
        _emit(corpus.QCReport("quality", len(dataset), breakdown), args.out)
        return
    _emit(report, args.out)
    if args.csv is not None:
        args.csv.write_text(hist.to_csv(), encoding="utf-8")


def _cmd_split(args) -> None:
    dataset = corpus.load_dataset(args.dataset)
    split = qc.split_dataset(dataset, args.ratios, args.seed)
    for name in qc.SPLITS:
        ids = split.ids(name)
        path = Path(f"{args.out_prefix}-{name}.json")
        if ids:
            corpus.dump_dataset(dataset.subset(ids), path)
        print(f"{name}: {len(ids)} questions ({split.ratios[name]:.2%}) -> {path}")
    corpus.write_report(
        corpus.QCReport("split", len(dataset), split.to_dict()),
        Path(f"{args.out_prefix}-split.json"),
    )


def _cmd_filter_pool(args) -> None:
    pool = corpus.load_pool(args.input)
    result = qc.POOL_FILTERS[args.source](pool)
    corpus.write_pool(result.accepted, args.out)
    if args.rejected is not None:
        corpus.write_pool([p for p, _ in result.rejected], args.rejected)
    summary = result.summary()
    print(f"accepted {summary['accepted']}, rejected {summary['rejected']} {summary['reasons']}")


COMMANDS = {
    "evaluate": _cmd_evaluate,
    "meta-eval": _cmd_meta_eval,
    "qc": _cmd_qc,
    "split": _cmd_split,
    "filter-pool": _cmd_filter_pool,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _check_inputs(args)
        COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())
