"""Span scoring: Levenshtein similarity, token F1, exact match and TLNLS.

TLNLS (token-level normalized Levenshtein similarity) credits each gold
token with its best character-level similarity against any predicted
token, so affixed variants of a word (``בבית`` vs ``בית``) keep most of
their score where token F1 drops to zero.
"""

from __future__ import annotations

import logging
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from .textnorm import (
    HEBREW_DEFAULT,
    NormalizationProfile,
    TokenSpan,
    digit_fraction,
    normalize,
    tokenize,
)

if TYPE_CHECKING:
    from .corpus import Dataset, MetricReport, QASample

logger = logging.getLogger(__name__)

F1_MODES = ("paper", "squad-compat")
DIGIT_THRESHOLD = 0.5

# below this many samples the process pool costs more than it saves
_PARALLEL_MIN_SAMPLES = 2000


class CoverageError(ValueError):
    """Predictions do not cover every sample of the dataset."""

    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        shown = ", ".join(self.missing[:20])
        more = f" (+{len(self.missing) - 20} more)" if len(self.missing) > 20 else ""
        super().__init__(f"missing predictions for {len(self.missing)} sample(s): {shown}{more}")


@dataclass(frozen=True)
class PairScore:
    em: int
    f1: float
    tlnls: float
    span_ls: float
    used_digit_fallback: bool = False


@dataclass(frozen=True)
class SampleScore:
    id: str
    best: PairScore
    n_references: int


def levenshtein(s1: str, s2: str) -> int:
    """Edit distance (insert, delete, substitute) over code points.

    Two-row dynamic program, O(len(s1) * len(s2)) time and
    O(min(len(s1), len(s2))) space.
    """
    if s1 == s2:
        return 0
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    if not s2:
        return len(s1)
    previous = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, 1):
        current = [i]
        for j, c2 in enumerate(s2, 1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (c1 != c2),
                )
            )
        previous = current
    return previous[-1]


def norm_lev_similarity(s1: str, s2: str) -> float:
    """``1 - lev(s1, s2) / max(len(s1), len(s2))``; two empty strings score 1."""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s1, s2) / longest


def _as_tokens(span: TokenSpan | Sequence[str]) -> tuple[str, ...]:
    if isinstance(span, TokenSpan):
        return span.tokens
    return tuple(span)


def token_f1(
    gold: TokenSpan | Sequence[str],
    pred: TokenSpan | Sequence[str],
    mode: str = "paper",
) -> float:
    """Token overlap F1 between a gold and a predicted span.

    ``paper`` mode counts the gold token occurrences that have an equal
    predicted token, with precision over ``|G|`` and recall over ``|P|``.
    ``squad-compat`` is the usual multiset bag-of-tokens F1. The two agree
    whenever neither span repeats a token.
    """
    g, p = _as_tokens(gold), _as_tokens(pred)
    if not g or not p:
        return float(not g and not p)
    if mode == "paper":
        predicted = set(p)
        # repeated gold tokens could otherwise push recall above 1
        common = min(sum(t in predicted for t in g), len(p))
        if common == 0:
            return 0.0
        precision = common / len(g)
        recall = common / len(p)
    elif mode == "squad-compat":
        common = sum((Counter(g) & Counter(p)).values())
        if common == 0:
            return 0.0
        precision = common / len(p)
        recall = common / len(g)
    else:
        raise ValueError(f"unknown f1 mode {mode!r}; expected one of {F1_MODES}")
    return 2 * precision * recall / (precision + recall)


def exact_match(gold: str, pred: str, profile: NormalizationProfile = HEBREW_DEFAULT) -> int:
    return int(normalize(gold, profile) == normalize(pred, profile))


def tlnls(gold: TokenSpan | Sequence[str], pred: TokenSpan | Sequence[str]) -> float:
    """Token-level normalized Levenshtein similarity of ``pred`` against ``gold``.

    Sum over gold tokens of the best similarity to any predicted token,
    divided by the larger token count. Not symmetric in its arguments.
    """
    g, p = _as_tokens(gold), _as_tokens(pred)
    if not g and not p:
        return 1.0
    if not g or not p:
        return 0.0
    total = math.fsum(max(norm_lev_similarity(gt, pt) for pt in p) for gt in g)
    return total / max(len(g), len(p))


def uses_digit_fallback(gold: str, pred: str) -> bool:
    return (
        digit_fraction(gold.strip()) > DIGIT_THRESHOLD
        or digit_fraction(pred.strip()) > DIGIT_THRESHOLD
    )


def score_pair(
    gold: str,
    pred: str,
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
) -> PairScore:
    g = tokenize(gold, profile)
    p = tokenize(pred, profile)
    f1 = token_f1(g, p, f1_mode)
    fallback = uses_digit_fallback(gold, pred)
    return PairScore(
        em=exact_match(gold, pred, profile),
        f1=f1,
        tlnls=f1 if fallback else tlnls(g, p),
        span_ls=norm_lev_similarity(normalize(gold, profile), normalize(pred, profile)),
        used_digit_fallback=fallback,
    )


def score_sample(
    sample: QASample,
    prediction: str,
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
) -> SampleScore:
    if sample.is_impossible:
        hit = int(normalize(prediction, profile) == "")
        best = PairScore(em=hit, f1=float(hit), tlnls=float(hit), span_ls=float(hit))
        return SampleScore(id=sample.id, best=best, n_references=0)

    pairs = [score_pair(a.text, prediction, profile, f1_mode) for a in sample.answers]
    best = PairScore(
        em=max(s.em for s in pairs),
        f1=max(s.f1 for s in pairs),
        tlnls=max(s.tlnls for s in pairs),
        span_ls=max(s.span_ls for s in pairs),
        used_digit_fallback=any(s.used_digit_fallback for s in pairs),
    )
    return SampleScore(id=sample.id, best=best, n_references=len(pairs))


def _score_chunk(args) -> list[SampleScore]:
    samples, preds, profile, f1_mode = args
    return [score_sample(s, p, profile, f1_mode) for s, p in zip(samples, preds)]


def default_jobs() -> int:
    env = os.environ.get("MRC_EVAL_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def score_all(
    samples: Sequence[QASample],
    predictions: Sequence[str],
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
    jobs: int | None = None,
) -> list[SampleScore]:
    """Score samples in input order, optionally across worker processes."""
    jobs = default_jobs() if jobs is None else max(1, jobs)
    if jobs == 1 or len(samples) < _PARALLEL_MIN_SAMPLES:
        return _score_chunk((samples, predictions, profile, f1_mode))
    size = math.ceil(len(samples) / jobs)
    chunks = [
        (samples[i : i + size], predictions[i : i + size], profile, f1_mode)
        for i in range(0, len(samples), size)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [score for part in pool.map(_score_chunk, chunks) for score in part]


def evaluate(
    dataset: Dataset,
    predictions: Mapping[str, str],
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
    jobs: int | None = None,
) -> MetricReport:
    from .corpus import MetricReport, SampleRecord

    if f1_mode not in F1_MODES:
        raise ValueError(f"unknown f1 mode {f1_mode!r}; expected one of {F1_MODES}")
    missing = [s.id for s in dataset.samples if s.id not in predictions]
    if missing:
        raise CoverageError(missing)
    extra = set(predictions) - set(dataset.ids)
    if extra:
        logger.warning("ignoring %d prediction(s) for unknown sample ids", len(extra))

    samples = list(dataset.samples)
    scores = score_all(samples, [predictions[s.id] for s in samples], profile, f1_mode, jobs)
    records = [
        SampleRecord(id=s.id, em=float(s.best.em), f1=s.best.f1, tlnls=s.best.tlnls)
        for s in scores
    ]
    return MetricReport.from_records(
        records, n_unanswerable=sum(s.is_impossible for s in samples)
    )
