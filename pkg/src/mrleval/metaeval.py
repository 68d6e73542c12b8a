"""Meta-evaluation of span metrics.

A good metric rates alternative correct spans of the same answer highly
(positive evaluation) and verified wrong spans lowly (negative evaluation).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Dataset, ParseError
from .metrics import CoverageError, PairScore, score_pair, token_f1
from .textnorm import HEBREW_DEFAULT, NormalizationProfile, normalize, tokenize

# column name -> PairScore field
METRICS = {"f1": "f1", "edit": "span_ls", "tlnls": "tlnls", "em": "em"}
TABLE_METRICS = ("f1", "edit", "tlnls")


class MetaEvalError(ValueError):
    pass


@dataclass(frozen=True)
class NegativePair:
    id: str
    gold: tuple[str, ...]
    wrong: str
    verified: bool = False

    def __post_init__(self):
        if not self.gold:
            raise MetaEvalError(f"negative pair {self.id!r} has no gold references")
        if not self.wrong.strip():
            raise MetaEvalError(f"negative pair {self.id!r} has an empty wrong span")

    def to_dict(self) -> dict:
        return {"id": self.id, "gold": list(self.gold), "wrong": self.wrong, "verified": self.verified}


@dataclass(frozen=True)
class GapEntry:
    id: str
    span_a: str
    span_b: str
    tlnls: float
    f1: float

    @property
    def gap(self) -> float:
        return self.tlnls - self.f1


@dataclass(frozen=True)
class MetaEvalReport:
    positive: Mapping[str, float] | None
    negative: Mapping[str, float] | None
    n_positive_pairs: int
    n_negative_pairs: int


def _metric_value(score: PairScore, metric: str) -> float:
    try:
        return float(getattr(score, METRICS[metric]))
    except KeyError:
        raise MetaEvalError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}") from None


def reference_pairs(dataset: Dataset) -> list[tuple[str, str, str]]:
    """Every unordered pair of gold spans within each multi-reference sample."""
    out = []
    for s in dataset.samples:
        if len(s.answers) >= 2:
            for a, b in combinations(s.answers, 2):
                out.append((s.id, a.text, b.text))
    return out


def symmetric_score(
    a: str, b: str, metric: str, profile: NormalizationProfile = HEBREW_DEFAULT, f1_mode: str = "paper"
) -> float:
    return (
        _metric_value(score_pair(a, b, profile, f1_mode), metric)
        + _metric_value(score_pair(b, a, profile, f1_mode), metric)
    ) / 2


def positive_eval(
    dataset: Dataset,
    metric: str = "tlnls",
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
) -> float:
    """Mean symmetrized similarity over all gold-span pairs of multi-reference samples."""
    pairs = reference_pairs(dataset)
    if not pairs:
        raise MetaEvalError("no sample has two or more gold spans")
    scores = [symmetric_score(a, b, metric, profile, f1_mode) for _, a, b in pairs]
    return math.fsum(scores) / len(scores)


def negative_eval(
    pairs: Iterable[NegativePair],
    metric: str = "tlnls",
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
) -> float:
    """Mean best-reference score of verified wrong spans against their gold spans."""
    verified = [p for p in pairs if p.verified]
    if not verified:
        raise MetaEvalError("no verified negative pairs")
    scores = [
        max(_metric_value(score_pair(g, p.wrong, profile, f1_mode), metric) for g in p.gold)
        for p in verified
    ]
    return math.fsum(scores) / len(scores)


def meta_eval_report(
    dataset: Dataset | None = None,
    pairs: Sequence[NegativePair] | None = None,
    metrics: Sequence[str] = TABLE_METRICS,
    profile: NormalizationProfile = HEBREW_DEFAULT,
    f1_mode: str = "paper",
) -> MetaEvalReport:
    positive = negative = None
    n_pos = n_neg = 0
    if dataset is not None:
        positive = {m: positive_eval(dataset, m, profile, f1_mode) for m in metrics}
        n_pos = len(reference_pairs(dataset))
    if pairs is not None:
        negative = {m: negative_eval(pairs, m, profile, f1_mode) for m in metrics}
        n_neg = sum(p.verified for p in pairs)
    return MetaEvalReport(positive, negative, n_pos, n_neg)


def collect_negative_candidates(
    dataset: Dataset,
    predictions: Mapping[str, str],
    threshold: float = 0.1,
    profile: NormalizationProfile = HEBREW_DEFAULT,
) -> list[NegativePair]:
    """Non-empty predictions whose best paper-mode F1 is strictly below ``threshold``.

    Returned pairs are unverified; a reviewer flips ``verified`` by hand.
    """
    missing = [s.id for s in dataset.samples if s.id not in predictions]
    if missing:
        raise CoverageError(missing)
    out = []
    for s in dataset.samples:
        pred = predictions[s.id]
        if s.is_impossible or not normalize(pred, profile):
            continue
        p = tokenize(pred, profile)
        best = max(token_f1(tokenize(a.text, profile), p, "paper") for a in s.answers)
        if best < threshold:
            out.append(NegativePair(s.id, tuple(a.text for a in s.answers), pred, False))
    return out


def score_gap_ranking(
    dataset: Dataset, profile: NormalizationProfile = HEBREW_DEFAULT
) -> list[GapEntry]:
    """Reference pairs ordered by how much more TLNLS credits them than F1."""
    entries = [
        GapEntry(
            sid,
            a,
            b,
            symmetric_score(a, b, "tlnls", profile),
            symmetric_score(a, b, "f1", profile),
        )
        for sid, a, b in reference_pairs(dataset)
    ]
    # stable sort keeps reference order for equal (gap, id)
    return sorted(entries, key=lambda e: (-e.gap, e.id))


def load_negative_pairs(path: Path | str) -> list[NegativePair]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, f"invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ParseError(path, "negative pairs must be a JSON list")
    out = []
    for i, row in enumerate(raw):
        try:
            gold = row["gold"]
            if isinstance(gold, str):
                gold = [gold]
            if not all(isinstance(g, str) for g in gold) or not isinstance(row["wrong"], str):
                raise TypeError("gold and wrong must be strings")
            verified = row.get("verified", False)
            if not isinstance(verified, bool):
                raise TypeError("verified must be a boolean")
            out.append(NegativePair(str(row["id"]), tuple(gold), row["wrong"], verified))
        except (KeyError, TypeError, MetaEvalError) as exc:
            raise ParseError(path, f"entry {i}: {exc}") from exc
    return out


def write_negative_pairs(pairs: Iterable[NegativePair], path: Path | str) -> None:
    text = json.dumps([p.to_dict() for p in pairs], ensure_ascii=False, indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def gap_entry_dict(entry: GapEntry) -> dict:
    return {**asdict(entry), "gap": entry.gap}
