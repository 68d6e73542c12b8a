"""Dataset construction and diagnostics.

Paragraph-pool filters, article-grouped train/dev/test splitting,
question/target lexical overlap, answer-position distribution and the
quality-label breakdown.
"""

from __future__ import annotations

import csv
import io
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Dataset, Paragraph, QualityLabel
from .textnorm import HEBREW_DEFAULT, NormalizationProfile, hebrew_char_count, tokenize

SPLITS = ("train", "dev", "test")
DEFAULT_RATIOS = (0.90, 0.05, 0.05)

WIKIPEDIA_MIN_CHARS = 500
WIKIPEDIA_MAX_CHARS = 1600
WIKIPEDIA_MAX_PER_ARTICLE = 3
GEEKTIME_MIN_CHARS = 550
GEEKTIME_MIN_HEBREW = 300


class QCError(ValueError):
    pass


@dataclass
class FilterResult:
    accepted: list[Paragraph] = field(default_factory=list)
    rejected: list[tuple[Paragraph, str]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "accepted": len(self.accepted),
            "rejected": len(self.rejected),
            "reasons": dict(sorted(Counter(r for _, r in self.rejected).items())),
        }


def filter_wikipedia_pool(paragraphs: Iterable[Paragraph]) -> FilterResult:
    """Keep 500..1600-character paragraphs, at most three per article.

    The per-article cap takes the first qualifying paragraphs in input order.
    """
    result = FilterResult()
    per_article: Counter[str] = Counter()
    for p in paragraphs:
        n = len(p.text)
        if n < WIKIPEDIA_MIN_CHARS:
            result.rejected.append((p, "too_short"))
        elif n > WIKIPEDIA_MAX_CHARS:
            result.rejected.append((p, "too_long"))
        elif per_article[p.article_id] >= WIKIPEDIA_MAX_PER_ARTICLE:
            result.rejected.append((p, "article_cap"))
        else:
            per_article[p.article_id] += 1
            result.accepted.append(p)
    return result


def filter_geektime_pool(paragraphs: Iterable[Paragraph]) -> FilterResult:
    result = FilterResult()
    for p in paragraphs:
        if len(p.text) < GEEKTIME_MIN_CHARS:
            result.rejected.append((p, "too_short"))
        elif hebrew_char_count(p.text) < GEEKTIME_MIN_HEBREW:
            result.rejected.append((p, "too_little_hebrew"))
        else:
            result.accepted.append(p)
    return result


POOL_FILTERS = {"wikipedia": filter_wikipedia_pool, "geektime": filter_geektime_pool}


@dataclass(frozen=True)
class SplitAssignment:
    assignment: dict[str, str]
    seed: int
    ratios: dict[str, float]

    def ids(self, split: str) -> list[str]:
        return [sid for sid, s in self.assignment.items() if s == split]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "ratios": self.ratios, "assignment": self.assignment}


def split_dataset(
    dataset: Dataset, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0
) -> SplitAssignment:
    """Split by article so that every question of an article lands in one split.

    Articles are visited in a seeded random order. Each goes to the split
    whose question count is furthest below its target share.
    """
    if len(ratios) != len(SPLITS):
        raise QCError(f"expected {len(SPLITS)} ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise QCError(f"ratios must be non-negative and sum to 1, got {tuple(ratios)}")
    if len(dataset) == 0:
        raise QCError("cannot split an empty dataset")

    by_article: dict[str, list[str]] = defaultdict(list)
    for s in dataset.samples:
        by_article[s.article_id].append(s.id)
    if len(by_article) < len(SPLITS):
        raise QCError(
            f"need at least {len(SPLITS)} articles to split by article, got {len(by_article)}"
        )

    articles = list(by_article)
    random.Random(seed).shuffle(articles)

    total = len(dataset)
    counts = [0] * len(SPLITS)
    assignment: dict[str, str] = {}
    for article in articles:
        deficits = [r * total - c for r, c in zip(ratios, counts)]
        k = max(range(len(SPLITS)), key=lambda i: (deficits[i], -i))
        counts[k] += len(by_article[article])
        for sid in by_article[article]:
            assignment[sid] = SPLITS[k]

    # keep file order in the output map
    ordered = {sid: assignment[sid] for sid in dataset.ids}
    realized = {name: c / total for name, c in zip(SPLITS, counts)}
    return SplitAssignment(ordered, seed, realized)


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    masses: tuple[float, ...]
    counts: tuple[int, ...]

    @classmethod
    def from_values(cls, values: Sequence[float], bins: int = 10) -> Histogram:
        """Uniform bins over [0, 1]; the right edge falls in the last bin."""
        if bins < 1:
            raise QCError("bin count must be at least 1")
        if not values:
            raise QCError("no values to histogram")
        counts = [0] * bins
        for v in values:
            counts[min(int(v * bins), bins - 1)] += 1
        n = len(values)
        return cls(
            edges=tuple(i / bins for i in range(bins + 1)),
            masses=tuple(c / n for c in counts),
            counts=tuple(counts),
        )

    def to_dict(self) -> dict:
        return {"edges": list(self.edges), "masses": list(self.masses), "counts": list(self.counts)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bin_start", "bin_end", "count", "mass"])
        for i, (c, m) in enumerate(zip(self.counts, self.masses)):
            writer.writerow([f"{self.edges[i]:.4f}", f"{self.edges[i + 1]:.4f}", c, f"{m:.6f}"])
        return buf.getvalue()


@dataclass(frozen=True)
class OverlapStats:
    target: str
    values: tuple[float, ...]
    histogram: Histogram
    mean: float
    skipped: int = 0


def question_overlap(question: str, target: str, profile: NormalizationProfile = HEBREW_DEFAULT) -> float | None:
    """Share of distinct question tokens found in ``target``; None for token-less questions."""
    q = set(tokenize(question, profile).tokens)
    if not q:
        return None
    t = set(tokenize(target, profile).tokens)
    return len(q & t) / len(q)


def overlap_stats(
    dataset: Dataset,
    target: str = "context",
    profile: NormalizationProfile = HEBREW_DEFAULT,
    bins: int = 10,
) -> OverlapStats:
    if target not in ("context", "answer"):
        raise QCError(f"target must be 'context' or 'answer', got {target!r}")
    values = []
    skipped = 0
    for s in dataset.samples:
        if target == "answer":
            if s.is_impossible:
                continue
            text = s.answers[0].text
        else:
            text = s.paragraph.text
        v = question_overlap(s.question, text, profile)
        if v is None:
            skipped += 1
        else:
            values.append(v)
    if not values:
        raise QCError(f"no eligible samples for {target} overlap")
    return OverlapStats(
        target=target,
        values=tuple(values),
        histogram=Histogram.from_values(values, bins),
        mean=math.fsum(values) / len(values),
        skipped=skipped,
    )


def relative_position(answer_start: int, context_length: int) -> float:
    return answer_start / max(1, context_length - 1)


def position_histogram(dataset: Dataset, bins: int = 10) -> Histogram:
    positions = [
        relative_position(s.answers[0].answer_start, len(s.paragraph.text))
        for s in dataset.samples
        if not s.is_impossible
    ]
    if not positions:
        raise QCError("no answerable samples")
    return Histogram.from_values(positions, bins)


def quality_breakdown(dataset: Dataset) -> dict:
    counts = Counter(s.quality_label for s in dataset.samples)
    labeled = sum(n for label, n in counts.items() if label is not None)
    return {
        "counts": {q.value: counts.get(q, 0) for q in QualityLabel},
        "fractions": {
            q.value: (counts.get(q, 0) / labeled if labeled else 0.0) for q in QualityLabel
        },
        "labeled": labeled,
        "unlabeled": counts.get(None, 0),
    }
