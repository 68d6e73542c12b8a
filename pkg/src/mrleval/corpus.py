"""Datasets, predictions and reports: data model and JSON (de)serialization.

Datasets use the SQuAD-2.0 layout::

    {"data": [{"title": ..., "paragraphs": [{"context": ..., "qas": [
        {"id": ..., "question": ..., "is_impossible": ...,
         "answers": [{"text": ..., "answer_start": ...}]}]}]}]}

Character offsets count Unicode code points, never bytes.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Base class for invalid input files."""


class ParseError(CorpusError):
    def __init__(self, path: Path | str, detail: str):
        self.path = str(path)
        super().__init__(f"{path}: {detail}")


class IntegrityError(CorpusError):
    def __init__(self, message: str, sample_id: str | None = None):
        self.sample_id = sample_id
        super().__init__(message)


class QualityLabel(str, enum.Enum):
    REJECTED = "rejected"
    VERIFIED = "verified"
    GOOD = "good"
    GOLD = "gold"


@dataclass(frozen=True)
class Paragraph:
    article_id: str
    paragraph_id: str
    text: str


@dataclass(frozen=True)
class GoldAnswer:
    text: str
    answer_start: int


@dataclass(frozen=True)
class QASample:
    id: str
    paragraph: Paragraph
    question: str
    answers: tuple[GoldAnswer, ...] = ()
    is_impossible: bool = False
    quality_label: QualityLabel | None = None

    def __post_init__(self):
        if self.is_impossible and self.answers:
            raise IntegrityError(f"sample {self.id!r}: unanswerable sample has answers", self.id)
        if not self.is_impossible and not self.answers:
            raise IntegrityError(f"sample {self.id!r}: answerable sample has no answers", self.id)
        text = self.paragraph.text
        for a in self.answers:
            end = a.answer_start + len(a.text)
            if a.answer_start < 0 or text[a.answer_start:end] != a.text:
                raise IntegrityError(
                    f"sample {self.id!r}: answer {a.text!r} not found at offset {a.answer_start}",
                    self.id,
                )

    @property
    def article_id(self) -> str:
        return self.paragraph.article_id


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of QA samples, in file order."""

    samples: tuple[QASample, ...]
    titles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen: set[str] = set()
        for s in self.samples:
            if s.id in seen:
                raise IntegrityError(f"duplicate sample id {s.id!r}", s.id)
            seen.add(s.id)
        keys: dict[tuple[str, str], str] = {}
        for p in self.paragraphs:
            if not p.text:
                raise IntegrityError(f"empty paragraph {p.article_id}/{p.paragraph_id}")
            key = (p.article_id, p.paragraph_id)
            if keys.setdefault(key, p.text) != p.text:
                raise IntegrityError(f"conflicting paragraph id {p.article_id}/{p.paragraph_id}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[QASample]:
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def paragraphs(self) -> list[Paragraph]:
        out: dict[tuple[str, str], Paragraph] = {}
        for s in self.samples:
            out.setdefault((s.paragraph.article_id, s.paragraph.paragraph_id), s.paragraph)
        return list(out.values())

    def subset(self, ids: Iterable[str]) -> Dataset:
        keep = set(ids)
        return Dataset(tuple(s for s in self.samples if s.id in keep), self.titles)

    def to_json(self) -> dict[str, Any]:
        articles: dict[str, dict[str, list[QASample]]] = {}
        for s in self.samples:
            paras = articles.setdefault(s.article_id, {})
            paras.setdefault(s.paragraph.paragraph_id, []).append(s)
        data = []
        for article_id, paras in articles.items():
            title = self.titles.get(article_id, article_id)
            entry: dict[str, Any] = {"title": title, "paragraphs": []}
            if title != article_id:
                entry["id"] = article_id
            for position, (paragraph_id, samples) in enumerate(paras.items()):
                qas = []
                for s in samples:
                    qa: dict[str, Any] = {
                        "id": s.id,
                        "question": s.question,
                        "is_impossible": s.is_impossible,
                        "answers": [
                            {"text": a.text, "answer_start": a.answer_start} for a in s.answers
                        ],
                    }
                    if s.quality_label is not None:
                        qa["quality_label"] = s.quality_label.value
                    qas.append(qa)
                para: dict[str, Any] = {"context": samples[0].paragraph.text, "qas": qas}
                if paragraph_id != str(position):
                    para["id"] = paragraph_id
                entry["paragraphs"].append(para)
            data.append(entry)
        return {"version": "v2.0", "data": data}


def _read_json(path: Path | str, **kwargs) -> Any:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            return json.load(fh, **kwargs)
        except json.JSONDecodeError as exc:
            raise ParseError(path, f"invalid JSON: {exc}") from exc
        except UnicodeDecodeError as exc:
            raise ParseError(path, f"not UTF-8: {exc}") from exc


def _require(obj: Mapping, key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if not isinstance(obj, Mapping):
        raise CorpusError(f"{where}: expected an object")
    if key not in obj:
        raise CorpusError(f"{where}: missing key {key!r}")
    value = obj[key]
    kinds = kind if isinstance(kind, tuple) else (kind,)
    # bool is an int subclass but never a valid offset or id
    if not isinstance(value, kinds) or isinstance(value, bool):
        names = " or ".join(k.__name__ for k in kinds)
        raise CorpusError(f"{where}: {key!r} must be {names}")
    return value


def parse_dataset(raw: Any) -> Dataset:
    """Build a :class:`Dataset` from an already-decoded SQuAD-shaped object."""
    if not isinstance(raw, dict) or not isinstance(raw.get("data"), list):
        raise CorpusError("dataset must be an object with a 'data' list")
    samples: list[QASample] = []
    titles: dict[str, str] = {}
    for i, article in enumerate(raw["data"]):
        where = f"data[{i}]"
        if not isinstance(article, dict):
            raise CorpusError(f"{where}: article must be an object")
        title = article.get("title", f"article-{i}")
        article_id = str(article.get("id", title))
        if article_id in titles:
            raise IntegrityError(f"{where}: duplicate article id {article_id!r}")
        titles[article_id] = str(title)
        for j, para in enumerate(_require(article, "paragraphs", list, where)):
            pwhere = f"{where}.paragraphs[{j}]"
            context = _require(para, "context", str, pwhere)
            paragraph = Paragraph(article_id, str(para.get("id", j)), context)
            for k, qa in enumerate(_require(para, "qas", list, pwhere)):
                qwhere = f"{pwhere}.qas[{k}]"
                sid = _require(qa, "id", str, qwhere)
                answers = tuple(
                    GoldAnswer(
                        _require(a, "text", str, f"{qwhere} ({sid})"),
                        _require(a, "answer_start", int, f"{qwhere} ({sid})"),
                    )
                    for a in qa.get("answers", [])
                )
                impossible = qa.get("is_impossible", not answers)
                if not isinstance(impossible, bool):
                    raise CorpusError(f"{qwhere} ({sid}): 'is_impossible' must be bool")
                label = qa.get("quality_label")
                try:
                    label = QualityLabel(label) if label is not None else None
                except ValueError:
                    raise IntegrityError(
                        f"sample {sid!r}: unknown quality_label {label!r}", sid
                    ) from None
                samples.append(
                    QASample(
                        id=sid,
                        paragraph=paragraph,
                        question=_require(qa, "question", str, qwhere),
                        answers=answers,
                        is_impossible=impossible,
                        quality_label=label,
                    )
                )
    return Dataset(tuple(samples), titles)


def load_dataset(path: Path | str) -> Dataset:
    raw = _read_json(path)
    try:
        return parse_dataset(raw)
    except IntegrityError:
        raise
    except CorpusError as exc:
        raise ParseError(path, str(exc)) from exc


def dump_dataset(dataset: Dataset, path: Path | str) -> None:
    _write_json(dataset.to_json(), path)


def _pairs_last_wins(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            logger.warning("duplicate prediction id %r; keeping the last value", key)
        out[key] = value
    return out


def load_predictions(path: Path | str) -> dict[str, str]:
    """Read an ``{id: answer}`` file verbatim; ``""`` predicts unanswerable."""
    raw = _read_json(path, object_pairs_hook=_pairs_last_wins)
    if not isinstance(raw, dict):
        raise ParseError(path, "predictions must be a JSON object of id -> string")
    for key, value in raw.items():
        if not isinstance(value, str):
            raise TypeError(
                f"{path}: prediction for {key!r} must be a string, got {type(value).__name__}"
            )
    return raw


@dataclass(frozen=True)
class SampleRecord:
    id: str
    em: float
    f1: float
    tlnls: float


@dataclass(frozen=True)
class MetricReport:
    records: tuple[SampleRecord, ...]
    aggregates: Mapping[str, float]
    n_samples: int
    n_unanswerable: int

    @classmethod
    def from_records(cls, records: Sequence[SampleRecord], n_unanswerable: int = 0) -> MetricReport:
        if not records:
            raise ValueError("a report must cover at least one sample")
        n = len(records)
        aggregates = {
            "EM": 100 * math.fsum(r.em for r in records) / n,
            "F1": 100 * math.fsum(r.f1 for r in records) / n,
            "TLNLS": 100 * math.fsum(r.tlnls for r in records) / n,
        }
        return cls(tuple(records), aggregates, n, n_unanswerable)

    def validate(self) -> None:
        if not self.records:
            raise ValueError("a report must cover at least one sample")
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("report contains duplicate sample ids")

    def to_dict(self) -> dict[str, Any]:
        return {
            "aggregates": {k: round(v, 2) for k, v in self.aggregates.items()},
            "counts": {"n_samples": self.n_samples, "n_unanswerable": self.n_unanswerable},
            "per_sample": [
                {"id": r.id, "em": round(r.em, 4), "f1": round(r.f1, 4), "tlnls": round(r.tlnls, 4)}
                for r in self.records
            ],
        }

    def summary(self) -> str:
        a = self.aggregates
        return (
            f"samples={self.n_samples} unanswerable={self.n_unanswerable} "
            f"EM={a['EM']:.2f} F1={a['F1']:.2f} TLNLS={a['TLNLS']:.2f}"
        )


def _round_floats(obj: Any, ndigits: int) -> Any:
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


@dataclass(frozen=True)
class QCReport:
    """Result of a QC or meta-evaluation analysis over ``n_samples`` items."""

    kind: str
    n_samples: int
    data: Mapping[str, Any]

    def validate(self) -> None:
        if self.n_samples < 1:
            raise ValueError("a report must cover at least one sample")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "n_samples": self.n_samples, **_round_floats(dict(self.data), 4)}


def _write_json(obj: Any, path: Path | str) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def write_report(report: MetricReport | QCReport, path: Path | str) -> None:
    """Write ``report`` as key-sorted UTF-8 JSON; identical reports give identical bytes."""
    report.validate()
    _write_json(report.to_dict(), path)


def load_pool(path: Path | str) -> list[Paragraph]:
    """Read a JSON-lines paragraph pool of ``{article_id, paragraph_id, text}``."""
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise ParseError(path, f"line {lineno}: expected an object")
            try:
                out.append(
                    Paragraph(
                        str(_require(row, "article_id", (str, int), f"line {lineno}")),
                        str(_require(row, "paragraph_id", (str, int), f"line {lineno}")),
                        _require(row, "text", str, f"line {lineno}"),
                    )
                )
            except CorpusError as exc:
                raise ParseError(path, str(exc)) from exc
    return out


def write_pool(paragraphs: Iterable[Paragraph], path: Path | str) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in paragraphs:
            row = {"article_id": p.article_id, "paragraph_id": p.paragraph_id, "text": p.text}
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
