"""Extractive QA evaluation for morphologically rich languages."""

from .corpus import (
    Dataset,
    GoldAnswer,
    MetricReport,
    Paragraph,
    QASample,
    QCReport,
    QualityLabel,
    load_dataset,
    load_predictions,
    write_report,
)
from .metrics import (
    PairScore,
    SampleScore,
    evaluate,
    exact_match,
    levenshtein,
    norm_lev_similarity,
    score_pair,
    score_sample,
    tlnls,
    token_f1,
)
from .textnorm import NormalizationProfile, TokenSpan, normalize, tokenize

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "GoldAnswer",
    "MetricReport",
    "NormalizationProfile",
    "PairScore",
    "Paragraph",
    "QASample",
    "QCReport",
    "QualityLabel",
    "SampleScore",
    "TokenSpan",
    "evaluate",
    "exact_match",
    "levenshtein",
    "load_dataset",
    "load_predictions",
    "norm_lev_similarity",
    "normalize",
    "score_pair",
    "score_sample",
    "tlnls",
    "token_f1",
    "tokenize",
    "write_report",
]
