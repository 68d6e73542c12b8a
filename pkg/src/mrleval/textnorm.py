"""Text normalization and whitespace tokenization shared by metrics and QC."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

HEBREW_BLOCK = (0x0590, 0x05FF)

_ARTICLES = re.compile(r"\b(a|an|the)\b", re.UNICODE)


@dataclass(frozen=True)
class NormalizationProfile:
    unicode_form: bool = True
    collapse_whitespace: bool = True
    strip_punctuation: bool = True
    lowercase: bool = True
    remove_english_articles: bool = False


HEBREW_DEFAULT = NormalizationProfile()
ENGLISH_SQUAD = NormalizationProfile(remove_english_articles=True)
NO_NORMALIZATION = NormalizationProfile(
    unicode_form=False,
    collapse_whitespace=False,
    strip_punctuation=False,
    lowercase=False,
    remove_english_articles=False,
)

PROFILES = {
    "hebrew-default": HEBREW_DEFAULT,
    "english-squad": ENGLISH_SQUAD,
    "none": NO_NORMALIZATION,
}


def get_profile(name: str) -> NormalizationProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown normalization profile {name!r}; expected one of {sorted(PROFILES)}"
        ) from None


@dataclass(frozen=True)
class TokenSpan:
    raw: str
    tokens: tuple[str, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.tokens)


def _strip_punct(text: str) -> str:
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def normalize(text: str, profile: NormalizationProfile = HEBREW_DEFAULT) -> str:
    """Normalize ``text`` under ``profile``.

    Steps run in a fixed order: Unicode NFC, lowercase, punctuation strip,
    English article removal, whitespace collapse and trim. The result is
    idempotent for every profile.
    """
    if profile.unicode_form:
        text = unicodedata.normalize("NFC", text)
    if profile.lowercase:
        text = text.lower()
        if profile.unicode_form:
            text = unicodedata.normalize("NFC", text)
    if profile.strip_punctuation:
        text = _strip_punct(text)
        # removing a mark can bring composable code points together
        if profile.unicode_form:
            text = unicodedata.normalize("NFC", text)
    if profile.remove_english_articles:
        text = _ARTICLES.sub(" ", text)
    if profile.collapse_whitespace:
        text = " ".join(text.split())
    return text


def tokenize(text: str, profile: NormalizationProfile = HEBREW_DEFAULT) -> TokenSpan:
    """Split the normalized text on whitespace runs."""
    return TokenSpan(raw=text, tokens=tuple(normalize(text, profile).split()))


def digit_fraction(span: str) -> float:
    """Fraction of non-whitespace characters that are decimal digits."""
    chars = [ch for ch in span if not ch.isspace()]
    if not chars:
        return 0.0
    return sum(ch.isdecimal() for ch in chars) / len(chars)


def hebrew_char_count(text: str) -> int:
    lo, hi = HEBREW_BLOCK
    return sum(lo <= ord(ch) <= hi for ch in text)
