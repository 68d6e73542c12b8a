import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrleval.textnorm import (
    ENGLISH_SQUAD,
    HEBREW_DEFAULT,
    NO_NORMALIZATION,
    PROFILES,
    NormalizationProfile,
    digit_fraction,
    get_profile,
    hebrew_char_count,
    normalize,
    tokenize,
)

text = st.text(
    alphabet=st.one_of(
        st.characters(),
        st.sampled_from(list("אבגדהוזחטיכלמנסעפצקרשת .,-״׳־ְ́ \t\ntheaAn")),
    ),
    max_size=40,
)
profiles = st.builds(
    NormalizationProfile,
    unicode_form=st.booleans(),
    collapse_whitespace=st.booleans(),
    strip_punctuation=st.booleans(),
    lowercase=st.booleans(),
    remove_english_articles=st.booleans(),
)


def test_default_profile_trims():
    assert normalize("  בית  ") == "בית"


def test_english_article_removal():
    assert normalize("The house", ENGLISH_SQUAD) == "house"


def test_punctuation_strip():
    assert normalize("בית.") == "בית"


def test_default_profile_keeps_articles_and_lowercases():
    assert normalize("The House") == "the house"


def test_nfc_composition():
    assert normalize("é") == "é"
    assert normalize("é", NO_NORMALIZATION) == "é"


def test_hebrew_punctuation_is_stripped():
    # maqaf and gershayim are Unicode punctuation
    assert normalize("בית־ספר") == "ביתספר"
    assert normalize("צה״ל") == "צהל"


def test_none_profile_is_identity():
    s = "  The  House, "
    assert normalize(s, NO_NORMALIZATION) == s


@pytest.mark.parametrize(
    "raw, tokens",
    [
        ("בבית הלבן", ("בבית", "הלבן")),
        ("", ()),
        ("in the house", ("in", "the", "house")),
        ("  a\t b\n", ("a", "b")),
    ],
)
def test_tokenize(raw, tokens):
    span = tokenize(raw)
    assert span.tokens == tokens
    assert span.raw == raw


def test_tokenize_english_profile_drops_articles():
    assert tokenize("in the house", ENGLISH_SQUAD).tokens == ("in", "house")


@pytest.mark.parametrize("span, expected", [("1948", 1.0), ("בית", 0.0), ("ax12", 0.5), ("", 0.0), ("19 48", 1.0)])
def test_digit_fraction(span, expected):
    assert digit_fraction(span) == expected


@pytest.mark.parametrize("s, n", [("שלום", 4), ("abc", 0), ("שלום abc", 4), ("\u05d1\u05b0\u05bc", 3)])
def test_hebrew_char_count(s, n):
    assert hebrew_char_count(s) == n


def test_profiles_lookup():
    assert get_profile("hebrew-default") is HEBREW_DEFAULT
    assert set(PROFILES) == {"hebrew-default", "english-squad", "none"}
    with pytest.raises(ValueError):
        get_profile("klingon")


def test_equal_profiles_are_interchangeable():
    assert NormalizationProfile() == HEBREW_DEFAULT
    assert hash(NormalizationProfile()) == hash(HEBREW_DEFAULT)


@settings(max_examples=500)
@given(text, profiles)
def test_normalize_is_idempotent(s, profile):
    once = normalize(s, profile)
    assert normalize(once, profile) == once


@settings(max_examples=300)
@given(text, profiles)
def test_tokens_are_nonempty_and_rejoin_to_fixed_point(s, profile):
    tokens = tokenize(s, profile).tokens
    assert all(t and not any(ch.isspace() for ch in t) for t in tokens)
    assert tokenize(" ".join(tokens), profile).tokens == tokens


@given(text)
def test_digit_fraction_bounds(s):
    assert 0.0 <= digit_fraction(s) <= 1.0


@given(st.text(alphabet="0123456789٠١٢", min_size=1))
def test_all_digit_strings(s):
    assert digit_fraction(s) == 1.0
