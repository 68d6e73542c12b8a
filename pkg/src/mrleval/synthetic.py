"""Seeded synthetic fixtures built by affixing base spans.

Hebrew prefixes (prepositions, the definite article, conjunctions) and
suffixes (plural, possessive) are attached to random base words to make
alternative correct spans of one answer. Wrong spans are random words
sharing no token with the gold spans.
"""

from __future__ import annotations

import random

from .corpus import Dataset, GoldAnswer, Paragraph, QASample
from .metaeval import NegativePair

LETTERS = "אבגדהוזחטיכלמנסעפצקרשת"
PREFIXES = ("ה", "ב", "ל", "ו", "מ", "ש", "וה", "שב", "כש")
SUFFIXES = ("ים", "ות", "ה", "ו", "נו", "יה")
FILLER = "זהו קטע טקסט לדוגמה"


def _word(rng: random.Random, lo: int = 3, hi: int = 7) -> str:
    return "".join(rng.choice(LETTERS) for _ in range(rng.randint(lo, hi)))


def _variants(rng: random.Random, base: list[str]) -> list[str]:
    variants = [" ".join(base)]
    prefixed = [rng.choice(PREFIXES) + base[0], *base[1:]]
    variants.append(" ".join(prefixed))
    if rng.random() < 0.5:
        suffixed = [*base[:-1], base[-1] + rng.choice(SUFFIXES)]
        variants.append(" ".join(suffixed))
    return list(dict.fromkeys(variants))


def affix_dataset(n_samples: int = 200, seed: int = 13) -> Dataset:
    """Samples whose gold references are affixed variants of one base span."""
    rng = random.Random(seed)
    samples = []
    for i in range(n_samples):
        base = [_word(rng) for _ in range(rng.choice((1, 1, 1, 2)))]
        refs = _variants(rng, base)
        while len(refs) < 2:
            refs = _variants(rng, base)
        context = FILLER
        answers = []
        for ref in refs:
            answers.append(GoldAnswer(ref, len(context) + 1))
            context += " " + ref + " " + _word(rng)
        paragraph = Paragraph(f"affix-{i:03d}", "0", context + ".")
        samples.append(
            QASample(id=f"affix-{i:03d}", paragraph=paragraph, question="מה התשובה?", answers=tuple(answers))
        )
    return Dataset(tuple(samples), {s.article_id: s.article_id for s in samples})


def disjoint_negatives(dataset: Dataset, n_pairs: int = 100, seed: int = 29) -> list[NegativePair]:
    """One verified wrong span per sample, token-disjoint from every gold span."""
    rng = random.Random(seed)
    out = []
    for s in dataset.samples[:n_pairs]:
        gold = tuple(a.text for a in s.answers)
        gold_tokens = {t for g in gold for t in g.split()}
        while True:
            wrong = " ".join(_word(rng) for _ in range(rng.choice((1, 1, 2, 3))))
            if not gold_tokens & set(wrong.split()):
                break
        out.append(NegativePair(s.id, gold, wrong, verified=True))
    return out
