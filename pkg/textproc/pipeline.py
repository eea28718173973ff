# textproc/pipeline.py
"""
Request normalization: tokenize, classify numbers/units/stop-words,
correct spelling against the ontology vocabulary, then stem.
"""

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from enum import StrEnum
from functools import cache, cached_property

from django.core.exceptions import ImproperlyConfigured
from nltk.metrics import edit_distance
from nltk.stem.snowball import SnowballStemmer

from ontology.models import Ontology

logger = logging.getLogger(__name__)

# Language tag -> Snowball stemmer name
SUPPORTED_LANGUAGES: dict[str, str] = {
    "en": "english",
    "de": "german",
    "ru": "russian",
}

_TOKEN_RE = re.compile(
    r"(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<word>[^\W\d_]+)"
    r"|(?P<punctuation>[^\w\s]|_)"
)

# Snowball is not idempotent on every input; iterate to a fixpoint
_MAX_STEM_PASSES = 5


class TokenKind(StrEnum):
    WORD = "word"
    NUMBER = "number"
    UNIT = "unit"
    STOPWORD = "stopword"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    kind: TokenKind
    position: int


@dataclass(frozen=True)
class ProcessedRequest:
    raw: str
    tokens: tuple[Token, ...] = ()

    @property
    def match_words(self) -> list[str]:
        return [t.normalized for t in self.tokens if t.kind == TokenKind.WORD]


@cache
def _stemmer(language: str) -> SnowballStemmer:
    if language not in SUPPORTED_LANGUAGES:
        raise ImproperlyConfigured(
            f"Unsupported language '{language}'. "
            f"Supported: {', '.join(sorted(SUPPORTED_LANGUAGES))}"
        )
    return SnowballStemmer(SUPPORTED_LANGUAGES[language])


def stem(word: str, language: str = "en") -> str:
    stemmer = _stemmer(language)
    current = word
    for _ in range(_MAX_STEM_PASSES):
        stemmed = stemmer.stem(current)
        if stemmed == current:
            break
        current = stemmed
    return current


def correct_spelling(
    word: str,
    vocab: frozenset[str] | set[str],
    max_distance: int = 2,
    min_length: int = 4,
) -> tuple[str, bool]:
    """
    Replace an out-of-vocabulary word with the closest vocabulary term.

    Ties on distance go to the lexicographically smallest term. Words shorter
    than min_length are left alone so codes like "X" survive.
    """
    if word in vocab or len(word) < min_length:
        return word, False

    best: tuple[int, str] | None = None
    for term in vocab:
        if abs(len(term) - len(word)) > max_distance:
            continue
        distance = edit_distance(word, term)
        if distance <= max_distance and (best is None or (distance, term) < best):
            best = (distance, term)

    if best is None:
        return word, False
    return best[1], True


class TextPipeline:
    """Lexicon-bound pipeline for one language."""

    def __init__(
        self,
        language: str,
        stopwords: frozenset[str],
        units: frozenset[str],
        max_distance: int = 2,
        min_length: int = 4,
    ):
        _stemmer(language)  # fail fast on unsupported languages
        self.language = language
        self.stopwords = stopwords
        self.units = units
        self.max_distance = max_distance
        self.min_length = min_length

    @cached_property
    def fingerprint(self) -> str:
        """Digest of everything besides the ontology that shapes normalization."""
        payload = {
            "language": self.language,
            "stopwords": sorted(self.stopwords),
            "units": sorted(self.units),
            "max_distance": self.max_distance,
            "min_length": self.min_length,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def tokenize(self, text: str) -> list[Token]:
        tokens = []
        for match in _TOKEN_RE.finditer(text):
            surface = match.group()
            lowered = surface.lower()
            if match.lastgroup == "number":
                kind = TokenKind.NUMBER
            elif match.lastgroup == "punctuation":
                kind = TokenKind.PUNCTUATION
            elif lowered in self.units:
                kind = TokenKind.UNIT
            elif lowered in self.stopwords:
                kind = TokenKind.STOPWORD
            else:
                kind = TokenKind.WORD
            tokens.append(
                Token(surface=surface, normalized=lowered, kind=kind, position=match.start())
            )
        return tokens

    def _canonical_synonym(self, word: str, ontology: Ontology) -> str | None:
        target = ontology.synonym_targets.get(word)
        if target is None:
            return None
        name = ontology.element_name(target)
        if name is None:
            return None
        return " ".join(stem(w, self.language) for w in name.lower().split())

    def normalize_word(self, word: str, ontology: Ontology) -> str:
        corrected, changed = correct_spelling(
            word, ontology.vocabulary, self.max_distance, self.min_length
        )
        if changed:
            logger.debug(f"Spelling: '{word}' -> '{corrected}'")
        synonym = self._canonical_synonym(corrected, ontology)
        if synonym is not None:
            return synonym
        return stem(corrected, self.language)

    def _synonym_phrase(
        self, text: str, tokens: list[Token], start: int, ontology: Ontology
    ) -> tuple[int, Token] | None:
        """Longest multi-word synonym beginning at tokens[start], as one WORD token."""
        phrases = ontology.synonym_phrases
        longest = min(max((p.count(" ") + 1 for p in phrases), default=0), len(tokens) - start)
        for size in range(longest, 1, -1):
            window = tokens[start : start + size]
            if any(t.kind in (TokenKind.NUMBER, TokenKind.PUNCTUATION) for t in window):
                continue
            gaps = (
                text[a.position + len(a.surface) : b.position] for a, b in zip(window, window[1:])
            )
            if not all(gap.isspace() for gap in gaps):
                continue
            key = " ".join(t.normalized for t in window)
            if key not in phrases:
                continue
            end = window[-1].position + len(window[-1].surface)
            canonical = self._canonical_synonym(key, ontology) or key
            token = Token(
                surface=text[window[0].position : end],
                normalized=canonical,
                kind=TokenKind.WORD,
                position=window[0].position,
            )
            return size, token
        return None

    def preprocess(self, text: str, ontology: Ontology) -> ProcessedRequest:
        raw_tokens = self.tokenize(text)
        tokens = []
        index = 0
        while index < len(raw_tokens):
            phrase = self._synonym_phrase(text, raw_tokens, index, ontology)
            if phrase is not None:
                size, token = phrase
                tokens.append(token)
                index += size
                continue
            token = raw_tokens[index]
            index += 1
            if token.kind == TokenKind.WORD:
                token = Token(
                    surface=token.surface,
                    normalized=self.normalize_word(token.normalized, ontology),
                    kind=token.kind,
                    position=token.position,
                )
            tokens.append(token)
        return ProcessedRequest(raw=text, tokens=tuple(tokens))

    def normalize_name(self, name: str, ontology: Ontology) -> str:
        """Class names go through the same pipeline so they compare like requests."""
        return " ".join(self.preprocess(name, ontology).match_words)


def tokenize(text: str) -> list[Token]:
    from textproc import get_text_pipeline

    return get_text_pipeline().tokenize(text)


def preprocess(text: str, ontology: Ontology, language: str | None = None) -> ProcessedRequest:
    from textproc import get_text_pipeline

    return get_text_pipeline(language).preprocess(text, ontology)
