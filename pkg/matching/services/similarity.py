# matching/services/similarity.py
"""
Request <-> ontology similarity.

Classes are matched with a fuzzy substring-occurrence score against the
normalized request words. Attributes are matched with a positional word
search over the raw request text.
"""

import hashlib
import logging
import re
from bisect import bisect_left
from collections.abc import Sequence
from functools import cache, cached_property, lru_cache

from django.conf import settings

from matching.exceptions import SimilarityDomainError
from matching.models import Entry, SimilarityReport
from ontology.models import Ontology, OntologyAttribute, OntologyClass
from textproc import get_text_pipeline
from textproc.pipeline import ProcessedRequest, TextPipeline

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Fuzzy string comparison
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def proper_substrings(s: str) -> frozenset[str]:
    """Distinct contiguous substrings of length 1 .. len(s) - 1."""
    if not s:
        raise SimilarityDomainError("Cannot enumerate substrings of an empty string")
    n = len(s)
    return frozenset(s[i : i + length] for length in range(1, n) for i in range(n - length + 1))


def fuzzy_string_similarity(a: str, b: str) -> float:
    """
    Share of the proper substrings of `a` that occur in `b`.

    Directional: fuzzy_string_similarity("motor", "mortar") is 6/13 (m, o,
    t, r, mo, or) while the reverse is 6/19.
    """
    if not a or not b:
        raise SimilarityDomainError("Fuzzy similarity needs two non-empty strings")
    a, b = a.lower(), b.lower()

    substrings = proper_substrings(a)
    if not substrings:
        return 1.0 if a in b else 0.0
    found = sum(1 for s in substrings if s in b)
    return found / len(substrings)


def _candidates(words: Sequence[str], max_words: int) -> set[str]:
    return {
        " ".join(words[start : start + size])
        for size in range(1, max_words + 1)
        for start in range(len(words) - size + 1)
    }


def class_similarity(
    normalized_name: str, match_words: Sequence[str], threshold: float
) -> float:
    if not normalized_name or not match_words:
        return 0.0
    max_words = len(normalized_name.split())
    best = max(
        fuzzy_string_similarity(normalized_name, candidate)
        for candidate in _candidates(match_words, max_words)
    )
    return best if best >= threshold else 0.0


def request_class_similarity(
    req: ProcessedRequest,
    cls: OntologyClass,
    ontology: Ontology,
    threshold: float | None = None,
    pipeline: TextPipeline | None = None,
) -> float:
    pipeline = pipeline or get_text_pipeline()
    if threshold is None:
        threshold = getattr(settings, "MATCHING_CLASS_THRESHOLD", 0.3)
    return class_similarity(pipeline.normalize_name(cls.name, ontology), req.match_words, threshold)


# ---------------------------------------------------------------------------
# Attribute matching
# ---------------------------------------------------------------------------


@cache
def _word_pattern(word: str) -> re.Pattern[str]:
    return re.compile(rf"(?<!\w){re.escape(word)}(?!\w)")


def calc_similarity(matched: Sequence[str], attribute_words: Sequence[str]) -> float:
    """(matched words / words) x (matched characters / name characters)."""
    if not matched or not attribute_words:
        return 0.0
    total_chars = sum(len(w) for w in attribute_words)
    word_share = len(matched) / len(attribute_words)
    char_share = sum(len(w) for w in matched) / total_chars
    return word_share * char_share


def request_attribute_similarity(request_text: str, attr: OntologyAttribute) -> float:
    """
    Best CalcSimilarity over all ways of finding attribute words in the request.

    Attribute words are taken left to right (skipping allowed) and each must
    occur at or after the position where the previous match ended. Only the
    earliest occurrence of a word is explored, later ones cannot do better.
    """
    text = request_text.lower()
    words = attr.name.lower().split()
    if not words or not text:
        return 0.0

    occurrences = [[m.start() for m in _word_pattern(w).finditer(text)] for w in words]
    best = 0.0
    # The score only depends on how many words and characters matched so far
    visited: set[tuple[int, int, int, int]] = set()

    def search(position: int, next_index: int, matched: list[str]) -> None:
        nonlocal best
        state = (position, next_index, len(matched), sum(len(w) for w in matched))
        if state in visited:
            return
        visited.add(state)
        for index in range(next_index, len(words)):
            starts = occurrences[index]
            at = bisect_left(starts, position)
            if at == len(starts):
                continue
            found = [*matched, words[index]]
            best = max(best, calc_similarity(found, words))
            if best == 1.0:
                return
            search(starts[at] + len(words[index]), index + 1, found)

    search(0, 0, [])
    return best


def find_entries(
    request_text: str, attr: OntologyAttribute, pipeline: TextPipeline | None = None
) -> list[Entry]:
    """
    Maximal runs of adjacent request tokens spelling consecutive attribute words.

    For "Pay load 5 kg, Stroke X 100 mm, Stroke Y 200 mm" and "Stroke X"
    this gives "Stroke X" and "Stroke".
    """
    pipeline = pipeline or get_text_pipeline()
    tokens = pipeline.tokenize(request_text)
    words = attr.name.lower().split()
    entries = []

    i = 0
    while i < len(tokens):
        best_len, best_start_word = 0, 0
        for j in range(len(words)):
            length = 0
            while (
                i + length < len(tokens)
                and j + length < len(words)
                and tokens[i + length].surface.lower() == words[j + length]
            ):
                length += 1
            if length > best_len:
                best_len, best_start_word = length, j

        if best_len == 0:
            i += 1
            continue

        first, last = tokens[i], tokens[i + best_len - 1]
        matched = tuple(words[best_start_word : best_start_word + best_len])
        entries.append(
            Entry(
                text=request_text[first.position : last.position + len(last.surface)],
                position=first.position,
                words=matched,
                score=calc_similarity(matched, words),
            )
        )
        i += best_len

    return entries


# ---------------------------------------------------------------------------
# Whole-request matching
# ---------------------------------------------------------------------------


class RequestMatcher:
    """
    Scores requests against one ontology.

    Normalized class names are computed once; the matcher holds no mutable
    state after construction and can be shared between threads.
    """

    def __init__(
        self,
        ontology: Ontology,
        pipeline: TextPipeline | None = None,
        class_threshold: float | None = None,
    ):
        self.ontology = ontology
        self.pipeline = pipeline or get_text_pipeline()
        if class_threshold is None:
            class_threshold = getattr(settings, "MATCHING_CLASS_THRESHOLD", 0.3)
        self.class_threshold = class_threshold
        self.class_names = {
            cls.id: self.pipeline.normalize_name(cls.name, ontology) for cls in ontology.classes
        }

    @cached_property
    def version(self) -> str:
        """Digest of the matching parameters; cached reports are keyed on it."""
        key = f"{self.pipeline.fingerprint}:{float(self.class_threshold)!r}"
        return hashlib.sha256(key.encode()).hexdigest()

    def preprocess(self, text: str) -> ProcessedRequest:
        return self.pipeline.preprocess(text, self.ontology)

    def match(self, request_id: str, text: str) -> SimilarityReport:
        return self.match_processed(request_id, self.preprocess(text))

    def match_processed(self, request_id: str, req: ProcessedRequest) -> SimilarityReport:
        class_scores = []
        if req.match_words:
            for cls in self.ontology.classes:
                score = class_similarity(
                    self.class_names[cls.id], req.match_words, self.class_threshold
                )
                if score > 0:
                    class_scores.append((cls.id, score))

        attribute_scores = []
        for attr in self.ontology.attributes:
            score = request_attribute_similarity(req.raw, attr)
            if score > 0:
                attribute_scores.append((attr.id, score))

        logger.debug(
            f"Request {request_id}: {len(class_scores)} classes, "
            f"{len(attribute_scores)} attributes matched"
        )
        return SimilarityReport(
            request_id=request_id,
            class_scores=tuple(class_scores),
            attribute_scores=tuple(attribute_scores),
        )


def match_request(
    request_id: str, req: ProcessedRequest, ontology: Ontology, **kwargs
) -> SimilarityReport:
    return RequestMatcher(ontology, **kwargs).match_processed(request_id, req)
