# textproc/__init__.py

from pathlib import Path

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from .pipeline import SUPPORTED_LANGUAGES, TextPipeline

# One pipeline per language, built lazily from settings
_pipelines: dict[str, TextPipeline] = {}


def read_lexicon(path: Path) -> frozenset[str]:
    """One term per line; blank lines and '#' comments are skipped."""
    if not path.exists():
        raise ImproperlyConfigured(f"Lexicon file not found: {path}")
    terms = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        term = line.strip().lower()
        if term and not term.startswith("#"):
            terms.add(term)
    return frozenset(terms)


def get_text_pipeline(language: str | None = None) -> TextPipeline:
    """
    Get or create the TextPipeline for a language (default TEXT_LANGUAGE).

    Lexicons are read once; the pipeline is immutable and shared.
    """
    language = language or getattr(settings, "TEXT_LANGUAGE", "en")

    if language in _pipelines:
        return _pipelines[language]

    if language not in SUPPORTED_LANGUAGES:
        raise ImproperlyConfigured(
            f"Unsupported language '{language}'. "
            f"Supported: {', '.join(sorted(SUPPORTED_LANGUAGES))}"
        )

    lexicon_dir = Path(getattr(settings, "TEXT_LEXICON_DIR"))
    _pipelines[language] = TextPipeline(
        language=language,
        stopwords=read_lexicon(lexicon_dir / f"{language}_stopwords.txt"),
        units=read_lexicon(lexicon_dir / "units.txt"),
        max_distance=getattr(settings, "SPELLING_MAX_DISTANCE", 2),
        min_length=getattr(settings, "SPELLING_MIN_LENGTH", 4),
    )
    return _pipelines[language]
