"""Corpus schema, IO, ground-truth alignment and time/index conversions."""

from .corpus_io import load_corpus, save_corpus
from .labels import boundary_labels, interior_boundaries, shot_span_indices, span_from_shots
from .records import (
    CANONICAL_MODALITIES,
    Corpus,
    CorpusManifest,
    SceneAnnotation,
    SegmentSpan,
    ShotRecord,
    TagVocabulary,
    VideoRecord,
)

__all__ = [
    "CANONICAL_MODALITIES",
    "Corpus",
    "CorpusManifest",
    "SceneAnnotation",
    "SegmentSpan",
    "ShotRecord",
    "TagVocabulary",
    "VideoRecord",
    "boundary_labels",
    "interior_boundaries",
    "load_corpus",
    "save_corpus",
    "shot_span_indices",
    "span_from_shots",
]
