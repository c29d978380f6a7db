"""Domain types for shot-segmented videos with scene annotations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

# Fixed concatenation order for modality features; manifest key order is
# irrelevant everywhere in the package.
CANONICAL_MODALITIES = ("vis_r50", "vis_i3", "image", "audio", "text")


@dataclass(frozen=True)
class SegmentSpan:
    """Half-open temporal interval [start_s, end_s) in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.end_s > self.start_s:
            raise DataError(
                f"segment span must have end > start, got [{self.start_s}, {self.end_s}]"
            )

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class ShotRecord:
    """One shot: its time span plus per-modality feature vectors."""

    start_s: float
    end_s: float
    features: dict[str, np.ndarray]

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class SceneAnnotation:
    span: SegmentSpan
    tags: frozenset[int]


@dataclass
class VideoRecord:
    """Ordered shot sequence with an optional ground-truth scene list."""

    video_id: str
    duration_s: float
    shots: list[ShotRecord]
    scenes: list[SceneAnnotation] | None = None

    @property
    def num_shots(self) -> int:
        return len(self.shots)


@dataclass
class TagVocabulary:
    """Dense tag ids 1..num_tags with optional display names."""

    num_tags: int
    names: dict[int, str] = field(default_factory=dict)

    def name(self, tag_id: int) -> str:
        return self.names.get(tag_id, f"tag_{tag_id}")

    @property
    def ids(self) -> range:
        return range(1, self.num_tags + 1)


@dataclass
class CorpusManifest:
    modality_dims: dict[str, int]
    num_tags: int
    stats: dict = field(default_factory=dict)
    tag_names: dict[int, str] = field(default_factory=dict)


@dataclass
class Corpus:
    manifest: CorpusManifest
    videos: list[VideoRecord]

    def __post_init__(self):
        self._by_id = {v.video_id: v for v in self.videos}
        if len(self._by_id) != len(self.videos):
            raise DataError("duplicate video_id in corpus")

    def video(self, video_id: str) -> VideoRecord:
        try:
            return self._by_id[video_id]
        except KeyError:
            raise DataError(f"unknown video_id {video_id!r}") from None

    def __contains__(self, video_id: str) -> bool:
        return video_id in self._by_id

    def __len__(self) -> int:
        return len(self.videos)

    @property
    def tag_vocabulary(self) -> TagVocabulary:
        return TagVocabulary(self.manifest.num_tags, dict(self.manifest.tag_names))

    def labeled_videos(self) -> list[VideoRecord]:
        return [v for v in self.videos if v.scenes is not None]
