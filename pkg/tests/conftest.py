import numpy as np
import pytest

from scenestruct.data.records import (
    Corpus,
    CorpusManifest,
    SceneAnnotation,
    SegmentSpan,
    ShotRecord,
    VideoRecord,
)


def make_shot(start, end, features):
    return ShotRecord(start_s=start, end_s=end, features={k: np.asarray(v, dtype=np.float64) for k, v in features.items()})


def make_video(video_id, bounds, feature_dim=2, modalities=("vis_r50",), scenes=None, rng=None):
    """Video with shots at the given boundary list [t0, t1, ..., tM]."""
    rng = rng or np.random.default_rng(0)
    shots = []
    for a, b in zip(bounds, bounds[1:]):
        feats = {m: rng.normal(size=feature_dim) for m in modalities}
        shots.append(make_shot(a, b, feats))
    return VideoRecord(
        video_id=video_id,
        duration_s=float(bounds[-1]),
        shots=shots,
        scenes=scenes,
    )


def make_scene(start, end, tags):
    return SceneAnnotation(span=SegmentSpan(start, end), tags=frozenset(tags))


@pytest.fixture
def tiny_manifest():
    return CorpusManifest(modality_dims={"vis_r50": 2}, num_tags=3)


@pytest.fixture
def tiny_corpus(tiny_manifest):
    video = make_video(
        "v0",
        [0.0, 2.0, 4.0, 6.0],
        scenes=[make_scene(0.0, 4.0, {1}), make_scene(4.0, 6.0, {2, 3})],
    )
    return Corpus(manifest=tiny_manifest, videos=[video])
