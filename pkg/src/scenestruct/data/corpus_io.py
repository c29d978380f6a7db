"""Corpus loading, validation and serialization.

A corpus is a manifest JSON document plus a newline-delimited records file
with one video per line. All floats are decimal text (shortest round-trip),
so a save/load cycle reproduces every value bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from .records import Corpus, CorpusManifest, SceneAnnotation, SegmentSpan, ShotRecord, VideoRecord

# Shot timelines must be contiguous to this tolerance (seconds).
SHOT_CONTIGUITY_TOL_S = 1e-3


def load_manifest(path) -> CorpusManifest:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "modalities" not in doc or "num_tags" not in doc:
        raise DataError(f"manifest {path} must define 'modalities' and 'num_tags'")
    dims = {str(k): int(v) for k, v in doc["modalities"].items()}
    for name, dim in dims.items():
        if dim < 1:
            raise DataError(f"manifest modality {name!r} has non-positive dim {dim}")
    num_tags = int(doc["num_tags"])
    if num_tags < 1:
        raise DataError(f"manifest num_tags must be >= 1, got {num_tags}")
    tag_names = {int(k): str(v) for k, v in doc.get("tag_names", {}).items()}
    return CorpusManifest(
        modality_dims=dims,
        num_tags=num_tags,
        stats=doc.get("stats", {}),
        tag_names=tag_names,
    )


def _parse_video(line: str, line_no: int, manifest: CorpusManifest) -> VideoRecord:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"records line {line_no} is not valid JSON: {exc}") from exc
    vid = str(doc["video_id"])
    duration = float(doc["duration_s"])
    shots = []
    for shot_doc in doc["shots"]:
        feats = {}
        for name, values in shot_doc["features"].items():
            if name not in manifest.modality_dims:
                raise DataError(f"video {vid!r}: unknown modality {name!r}")
            feats[name] = np.asarray(values, dtype=np.float64)
        shots.append(
            ShotRecord(start_s=float(shot_doc["start_s"]), end_s=float(shot_doc["end_s"]), features=feats)
        )
    scenes = None
    if doc.get("scenes") is not None:
        scenes = [
            SceneAnnotation(
                span=SegmentSpan(float(s["start_s"]), float(s["end_s"])),
                tags=frozenset(int(t) for t in s["tags"]),
            )
            for s in doc["scenes"]
        ]
    return VideoRecord(video_id=vid, duration_s=duration, shots=shots, scenes=scenes)


def validate_video(video: VideoRecord, manifest: CorpusManifest) -> None:
    vid = video.video_id
    if video.num_shots < 1:
        raise DataError(f"video {vid!r} has no shots")
    for idx, shot in enumerate(video.shots, start=1):
        if not shot.end_s > shot.start_s:
            raise DataError(
                f"video {vid!r} shot {idx} has non-positive length "
                f"[{shot.start_s}, {shot.end_s}]"
            )
        for name, dim in manifest.modality_dims.items():
            if name not in shot.features:
                raise DataError(f"video {vid!r} shot {idx} is missing modality {name!r}")
            got = shot.features[name].shape
            if got != (dim,):
                raise DataError(
                    f"video {vid!r} shot {idx}: modality {name!r} has dim "
                    f"{got[0] if len(got) == 1 else got}, manifest says {dim}"
                )
    for idx in range(video.num_shots - 1):
        gap = video.shots[idx + 1].start_s - video.shots[idx].end_s
        if abs(gap) > SHOT_CONTIGUITY_TOL_S:
            raise DataError(
                f"video {vid!r}: shots {idx + 1} and {idx + 2} are not contiguous "
                f"(gap {gap:+.6f} s)"
            )
    if abs(video.shots[0].start_s) > SHOT_CONTIGUITY_TOL_S:
        raise DataError(f"video {vid!r}: first shot starts at {video.shots[0].start_s}, not 0")
    if abs(video.shots[-1].end_s - video.duration_s) > SHOT_CONTIGUITY_TOL_S:
        raise DataError(
            f"video {vid!r}: last shot ends at {video.shots[-1].end_s}, "
            f"duration is {video.duration_s}"
        )
    if video.scenes is not None:
        video.scenes.sort(key=lambda s: (s.span.start_s, s.span.end_s))
        for scene in video.scenes:
            for tag in scene.tags:
                if not 1 <= tag <= manifest.num_tags:
                    raise DataError(
                        f"video {vid!r}: unknown tag id {tag} "
                        f"(vocabulary has {manifest.num_tags} tags)"
                    )
        for a, b in zip(video.scenes, video.scenes[1:]):
            if b.span.start_s < a.span.end_s - 1e-9:
                raise DataError(
                    f"video {vid!r}: scenes [{a.span.start_s}, {a.span.end_s}] and "
                    f"[{b.span.start_s}, {b.span.end_s}] overlap"
                )


def load_corpus(manifest_path, records_path) -> Corpus:
    """Load and eagerly validate a corpus. Raises DataError on any violation."""
    manifest = load_manifest(manifest_path)
    records_path = Path(records_path)
    if not records_path.exists():
        raise DataError(f"records file not found: {records_path}")
    videos = []
    with records_path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            video = _parse_video(line, line_no, manifest)
            validate_video(video, manifest)
            videos.append(video)
    return Corpus(manifest=manifest, videos=videos)


def _manifest_doc(manifest: CorpusManifest) -> dict:
    doc = {
        "modalities": dict(manifest.modality_dims),
        "num_tags": manifest.num_tags,
        "stats": manifest.stats,
    }
    if manifest.tag_names:
        doc["tag_names"] = {str(k): v for k, v in manifest.tag_names.items()}
    return doc


def _video_doc(video: VideoRecord) -> dict:
    return {
        "video_id": video.video_id,
        "duration_s": video.duration_s,
        "shots": [
            {
                "start_s": shot.start_s,
                "end_s": shot.end_s,
                "features": {name: [float(v) for v in vec] for name, vec in shot.features.items()},
            }
            for shot in video.shots
        ],
        "scenes": None
        if video.scenes is None
        else [
            {
                "start_s": scene.span.start_s,
                "end_s": scene.span.end_s,
                "tags": sorted(scene.tags),
            }
            for scene in video.scenes
        ],
    }


def save_corpus(corpus: Corpus, manifest_path, records_path) -> None:
    Path(manifest_path).parent.mkdir(parents=True, exist_ok=True)
    Path(manifest_path).write_text(json.dumps(_manifest_doc(corpus.manifest)) + "\n", encoding="utf-8")
    with Path(records_path).open("w", encoding="utf-8") as fh:
        for video in corpus.videos:
            fh.write(json.dumps(_video_doc(video)) + "\n")
