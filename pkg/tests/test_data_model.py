import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenestruct.data import (
    SegmentSpan,
    boundary_labels,
    interior_boundaries,
    load_corpus,
    save_corpus,
    shot_span_indices,
    span_from_shots,
)
from scenestruct.data.records import Corpus, CorpusManifest
from scenestruct.errors import DataError

from conftest import make_scene, make_video


def write_corpus_files(tmp_path, manifest_doc, video_docs):
    manifest = tmp_path / "manifest.json"
    records = tmp_path / "records.jsonl"
    manifest.write_text(json.dumps(manifest_doc))
    records.write_text("".join(json.dumps(v) + "\n" for v in video_docs))
    return manifest, records


MANIFEST = {"modalities": {"vis_r50": 2}, "num_tags": 3, "stats": {}}


def video_doc(video_id="v0", shots=((0.0, 2.0),), scenes=None, dim=2):
    return {
        "video_id": video_id,
        "duration_s": shots[-1][1],
        "shots": [
            {"start_s": a, "end_s": b, "features": {"vis_r50": [0.5] * dim}} for a, b in shots
        ],
        "scenes": scenes,
    }


class TestLoadCorpus:
    def test_empty_records_file_is_valid(self, tmp_path):
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [])
        corpus = load_corpus(manifest, records)
        assert len(corpus) == 0

    def test_minimal_valid_video(self, tmp_path):
        doc = video_doc(shots=((0.0, 2.0),), scenes=[{"start_s": 0.0, "end_s": 2.0, "tags": [1]}])
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        corpus = load_corpus(manifest, records)
        assert corpus.video("v0").num_shots == 1
        assert corpus.video("v0").scenes[0].tags == frozenset({1})

    def test_dimension_mismatch_names_modality(self, tmp_path):
        doc = video_doc(dim=3)
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="vis_r50"):
            load_corpus(manifest, records)

    def test_non_contiguous_shots_rejected(self, tmp_path):
        doc = video_doc(shots=((0.0, 2.0), (2.5, 4.0)))
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="contiguous"):
            load_corpus(manifest, records)

    def test_overlapping_scenes_rejected(self, tmp_path):
        doc = video_doc(
            shots=((0.0, 2.0), (2.0, 4.0)),
            scenes=[
                {"start_s": 0.0, "end_s": 3.0, "tags": [1]},
                {"start_s": 2.0, "end_s": 4.0, "tags": [2]},
            ],
        )
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="overlap"):
            load_corpus(manifest, records)

    def test_unknown_tag_id_rejected(self, tmp_path):
        doc = video_doc(shots=((0.0, 2.0),), scenes=[{"start_s": 0.0, "end_s": 2.0, "tags": [4]}])
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="tag id 4"):
            load_corpus(manifest, records)

    def test_missing_modality_rejected(self, tmp_path):
        doc = video_doc()
        doc["shots"][0]["features"] = {}
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="missing modality"):
            load_corpus(manifest, records)

    def test_errors_name_the_video(self, tmp_path):
        doc = video_doc(video_id="bad-video", dim=5)
        manifest, records = write_corpus_files(tmp_path, MANIFEST, [doc])
        with pytest.raises(DataError, match="bad-video"):
            load_corpus(manifest, records)


class TestRoundTrip:
    def test_save_load_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        video = make_video(
            "v0",
            [0.0, 1.25, 3.5, 6.0],
            scenes=[make_scene(0.0, 3.5, {1, 2}), make_scene(3.5, 6.0, {3})],
            rng=rng,
        )
        corpus = Corpus(manifest=CorpusManifest({"vis_r50": 2}, 3), videos=[video])
        save_corpus(corpus, tmp_path / "m.json", tmp_path / "r.jsonl")
        loaded = load_corpus(tmp_path / "m.json", tmp_path / "r.jsonl")
        reloaded = loaded.video("v0")
        assert reloaded.duration_s == video.duration_s
        for a, b in zip(video.shots, reloaded.shots):
            assert a.start_s == b.start_s and a.end_s == b.end_s
            assert np.array_equal(a.features["vis_r50"], b.features["vis_r50"])
        assert [s.span for s in reloaded.scenes] == [s.span for s in video.scenes]
        assert [s.tags for s in reloaded.scenes] == [s.tags for s in video.scenes]

    def test_double_save_is_byte_identical(self, tmp_path):
        video = make_video("v0", [0.0, 2.0, 4.0], scenes=[make_scene(0.0, 4.0, {1})])
        corpus = Corpus(manifest=CorpusManifest({"vis_r50": 2}, 3), videos=[video])
        save_corpus(corpus, tmp_path / "m1.json", tmp_path / "r1.jsonl")
        loaded = load_corpus(tmp_path / "m1.json", tmp_path / "r1.jsonl")
        save_corpus(loaded, tmp_path / "m2.json", tmp_path / "r2.jsonl")
        assert (tmp_path / "r1.jsonl").read_bytes() == (tmp_path / "r2.jsonl").read_bytes()


class TestBoundaryLabels:
    def test_aligned_scenes_mark_exact_joins(self):
        video = make_video(
            "v", [0.0, 2.0, 4.0, 6.0], scenes=[make_scene(0.0, 4.0, {1}), make_scene(4.0, 6.0, {2})]
        )
        assert np.array_equal(boundary_labels(video), np.array([0.0, 1.0]))

    def test_single_scene_gives_all_zeros(self):
        video = make_video("v", [0.0, 2.0, 4.0], scenes=[make_scene(0.0, 4.0, {1})])
        assert np.array_equal(boundary_labels(video), np.zeros(1))

    def test_nearest_boundary_within_tolerance(self):
        # shot boundaries at 2 and 4; GT boundary 3.7 is 0.3 from 4, 1.7 from 2
        video = make_video(
            "v", [0.0, 2.0, 4.0, 6.0], scenes=[make_scene(0.0, 3.7, {1}), make_scene(3.7, 6.0, {2})]
        )
        assert np.array_equal(boundary_labels(video), np.array([0.0, 1.0]))

    def test_outside_tolerance_gives_no_label(self):
        video = make_video(
            "v", [0.0, 2.0, 4.0, 6.0], scenes=[make_scene(0.0, 3.0, {1}), make_scene(3.0, 6.0, {2})]
        )
        # GT at 3.0 is exactly 1.0 from both shot boundaries
        assert np.array_equal(boundary_labels(video), np.zeros(2))

    def test_equidistant_tie_marks_earlier_only(self):
        video = make_video(
            "v", [0.0, 2.0, 4.0, 6.0], scenes=[make_scene(0.0, 3.0, {1}), make_scene(3.0, 6.0, {2})]
        )
        labels = boundary_labels(video, tol_s=1.5)
        assert np.array_equal(labels, np.array([1.0, 0.0]))

    def test_single_shot_video_empty_labels(self):
        video = make_video("v", [0.0, 2.0], scenes=[make_scene(0.0, 2.0, {1})])
        assert boundary_labels(video).shape == (0,)

    @given(shift=st.integers(min_value=-1000, max_value=1000).map(lambda n: n * 0.25))
    @settings(max_examples=40, deadline=None)
    def test_invariant_to_uniform_time_translation(self, shift):
        # quarter-second grid keeps every shifted timestamp exactly representable
        base = [0.0, 1.0, 2.25, 4.0, 7.5]
        scenes = [(0.0, 2.25, {1}), (2.25, 7.5, {2})]
        video_a = make_video("a", base, scenes=[make_scene(s, e, t) for s, e, t in scenes])
        video_b = make_video(
            "b",
            [t + shift for t in base],
            scenes=[make_scene(s + shift, e + shift, t) for s, e, t in scenes],
        )
        assert np.array_equal(boundary_labels(video_a), boundary_labels(video_b))


class TestSpanConversions:
    def test_first_shot(self):
        video = make_video("v", [0.0, 2.0, 5.0, 6.0])
        assert span_from_shots(video, 1, 1) == SegmentSpan(0.0, 2.0)

    def test_whole_video(self):
        video = make_video("v", [0.0, 2.0, 5.0, 6.0])
        assert span_from_shots(video, 1, 3) == SegmentSpan(0.0, 6.0)

    def test_hand_lookup(self):
        video = make_video("v", [0.0, 2.0, 5.0, 6.0])
        assert span_from_shots(video, 2, 3) == SegmentSpan(2.0, 6.0)

    def test_out_of_range(self):
        video = make_video("v", [0.0, 2.0])
        with pytest.raises(IndexError):
            span_from_shots(video, 1, 2)

    def test_misaligned_span_rejected(self):
        video = make_video("v", [0.0, 2.0, 5.0])
        with pytest.raises(DataError, match="aligned"):
            shot_span_indices(video, SegmentSpan(0.0, 3.0))

    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_round_trip_recovers_indices(self, data):
        n = data.draw(st.integers(min_value=1, max_value=8))
        bounds = [0.0]
        for _ in range(n):
            bounds.append(bounds[-1] + data.draw(st.integers(min_value=1, max_value=8)) * 0.25)
        video = make_video("v", bounds)
        i = data.draw(st.integers(min_value=1, max_value=n))
        j = data.draw(st.integers(min_value=i, max_value=n))
        assert shot_span_indices(video, span_from_shots(video, i, j)) == (i, j)


class TestInteriorBoundaries:
    def test_excludes_video_edges_and_merges_joins(self):
        spans = [SegmentSpan(0.0, 2.0), SegmentSpan(2.0, 5.0), SegmentSpan(5.0, 6.0)]
        assert interior_boundaries(spans, 6.0) == [2.0, 5.0]

    def test_gapped_annotations_keep_both_edges(self):
        spans = [SegmentSpan(0.0, 2.0), SegmentSpan(3.0, 6.0)]
        assert interior_boundaries(spans, 6.0) == [2.0, 3.0]
