import json

import pytest

from scenestruct.config import SplitConfig, load_experiment_config
from scenestruct.errors import ConfigError, DataError
from scenestruct.models.common import TrainingHyper
from scenestruct.pipeline import PipelineConfig


class TestPublishedDefaults:
    def test_training_defaults(self):
        hyper = TrainingHyper()
        assert hyper.lr == 0.01
        assert hyper.batch_size == 32
        assert hyper.dropout == 0.5

    def test_pipeline_defaults(self):
        cfg = PipelineConfig()
        assert cfg.threshold_b == 0.65
        assert cfg.nms_tiou == 0.0

    def test_split_default_mirrors_published_fraction(self):
        assert SplitConfig().val_fraction == 0.2


class TestLoading:
    def test_empty_config_gives_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{}")
        cfg = load_experiment_config(path)
        assert cfg.training.lr == 0.01
        assert cfg.pipeline.mode == "d"

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "exp"
        sub.mkdir()
        path = sub / "c.json"
        path.write_text(json.dumps({"paths": {"corpus": "data", "out": "../shared_out"}}))
        cfg = load_experiment_config(path)
        assert cfg.paths.corpus == str(sub / "data")
        assert cfg.paths.out == str(tmp_path / "shared_out")

    def test_unknown_nested_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"training": {"learning_rate": 0.1}}))
        with pytest.raises(ConfigError, match="learning_rate"):
            load_experiment_config(path)

    def test_bad_val_fraction_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"split": {"val_fraction": 1.5}}))
        with pytest.raises(ConfigError, match="val_fraction"):
            load_experiment_config(path)


class TestMaskOverride:
    def test_train_mask_flag_is_recorded_in_checkpoint(self, tmp_path):
        from test_cli import base_config
        from scenestruct.cli import main

        cfg = base_config(tmp_path)
        assert main(["generate", "--config", str(cfg)]) == 0
        assert main(["train", "--config", str(cfg), "--net", "tag", "--mask", "audio"]) == 0
        doc = json.loads((tmp_path / "ckpts" / "tag.json").read_text())
        assert doc["config"]["mask"]["modalities"] == ["audio"]


class TestEvaluateErrors:
    def test_video_without_ground_truth_rejected(self, tiny_manifest):
        from scenestruct.data.records import Corpus
        from scenestruct.metrics import evaluate
        from scenestruct.pipeline import LoadedPrediction
        from conftest import make_video

        video = make_video("v0", [0.0, 2.0])  # no scenes
        corpus = Corpus(manifest=tiny_manifest, videos=[video])
        with pytest.raises(DataError, match="ground truth"):
            evaluate([LoadedPrediction(video_id="v0", segments=[])], corpus)
