"""Saving, loading and bundling trained submodels."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from ..fusion import EncoderSpec, ModalityMask
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from .boundary import BoundaryNet
from .segment import SegmentNet
from .tag import TagNet

CHECKPOINT_FILES = {
    ("boundary", None): "boundary.json",
    ("segment", "scalar"): "segment_scalar.json",
    ("segment", "per_tag"): "segment_per_tag.json",
    ("tag", None): "tag.json",
}

# which submodels each pipeline mode needs, as (net, head_mode) keys
MODE_REQUIREMENTS = {
    "a": [("boundary", None), ("tag", None)],
    "b": [("segment", "scalar"), ("tag", None)],
    "c": [("segment", "per_tag")],
    "d": [("boundary", None), ("segment", "scalar"), ("tag", None)],
}


def checkpoint_filename(net: str, head_mode=None) -> str:
    key = (net, head_mode if net == "segment" else None)
    if key not in CHECKPOINT_FILES:
        raise CheckpointError(f"no checkpoint naming rule for net {net!r} head {head_mode!r}")
    return CHECKPOINT_FILES[key]


def save_model(model, path) -> None:
    save_checkpoint(path, model.kind, model.config_dict(), model.parameters())


def _build_from_config(kind: str, config: dict):
    mask = ModalityMask.from_names(
        config["mask"]["modalities"], include_length=config["mask"]["include_length"]
    )
    encoders = {
        mod: EncoderSpec(trainable=spec["trainable"], dim=spec["dim"])
        for mod, spec in config.get("encoders", {}).items()
    }
    common = dict(
        hidden_dim=config["hidden_dim"],
        encoders=encoders,
        dropout_rate=config["dropout_rate"],
        dtype=np.dtype(config.get("dtype", "float32")),
    )
    dims = config["dims"]
    if kind == "boundary":
        return BoundaryNet(mask, dims, positive_weight=config.get("positive_weight", 1.0), **common)
    if kind == "segment":
        return SegmentNet(
            mask, dims, head_mode=config["head_mode"], num_tags=config.get("num_tags"), **common
        )
    if kind == "tag":
        return TagNet(mask, dims, config["num_tags"], **common)
    raise CheckpointError(f"unknown model kind {kind!r}")


def load_model(path, expected_kind=None):
    kind, config, params = load_checkpoint(path)
    if expected_kind is not None and kind != expected_kind:
        raise CheckpointError(f"checkpoint {path} holds a {kind!r} model, expected {expected_kind!r}")
    model = _build_from_config(kind, config)
    own = model.parameters()
    if set(own) != set(params):
        raise CheckpointError(f"checkpoint {path} parameter names do not match the model")
    for name, value in params.items():
        if own[name].shape != value.shape:
            raise CheckpointError(
                f"checkpoint {path}: parameter {name} has shape {value.shape}, "
                f"model expects {own[name].shape}"
            )
        own[name][...] = value
    return model


@dataclass
class ModelBundle:
    """Trained submodels; segment holds whichever head the mode needs."""

    boundary: BoundaryNet | None = None
    segment: SegmentNet | None = None
    tag: TagNet | None = None

    def validate_for_corpus(self, manifest) -> None:
        for net in (self.boundary, self.segment, self.tag):
            if net is None:
                continue
            for mod in net.fuser.mask.modalities:
                have = manifest.modality_dims.get(mod)
                if have != net.fuser.dims[mod]:
                    raise CheckpointError(
                        f"{net.kind} checkpoint expects modality {mod!r} of dim "
                        f"{net.fuser.dims[mod]}, corpus manifest has {have}"
                    )
            num_tags = getattr(net, "num_tags", None)
            if num_tags and num_tags != manifest.num_tags:
                raise CheckpointError(
                    f"{net.kind} checkpoint was trained with {num_tags} tags, "
                    f"corpus manifest has {manifest.num_tags}"
                )


def load_bundle(checkpoint_dir, mode: str) -> ModelBundle:
    """Load the submodels a pipeline mode requires from a directory."""
    if mode not in MODE_REQUIREMENTS:
        raise CheckpointError(f"unknown pipeline mode {mode!r}")
    bundle = ModelBundle()
    for net, head in MODE_REQUIREMENTS[mode]:
        path = Path(checkpoint_dir) / checkpoint_filename(net, head)
        if not path.exists():
            raise CheckpointError(
                f"mode {mode!r} requires a {net} checkpoint"
                + (f" with head {head!r}" if head else "")
                + f"; {path} not found"
            )
        model = load_model(path, expected_kind=net)
        if net == "segment" and model.head_mode != head:
            raise CheckpointError(
                f"checkpoint {path} has head mode {model.head_mode!r}, mode {mode!r} needs {head!r}"
            )
        setattr(bundle, net, model)
    return bundle
