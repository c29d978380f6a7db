"""Scene-boundary classifier over a video's shot sequence.

A two-layer bi-directional LSTM reads the fused shot features; for each of
the M-1 interior shot boundaries, the hidden states of the two flanking
shots feed a dense head and a sigmoid, giving a boundary score in [0, 1].
"""

from __future__ import annotations

import numpy as np

from ..data.labels import boundary_labels
from ..errors import ConfigError
from ..fusion import ShotFuser
from ..nn.batching import SequenceBatch
from ..nn.layers import Dense, sigmoid
from ..nn.losses import bce_loss
from ..nn.lstm import BiLstm
from .common import TrainingHyper, fit


class BoundaryNet:
    kind = "boundary"

    def __init__(self, mask, dims, *, hidden_dim=128, encoders=None,
                 dropout_rate=0.5, dtype=np.float32, seed=0, positive_weight=1.0):
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        self.hidden_dim = hidden_dim
        self.positive_weight = positive_weight
        self.fuser = ShotFuser(mask, dims, encoders=encoders,
                               dropout_rate=dropout_rate, dtype=dtype, rng=rng)
        self.lstm = BiLstm(self.fuser.fused_dim, hidden_dim, rng=rng, dtype=dtype)
        self.head = Dense(4 * hidden_dim, 1, init="zero", dtype=dtype)

    def parameters(self) -> dict:
        out = {f"fuser.{k}": v for k, v in self.fuser.params.items()}
        out.update({f"lstm.{k}": v for k, v in self.lstm.params.items()})
        out.update({f"head.{k}": v for k, v in self.head.params().items()})
        return out

    def gradients(self) -> dict:
        out = {f"fuser.{k}": v for k, v in self.fuser.grads.items()}
        out.update({f"lstm.{k}": v for k, v in self.lstm.grads.items()})
        out.update({f"head.{k}": v for k, v in self.head.grads().items()})
        return out

    def zero_grads(self) -> None:
        self.fuser.zero_grads()
        self.lstm.zero_grads()
        self.head.zero_grads()

    def _forward_batch(self, videos, *, train, rng):
        fused = []
        fuse_caches = []
        for video in videos:
            f, cache = self.fuser.forward_video(video, train=train, rng=rng)
            fused.append(f)
            fuse_caches.append(cache)
        batch = SequenceBatch.from_sequences(fused)
        hidden, lstm_cache = self.lstm.forward(batch)
        if hidden.shape[1] < 2:
            return None, (batch, fuse_caches, lstm_cache, hidden)
        pair = np.concatenate([hidden[:, :-1], hidden[:, 1:]], axis=2)
        b_sz, tm1, dim = pair.shape
        logits = (pair.reshape(b_sz * tm1, dim) @ self.head.W + self.head.b).reshape(b_sz, tm1)
        probs = sigmoid(logits)
        return probs, (batch, fuse_caches, lstm_cache, hidden, pair)

    def forward_video(self, video, *, train=False, rng=None) -> np.ndarray:
        """Boundary scores b_1..b_{M-1}; empty for single-shot videos."""
        if video.num_shots < 2:
            return np.zeros(0, dtype=self.lstm.dtype)
        probs, _cache = self._forward_batch([video], train=train, rng=rng)
        return probs[0]

    def batch_loss_and_grads(self, items, rng, *, train=True, backward=None):
        """items: (video, labels) pairs. Returns (loss, count) or None.

        train controls dropout; backward (default: same as train) controls
        whether gradients are accumulated.
        """
        if backward is None:
            backward = train
        videos = [video for video, _labels in items]
        probs, cache = self._forward_batch(videos, train=train, rng=rng)
        if probs is None:
            return None
        batch, fuse_caches, lstm_cache, hidden, pair = cache
        b_sz, tm1 = probs.shape
        dtype = self.lstm.dtype
        targets = np.zeros((b_sz, tm1), dtype=dtype)
        valid = np.zeros((b_sz, tm1), dtype=bool)
        for row, (_video, labels) in enumerate(items):
            n = len(labels)
            targets[row, :n] = labels
            valid[row, :n] = True
        if not valid.any():
            return None
        loss, d_logits = bce_loss(probs, targets, valid, pos_weight=self.positive_weight)
        if backward:
            hd2 = 2 * self.hidden_dim
            d_pair = d_logits[:, :, None] * self.head.W[None, None, :, 0]
            self.head.gW[:, 0] += np.einsum("btk,bt->k", pair, d_logits)
            self.head.gb += d_logits.sum()
            d_hidden = np.zeros_like(hidden)
            d_hidden[:, :-1] += d_pair[:, :, :hd2]
            d_hidden[:, 1:] += d_pair[:, :, hd2:]
            d_input = self.lstm.backward(lstm_cache, d_hidden)
            for row, video in enumerate(videos):
                self.fuser.backward(fuse_caches[row], d_input[row, : video.num_shots])
        return loss, int(valid.sum())

    def config_dict(self) -> dict:
        return {
            "mask": self.fuser.mask.as_dict(),
            "encoders": self.fuser.encoder_specs_dict(),
            "dims": {m: self.fuser.dims[m] for m in self.fuser.mask.modalities},
            "hidden_dim": self.hidden_dim,
            "dropout_rate": self.fuser.dropout_rate,
            "positive_weight": self.positive_weight,
            "dtype": self.lstm.dtype.name,
        }


def boundaries_to_scenes(scores, threshold_b) -> list[tuple[int, int]]:
    """Partition shots 1..M by cutting at every score >= threshold_b.

    scores has length M-1; returns inclusive 1-based shot index pairs that
    tile the video. Raising the threshold never increases the scene count.
    """
    if not 0.0 < threshold_b < 1.0:
        raise ConfigError(f"threshold_b must be in (0, 1), got {threshold_b}")
    m = len(scores) + 1
    scenes = []
    start = 1
    for idx, score in enumerate(scores, start=1):
        if score >= threshold_b:
            scenes.append((start, idx))
            start = idx + 1
    scenes.append((start, m))
    return scenes


def train_boundary(train_videos, val_videos, mask, dims, hyper: TrainingHyper,
                   *, encoders=None):
    """Fit a BoundaryNet against boundary labels derived from ground truth."""
    labeled = [v for v in train_videos if v.scenes is not None]
    if not labeled:
        raise ConfigError("boundary training requires videos with scene annotations")
    items = [(v, boundary_labels(v)) for v in labeled]
    model = BoundaryNet(
        mask,
        dims,
        hidden_dim=hyper.hidden_dim,
        encoders=encoders,
        dropout_rate=hyper.dropout,
        seed=hyper.seed,
        positive_weight=hyper.positive_weight,
    )

    val_items = [(v, boundary_labels(v)) for v in val_videos if v.scenes is not None]

    def val_loss():
        out = model.batch_loss_and_grads(val_items, None, train=False)
        return out[0] if out else float("inf")

    trace = fit(
        model,
        items,
        lambda batch, rng: model.batch_loss_and_grads(batch, rng, train=True),
        hyper=hyper,
        val_loss_fn=val_loss if val_items else None,
    )
    return model, trace
