"""Segment proposal scorer.

A bi-directional LSTM encodes the whole video once for global context; each
candidate segment (inclusive shot range) is summarized by the hidden states
at its two ends plus the mean hidden state over the range, then scored by a
dense head and a sigmoid. The head emits a scalar confidence or a per-tag
vector depending on head_mode.
"""

from __future__ import annotations

import logging

import numpy as np

from ..data.labels import shot_span_indices, span_from_shots
from ..errors import ConfigError, DataError
from ..fusion import ShotFuser
from ..metrics import tiou
from ..nn.batching import SequenceBatch
from ..nn.layers import Dense, sigmoid
from ..nn.losses import bce_loss
from ..nn.lstm import BiLstm
from .common import TrainingHyper, fit

log = logging.getLogger(__name__)

HEAD_MODES = ("scalar", "per_tag")


def enumerate_proposals(num_shots, max_duration_shots=None) -> list[tuple[int, int]]:
    """All inclusive 1-based shot ranges (i, j) with j - i + 1 <= the cap,
    in lexicographic order."""
    if num_shots < 1:
        raise ValueError(f"num_shots must be >= 1, got {num_shots}")
    cap = num_shots if max_duration_shots is None else max_duration_shots
    if cap < 1:
        raise ValueError(f"max_duration_shots must be >= 1, got {cap}")
    return [
        (i, j)
        for i in range(1, num_shots + 1)
        for j in range(i, min(i + cap, num_shots + 1))
    ]


def proposal_targets(proposals, video, gt_scenes=None) -> np.ndarray:
    """Soft scalar targets: the best tIoU of each proposal over GT scenes."""
    if gt_scenes is None:
        gt_scenes = video.scenes
    if gt_scenes is None:
        raise DataError(f"video {video.video_id!r} has no scenes for proposal targets")
    out = np.zeros(len(proposals), dtype=np.float64)
    for idx, (i, j) in enumerate(proposals):
        span = span_from_shots(video, i, j)
        out[idx] = max((tiou(span, s.span) for s in gt_scenes), default=0.0)
    return out


def proposal_tag_targets(proposals, video, num_tags, gt_scenes=None) -> np.ndarray:
    """Per-tag targets: the best-tIoU scene's tag indicators scaled by that
    tIoU (first scene wins ties); all-zero rows for disjoint proposals."""
    if gt_scenes is None:
        gt_scenes = video.scenes
    if gt_scenes is None:
        raise DataError(f"video {video.video_id!r} has no scenes for proposal targets")
    out = np.zeros((len(proposals), num_tags), dtype=np.float64)
    for idx, (i, j) in enumerate(proposals):
        span = span_from_shots(video, i, j)
        best_t = 0.0
        best_scene = None
        for scene in gt_scenes:
            t = tiou(span, scene.span)
            # strictly greater keeps the first scene on ties
            if t > best_t:
                best_t = t
                best_scene = scene
        if best_scene is not None:
            for k in best_scene.tags:
                out[idx, k - 1] = best_t
    return out


class SegmentNet:
    kind = "segment"

    def __init__(self, mask, dims, *, hidden_dim=128, num_tags=None, head_mode="scalar",
                 encoders=None, dropout_rate=0.5, dtype=np.float32, seed=0):
        if head_mode not in HEAD_MODES:
            raise ConfigError(f"head_mode must be one of {HEAD_MODES}, got {head_mode!r}")
        if head_mode == "per_tag" and not num_tags:
            raise ConfigError("per_tag head requires num_tags")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        self.hidden_dim = hidden_dim
        self.head_mode = head_mode
        self.num_tags = num_tags
        self.fuser = ShotFuser(mask, dims, encoders=encoders,
                               dropout_rate=dropout_rate, dtype=dtype, rng=rng)
        self.lstm = BiLstm(self.fuser.fused_dim, hidden_dim, rng=rng, dtype=dtype)
        out_dim = 1 if head_mode == "scalar" else num_tags
        self.head = Dense(6 * hidden_dim, out_dim, init="zero", dtype=dtype)

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

    @staticmethod
    def _summaries(hidden_1video, i_idx, j_idx):
        """Per-proposal summary rows: [h_i, h_j, mean(h_i..h_j)]."""
        prefix = np.concatenate(
            [np.zeros((1, hidden_1video.shape[1]), dtype=hidden_1video.dtype),
             np.cumsum(hidden_1video, axis=0, dtype=hidden_1video.dtype)],
            axis=0,
        )
        lengths = (j_idx - i_idx + 1).astype(hidden_1video.dtype)
        mean = (prefix[j_idx] - prefix[i_idx - 1]) / lengths[:, None]
        return np.concatenate([hidden_1video[i_idx - 1], hidden_1video[j_idx - 1], mean], axis=1)

    def _head_forward(self, summaries):
        # per-row reduction keeps each row's value independent of how many
        # proposals are scored together
        logits = (summaries[:, :, None] * self.head.W[None, :, :]).sum(axis=1) + self.head.b
        return sigmoid(logits)

    def _scatter_summary_grads(self, d_summary, hidden_1video, i_idx, j_idx):
        hd2 = 2 * self.hidden_dim
        d_hidden = np.zeros_like(hidden_1video)
        np.add.at(d_hidden, i_idx - 1, d_summary[:, :hd2])
        np.add.at(d_hidden, j_idx - 1, d_summary[:, hd2 : 2 * hd2])
        lengths = (j_idx - i_idx + 1).astype(hidden_1video.dtype)
        weights = d_summary[:, 2 * hd2 :] / lengths[:, None]
        diff = np.zeros((hidden_1video.shape[0] + 1, hd2), dtype=hidden_1video.dtype)
        np.add.at(diff, i_idx - 1, weights)
        np.add.at(diff, j_idx, -weights)
        d_hidden += np.cumsum(diff[:-1], axis=0)
        return d_hidden

    def forward_video(self, video, proposals, *, train=False, rng=None):
        """Scores for a list of (i, j) proposals: (N,) or (N, num_tags)."""
        for i, j in proposals:
            if not 1 <= i <= j <= video.num_shots:
                raise DataError(
                    f"proposal ({i}, {j}) out of range for video {video.video_id!r} "
                    f"with {video.num_shots} shots"
                )
        if not proposals:
            shape = (0,) if self.head_mode == "scalar" else (0, self.num_tags)
            return np.zeros(shape, dtype=self.lstm.dtype)
        fused, _ = self.fuser.forward_video(video, train=train, rng=rng)
        hidden, _ = self.lstm.forward(SequenceBatch.from_sequences([fused]))
        i_idx = np.array([i for i, _ in proposals])
        j_idx = np.array([j for _, j in proposals])
        scores = self._head_forward(self._summaries(hidden[0], i_idx, j_idx))
        return scores[:, 0] if self.head_mode == "scalar" else scores

    def score_spans(self, video, spans) -> np.ndarray:
        """Scalar confidences for segments given as time spans.

        Spans must align with shot boundaries; this is the same computation
        as forward_video restricted to the given segments.
        """
        if self.head_mode != "scalar":
            raise ConfigError("score_spans requires a scalar-head checkpoint")
        proposals = [shot_span_indices(video, span) for span in spans]
        return self.forward_video(video, proposals)

    def batch_loss_and_grads(self, items, rng, *, train=True, backward=None):
        """items: (video, i_idx, j_idx, targets). Returns (loss, count) or None.

        train controls dropout; backward (default: same as train) controls
        whether gradients are accumulated.
        """
        if backward is None:
            backward = train
        videos = [video for video, _i, _j, _t in items]
        fused = []
        fuse_caches = []
        for video in videos:
            f, cache = self.fuser.forward_video(video, train=train, rng=rng)
            fused.append(f)
            fuse_caches.append(cache)
        batch = SequenceBatch.from_sequences(fused)
        hidden, lstm_cache = self.lstm.forward(batch)
        summaries = []
        for row, (video, i_idx, j_idx, _targets) in enumerate(items):
            summaries.append(self._summaries(hidden[row, : video.num_shots], i_idx, j_idx))
        counts = [s.shape[0] for s in summaries]
        if sum(counts) == 0:
            return None
        stacked = np.concatenate(summaries, axis=0)
        probs = self._head_forward(stacked)
        dtype = self.lstm.dtype
        if self.head_mode == "scalar":
            targets = np.concatenate([t for *_rest, t in items]).astype(dtype).reshape(-1, 1)
        else:
            targets = np.concatenate([t for *_rest, t in items], axis=0).astype(dtype)
        loss, d_logits = bce_loss(probs, targets)
        if backward:
            self.head.gW += stacked.T @ d_logits
            self.head.gb += d_logits.sum(axis=0)
            d_summary = d_logits @ self.head.W.T
            d_hidden = np.zeros_like(hidden)
            offset = 0
            for row, (video, i_idx, j_idx, _t) in enumerate(items):
                n = counts[row]
                m = video.num_shots
                d_hidden[row, :m] = self._scatter_summary_grads(
                    d_summary[offset : offset + n], hidden[row, :m], i_idx, j_idx
                )
                offset += n
            d_input = self.lstm.backward(lstm_cache, d_hidden)
            for row, video in enumerate(videos):
                self.fuser.backward(fuse_caches[row], d_input[row, : video.num_shots])
        return loss, int(targets.size)

    def config_dict(self) -> dict:
        return {
            "mask": self.fuser.mask.as_dict(),
            "encoders": self.fuser.encoder_specs_dict(),
            "dims": {m: self.fuser.dims[m] for m in self.fuser.mask.modalities},
            "hidden_dim": self.hidden_dim,
            "dropout_rate": self.fuser.dropout_rate,
            "head_mode": self.head_mode,
            "num_tags": self.num_tags,
            "dtype": self.lstm.dtype.name,
        }


def _prepare_items(videos, num_tags, head_mode, max_duration_shots):
    items = []
    for video in videos:
        if video.scenes is None:
            log.warning("skipping video %s: no scenes for segment supervision", video.video_id)
            continue
        proposals = enumerate_proposals(video.num_shots, max_duration_shots)
        i_idx = np.array([i for i, _ in proposals])
        j_idx = np.array([j for _, j in proposals])
        if head_mode == "scalar":
            targets = proposal_targets(proposals, video)
        else:
            targets = proposal_tag_targets(proposals, video, num_tags)
        items.append((video, i_idx, j_idx, targets))
    return items


def train_segment(train_videos, val_videos, mask, dims, hyper: TrainingHyper,
                  *, num_tags=None, encoders=None):
    """Fit a SegmentNet against soft tIoU targets over enumerated proposals."""
    head_mode = hyper.segment_head
    items = _prepare_items(train_videos, num_tags, head_mode, hyper.max_duration_shots)
    if not items:
        raise ConfigError("segment training requires videos with scene annotations")
    model = SegmentNet(
        mask,
        dims,
        hidden_dim=hyper.hidden_dim,
        num_tags=num_tags,
        head_mode=head_mode,
        encoders=encoders,
        dropout_rate=hyper.dropout,
        seed=hyper.seed,
    )
    val_items = _prepare_items(val_videos, num_tags, head_mode, hyper.max_duration_shots)

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
