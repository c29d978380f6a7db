"""Shared training machinery: hyperparameters and the minibatch loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..nn.optim import Adam

log = logging.getLogger(__name__)


@dataclass
class TrainingHyper:
    """Defaults follow the published recipe: Adam at 0.01, batch 32,
    dropout 0.5 right after feature concatenation."""

    lr: float = 0.01
    batch_size: int = 32
    dropout: float = 0.5
    epochs: int = 50
    patience: int = 10
    hidden_dim: int = 128
    seed: int = 0
    positive_weight: float = 1.0
    encoder_dim: int = 32
    segment_head: str = "scalar"
    max_duration_shots: int | None = None

    def as_dict(self) -> dict:
        return {
            "lr": self.lr,
            "batch_size": self.batch_size,
            "dropout": self.dropout,
            "epochs": self.epochs,
            "patience": self.patience,
            "hidden_dim": self.hidden_dim,
            "seed": self.seed,
            "positive_weight": self.positive_weight,
            "encoder_dim": self.encoder_dim,
            "segment_head": self.segment_head,
            "max_duration_shots": self.max_duration_shots,
        }


@dataclass
class TrainTrace:
    rows: list = field(default_factory=list)  # (epoch, train_loss, val_loss | None)

    def append(self, epoch, train_loss, val_loss):
        self.rows.append((epoch, train_loss, val_loss))

    def write_csv(self, path):
        import csv
        from pathlib import Path

        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for epoch, train_loss, val_loss in self.rows:
                writer.writerow([epoch, train_loss, "" if val_loss is None else val_loss])


def fit(model, items, batch_step, *, hyper: TrainingHyper, val_loss_fn=None) -> TrainTrace:
    """Minibatch loop with Adam and early stopping on validation loss.

    batch_step(batch, rng) runs forward + backward on a list of items and
    returns (loss, count), or None when the batch carries no supervision.
    Keeps the parameters of the best validation epoch. Fully deterministic
    for a fixed hyper.seed.
    """
    seq = np.random.SeedSequence(hyper.seed)
    shuffle_rng, dropout_rng = (np.random.default_rng(s) for s in seq.spawn(2))
    params = model.parameters()
    adam = Adam(params, lr=hyper.lr)
    trace = TrainTrace()
    best_val = np.inf
    best_params = None
    wait = 0
    for epoch in range(1, hyper.epochs + 1):
        order = shuffle_rng.permutation(len(items))
        total = 0.0
        count = 0
        for start in range(0, len(order), hyper.batch_size):
            batch = [items[i] for i in order[start : start + hyper.batch_size]]
            model.zero_grads()
            out = batch_step(batch, dropout_rng)
            if out is None:
                continue
            loss, n = out
            adam.step(params, model.gradients())
            total += loss * n
            count += n
        train_loss = total / count if count else float("nan")
        val_loss = val_loss_fn() if val_loss_fn is not None else None
        trace.append(epoch, train_loss, val_loss)
        log.debug("epoch %d train %.5f val %s", epoch, train_loss, val_loss)
        if val_loss is not None:
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                best_params = {k: v.copy() for k, v in params.items()}
                wait = 0
            else:
                wait += 1
                if wait >= hyper.patience:
                    break
    if best_params is not None:
        for k, v in params.items():
            v[...] = best_params[k]
    return trace
