"""Padded sequence batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SequenceBatch:
    """Batch of feature sequences padded to a common length.

    data has shape (batch, max_len, dim); rows at or past each sequence's
    length are padding. Downstream consumers zero padded rows on entry and
    mask the recurrence, so padded values can never influence an output or
    a gradient.
    """

    data: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"batch data must be 3-d, got shape {self.data.shape}")
        if self.lengths.shape != (self.data.shape[0],):
            raise ValueError("lengths must have one entry per batch item")
        if len(self.lengths) == 0:
            raise ValueError("empty batch")
        if np.any(self.lengths < 1):
            raise ValueError("zero-length sequence in batch")
        if np.any(self.lengths > self.data.shape[1]):
            raise ValueError("sequence length exceeds padded length")

    @classmethod
    def from_sequences(cls, seqs) -> "SequenceBatch":
        if not seqs:
            raise ValueError("empty batch")
        dims = {s.shape[1] for s in seqs}
        if len(dims) != 1:
            raise ValueError(f"inconsistent feature dims in batch: {sorted(dims)}")
        lengths = np.array([s.shape[0] for s in seqs], dtype=np.int64)
        if np.any(lengths == 0):
            raise ValueError("zero-length sequence in batch")
        t_max = int(lengths.max())
        data = np.zeros((len(seqs), t_max, dims.pop()), dtype=seqs[0].dtype)
        for row, s in enumerate(seqs):
            data[row, : s.shape[0]] = s
        return cls(data=data, lengths=lengths)

    @property
    def mask(self) -> np.ndarray:
        """(batch, max_len) boolean validity mask."""
        return np.arange(self.data.shape[1])[None, :] < self.lengths[:, None]
