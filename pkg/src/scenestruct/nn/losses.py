"""Masked binary cross-entropy."""

from __future__ import annotations

import numpy as np


def bce_loss(pred, target, mask=None, *, pos_weight=1.0, eps=1e-7):
    """Mean binary cross-entropy over unmasked elements.

    pred holds post-sigmoid probabilities; target holds values in [0, 1].
    Returns (loss, grad) where grad is the derivative with respect to the
    pre-sigmoid logits, already divided by the number of counted elements:
    (pred - target) / count for pos_weight 1. Probabilities are clamped to
    [eps, 1-eps] inside the logs only.
    """
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} != target shape {target.shape}")
    if mask is None:
        mask_f = np.ones(pred.shape, dtype=pred.dtype)
    else:
        mask_f = np.asarray(mask).astype(pred.dtype)
        if mask_f.shape != pred.shape:
            raise ValueError(f"mask shape {mask_f.shape} != pred shape {pred.shape}")
    count = float(mask_f.sum())
    if count == 0:
        raise ValueError("bce_loss: every element is masked out")
    p = np.clip(pred, eps, 1.0 - eps)
    per_elem = -(pos_weight * target * np.log(p) + (1.0 - target) * np.log(1.0 - p))
    loss = float((per_elem * mask_f).sum() / count)
    grad = (pos_weight * target * (pred - 1.0) + (1.0 - target) * pred) * mask_f / count
    return loss, grad.astype(pred.dtype)
