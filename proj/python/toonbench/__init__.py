"""Evaluation toolkit for foreground alpha mattes.

Masks are 2-D uint8 arrays (0 background, 255 foreground). Metric functions
take ``(pred, gt)`` and raise ``ToonbenchError`` on undefined input; the
error carries a ``code`` attribute such as ``"EmptyForeground"``.
"""

from ._toonbench import (
    ToonbenchError,
    bce_score,
    boundary_iou,
    composite_loss,
    e_measure,
    evaluate_all,
    f_measure,
    iou_loss,
    load_mask,
    mae,
    mse,
    pixel_accuracy,
    s_measure,
    save_mask,
    split_counts,
    ssim_loss,
    weighted_f_measure,
)

__all__ = [
    "ToonbenchError",
    "bce_score",
    "boundary_iou",
    "composite_loss",
    "e_measure",
    "evaluate_all",
    "f_measure",
    "iou_loss",
    "load_mask",
    "mae",
    "mse",
    "pixel_accuracy",
    "s_measure",
    "save_mask",
    "split_counts",
    "ssim_loss",
    "weighted_f_measure",
]
