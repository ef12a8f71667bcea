"""Evaluation metrics and residual-improvement analysis.

Accuracy per trait is one minus the mean absolute error, so it lives in
[0, 1] for in-range predictions. The residual analysis compares two
prediction sets against the same ground truth: for each video and trait
the residual is how much closer the compared predictions are than the
baseline ones, and the curve reports the fraction of videos whose
residual clears a moving threshold (a survival function, so it is
non-increasing).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from traitfusion.types import TRAITS, TraitVector, ValidationError, _freeze


def _stack(vectors: Sequence[TraitVector], name: str) -> np.ndarray:
    if len(vectors) == 0:
        raise ValidationError(f"{name} must be non-empty")
    return np.array([v.as_array() for v in vectors], dtype=np.float64)


def _aligned(*named: tuple[str, Sequence[TraitVector]]) -> list[np.ndarray]:
    arrays = [_stack(vectors, name) for name, vectors in named]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        counts = ", ".join(f"{name}={len(vectors)}" for name, vectors in named)
        raise ValidationError(f"prediction lists are misaligned: {counts}")
    return arrays


@dataclass(frozen=True)
class EvaluationResult:
    """Per-trait and mean accuracy over a set of video-level predictions."""

    per_trait_accuracy: np.ndarray  # (5,)
    mean_accuracy: float
    per_trait_mae: np.ndarray  # (5,)
    n_videos: int

    def __post_init__(self) -> None:
        for name in ("per_trait_accuracy", "per_trait_mae"):
            arr = _freeze(np.asarray(getattr(self, name), dtype=np.float64).copy())
            object.__setattr__(self, name, arr)

    def as_dict(self) -> dict[str, float]:
        out = {f"accuracy_{t}": float(a) for t, a in zip(TRAITS, self.per_trait_accuracy)}
        out["accuracy_mean"] = self.mean_accuracy
        out.update({f"mae_{t}": float(m) for t, m in zip(TRAITS, self.per_trait_mae)})
        out["n_videos"] = self.n_videos
        return out


def accuracy(predictions: Sequence[TraitVector], ground_truth: Sequence[TraitVector]) -> EvaluationResult:
    """Per-trait accuracy 1 - mean|p - gt| and its mean over the five traits."""
    p, gt = _aligned(("predictions", predictions), ("ground_truth", ground_truth))
    mae = np.abs(p - gt).mean(axis=0)
    acc = 1.0 - mae
    return EvaluationResult(
        per_trait_accuracy=acc,
        mean_accuracy=float(acc.mean()),
        per_trait_mae=mae,
        n_videos=p.shape[0],
    )


@dataclass(frozen=True)
class ResidualCurve:
    """Survival curves of per-video improvement residuals, one per trait.

    ``values[k, j]`` is the fraction of videos whose trait-j residual is
    at least ``thresholds[k]``.
    """

    thresholds: np.ndarray  # (K,)
    values: np.ndarray  # (K, 5)

    def __post_init__(self) -> None:
        for name in ("thresholds", "values"):
            arr = _freeze(np.asarray(getattr(self, name), dtype=np.float64).copy())
            object.__setattr__(self, name, arr)

    def series(self, trait: str) -> tuple[np.ndarray, np.ndarray]:
        """Plot-ready (threshold, fraction) columns for one trait."""
        if trait not in TRAITS:
            raise ValidationError(f"unknown trait {trait!r}")
        return self.thresholds, self.values[:, TRAITS.index(trait)]


def residuals(
    baseline_preds: Sequence[TraitVector],
    compared_preds: Sequence[TraitVector],
    ground_truth: Sequence[TraitVector],
) -> np.ndarray:
    """(N, 5) improvement residuals |p_b - gt| - |p_c - gt|.

    Positive where the compared predictions are closer to ground truth.
    """
    b, c, gt = _aligned(
        ("baseline_preds", baseline_preds),
        ("compared_preds", compared_preds),
        ("ground_truth", ground_truth),
    )
    return np.abs(b - gt) - np.abs(c - gt)


def residual_curve(
    baseline_preds: Sequence[TraitVector],
    compared_preds: Sequence[TraitVector],
    ground_truth: Sequence[TraitVector],
    grid_step: float = 0.001,
) -> ResidualCurve:
    """Fraction of videos with residual >= th, per trait, over a grid on [0, 1]."""
    if not 0.0 < grid_step <= 1.0:
        raise ValidationError("grid_step must be in (0, 1]")
    steps = 1.0 / grid_step
    if abs(steps - round(steps)) > 1e-9:
        raise ValidationError("grid_step must divide 1 evenly")
    k = int(round(steps))
    d = residuals(baseline_preds, compared_preds, ground_truth)
    thresholds = np.arange(k + 1, dtype=np.float64) / k
    n = d.shape[0]
    values = np.empty((k + 1, d.shape[1]), dtype=np.float64)
    for j in range(d.shape[1]):
        ordered = np.sort(d[:, j])
        values[:, j] = (n - np.searchsorted(ordered, thresholds, side="left")) / n
    return ResidualCurve(thresholds=thresholds, values=values)


def top_improvers(
    baseline_preds: Sequence[TraitVector],
    compared_preds: Sequence[TraitVector],
    ground_truth: Sequence[TraitVector],
    k: int,
    video_ids: Sequence[str],
) -> dict[str, tuple[str, ...]]:
    """Per trait, the k video ids with the largest improvement residuals.

    Sorted by residual descending; ties broken by video id ascending, so
    the ranking is reproducible.
    """
    d = residuals(baseline_preds, compared_preds, ground_truth)
    if len(video_ids) != d.shape[0]:
        raise ValidationError(
            f"video_ids length {len(video_ids)} does not match predictions {d.shape[0]}"
        )
    if not 0 <= k <= d.shape[0]:
        raise ValidationError(f"k={k} must be between 0 and {d.shape[0]}")
    ids = list(video_ids)
    out: dict[str, tuple[str, ...]] = {}
    for j, trait in enumerate(TRAITS):
        order = sorted(range(len(ids)), key=lambda i: (-d[i, j], ids[i]))
        out[trait] = tuple(ids[i] for i in order[:k])
    return out
