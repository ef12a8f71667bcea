"""Temporal consensus: per-frame attribute predictions to video-level vectors.

Continuous attributes are summarized by normalized 5-bin histograms with
edges at multiples of 0.2 (last bin right-closed). "Orderless" consensus
pools the whole video into one histogram; "ordered" splits the video into
two segments at the frame midpoint and concatenates per-segment histograms,
keeping coarse temporal order. The first segment takes the extra frame when
the frame count is odd, so the second segment always holds floor(T/2) frames.

Frames with no detected face are discarded by every aggregator. A segment
left empty by that rule yields a zero histogram plus an empty flag rather
than an error, because half a video can legitimately contain no faces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from traitfusion.types import (
    EMOTIONS,
    ETHNICITIES,
    GENDERS,
    FrameAttributeSeries,
    MissingAttributeError,
    ModalityConfig,
    ValidationError,
)

HIST_BINS = 5
# upper edges of the first four bins; the fifth bin is [0.8, 1.0] closed
_BIN_EDGES = np.array([0.2, 0.4, 0.6, 0.8], dtype=np.float64)


def slice_bounds(frame_count: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Half-open frame-index ranges of the two ordered segments.

    The boundary sits at ceil(T/2): for odd T the first segment keeps the
    extra frame and the second segment has exactly floor(T/2) frames.
    """
    half = frame_count - frame_count // 2
    return (0, half), (half, frame_count)


def select_equidistant_frames(
    frame_count: int, available_indices: Sequence[int], m: int
) -> np.ndarray:
    """Pick ``m`` equidistant frame indices, snapped to available ones.

    Targets are round(k * (T - 1) / (m - 1)) for k = 0..m-1 (round half up);
    for m = 1 the single target is floor(T / 2). Each target snaps to the
    nearest available index, ties toward the smaller index. The result is
    sorted, has length exactly ``m``, and may contain duplicates when
    availability forces them.
    """
    if frame_count < 1:
        raise ValidationError("frame_count must be >= 1")
    if m < 1:
        raise ValidationError("m must be >= 1")
    avail = np.unique(np.asarray(available_indices, dtype=np.int64))
    if avail.size == 0:
        raise MissingAttributeError("no available frame indices to select from")
    if m == 1:
        targets = np.array([frame_count // 2], dtype=np.float64)
    else:
        k = np.arange(m, dtype=np.float64)
        targets = np.floor(k * (frame_count - 1) / (m - 1) + 0.5)
    # snap to nearest available index; exact midpoints resolve to the smaller
    pos = np.searchsorted(avail, targets)
    pos = np.clip(pos, 0, avail.size - 1)
    left = avail[np.maximum(pos - 1, 0)]
    right = avail[pos]
    use_left = (pos > 0) & ((targets - left) <= (right - targets))
    chosen = np.where(use_left, left, right)
    return np.sort(chosen)


def histogram_5bin(scores: Sequence[float]) -> tuple[np.ndarray, bool]:
    """Normalized 5-bin histogram of scores in [0, 1].

    Returns ``(values, empty)``; an empty input gives a zero vector with
    ``empty=True`` instead of an error.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        return np.zeros(HIST_BINS, dtype=np.float64), True
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("histogram scores must lie in [0, 1]")
    bins = np.searchsorted(_BIN_EDGES, arr, side="right")
    counts = np.bincount(bins, minlength=HIST_BINS).astype(np.float64)
    return counts / arr.size, False


def _segment_masks(series: FrameAttributeSeries, mode: str) -> list[np.ndarray]:
    """Face-frame masks for the segments implied by a consensus mode."""
    face = series.face_detected
    if mode == "orderless":
        return [face]
    (a0, a1), (b0, b1) = slice_bounds(series.frame_count)
    in_first = (series.frame_index >= a0) & (series.frame_index < a1)
    in_second = (series.frame_index >= b0) & (series.frame_index < b1)
    if mode == "ordered":
        return [face & in_first, face & in_second]
    if mode == "first_half":
        return [face & in_first]
    if mode == "second_half":
        return [face & in_second]
    raise ValidationError(f"unknown consensus mode {mode!r}")


def emotion_consensus(series: FrameAttributeSeries, mode: str) -> tuple[np.ndarray, tuple[bool, ...]]:
    """Per-emotion 5-bin histograms of per-frame probabilities.

    Orderless and half modes give 7*5 = 35 values; ordered gives 70 (first
    segment block then second). Returns the vector and one empty flag per
    segment.
    """
    blocks: list[np.ndarray] = []
    flags: list[bool] = []
    for mask in _segment_masks(series, mode):
        probs = series.emotion_probs[mask]
        segment = np.zeros((len(EMOTIONS), HIST_BINS), dtype=np.float64)
        empty = probs.shape[0] == 0
        if not empty:
            for e in range(len(EMOTIONS)):
                segment[e], _ = histogram_5bin(probs[:, e])
        blocks.append(segment.reshape(-1))
        flags.append(empty)
    return np.concatenate(blocks), tuple(flags)


def attractiveness_consensus(
    series: FrameAttributeSeries, mode: str
) -> tuple[np.ndarray, tuple[bool, ...]]:
    """5-bin histogram(s) of the per-frame attractiveness score.

    Orderless and half modes give 5 values; ordered gives 10.
    """
    blocks: list[np.ndarray] = []
    flags: list[bool] = []
    for mask in _segment_masks(series, mode):
        hist, empty = histogram_5bin(series.attractiveness[mask])
        blocks.append(hist)
        flags.append(empty)
    return np.concatenate(blocks), tuple(flags)


def age_consensus(series: FrameAttributeSeries) -> float:
    """Median of per-frame ages over face frames; even counts average the
    middle two."""
    ages = series.age[series.face_detected]
    if ages.size == 0:
        raise MissingAttributeError(f"video {series.video_id}: no face frames for age consensus")
    return float(np.median(ages))


def _vote_consensus(probs: np.ndarray, n_categories: int, video_id: str, what: str) -> np.ndarray:
    if probs.shape[0] == 0:
        raise MissingAttributeError(f"video {video_id}: no face frames for {what} consensus")
    votes = np.bincount(np.argmax(probs, axis=1), minlength=n_categories)
    # ties break to the lowest canonical index; argmax already does that
    winner = int(np.argmax(votes))
    out = np.zeros(n_categories, dtype=np.float64)
    out[winner] = 1.0
    return out


def gender_consensus(series: FrameAttributeSeries) -> np.ndarray:
    """One-hot majority vote over per-frame argmax gender predictions."""
    return _vote_consensus(
        series.gender_probs[series.face_detected], len(GENDERS), series.video_id, "gender"
    )


def ethnicity_consensus(series: FrameAttributeSeries) -> np.ndarray:
    """One-hot majority vote over per-frame argmax ethnicity predictions."""
    return _vote_consensus(
        series.ethnicity_probs[series.face_detected], len(ETHNICITIES), series.video_id, "ethnicity"
    )


@dataclass(frozen=True)
class ConsensusVector:
    """Video-level attribute blocks, present only when configured.

    ``provenance`` records, per block, the consensus mode used and which
    segments came up empty, so downstream reports can explain zeros.
    """

    video_id: str
    emotion: Optional[np.ndarray] = None  # 35 or 70 values
    attractiveness: Optional[np.ndarray] = None  # 5 or 10 values
    age: Optional[float] = None
    gender: Optional[np.ndarray] = None  # one-hot, 2
    ethnicity: Optional[np.ndarray] = None  # one-hot, 3
    provenance: Mapping[str, tuple] = None  # type: ignore[assignment]

    def block(self, attribute: str) -> np.ndarray:
        value = getattr(self, attribute)
        if value is None:
            raise MissingAttributeError(
                f"video {self.video_id}: attribute {attribute} not in consensus"
            )
        if attribute == "age":
            return np.array([value], dtype=np.float64)
        return value


def build_consensus(series: FrameAttributeSeries, config: ModalityConfig) -> ConsensusVector:
    """Assemble the attribute blocks named in ``config``.

    Raises :class:`MissingAttributeError` naming the video when a required
    block cannot be computed (age/gender/ethnicity with zero face frames).
    """
    fields: dict = {"video_id": series.video_id}
    provenance: dict[str, tuple] = {}
    for attribute in config.attributes:
        if attribute == "emotion":
            vec, flags = emotion_consensus(series, config.emotion_consensus)
            fields["emotion"] = vec
            provenance["emotion"] = (config.emotion_consensus, flags)
        elif attribute == "attractiveness":
            vec, flags = attractiveness_consensus(series, config.attractiveness_consensus)
            fields["attractiveness"] = vec
            provenance["attractiveness"] = (config.attractiveness_consensus, flags)
        elif attribute == "age":
            fields["age"] = age_consensus(series)
            provenance["age"] = ("median",)
        elif attribute == "gender":
            fields["gender"] = gender_consensus(series)
            provenance["gender"] = ("mode",)
        elif attribute == "ethnicity":
            fields["ethnicity"] = ethnicity_consensus(series)
            provenance["ethnicity"] = ("mode",)
    return ConsensusVector(provenance=provenance, **fields)
