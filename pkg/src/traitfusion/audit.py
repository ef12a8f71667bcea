"""Observed-subject bias audits over ground-truth trait labels.

Four analyses, each descriptive (no significance testing):

* grouped trait statistics by gender, ethnicity, and their cross product,
  with group shares of the population;
* trait means across six age ranges;
* mean attractiveness histograms for the videos with the highest and
  lowest labels per trait;
* accumulated counts of confidently recognised emotions for the same
  extreme sets.

Extreme ("decile") sets take ceil(fraction * N) videos from each end of
the per-trait label ranking with deterministic (score, video_id) tie
breaking, and an error is raised when the two ends would overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from traitfusion.types import (
    EMOTIONS,
    ETHNICITIES,
    GENDERS,
    TRAIT_LETTERS,
    TRAITS,
    FrameAttributeSeries,
    SubjectMetadata,
    ValidationError,
    VideoRecord,
    _freeze,
)

GROUP_FAMILIES = ("gender", "ethnicity", "ethnicity_gender")
AGE_BIN_LABELS = ("<19", "19-24", "25-32", "33-45", "46-60", ">60")
# inclusive floor(age) bounds per bin
_AGE_BOUNDS = ((None, 18), (19, 24), (25, 32), (33, 45), (46, 60), (61, None))

GROUP_SOURCES = ("metadata", "predicted")


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.2f}±{std:.2f}"


# -- grouped statistics ---------------------------------------------------------


@dataclass(frozen=True)
class GroupRow:
    family: str  # gender | ethnicity | ethnicity_gender
    name: str
    count: int
    share: float  # percent of the family's resolvable population
    mean: np.ndarray  # (5,)
    std: np.ndarray  # (5,) population std

    def __post_init__(self) -> None:
        for field in ("mean", "std"):
            arr = _freeze(np.asarray(getattr(self, field), dtype=np.float64).copy())
            object.__setattr__(self, field, arr)

    def cells(self) -> list[str]:
        return [format_mean_std(m, s) for m, s in zip(self.mean, self.std)]


@dataclass(frozen=True)
class GroupStatsTable:
    rows: tuple[GroupRow, ...]
    source: str
    excluded: Mapping[str, int]  # family -> records without a resolvable group

    def family(self, family: str) -> tuple[GroupRow, ...]:
        return tuple(r for r in self.rows if r.family == family)

    def format(self) -> str:
        header = ["family", "group", "share_pct", "count"] + list(TRAIT_LETTERS)
        lines = ["\t".join(header)]
        for r in self.rows:
            lines.append(
                "\t".join([r.family, r.name, f"{r.share:.1f}", str(r.count)] + r.cells())
            )
        return "\n".join(lines) + "\n"


def _group_of(meta: SubjectMetadata | None, family: str) -> str | None:
    if meta is None:
        return None
    if family == "gender":
        return meta.gender
    if family == "ethnicity":
        return meta.ethnicity
    if meta.ethnicity is None or meta.gender is None:
        return None
    return f"{meta.ethnicity} {meta.gender}"


def _family_names(family: str) -> list[str]:
    if family == "gender":
        return list(GENDERS)
    if family == "ethnicity":
        return list(ETHNICITIES)
    return [f"{e} {g}" for e in ETHNICITIES for g in GENDERS]


def group_stats(
    records: Sequence[VideoRecord],
    predicted: Mapping[str, SubjectMetadata] | None = None,
    source: str = "metadata",
) -> GroupStatsTable:
    """Per-group label mean/std tables by gender, ethnicity, and both.

    ``source`` selects where group membership comes from: the dataset's
    subject metadata, or externally predicted assignments (pass
    ``predicted``). Records without a resolvable group are excluded from
    that family and counted.
    """
    if source not in GROUP_SOURCES:
        raise ValidationError(f"source must be one of {GROUP_SOURCES}, got {source!r}")
    if source == "predicted" and predicted is None:
        raise ValidationError("source='predicted' requires predicted group assignments")
    if not records:
        raise ValidationError("records must be non-empty")

    def resolve(record: VideoRecord) -> SubjectMetadata | None:
        if source == "metadata":
            return record.metadata
        return predicted.get(record.video_id)

    labels = np.array([r.labels.as_array() for r in records])
    rows: list[GroupRow] = []
    excluded: dict[str, int] = {}
    for family in GROUP_FAMILIES:
        groups = [_group_of(resolve(r), family) for r in records]
        mask_known = np.array([g is not None for g in groups])
        excluded[family] = int((~mask_known).sum())
        total = int(mask_known.sum())
        if total == 0:
            continue
        for name in _family_names(family):
            mask = np.array([g == name for g in groups])
            n = int(mask.sum())
            if n == 0:
                continue
            sub = labels[mask]
            rows.append(
                GroupRow(
                    family=family,
                    name=name,
                    count=n,
                    share=100.0 * n / total,
                    mean=sub.mean(axis=0),
                    std=sub.std(axis=0),
                )
            )
    return GroupStatsTable(rows=tuple(rows), source=source, excluded=excluded)


# -- age trend ------------------------------------------------------------------


@dataclass(frozen=True)
class AgeBinReport:
    labels: tuple[str, ...]
    counts: np.ndarray  # (6,) int
    means: np.ndarray  # (6, 5); nan rows for empty bins
    excluded: int  # records without an age value

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", _freeze(np.asarray(self.counts, dtype=np.int64).copy()))
        object.__setattr__(self, "means", _freeze(np.asarray(self.means, dtype=np.float64).copy()))

    def format(self) -> str:
        header = ["age_bin", "count"] + [t for t in TRAITS]
        lines = ["\t".join(header)]
        for i, label in enumerate(self.labels):
            cells = [label, str(int(self.counts[i]))]
            if self.counts[i]:
                cells += [f"{v:.4f}" for v in self.means[i]]
            else:
                cells += [""] * len(TRAITS)
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"


def age_bin_index(age: float) -> int:
    """Bin by floor(age); ranges are closed on integer years."""
    year = math.floor(age)
    for i, (lo, hi) in enumerate(_AGE_BOUNDS):
        if (lo is None or year >= lo) and (hi is None or year <= hi):
            return i
    raise ValidationError(f"age {age!r} not binnable")  # unreachable for finite ages


def age_trend(records: Sequence[VideoRecord], ages: Mapping[str, float]) -> AgeBinReport:
    """Label means per age range; ages usually come from age consensus."""
    counts = np.zeros(len(AGE_BIN_LABELS), dtype=np.int64)
    sums = np.zeros((len(AGE_BIN_LABELS), len(TRAITS)))
    excluded = 0
    for record in records:
        age = ages.get(record.video_id)
        if age is None or not np.isfinite(age):
            excluded += 1
            continue
        i = age_bin_index(float(age))
        counts[i] += 1
        sums[i] += record.labels.as_array()
    means = np.full((len(AGE_BIN_LABELS), len(TRAITS)), np.nan)
    populated = counts > 0
    means[populated] = sums[populated] / counts[populated, None]
    return AgeBinReport(labels=AGE_BIN_LABELS, counts=counts, means=means, excluded=excluded)


# -- extremes selection ----------------------------------------------------------


def decile_sets(
    records: Sequence[VideoRecord], fraction: float
) -> dict[str, tuple[tuple[str, ...], tuple[str, ...]]]:
    """Per trait, the (top, bottom) video-id sets of size ceil(fraction*N).

    Ranking is by ground-truth label with (score, video_id) tie breaking;
    the two sets never overlap (an error is raised when they would).
    """
    if not 0.0 < fraction <= 0.5:
        raise ValidationError(f"fraction must be in (0, 0.5], got {fraction!r}")
    n = len(records)
    if n == 0:
        raise ValidationError("records must be non-empty")
    k = math.ceil(fraction * n)
    if 2 * k > n:
        raise ValidationError(
            f"{n} videos cannot supply disjoint top/bottom sets of {k} each"
        )
    out: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {}
    for j, trait in enumerate(TRAITS):
        # one total order keeps the two ends disjoint even when a tie spans a cut
        ranking = sorted((r.labels.as_array()[j], r.video_id) for r in records)
        bottom = tuple(vid for _, vid in ranking[:k])
        top = tuple(vid for _, vid in reversed(ranking[-k:]))
        out[trait] = (top, bottom)
    return out


@dataclass(frozen=True)
class ExtremesReport:
    """Mean orderless attractiveness histograms for per-trait extremes."""

    fraction: float
    set_size: int
    top: np.ndarray  # (5 traits, 5 bins)
    bottom: np.ndarray  # (5 traits, 5 bins)
    excluded: int  # videos without a usable histogram

    def __post_init__(self) -> None:
        for field in ("top", "bottom"):
            arr = _freeze(np.asarray(getattr(self, field), dtype=np.float64).copy())
            object.__setattr__(self, field, arr)

    def expected_bin(self, trait: str, side: str) -> float:
        """Mean histogram's expected bin index; higher = more mass up-range."""
        hist = getattr(self, side)[TRAITS.index(trait)]
        return float((hist * np.arange(len(hist))).sum())

    def format(self) -> str:
        lines = ["\t".join(["trait", "side"] + [f"bin{i}" for i in range(5)])]
        for j, trait in enumerate(TRAITS):
            for side in ("top", "bottom"):
                hist = getattr(self, side)[j]
                lines.append("\t".join([trait, side] + [f"{v:.6f}" for v in hist]))
        return "\n".join(lines) + "\n"


def attractiveness_extremes(
    records: Sequence[VideoRecord],
    histograms: Mapping[str, np.ndarray],
    fraction: float = 0.10,
) -> ExtremesReport:
    """Element-wise mean 5-bin histogram over each trait's extreme videos.

    ``histograms`` maps video ids to orderless attractiveness histograms;
    videos with an empty (all-zero) or missing histogram are excluded from
    ranking and counted.
    """
    usable: list[VideoRecord] = []
    excluded = 0
    for record in records:
        hist = histograms.get(record.video_id)
        if hist is None or float(np.sum(hist)) == 0.0:
            excluded += 1
            continue
        usable.append(record)
    sets = decile_sets(usable, fraction)
    k = math.ceil(fraction * len(usable))
    top = np.zeros((len(TRAITS), 5))
    bottom = np.zeros((len(TRAITS), 5))
    for j, trait in enumerate(TRAITS):
        top_ids, bottom_ids = sets[trait]
        top[j] = np.mean([np.asarray(histograms[v], dtype=np.float64) for v in top_ids], axis=0)
        bottom[j] = np.mean([np.asarray(histograms[v], dtype=np.float64) for v in bottom_ids], axis=0)
    return ExtremesReport(fraction=fraction, set_size=k, top=top, bottom=bottom, excluded=excluded)


# -- emotion frequencies ----------------------------------------------------------


@dataclass(frozen=True)
class EmotionFrequencyReport:
    """Counts of face frames whose emotion probability clears a threshold,
    accumulated over each trait's extreme video sets."""

    threshold: float
    fraction: float
    top: np.ndarray  # (5 traits, 7 emotions) int counts
    bottom: np.ndarray  # (5 traits, 7 emotions)

    def __post_init__(self) -> None:
        for field in ("top", "bottom"):
            arr = _freeze(np.asarray(getattr(self, field), dtype=np.int64).copy())
            object.__setattr__(self, field, arr)

    def count(self, trait: str, side: str, emotion: str) -> int:
        arr = getattr(self, side)
        return int(arr[TRAITS.index(trait), EMOTIONS.index(emotion)])

    def format(self) -> str:
        lines = ["\t".join(["trait", "side"] + list(EMOTIONS))]
        for j, trait in enumerate(TRAITS):
            for side in ("top", "bottom"):
                row = getattr(self, side)[j]
                lines.append("\t".join([trait, side] + [str(int(c)) for c in row]))
        return "\n".join(lines) + "\n"


def emotion_frequencies(
    records: Sequence[VideoRecord],
    series: Mapping[str, FrameAttributeSeries],
    threshold: float = 0.7,
    fraction: float = 0.10,
) -> EmotionFrequencyReport:
    """Accumulated high-confidence emotion counts for trait extremes."""
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold must be in [0, 1], got {threshold!r}")
    counts: dict[str, np.ndarray] = {}
    for record in records:
        s = series.get(record.video_id)
        if s is None:
            counts[record.video_id] = np.zeros(len(EMOTIONS), dtype=np.int64)
            continue
        probs = s.emotion_probs[s.face_detected]
        counts[record.video_id] = (probs >= threshold).sum(axis=0).astype(np.int64)
    sets = decile_sets(records, fraction)
    top = np.zeros((len(TRAITS), len(EMOTIONS)), dtype=np.int64)
    bottom = np.zeros((len(TRAITS), len(EMOTIONS)), dtype=np.int64)
    for j, trait in enumerate(TRAITS):
        top_ids, bottom_ids = sets[trait]
        top[j] = np.sum([counts[v] for v in top_ids], axis=0)
        bottom[j] = np.sum([counts[v] for v in bottom_ids], axis=0)
    return EmotionFrequencyReport(threshold=threshold, fraction=fraction, top=top, bottom=bottom)
