"""Domain types shared across the trait-fusion pipeline.

Scores follow the OCEAN convention: openness, conscientiousness,
extraversion, agreeableness, neuroticism, always in that order and always
in [0, 1]. Categorical attributes use fixed canonical orderings so that
one-hot encodings, votes, and report layouts are deterministic:

  emotions    anger, disgust, fear, happy, sadness, surprise, neutral
  gender      female, male
  ethnicity   african_american, asian, caucasian

All types are immutable after construction and safe to share across
threads. Serialization lives in :mod:`traitfusion.dataio`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

import numpy as np

TRAITS: tuple[str, ...] = (
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
)
TRAIT_LETTERS: tuple[str, ...] = ("O", "C", "E", "A", "N")
EMOTIONS: tuple[str, ...] = (
    "anger",
    "disgust",
    "fear",
    "happy",
    "sadness",
    "surprise",
    "neutral",
)
GENDERS: tuple[str, ...] = ("female", "male")
ETHNICITIES: tuple[str, ...] = ("african_american", "asian", "caucasian")
SPLITS: tuple[str, ...] = ("train", "validation", "test")

ATTRIBUTES: tuple[str, ...] = ("emotion", "attractiveness", "age", "gender", "ethnicity")
AUDIO_SLICES: tuple[str, ...] = ("none", "whole", "first_half", "second_half")
CONSENSUS_MODES: tuple[str, ...] = ("orderless", "ordered", "first_half", "second_half")

EMBEDDING_DIM = 128

# probability simplices must sum to 1 within this tolerance
SIMPLEX_TOL = 1e-6


class ValidationError(ValueError):
    """A value violates a documented invariant or an interchange schema rule."""


class MissingAttributeError(ValidationError):
    """A required attribute cannot be derived, e.g. no face-detected frames."""


class NumericError(ArithmeticError):
    """A numeric routine produced a non-finite value."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TraitVector:
    """Five apparent-personality scores in [0, 1], OCEAN order."""

    openness: float
    conscientiousness: float
    extraversion: float
    agreeableness: float
    neuroticism: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.openness,
                self.conscientiousness,
                self.extraversion,
                self.agreeableness,
                self.neuroticism,
            ],
            dtype=np.float64,
        )

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in TRAITS}

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "TraitVector":
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (5,):
            raise ValidationError(f"expected 5 trait scores, got shape {arr.shape}")
        return cls(*(float(x) for x in arr))


def validate_trait_vector(v: TraitVector) -> TraitVector:
    """Return ``v`` unchanged if every component is finite and in [0, 1]."""
    for name in TRAITS:
        value = getattr(v, name)
        if not np.isfinite(value):
            raise ValidationError(f"trait {name} is not finite: {value!r}")
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"trait {name} out of range [0, 1]: {value!r}")
    return v


def invert_neuroticism(v: TraitVector) -> TraitVector:
    """Map neuroticism to 1 - neuroticism, leaving the other traits alone.

    Raw first-impressions label files score the fifth trait as emotional
    stability; applying this involution once converts them to the
    neuroticism convention used everywhere in this package.
    """
    return replace(v, neuroticism=1.0 - v.neuroticism)


@dataclass(frozen=True, eq=False)
class FrameAttributeRecord:
    """Backbone outputs for a single frame.

    When ``face_detected`` is false the attribute fields are meaningless
    and every consumer must skip the frame; values are still carried so
    that storage layouts stay rectangular.
    """

    frame_index: int
    face_detected: bool
    emotion_probs: np.ndarray  # (7,) in canonical emotion order
    attractiveness: float
    age: float
    gender_probs: np.ndarray  # (2,) female, male
    ethnicity_probs: np.ndarray  # (3,) african_american, asian, caucasian

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "emotion_probs", _freeze(np.asarray(self.emotion_probs, dtype=np.float64).copy())
        )
        object.__setattr__(
            self, "gender_probs", _freeze(np.asarray(self.gender_probs, dtype=np.float64).copy())
        )
        object.__setattr__(
            self,
            "ethnicity_probs",
            _freeze(np.asarray(self.ethnicity_probs, dtype=np.float64).copy()),
        )


def _check_simplex(name: str, probs: np.ndarray, size: int, context: str) -> None:
    if probs.shape != (size,):
        raise ValidationError(f"{context}: {name} must have shape ({size},), got {probs.shape}")
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{context}: {name} contains non-finite entries")
    if np.any(probs < -SIMPLEX_TOL):
        raise ValidationError(f"{context}: {name} contains negative probabilities")
    total = float(probs.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValidationError(f"{context}: {name} sums to {total!r}, expected 1")


def validate_frame_record(record: FrameAttributeRecord) -> FrameAttributeRecord:
    """Validate one frame; attribute fields are only checked on face frames."""
    context = f"frame {record.frame_index}"
    if record.frame_index < 0:
        raise ValidationError(f"{context}: frame_index must be non-negative")
    if not record.face_detected:
        return record
    _check_simplex("emotion_probs", record.emotion_probs, 7, context)
    _check_simplex("gender_probs", record.gender_probs, 2, context)
    _check_simplex("ethnicity_probs", record.ethnicity_probs, 3, context)
    if not np.isfinite(record.attractiveness) or not 0.0 <= record.attractiveness <= 1.0:
        raise ValidationError(f"{context}: attractiveness out of range [0, 1]")
    if not np.isfinite(record.age) or record.age <= 0.0:
        raise ValidationError(f"{context}: age must be a positive number of years")
    return record


@dataclass(frozen=True, eq=False)
class FrameAttributeSeries:
    """Per-frame attribute predictions for one video, stored column-wise.

    ``frame_index`` is strictly increasing and bounded by ``frame_count``,
    the total number of frames in the source video. Column storage keeps
    desk-scale datasets cheap; ``record(i)`` materializes a row view.
    """

    video_id: str
    frame_count: int
    frame_index: np.ndarray  # (n,) int64
    face_detected: np.ndarray  # (n,) bool
    emotion_probs: np.ndarray  # (n, 7)
    attractiveness: np.ndarray  # (n,)
    age: np.ndarray  # (n,)
    gender_probs: np.ndarray  # (n, 2)
    ethnicity_probs: np.ndarray  # (n, 3)

    def __post_init__(self) -> None:
        cast = {
            "frame_index": np.int64,
            "face_detected": np.bool_,
            "emotion_probs": np.float64,
            "attractiveness": np.float64,
            "age": np.float64,
            "gender_probs": np.float64,
            "ethnicity_probs": np.float64,
        }
        for name, dtype in cast.items():
            object.__setattr__(
                self, name, _freeze(np.asarray(getattr(self, name), dtype=dtype).copy())
            )
        n = len(self.frame_index)
        shapes = {
            "face_detected": (n,),
            "emotion_probs": (n, 7),
            "attractiveness": (n,),
            "age": (n,),
            "gender_probs": (n, 2),
            "ethnicity_probs": (n, 3),
        }
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ValidationError(
                    f"series {self.video_id}: {name} has shape "
                    f"{getattr(self, name).shape}, expected {shape}"
                )
        if self.frame_count < 0:
            raise ValidationError(f"series {self.video_id}: negative frame_count")
        if n:
            if np.any(np.diff(self.frame_index) <= 0):
                raise ValidationError(
                    f"series {self.video_id}: frame_index must be strictly increasing"
                )
            if self.frame_index[0] < 0 or self.frame_index[-1] >= self.frame_count:
                raise ValidationError(
                    f"series {self.video_id}: frame_index outside [0, {self.frame_count})"
                )

    def __len__(self) -> int:
        return len(self.frame_index)

    def record(self, i: int) -> FrameAttributeRecord:
        return FrameAttributeRecord(
            frame_index=int(self.frame_index[i]),
            face_detected=bool(self.face_detected[i]),
            emotion_probs=self.emotion_probs[i],
            attractiveness=float(self.attractiveness[i]),
            age=float(self.age[i]),
            gender_probs=self.gender_probs[i],
            ethnicity_probs=self.ethnicity_probs[i],
        )

    def __iter__(self) -> Iterator[FrameAttributeRecord]:
        return (self.record(i) for i in range(len(self)))

    @property
    def records(self) -> tuple[FrameAttributeRecord, ...]:
        return tuple(self)

    @classmethod
    def from_records(
        cls, video_id: str, frame_count: int, records: Sequence[FrameAttributeRecord]
    ) -> "FrameAttributeSeries":
        return cls(
            video_id=video_id,
            frame_count=frame_count,
            frame_index=np.array([r.frame_index for r in records], dtype=np.int64),
            face_detected=np.array([r.face_detected for r in records], dtype=np.bool_),
            emotion_probs=np.array([r.emotion_probs for r in records], dtype=np.float64).reshape(
                len(records), 7
            ),
            attractiveness=np.array([r.attractiveness for r in records], dtype=np.float64),
            age=np.array([r.age for r in records], dtype=np.float64),
            gender_probs=np.array([r.gender_probs for r in records], dtype=np.float64).reshape(
                len(records), 2
            ),
            ethnicity_probs=np.array(
                [r.ethnicity_probs for r in records], dtype=np.float64
            ).reshape(len(records), 3),
        )


def validate_series(series: FrameAttributeSeries) -> FrameAttributeSeries:
    """Validate all face-detected rows of a series at once."""
    face = series.face_detected
    if not np.any(face):
        return series
    for name, probs, size in (
        ("emotion_probs", series.emotion_probs, 7),
        ("gender_probs", series.gender_probs, 2),
        ("ethnicity_probs", series.ethnicity_probs, 3),
    ):
        sub = probs[face]
        if not np.all(np.isfinite(sub)):
            raise ValidationError(f"series {series.video_id}: {name} has non-finite entries")
        if np.any(sub < -SIMPLEX_TOL):
            raise ValidationError(f"series {series.video_id}: {name} has negative entries")
        bad = np.abs(sub.sum(axis=1) - 1.0) > SIMPLEX_TOL
        if np.any(bad):
            where = series.frame_index[face][bad][0]
            raise ValidationError(
                f"series {series.video_id}: {name} does not sum to 1 at frame {int(where)}"
            )
    att = series.attractiveness[face]
    if not np.all(np.isfinite(att)) or np.any(att < 0.0) or np.any(att > 1.0):
        raise ValidationError(f"series {series.video_id}: attractiveness outside [0, 1]")
    age = series.age[face]
    if not np.all(np.isfinite(age)) or np.any(age <= 0.0):
        raise ValidationError(f"series {series.video_id}: age must be positive")
    return series


@dataclass(frozen=True, eq=False)
class EmbeddingBundle:
    """Per-video embeddings: visual vectors for a subset of frames plus
    whole / first-half / second-half audio vectors.

    Storage is 32-bit; :meth:`visual_at` and :meth:`audio_for` widen to
    64-bit so training arithmetic stays in double precision.
    """

    video_id: str
    visual_frames: np.ndarray  # (k,) int64, sorted, unique
    visual: np.ndarray  # (k, EMBEDDING_DIM) float32
    audio_whole: np.ndarray  # (EMBEDDING_DIM,) float32
    audio_first_half: np.ndarray
    audio_second_half: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "visual_frames", _freeze(np.asarray(self.visual_frames, dtype=np.int64).copy())
        )
        for name in ("visual", "audio_whole", "audio_first_half", "audio_second_half"):
            object.__setattr__(
                self, name, _freeze(np.asarray(getattr(self, name), dtype=np.float32).copy())
            )
        k = len(self.visual_frames)
        if self.visual.shape != (k, EMBEDDING_DIM):
            raise ValidationError(
                f"bundle {self.video_id}: visual has shape {self.visual.shape}, "
                f"expected ({k}, {EMBEDDING_DIM})"
            )
        for name in ("audio_whole", "audio_first_half", "audio_second_half"):
            if getattr(self, name).shape != (EMBEDDING_DIM,):
                raise ValidationError(f"bundle {self.video_id}: {name} must be ({EMBEDDING_DIM},)")
        if k:
            if np.any(np.diff(self.visual_frames) <= 0):
                raise ValidationError(
                    f"bundle {self.video_id}: visual_frames must be sorted and unique"
                )
            if self.visual_frames[0] < 0:
                raise ValidationError(f"bundle {self.video_id}: negative frame index")

    def visual_at(self, frame_index) -> np.ndarray:
        """Embedding row(s) for stored frame index/indices, widened to f64."""
        idx = np.asarray(frame_index)
        if len(self.visual_frames) == 0:
            raise KeyError(f"bundle {self.video_id}: no visual embeddings stored")
        pos = np.searchsorted(self.visual_frames, idx)
        bad = (pos >= len(self.visual_frames)) | (self.visual_frames[np.minimum(pos, len(self.visual_frames) - 1)] != idx)
        if np.any(bad):
            missing = idx[bad] if idx.ndim else idx
            raise KeyError(f"bundle {self.video_id}: no visual embedding for frame {missing}")
        return self.visual[pos].astype(np.float64)

    def audio_for(self, slice_name: str) -> np.ndarray:
        arr = {
            "whole": self.audio_whole,
            "first_half": self.audio_first_half,
            "second_half": self.audio_second_half,
        }.get(slice_name)
        if arr is None:
            raise ValidationError(f"unknown audio slice {slice_name!r}")
        return arr.astype(np.float64)


def validate_bundle(bundle: EmbeddingBundle, frame_count: int) -> EmbeddingBundle:
    if len(bundle.visual_frames) and bundle.visual_frames[-1] >= frame_count:
        raise ValidationError(
            f"bundle {bundle.video_id}: visual frame index "
            f"{int(bundle.visual_frames[-1])} outside [0, {frame_count})"
        )
    for name in ("visual", "audio_whole", "audio_first_half", "audio_second_half"):
        if not np.all(np.isfinite(getattr(bundle, name))):
            raise ValidationError(f"bundle {bundle.video_id}: {name} has non-finite entries")
    return bundle


@dataclass(frozen=True)
class SubjectMetadata:
    """Dataset-provided subject labels; either field may be absent."""

    gender: Optional[str] = None
    ethnicity: Optional[str] = None

    def __post_init__(self) -> None:
        if self.gender is not None and self.gender not in GENDERS:
            raise ValidationError(f"unknown gender label {self.gender!r}")
        if self.ethnicity is not None and self.ethnicity not in ETHNICITIES:
            raise ValidationError(f"unknown ethnicity label {self.ethnicity!r}")


@dataclass(frozen=True)
class VideoRecord:
    """One video: identity, ground-truth labels, split, subject metadata."""

    video_id: str
    labels: TraitVector
    split: Optional[str] = None
    metadata: SubjectMetadata = SubjectMetadata()

    def __post_init__(self) -> None:
        if self.split is not None and self.split not in SPLITS:
            raise ValidationError(f"video {self.video_id}: unknown split {self.split!r}")
        validate_trait_vector(self.labels)


@dataclass(frozen=True)
class ModalityConfig:
    """Which inputs the fusion model consumes and how they are aggregated.

    ``attributes`` is normalized to canonical order so concatenation
    layouts never depend on the order flags were given in.
    """

    use_audio: str = "none"
    attributes: tuple[str, ...] = ()
    emotion_consensus: str = "orderless"
    attractiveness_consensus: str = "orderless"
    m_train: int = 10
    m_test: int = 50

    def __post_init__(self) -> None:
        if self.use_audio not in AUDIO_SLICES:
            raise ValidationError(f"use_audio must be one of {AUDIO_SLICES}")
        attrs = tuple(dict.fromkeys(self.attributes))
        for attr in attrs:
            if attr not in ATTRIBUTES:
                raise ValidationError(f"unknown attribute {attr!r}")
        object.__setattr__(
            self, "attributes", tuple(a for a in ATTRIBUTES if a in attrs)
        )
        if self.emotion_consensus not in CONSENSUS_MODES:
            raise ValidationError(f"emotion_consensus must be one of {CONSENSUS_MODES}")
        if self.attractiveness_consensus not in CONSENSUS_MODES:
            raise ValidationError(f"attractiveness_consensus must be one of {CONSENSUS_MODES}")
        if self.m_train < 1 or self.m_test < 1:
            raise ValidationError("m_train and m_test must be >= 1")
