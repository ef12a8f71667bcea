"""Synthetic dataset generator with configurable injected biases.

Stands in for a large first-impressions corpus at desk scale. Labels are
clipped normals; observable signals are derived FROM the labels so that
label marginals never depend on coupling strength:

* per-segment emotion distributions give happy a logit boost proportional
  to extraversion, so happy-frequency correlates with E;
* per-segment attractiveness levels shift with extraversion;
* subject age shifts with conscientiousness;
* visual and audio embeddings are a fixed seeded random projection of
  (centered labels, subject latents) plus Gaussian noise, with the three
  audio slices given strictly ordered signal gains
  (first_half > whole > second_half).

``signal_strength`` scales every one of those couplings: at 0 the
observables carry no label information at all; at 1 they are strongest.
Optional ``bias_offsets`` shift label means per gender/ethnicity group
before clipping, giving audits a known ground truth to recover.

Determinism: every quantity comes from a xoshiro256++ stream keyed by
(seed, stream tag, video index[, frame index or row]); see
:mod:`traitfusion.rng` for the exact construction. Draw counts per stream
are fixed, so any sub-population of videos reproduces bit-identically
regardless of batch size, and labels do not depend on frames_per_video.

Emotion and attractiveness time series are piecewise-constant over
``N_SEGMENTS`` random segments (plus small per-frame jitter), which gives
ordered consensus something real to distinguish from orderless.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from traitfusion import rng
from traitfusion.consensus import select_equidistant_frames
from traitfusion.dataio import Dataset, split_dataset
from traitfusion.types import (
    EMBEDDING_DIM,
    EMOTIONS,
    ETHNICITIES,
    GENDERS,
    TRAITS,
    EmbeddingBundle,
    FrameAttributeSeries,
    SubjectMetadata,
    TraitVector,
    ValidationError,
    VideoRecord,
)

# piecewise-constant series layout
N_SEGMENTS = 4

# audio slice signal gains; strictly ordered so slice experiments can
# recover first_half > whole > second_half
AUDIO_SLICE_GAIN = {"first_half": 1.0, "whole": 0.7, "second_half": 0.35}
VISUAL_GAIN = 0.6

# label -> observable couplings, all multiplied by signal_strength
HAPPY_EXTRAVERSION_GAIN = 6.0  # logit units per (E - 0.5)
ATTRACT_EXTRAVERSION_GAIN = 0.8
AGE_CONSCIENTIOUSNESS_GAIN = 60.0  # years per (C - 0.5)

AGE_CENTER = 32.0
AGE_VIDEO_STD = 6.0
AGE_FRAME_STD = 1.5
ATTRACT_SEG_STD = 0.12
ATTRACT_FRAME_STD = 0.05
EMOTION_BASE_LOGITS = np.array([-1.1, -1.6, -1.4, 0.2, -0.9, -1.3, 1.1])  # canonical order
EMOTION_SEG_STD = 0.9
EMOTION_FRAME_JITTER = 0.1  # max blend toward the uniform distribution
FACE_DROP_RATE = 0.02  # fraction of frames with no detected face

# visual embeddings are stored for at most this many equidistant frames
VISUAL_POSITIONS = 50

_LATENT_DIM = 10  # 5 centered labels + age latent + gender latent + 3 ethnicity
_CHUNK_FRAMES = 1 << 19  # bound per-chunk memory during frame generation


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs; defaults mirror the population the audits expect.

    ``bias_offsets`` maps a group name (any of female/male or the three
    canonical ethnicity labels) to five additive label offsets in OCEAN
    order, applied before clipping.
    """

    n_videos: int
    frames_per_video: int = 450
    seed: int = 0
    label_mean: float = 0.5
    label_std: float = 0.15
    gender_proportion_female: float = 0.55
    ethnicity_proportions: tuple[float, float, float] = (0.11, 0.03, 0.86)
    bias_offsets: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    signal_strength: float = 0.75
    noise_std: float = 0.1

    def __post_init__(self) -> None:
        if self.n_videos < 1:
            raise ValidationError("n_videos must be >= 1")
        if self.frames_per_video < 1:
            raise ValidationError("frames_per_video must be >= 1")
        if self.label_std < 0:
            raise ValidationError("label_std must be >= 0")
        if not 0.0 <= self.gender_proportion_female <= 1.0:
            raise ValidationError("gender_proportion_female must be in [0, 1]")
        props = np.asarray(self.ethnicity_proportions, dtype=np.float64)
        if props.shape != (3,) or np.any(props < 0) or np.any(props > 1):
            raise ValidationError("ethnicity_proportions must be three values in [0, 1]")
        if abs(float(props.sum()) - 1.0) > 1e-9:
            raise ValidationError("ethnicity_proportions must sum to 1")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValidationError("signal_strength must be in [0, 1]")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        valid_groups = set(GENDERS) | set(ETHNICITIES)
        for group, offsets in self.bias_offsets.items():
            if group not in valid_groups:
                raise ValidationError(f"bias_offsets: unknown group {group!r}")
            if len(tuple(offsets)) != len(TRAITS):
                raise ValidationError(f"bias_offsets[{group}]: need {len(TRAITS)} offsets")


def _box_muller(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def _normals_from(u: np.ndarray) -> np.ndarray:
    """Consecutive uniform pairs (columns) -> standard normals, in order."""
    z0, z1 = _box_muller(u[..., 0::2], u[..., 1::2])
    out = np.empty_like(u)
    out[..., 0::2] = z0
    out[..., 1::2] = z1
    return out


@dataclass(frozen=True)
class _Population:
    """Per-video draws that do not depend on frames_per_video."""

    labels: np.ndarray  # (V, 5) final clipped labels
    gender_idx: np.ndarray  # (V,) 0=female, 1=male
    ethnicity_idx: np.ndarray  # (V,)
    age_base: np.ndarray  # (V,) subject age in years


def _sample_population(config: SynthConfig) -> _Population:
    v = config.n_videos
    keys = rng.derive_keys(config.seed, rng.TAG_POPULATION, np.arange(v))
    u = rng.Xoshiro256PPBank(keys).uniforms(10)
    gender_idx = (u[:, 0] >= config.gender_proportion_female).astype(np.int64)
    eth_cum = np.cumsum(np.asarray(config.ethnicity_proportions, dtype=np.float64))
    ethnicity_idx = np.searchsorted(eth_cum, u[:, 1], side="right").clip(0, 2)
    z = _normals_from(u[:, 2:10])  # 8 normals; 5 for labels, 1 for age
    labels = config.label_mean + config.label_std * z[:, :5]
    for group_names, idx in ((GENDERS, gender_idx), (ETHNICITIES, ethnicity_idx)):
        for g, name in enumerate(group_names):
            offsets = config.bias_offsets.get(name)
            if offsets is not None:
                labels[idx == g] += np.asarray(offsets, dtype=np.float64)
    labels = np.clip(labels, 0.0, 1.0)
    consc = labels[:, TRAITS.index("conscientiousness")]
    age_base = np.clip(
        AGE_CENTER
        + AGE_CONSCIENTIOUSNESS_GAIN * config.signal_strength * (consc - 0.5)
        + AGE_VIDEO_STD * z[:, 6],
        14.0,
        85.0,
    )
    return _Population(labels=labels, gender_idx=gender_idx, ethnicity_idx=ethnicity_idx, age_base=age_base)


def _sample_segments(config: SynthConfig, pop: _Population) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Segment cut positions (V, N_SEGMENTS-1), per-segment emotion
    probabilities (V, N_SEGMENTS, 7) and attractiveness levels (V, N_SEGMENTS)."""
    v, t, s = config.n_videos, config.frames_per_video, config.signal_strength
    keys = rng.derive_keys(config.seed, rng.TAG_SEGMENTS, np.arange(v))
    u = rng.Xoshiro256PPBank(keys).uniforms(35)
    cuts = np.sort(np.floor(u[:, :3] * t).astype(np.int64), axis=1)
    z_emo = _normals_from(u[:, 3:31]).reshape(v, N_SEGMENTS, 7)
    z_att = _normals_from(u[:, 31:35])
    extra = pop.labels[:, TRAITS.index("extraversion")] - 0.5
    logits = EMOTION_BASE_LOGITS[None, None, :] + EMOTION_SEG_STD * z_emo
    logits[:, :, EMOTIONS.index("happy")] += HAPPY_EXTRAVERSION_GAIN * s * extra[:, None]
    logits -= logits.max(axis=2, keepdims=True)
    exp = np.exp(logits)
    emo_probs = exp / exp.sum(axis=2, keepdims=True)
    att_levels = np.clip(
        0.5 + ATTRACT_EXTRAVERSION_GAIN * s * extra[:, None] + ATTRACT_SEG_STD * z_att,
        0.02,
        0.98,
    )
    return cuts, emo_probs, att_levels


def _frame_tables(
    config: SynthConfig,
    pop: _Population,
    cuts: np.ndarray,
    emo_probs: np.ndarray,
    att_levels: np.ndarray,
) -> dict[str, np.ndarray]:
    """All per-frame columns, flat over (video, frame) in row-major order."""
    v, t = config.n_videos, config.frames_per_video
    n = v * t
    face = np.empty(n, dtype=np.bool_)
    emotion = np.empty((n, 7), dtype=np.float64)
    attract = np.empty(n, dtype=np.float64)
    age = np.empty(n, dtype=np.float64)
    gender_p = np.empty((n, 2), dtype=np.float64)
    eth_p = np.empty((n, 3), dtype=np.float64)

    for lo in range(0, n, _CHUNK_FRAMES):
        hi = min(n, lo + _CHUNK_FRAMES)
        vid = np.arange(lo, hi) // t
        frm = np.arange(lo, hi) % t
        keys = rng.derive_keys(config.seed, rng.TAG_FRAMES, vid, frm)
        u = rng.Xoshiro256PPBank(keys).uniforms(9)
        face[lo:hi] = u[:, 0] >= FACE_DROP_RATE
        # emotion: segment distribution blended a random amount toward uniform
        seg = (frm[:, None] >= cuts[vid]).sum(axis=1)
        base = emo_probs[vid, seg]
        blend = (EMOTION_FRAME_JITTER * u[:, 4])[:, None]
        emotion[lo:hi] = (1.0 - blend) * base + blend / len(EMOTIONS)
        z_att = _normals_from(u[:, 5:7])[:, 0]
        attract[lo:hi] = np.clip(att_levels[vid, seg] + ATTRACT_FRAME_STD * z_att, 0.0, 1.0)
        z_age = _normals_from(u[:, 7:9])[:, 0]
        age[lo:hi] = np.clip(pop.age_base[vid] + AGE_FRAME_STD * z_age, 1.0, 95.0)
        # gender/ethnicity predictions peaked on the sampled group
        p_gender = 0.85 + 0.13 * u[:, 1]
        female = pop.gender_idx[vid] == 0
        gender_p[lo:hi, 0] = np.where(female, p_gender, 1.0 - p_gender)
        gender_p[lo:hi, 1] = 1.0 - gender_p[lo:hi, 0]
        p_eth = 0.75 + 0.2 * u[:, 2]
        w = u[:, 3]
        rest = 1.0 - p_eth
        block = np.empty((hi - lo, 3), dtype=np.float64)
        for k in range(3):
            others = [o for o in range(3) if o != k]
            mask = pop.ethnicity_idx[vid] == k
            block[mask, k] = p_eth[mask]
            block[mask, others[0]] = rest[mask] * w[mask]
            block[mask, others[1]] = rest[mask] * (1.0 - w[mask])
        eth_p[lo:hi] = block
    return {
        "face_detected": face,
        "emotion_probs": emotion,
        "attractiveness": attract,
        "age": age,
        "gender_probs": gender_p,
        "ethnicity_probs": eth_p,
    }


def _projection(seed: int, matrix_id: int) -> np.ndarray:
    """Fixed seeded projection (EMBEDDING_DIM, _LATENT_DIM), rows unit-ish."""
    keys = rng.derive_keys(seed, rng.TAG_PROJECTION, matrix_id, np.arange(EMBEDDING_DIM))
    z = _normals_from(rng.Xoshiro256PPBank(keys).uniforms(_LATENT_DIM))
    return z / np.sqrt(_LATENT_DIM)


def _latents(pop: _Population) -> np.ndarray:
    """(V, _LATENT_DIM) signal vector: centered labels plus subject latents."""
    v = pop.labels.shape[0]
    z = np.zeros((v, _LATENT_DIM), dtype=np.float64)
    z[:, :5] = pop.labels - 0.5
    z[:, 5] = (pop.age_base - AGE_CENTER) / 30.0
    z[:, 6] = np.where(pop.gender_idx == 0, 0.5, -0.5)
    z[np.arange(v), 7 + pop.ethnicity_idx] = 0.5
    return z


def _embeddings(config: SynthConfig, pop: _Population, positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Visual (V, n_pos, dim) and audio (V, 3, dim) embeddings, float32."""
    v, s = config.n_videos, config.signal_strength
    n_pos = positions.size
    z = _latents(pop)
    visual_signal = (VISUAL_GAIN * s) * (z @ _projection(config.seed, 0).T)
    audio_base = z @ _projection(config.seed, 1).T

    visual = np.empty((v, n_pos, EMBEDDING_DIM), dtype=np.float32)
    rows_per_chunk = max(1, (_CHUNK_FRAMES // 4) // n_pos)
    for lo in range(0, v, rows_per_chunk):
        hi = min(v, lo + rows_per_chunk)
        vid = np.repeat(np.arange(lo, hi), n_pos)
        rank = np.tile(np.arange(n_pos), hi - lo)
        keys = rng.derive_keys(config.seed, rng.TAG_VISUAL, vid, rank)
        noise = rng.Xoshiro256PPBank(keys).normals(EMBEDDING_DIM)
        chunk = visual_signal[vid] + config.noise_std * noise
        visual[lo:hi] = chunk.reshape(hi - lo, n_pos, EMBEDDING_DIM).astype(np.float32)

    audio = np.empty((v, 3, EMBEDDING_DIM), dtype=np.float32)
    slices = ("whole", "first_half", "second_half")
    vid = np.repeat(np.arange(v), 3)
    slice_id = np.tile(np.arange(3), v)
    keys = rng.derive_keys(config.seed, rng.TAG_AUDIO, vid, slice_id)
    noise = rng.Xoshiro256PPBank(keys).normals(EMBEDDING_DIM).reshape(v, 3, EMBEDDING_DIM)
    for j, name in enumerate(slices):
        gain = AUDIO_SLICE_GAIN[name] * s
        audio[:, j, :] = (gain * audio_base + config.noise_std * noise[:, j, :]).astype(np.float32)
    return visual, audio


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Generate a complete dataset: records with splits, series, embeddings.

    Bit-deterministic given the config (including its seed).
    """
    v, t = config.n_videos, config.frames_per_video
    pop = _sample_population(config)
    cuts, emo_probs, att_levels = _sample_segments(config, pop)
    tables = _frame_tables(config, pop, cuts, emo_probs, att_levels)
    positions = select_equidistant_frames(t, np.arange(t), min(t, VISUAL_POSITIONS))
    visual, audio = _embeddings(config, pop, positions)

    width = len(str(max(v - 1, 1)))
    ids = [f"v{idx:0{max(width, 5)}d}" for idx in range(v)]
    records = [
        VideoRecord(
            video_id=ids[i],
            labels=TraitVector.from_array(pop.labels[i]),
            metadata=SubjectMetadata(
                gender=GENDERS[pop.gender_idx[i]], ethnicity=ETHNICITIES[pop.ethnicity_idx[i]]
            ),
        )
        for i in range(v)
    ]
    records = split_dataset(records, (3, 1, 1), config.seed)
    frame_index = np.arange(t, dtype=np.int64)
    series = {}
    embeddings = {}
    for i, vid in enumerate(ids):
        lo, hi = i * t, (i + 1) * t
        series[vid] = FrameAttributeSeries(
            video_id=vid,
            frame_count=t,
            frame_index=frame_index,
            face_detected=tables["face_detected"][lo:hi],
            emotion_probs=tables["emotion_probs"][lo:hi],
            attractiveness=tables["attractiveness"][lo:hi],
            age=tables["age"][lo:hi],
            gender_probs=tables["gender_probs"][lo:hi],
            ethnicity_probs=tables["ethnicity_probs"][lo:hi],
        )
        embeddings[vid] = EmbeddingBundle(
            video_id=vid,
            visual_frames=positions,
            visual=visual[i],
            audio_whole=audio[i, 0],
            audio_first_half=audio[i, 1],
            audio_second_half=audio[i, 2],
        )
    return Dataset(records=tuple(records), series=series, embeddings=embeddings)
