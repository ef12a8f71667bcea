"""Canonical dataset interchange: manifests, attribute series, embeddings.

Text where humans debug, binary where volume matters:

* ``manifest.jsonl`` - one JSON object per line. The first line is a
  dataset header carrying ``format_version``; each further line describes
  one video (labels, split, metadata, payload paths, and the frame indices
  covered by stored visual embeddings).
* ``series/<video_id>.jsonl`` - a series header line followed by one JSON
  object per frame with the backbone outputs.
* ``embeddings/<video_id>.bin`` - a 16-byte header (magic ``TFEB``,
  uint32 version, uint32 dim, uint32 count, little-endian) followed by
  ``count`` rows of ``dim`` little-endian float32 values. Rows are the
  whole / first-half / second-half audio embeddings, then one visual
  embedding per entry of the manifest's ``visual_frames`` list, in order.

Floats in text payloads are written with ``repr`` semantics (shortest
round-trip), so write -> load -> write is byte-stable and lossless.
``format_version`` is checked on every load and mismatches are rejected.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from traitfusion.rng import TAG_SPLIT, Xoshiro256PP, derive_key
from traitfusion.types import (
    EMBEDDING_DIM,
    TRAITS,
    EmbeddingBundle,
    FrameAttributeSeries,
    SubjectMetadata,
    TraitVector,
    ValidationError,
    VideoRecord,
    invert_neuroticism,
    validate_bundle,
    validate_series,
    validate_trait_vector,
)

FORMAT_VERSION = 1
_EMB_MAGIC = b"TFEB"


@dataclass(frozen=True)
class Dataset:
    """In-memory dataset: records plus per-video series and embeddings.

    Iterating unpacks as ``records, series, embeddings``.
    """

    records: tuple[VideoRecord, ...]
    series: Mapping[str, FrameAttributeSeries]
    embeddings: Mapping[str, EmbeddingBundle]
    split_ratio: tuple[int, int, int] = (3, 1, 1)

    def __iter__(self):
        return iter((self.records, self.series, self.embeddings))

    def by_split(self, split: str) -> tuple[VideoRecord, ...]:
        return tuple(r for r in self.records if r.split == split)

    def record_for(self, video_id: str) -> VideoRecord:
        for r in self.records:
            if r.video_id == video_id:
                return r
        raise KeyError(video_id)


def split_dataset(
    records: Sequence[VideoRecord],
    ratio: tuple[int, int, int] = (3, 1, 1),
    seed: int = 0,
) -> list[VideoRecord]:
    """Assign train/validation/test splits by seeded shuffle.

    Records are ordered by video_id before shuffling so the partition does
    not depend on caller list order. Counts follow the largest-remainder
    rule, so every proportion is within one video of exact; remainder ties
    go to the earlier split in (train, validation, test) order.
    """
    if len(ratio) != 3 or any(r < 1 for r in ratio):
        raise ValidationError(f"ratio must be three positive integers, got {ratio!r}")
    n = len(records)
    if n < sum(ratio):
        raise ValidationError(f"need at least {sum(ratio)} videos to split {ratio}, got {n}")
    total = sum(ratio)
    quotas = [n * r / total for r in ratio]
    counts = [int(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    for _ in range(n - sum(counts)):
        best = max(range(3), key=lambda i: (remainders[i], -i))
        counts[best] += 1
        remainders[best] = -1.0
    ordered = sorted(records, key=lambda r: r.video_id)
    stream = Xoshiro256PP(derive_key(seed, TAG_SPLIT))
    stream.shuffle(ordered)
    out: list[VideoRecord] = []
    bounds = np.cumsum([0] + counts)
    for split, lo, hi in zip(("train", "validation", "test"), bounds[:-1], bounds[1:]):
        out.extend(replace(r, split=split) for r in ordered[lo:hi])
    return out


def mean_baseline_labels(records: Sequence[VideoRecord]) -> TraitVector:
    """Per-trait arithmetic mean of ground-truth labels.

    Pass the train split; predicting this vector for every video is the
    mean-baseline predictor.
    """
    if not records:
        raise ValidationError("mean_baseline_labels: empty record list")
    stack = np.stack([r.labels.as_array() for r in records])
    return TraitVector.from_array(stack.mean(axis=0))


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def write_dataset(dataset: Dataset, out_dir) -> Path:
    """Write manifest + payload files under ``out_dir``; returns the
    manifest path. Output bytes depend only on the dataset contents."""
    out = Path(out_dir)
    (out / "series").mkdir(parents=True, exist_ok=True)
    (out / "embeddings").mkdir(parents=True, exist_ok=True)
    lines = [
        _dump(
            {
                "kind": "dataset_header",
                "format_version": FORMAT_VERSION,
                "n_videos": len(dataset.records),
                "split_ratio": list(dataset.split_ratio),
            }
        )
    ]
    for record in dataset.records:
        vid = record.video_id
        series = dataset.series[vid]
        bundle = dataset.embeddings[vid]
        _write_series(out / "series" / f"{vid}.jsonl", series)
        _write_embeddings(out / "embeddings" / f"{vid}.bin", bundle)
        lines.append(
            _dump(
                {
                    "kind": "video",
                    "video_id": vid,
                    "split": record.split,
                    "labels": {t: float(getattr(record.labels, t)) for t in TRAITS},
                    "gender": record.metadata.gender,
                    "ethnicity": record.metadata.ethnicity,
                    "frame_count": int(series.frame_count),
                    "visual_frames": [int(i) for i in bundle.visual_frames],
                    "series_path": f"series/{vid}.jsonl",
                    "embeddings_path": f"embeddings/{vid}.bin",
                }
            )
        )
    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def _write_series(path: Path, series: FrameAttributeSeries) -> None:
    lines = [
        _dump(
            {
                "kind": "series_header",
                "format_version": FORMAT_VERSION,
                "video_id": series.video_id,
                "frame_count": int(series.frame_count),
            }
        )
    ]
    for i in range(len(series)):
        lines.append(
            _dump(
                {
                    "kind": "frame",
                    "frame_index": int(series.frame_index[i]),
                    "face_detected": bool(series.face_detected[i]),
                    "emotion_probs": [float(x) for x in series.emotion_probs[i]],
                    "attractiveness": float(series.attractiveness[i]),
                    "age": float(series.age[i]),
                    "gender_probs": [float(x) for x in series.gender_probs[i]],
                    "ethnicity_probs": [float(x) for x in series.ethnicity_probs[i]],
                }
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_embeddings(path: Path, bundle: EmbeddingBundle) -> None:
    rows = np.vstack(
        [
            bundle.audio_whole[None, :],
            bundle.audio_first_half[None, :],
            bundle.audio_second_half[None, :],
            bundle.visual,
        ]
    ).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(_EMB_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, rows.shape[1], rows.shape[0]))
        fh.write(rows.tobytes())


def _parse_line(path: Path, lineno: int, raw: str) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _require(obj: dict, key: str, path: Path, lineno: int):
    if key not in obj:
        raise ValidationError(f"{path}:{lineno}: missing field {key!r}")
    return obj[key]


def load_dataset(manifest_path, invert_neuro: bool = False) -> Dataset:
    """Load and fully validate a dataset from its manifest.

    ``invert_neuro=True`` applies the neuroticism involution to every label
    on load, for raw label files that score emotional stability instead.
    """
    manifest = Path(manifest_path)
    text = manifest.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{manifest}: empty manifest")
    header = _parse_line(manifest, 1, lines[0])
    if header.get("kind") != "dataset_header":
        raise ValidationError(f"{manifest}:1: first line must be a dataset_header")
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(
            f"{manifest}:1: unsupported format_version {version!r}, expected {FORMAT_VERSION}"
        )
    ratio = tuple(header.get("split_ratio", (3, 1, 1)))

    records: list[VideoRecord] = []
    series: dict[str, FrameAttributeSeries] = {}
    embeddings: dict[str, EmbeddingBundle] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        obj = _parse_line(manifest, lineno, raw)
        if obj.get("kind") != "video":
            raise ValidationError(f"{manifest}:{lineno}: expected kind 'video'")
        vid = _require(obj, "video_id", manifest, lineno)
        if vid in seen:
            raise ValidationError(f"{manifest}:{lineno}: duplicate video_id {vid!r}")
        seen.add(vid)
        labels_raw = _require(obj, "labels", manifest, lineno)
        try:
            labels = TraitVector(**{t: float(labels_raw[t]) for t in TRAITS})
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"{manifest}:{lineno}: video {vid}: bad labels field: {exc}"
            ) from exc
        if invert_neuro:
            labels = invert_neuroticism(labels)
        try:
            validate_trait_vector(labels)
            metadata = SubjectMetadata(gender=obj.get("gender"), ethnicity=obj.get("ethnicity"))
            record = VideoRecord(
                video_id=vid, labels=labels, split=obj.get("split"), metadata=metadata
            )
        except ValidationError as exc:
            raise ValidationError(f"{manifest}:{lineno}: video {vid}: {exc}") from exc
        frame_count = int(_require(obj, "frame_count", manifest, lineno))
        visual_frames = [int(i) for i in _require(obj, "visual_frames", manifest, lineno)]
        series_path = manifest.parent / _require(obj, "series_path", manifest, lineno)
        emb_path = manifest.parent / _require(obj, "embeddings_path", manifest, lineno)

        vid_series = _load_series(series_path, vid, frame_count)
        vid_bundle = _load_embeddings(emb_path, vid, visual_frames)
        validate_bundle(vid_bundle, frame_count)
        records.append(record)
        series[vid] = vid_series
        embeddings[vid] = vid_bundle
    if header.get("n_videos") not in (None, len(records)):
        raise ValidationError(
            f"{manifest}: header declares {header['n_videos']} videos, found {len(records)}"
        )
    return Dataset(
        records=tuple(records), series=series, embeddings=embeddings, split_ratio=ratio
    )


_FRAME_FIELDS = (
    "frame_index",
    "face_detected",
    "emotion_probs",
    "attractiveness",
    "age",
    "gender_probs",
    "ethnicity_probs",
)


def _load_series(path: Path, video_id: str, frame_count: int) -> FrameAttributeSeries:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty series file")
    header = _parse_line(path, 1, lines[0])
    if header.get("kind") != "series_header":
        raise ValidationError(f"{path}:1: first line must be a series_header")
    if header.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"{path}:1: unsupported format_version {header.get('format_version')!r}"
        )
    if header.get("video_id") != video_id:
        raise ValidationError(
            f"{path}:1: series belongs to {header.get('video_id')!r}, expected {video_id!r}"
        )
    if header.get("frame_count") != frame_count:
        raise ValidationError(
            f"{path}:1: frame_count {header.get('frame_count')!r} "
            f"disagrees with manifest value {frame_count}"
        )
    columns: dict[str, list] = {name: [] for name in _FRAME_FIELDS}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        obj = _parse_line(path, lineno, raw)
        if obj.get("kind") != "frame":
            raise ValidationError(f"{path}:{lineno}: expected kind 'frame'")
        for name in _FRAME_FIELDS:
            columns[name].append(_require(obj, name, path, lineno))
    try:
        result = FrameAttributeSeries(
            video_id=video_id,
            frame_count=frame_count,
            frame_index=np.array(columns["frame_index"], dtype=np.int64),
            face_detected=np.array(columns["face_detected"], dtype=np.bool_),
            emotion_probs=np.array(columns["emotion_probs"], dtype=np.float64).reshape(-1, 7),
            attractiveness=np.array(columns["attractiveness"], dtype=np.float64),
            age=np.array(columns["age"], dtype=np.float64),
            gender_probs=np.array(columns["gender_probs"], dtype=np.float64).reshape(-1, 2),
            ethnicity_probs=np.array(columns["ethnicity_probs"], dtype=np.float64).reshape(-1, 3),
        )
        return validate_series(result)
    except (ValueError, ValidationError) as exc:
        if isinstance(exc, ValidationError):
            raise ValidationError(f"{path}: {exc}") from exc
        raise ValidationError(f"{path}: malformed frame columns: {exc}") from exc


def _load_embeddings(path: Path, video_id: str, visual_frames: list[int]) -> EmbeddingBundle:
    blob = path.read_bytes()
    if len(blob) < 16 or blob[:4] != _EMB_MAGIC:
        raise ValidationError(f"{path}: not an embeddings file (bad magic)")
    version, dim, count = struct.unpack("<III", blob[4:16])
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format_version {version}")
    if dim != EMBEDDING_DIM:
        raise ValidationError(f"{path}: embedding dim {dim}, expected {EMBEDDING_DIM}")
    expected = 3 + len(visual_frames)
    if count != expected:
        raise ValidationError(
            f"{path}: {count} embedding rows, manifest implies {expected} "
            f"(3 audio + {len(visual_frames)} visual)"
        )
    payload = np.frombuffer(blob, dtype="<f4", offset=16)
    if payload.size != count * dim:
        raise ValidationError(
            f"{path}: payload holds {payload.size} floats, expected {count * dim}"
        )
    rows = payload.reshape(count, dim)
    return EmbeddingBundle(
        video_id=video_id,
        visual_frames=np.array(visual_frames, dtype=np.int64),
        visual=rows[3:],
        audio_whole=rows[0],
        audio_first_half=rows[1],
        audio_second_half=rows[2],
    )
