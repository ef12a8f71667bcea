"""Run a backbone suite over video clips and export interchange files.

The output is the consuming toolkit's dataset layout: ``manifest.jsonl``
next to ``series/`` and ``embeddings/`` directories, line-delimited JSON
for text payloads and the 16-byte-header binary format for embeddings.
Clips are processed independently (optionally in parallel); per-video
files land first and the manifest is merged at the end, so a failed clip
never leaves a half-written dataset.

Real clips carry no ground-truth trait labels, but the manifest schema
requires them, so every video gets the neutral 0.5 placeholder and the
manifest header's provenance block says so. Replace the labels when human
annotations exist.
"""
from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from traitextract.backbones import BackboneSuite, conform_embedding, reference_suite
from traitextract.media import DecodeError, decode_video, sidecar_audio

FORMAT_VERSION = 1
EMBEDDING_DIM = 128
_EMB_MAGIC = b"TFEB"
_TRAITS = ("openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism")
_PLACEHOLDER_LABEL = 0.5


class JobError(Exception):
    """The job as a whole is misconfigured."""


@dataclass(frozen=True)
class ExtractionJob:
    """What to extract: clips, backbones, destination, and sampling stride.

    ``manifest_path`` names the output manifest; series and embedding files
    go to sibling directories. ``frame_stride`` thins the per-frame work:
    every stride-th frame gets an attribute row and a visual embedding.
    ``embedding_seed`` fixes the projection used when a backbone's native
    embedding width differs from 128. ``jobs`` caps clip-level parallelism.
    """

    clips: tuple[Path, ...]
    manifest_path: Path
    suite: BackboneSuite = field(default_factory=reference_suite)
    frame_stride: int = 1
    embedding_seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "clips", tuple(Path(c) for c in self.clips))
        object.__setattr__(self, "manifest_path", Path(self.manifest_path))
        if not self.clips:
            raise JobError("job needs at least one clip")
        if self.frame_stride < 1:
            raise JobError(f"frame_stride must be >= 1, got {self.frame_stride}")
        if self.jobs < 1:
            raise JobError(f"jobs must be >= 1, got {self.jobs}")
        stems = [c.stem for c in self.clips]
        for stem in stems:
            if stems.count(stem) > 1:
                raise JobError(f"clip stem {stem!r} is not unique; video ids collide")


@dataclass(frozen=True)
class ClipFailure:
    path: Path
    error: str


@dataclass(frozen=True)
class ExtractionReport:
    """What a job produced: the manifest, its video ids, and any failures."""

    manifest_path: Path
    video_ids: tuple[str, ...]
    failures: tuple[ClipFailure, ...]


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _process_clip(job: ExtractionJob, clip: Path, out_dir: Path) -> dict:
    frames = decode_video(clip)
    frame_count = frames.shape[0]
    sampled = list(range(0, frame_count, job.frame_stride))
    suite = job.suite

    series_lines = [
        _dump(
            {
                "kind": "series_header",
                "format_version": FORMAT_VERSION,
                "video_id": clip.stem,
                "frame_count": frame_count,
            }
        )
    ]
    visual_rows = []
    for index in sampled:
        frame = frames[index]
        box = suite.face.detect(frame)
        if box is None:
            emotion = np.zeros(7)
            attractiveness, age = 0.0, 0.0
            gender, ethnicity = np.zeros(2), np.zeros(3)
        else:
            x, y, w, h = box
            crop = frame[y : y + h, x : x + w]
            emotion = suite.emotion.infer(crop)
            attractiveness = suite.attractiveness.infer(crop)
            age = suite.age.infer(crop)
            gender = suite.gender.infer(crop)
            ethnicity = suite.ethnicity.infer(crop)
        series_lines.append(
            _dump(
                {
                    "kind": "frame",
                    "frame_index": index,
                    "face_detected": box is not None,
                    "emotion_probs": [float(v) for v in emotion],
                    "attractiveness": float(attractiveness),
                    "age": float(age),
                    "gender_probs": [float(v) for v in gender],
                    "ethnicity_probs": [float(v) for v in ethnicity],
                }
            )
        )
        visual_rows.append(
            conform_embedding(suite.visual.embed(frame), EMBEDDING_DIM, job.embedding_seed)
        )

    samples, rate = sidecar_audio(clip)
    midpoint = (samples.size + 1) // 2  # first half keeps the extra sample
    audio_rows = [
        conform_embedding(suite.audio.embed(part, rate), EMBEDDING_DIM, job.embedding_seed)
        for part in (samples, samples[:midpoint], samples[midpoint:])
    ]

    (out_dir / "series" / f"{clip.stem}.jsonl").write_text(
        "\n".join(series_lines) + "\n", encoding="utf-8"
    )
    rows = np.vstack(audio_rows + visual_rows).astype("<f4")
    with open(out_dir / "embeddings" / f"{clip.stem}.bin", "wb") as fh:
        fh.write(_EMB_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, rows.shape[1], rows.shape[0]))
        fh.write(rows.tobytes())

    return {
        "kind": "video",
        "video_id": clip.stem,
        "split": None,
        "labels": {t: _PLACEHOLDER_LABEL for t in _TRAITS},
        "gender": None,
        "ethnicity": None,
        "frame_count": frame_count,
        "visual_frames": sampled,
        "series_path": f"series/{clip.stem}.jsonl",
        "embeddings_path": f"embeddings/{clip.stem}.bin",
    }


def extract(job: ExtractionJob) -> ExtractionReport:
    """Process every clip and write the merged manifest.

    Undecodable clips are reported per file and skipped; the rest of the
    job continues. Output bytes depend only on the clips, the backbones,
    and the job settings, never on ``jobs``.
    """
    out_dir = job.manifest_path.parent
    (out_dir / "series").mkdir(parents=True, exist_ok=True)
    (out_dir / "embeddings").mkdir(parents=True, exist_ok=True)

    def worker(clip: Path):
        try:
            return _process_clip(job, clip, out_dir)
        except DecodeError as exc:
            return ClipFailure(path=clip, error=str(exc))

    if job.jobs > 1:
        with ThreadPoolExecutor(max_workers=job.jobs) as pool:
            results = list(pool.map(worker, job.clips))
    else:
        results = [worker(clip) for clip in job.clips]

    entries = [r for r in results if isinstance(r, dict)]
    failures = tuple(r for r in results if isinstance(r, ClipFailure))
    header = {
        "kind": "dataset_header",
        "format_version": FORMAT_VERSION,
        "n_videos": len(entries),
        "split_ratio": [3, 1, 1],
        "provenance": {
            "backbones": job.suite.versions(),
            "embedding_projection_seed": job.embedding_seed,
            "frame_stride": job.frame_stride,
            "labels": "placeholder 0.5; no human annotations",
        },
    }
    lines = [_dump(header)] + [_dump(e) for e in entries]
    job.manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ExtractionReport(
        manifest_path=job.manifest_path,
        video_ids=tuple(e["video_id"] for e in entries),
        failures=failures,
    )
