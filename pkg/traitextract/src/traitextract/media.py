"""Decode video containers and WAV audio into arrays.

Video decoding goes through OpenCV, which bundles its own codecs, so the
usual containers (AVI, MP4, MKV) work without system tooling. Audio comes
from a sidecar ``.wav`` next to the clip (same stem), read with the
standard library; a clip without a sidecar is treated as silent.
"""
from __future__ import annotations

import wave
from pathlib import Path

import cv2
import numpy as np

FALLBACK_SAMPLE_RATE = 16000


class DecodeError(Exception):
    """The file exists but cannot be decoded as media."""


def decode_video(path) -> np.ndarray:
    """All frames of a clip as one (n, height, width, 3) uint8 BGR array."""
    p = Path(path)
    if not p.is_file():
        raise DecodeError(f"{p}: no such file")
    capture = cv2.VideoCapture(str(p))
    try:
        frames: list[np.ndarray] = []
        while True:
            ok, frame = capture.read()
            if not ok:
                break
            frames.append(frame)
    finally:
        capture.release()
    if not frames:
        raise DecodeError(f"{p}: no decodable video frames")
    return np.stack(frames)


def load_wav(path) -> tuple[np.ndarray, int]:
    """Mono float64 samples in [-1, 1] plus the sample rate."""
    p = Path(path)
    try:
        with wave.open(str(p), "rb") as fh:
            rate = fh.getframerate()
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            raw = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise DecodeError(f"{p}: not a readable WAV file: {exc}") from exc
    if width == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 4:
        data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    elif width == 1:
        data = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    else:
        raise DecodeError(f"{p}: unsupported sample width {width}")
    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    return data, rate


def sidecar_audio(video_path) -> tuple[np.ndarray, int]:
    """The clip's ``.wav`` sidecar samples, or silence when there is none."""
    sidecar = Path(video_path).with_suffix(".wav")
    if sidecar.is_file():
        return load_wav(sidecar)
    return np.zeros(0, dtype=np.float64), FALLBACK_SAMPLE_RATE
