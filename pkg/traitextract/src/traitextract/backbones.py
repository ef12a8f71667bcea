"""Pluggable per-attribute backbones plus deterministic reference models.

Every backbone carries a ``version`` string that the extraction manifest
records for provenance, so swapping checkpoints is visible in the output.
The reference implementations are deliberately small, deterministic
functions of the pixels and samples: they exercise the full contract
(probability simplexes, positive ages, embedding conformance) without any
downloaded weights, and real checkpoints plug in through the same
protocols.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

import cv2
import numpy as np

FaceBox = tuple[int, int, int, int]  # x, y, width, height


@runtime_checkable
class FaceDetector(Protocol):
    version: str

    def detect(self, frame: np.ndarray) -> Optional[FaceBox]: ...


@runtime_checkable
class ProbabilityBackbone(Protocol):
    version: str

    def infer(self, crop: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class ScoreBackbone(Protocol):
    version: str

    def infer(self, crop: np.ndarray) -> float: ...


@runtime_checkable
class VisualEmbedder(Protocol):
    version: str

    def embed(self, frame: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class AudioEmbedder(Protocol):
    version: str

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray: ...


def _gray(image: np.ndarray) -> np.ndarray:
    if image.ndim == 3:
        return cv2.cvtColor(image, cv2.COLOR_BGR2GRAY)
    return image


class OvalBlobFaceDetector:
    """Finds one bright, roughly elliptical blob against a darker ground.

    Otsu-thresholds the grayscale frame and accepts the largest connected
    component only if it is face-plausible: a moderate share of the frame,
    near-square bounding box, elliptical fill ratio, and not a full-height
    band. Rectangular regions (test bars, letterboxing) fill their box
    almost completely and are rejected by the fill ceiling.
    """

    version = "oval-blob/1"

    def detect(self, frame: np.ndarray) -> Optional[FaceBox]:
        gray = _gray(frame)
        height, width = gray.shape
        _, binary = cv2.threshold(gray, 0, 255, cv2.THRESH_BINARY + cv2.THRESH_OTSU)
        count, _, stats, _ = cv2.connectedComponentsWithStats(binary, connectivity=8)
        if count < 2:
            return None
        areas = stats[1:, cv2.CC_STAT_AREA]
        best = 1 + int(np.argmax(areas))
        x, y, w, h, area = (int(stats[best, s]) for s in (
            cv2.CC_STAT_LEFT,
            cv2.CC_STAT_TOP,
            cv2.CC_STAT_WIDTH,
            cv2.CC_STAT_HEIGHT,
            cv2.CC_STAT_AREA,
        ))
        share = area / float(height * width)
        if not 0.02 <= share <= 0.6:
            return None
        aspect = w / float(h)
        if not 0.5 <= aspect <= 2.0:
            return None
        fill = area / float(w * h)
        if not 0.55 <= fill <= 0.95:
            return None
        if h >= 0.95 * height:
            return None
        return (x, y, w, h)


def _crop_features(crop: np.ndarray) -> np.ndarray:
    patch = cv2.resize(_gray(crop), (16, 16), interpolation=cv2.INTER_AREA)
    return patch.astype(np.float64).ravel() / 255.0 - 0.5


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


class _ProjectionHead:
    """Seeded linear readout of 16x16 crop features; the shared base of the
    reference attribute backbones."""

    def __init__(self, out_dim: int, seed: int, tag: int) -> None:
        stream = np.random.default_rng((seed << 8) ^ tag)
        self._weights = stream.standard_normal((out_dim, 256)) / 16.0

    def _logits(self, crop: np.ndarray) -> np.ndarray:
        return self._weights @ _crop_features(crop)


class ProjectionEmotionBackbone(_ProjectionHead):
    version = "proj-emotion/1"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(7, seed, 1)

    def infer(self, crop: np.ndarray) -> np.ndarray:
        return _softmax(self._logits(crop))


class ProjectionAttractivenessBackbone(_ProjectionHead):
    version = "proj-attractiveness/1"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(1, seed, 2)

    def infer(self, crop: np.ndarray) -> float:
        return float(1.0 / (1.0 + np.exp(-self._logits(crop)[0])))


class ProjectionAgeBackbone(_ProjectionHead):
    version = "proj-age/1"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(1, seed, 3)

    def infer(self, crop: np.ndarray) -> float:
        # strictly positive, centered on adulthood
        return float(18.0 + 50.0 / (1.0 + np.exp(-self._logits(crop)[0])))


class ProjectionGenderBackbone(_ProjectionHead):
    version = "proj-gender/1"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(2, seed, 4)

    def infer(self, crop: np.ndarray) -> np.ndarray:
        return _softmax(self._logits(crop))


class ProjectionEthnicityBackbone(_ProjectionHead):
    version = "proj-ethnicity/1"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(3, seed, 5)

    def infer(self, crop: np.ndarray) -> np.ndarray:
        return _softmax(self._logits(crop))


class GrayPatchEmbedder:
    """Downsampled grayscale frame as a 256-dim scene embedding."""

    version = "gray-patch/1"

    def embed(self, frame: np.ndarray) -> np.ndarray:
        return _crop_features(frame)


class SpectrumBandEmbedder:
    """Mean log magnitude of the sample spectrum over equal frequency bands."""

    version = "spectrum-band/1"

    def __init__(self, bands: int = 64) -> None:
        self.bands = bands

    def embed(self, samples: np.ndarray, rate: int) -> np.ndarray:
        out = np.zeros(self.bands, dtype=np.float64)
        if samples.size < 2:
            return out
        magnitude = np.log1p(np.abs(np.fft.rfft(samples)))
        edges = np.linspace(0, magnitude.size, self.bands + 1).astype(int)
        for i in range(self.bands):
            lo, hi = edges[i], edges[i + 1]
            if hi > lo:
                out[i] = magnitude[lo:hi].mean()
        return out


def conform_embedding(vector: np.ndarray, dim: int, seed: int) -> np.ndarray:
    """Bring a backbone's native embedding to ``dim`` values.

    Wider vectors go through a seeded Gaussian projection, narrower ones are
    zero-padded, and matching ones pass through. The seed is part of the
    output contract, so it is recorded in the manifest.
    """
    flat = np.asarray(vector, dtype=np.float64).ravel()
    if flat.size == dim:
        return flat
    if flat.size < dim:
        return np.concatenate([flat, np.zeros(dim - flat.size)])
    projection = np.random.default_rng(seed).standard_normal((dim, flat.size))
    return projection @ flat / np.sqrt(flat.size)


@dataclass(frozen=True)
class BackboneSuite:
    """One backbone per attribute plus the two embedders."""

    face: FaceDetector
    emotion: ProbabilityBackbone
    attractiveness: ScoreBackbone
    age: ScoreBackbone
    gender: ProbabilityBackbone
    ethnicity: ProbabilityBackbone
    visual: VisualEmbedder
    audio: AudioEmbedder

    def versions(self) -> dict[str, str]:
        return {
            "face": self.face.version,
            "emotion": self.emotion.version,
            "attractiveness": self.attractiveness.version,
            "age": self.age.version,
            "gender": self.gender.version,
            "ethnicity": self.ethnicity.version,
            "visual": self.visual.version,
            "audio": self.audio.version,
        }


def reference_suite(seed: int = 0) -> BackboneSuite:
    """The no-weights reference suite; deterministic for a given seed."""
    return BackboneSuite(
        face=OvalBlobFaceDetector(),
        emotion=ProjectionEmotionBackbone(seed),
        attractiveness=ProjectionAttractivenessBackbone(seed),
        age=ProjectionAgeBackbone(seed),
        gender=ProjectionGenderBackbone(seed),
        ethnicity=ProjectionEthnicityBackbone(seed),
        visual=GrayPatchEmbedder(),
        audio=SpectrumBandEmbedder(),
    )
