"""Reference backbones: detection, attribute heads, embedders, conformance."""
from __future__ import annotations

import cv2
import numpy as np
from clipmaker import make_colorbar_clip, make_face_clip

from traitextract.backbones import (
    GrayPatchEmbedder,
    OvalBlobFaceDetector,
    ProjectionAgeBackbone,
    ProjectionAttractivenessBackbone,
    ProjectionEmotionBackbone,
    ProjectionEthnicityBackbone,
    ProjectionGenderBackbone,
    SpectrumBandEmbedder,
    conform_embedding,
    reference_suite,
)
from traitextract.media import decode_video


def _face_frame() -> np.ndarray:
    frame = np.random.default_rng(3).integers(0, 40, size=(48, 64, 3)).astype(np.uint8)
    cv2.ellipse(frame, (32, 24), (11, 14), 0.0, 0.0, 360.0, (190, 205, 225), -1)
    return frame


def test_detector_accepts_oval_and_covers_it() -> None:
    box = OvalBlobFaceDetector().detect(_face_frame())
    assert box is not None
    x, y, w, h = box
    # the box contains the drawn ellipse center and roughly its extent
    assert x <= 32 <= x + w and y <= 24 <= y + h
    assert 18 <= w <= 28 and 24 <= h <= 34


def test_detector_rejects_bars_uniform_and_full_height_band(tmp_path) -> None:
    detector = OvalBlobFaceDetector()
    assert detector.detect(np.full((48, 64, 3), 120, dtype=np.uint8)) is None
    band = np.zeros((48, 64, 3), dtype=np.uint8)
    band[:, 20:44] = 220  # bright full-height rectangle
    assert detector.detect(band) is None
    for frame in decode_video(make_colorbar_clip(tmp_path / "bars.avi")):
        assert detector.detect(frame) is None


def test_detection_survives_mjpg_compression(tmp_path) -> None:
    frames = decode_video(make_face_clip(tmp_path / "f.avi", n_frames=12, seed=5))
    detector = OvalBlobFaceDetector()
    assert all(detector.detect(frame) is not None for frame in frames)


def test_emotion_head_is_a_simplex() -> None:
    crop = _face_frame()[10:38, 21:44]
    probs = ProjectionEmotionBackbone(seed=0).infer(crop)
    assert probs.shape == (7,)
    assert np.all(probs >= 0.0)
    assert abs(probs.sum() - 1.0) <= 1e-12
    # same seed, same output; another seed, another head
    again = ProjectionEmotionBackbone(seed=0).infer(crop)
    assert np.array_equal(probs, again)
    other = ProjectionEmotionBackbone(seed=1).infer(crop)
    assert not np.array_equal(probs, other)


def test_scalar_and_vote_heads_respect_ranges() -> None:
    crop = _face_frame()[10:38, 21:44]
    score = ProjectionAttractivenessBackbone(seed=0).infer(crop)
    assert 0.0 < score < 1.0
    age = ProjectionAgeBackbone(seed=0).infer(crop)
    assert age > 18.0
    for head, dim in ((ProjectionGenderBackbone(0), 2), (ProjectionEthnicityBackbone(0), 3)):
        probs = head.infer(crop)
        assert probs.shape == (dim,)
        assert np.all(probs >= 0.0) and abs(probs.sum() - 1.0) <= 1e-12


def test_gray_patch_embedder_dims_and_range() -> None:
    vec = GrayPatchEmbedder().embed(_face_frame())
    assert vec.shape == (256,)
    assert np.all(vec >= -0.5) and np.all(vec <= 0.5)


def test_spectrum_embedder_zero_on_silence_and_signal_on_tone() -> None:
    embedder = SpectrumBandEmbedder(bands=64)
    assert np.array_equal(embedder.embed(np.zeros(0), 8000), np.zeros(64))
    t = np.arange(8000) / 8000.0
    tone = embedder.embed(np.sin(2 * np.pi * 440.0 * t), 8000)
    assert tone.shape == (64,)
    assert tone.max() > 0.0
    assert np.array_equal(tone, embedder.embed(np.sin(2 * np.pi * 440.0 * t), 8000))


def test_conform_embedding_pass_pad_and_project() -> None:
    same = conform_embedding(np.arange(128.0), 128, seed=9)
    assert np.array_equal(same, np.arange(128.0))
    padded = conform_embedding(np.arange(64.0), 128, seed=9)
    assert np.array_equal(padded[:64], np.arange(64.0))
    assert np.array_equal(padded[64:], np.zeros(64))
    wide = np.random.default_rng(2).standard_normal(256)
    projected = conform_embedding(wide, 128, seed=9)
    assert projected.shape == (128,)
    # documented rule: seeded Gaussian matrix over sqrt of the native width
    matrix = np.random.default_rng(9).standard_normal((128, 256))
    assert np.allclose(projected, matrix @ wide / 16.0, atol=1e-12)
    assert not np.allclose(projected, conform_embedding(wide, 128, seed=10))
    assert np.array_equal(conform_embedding(np.zeros(256), 128, seed=9), np.zeros(128))


def test_reference_suite_versions_cover_every_backbone() -> None:
    versions = reference_suite(seed=0).versions()
    assert sorted(versions) == [
        "age",
        "attractiveness",
        "audio",
        "emotion",
        "ethnicity",
        "face",
        "gender",
        "visual",
    ]
    assert all("/" in v for v in versions.values())
