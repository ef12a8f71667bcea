"""Adapter from real video clips to traitfusion interchange files.

Decodes clips, runs one pluggable backbone per face attribute plus visual
and audio embedders, and writes the dataset layout the traitfusion loader
validates. The shipped reference backbones are small deterministic
functions of the media, so the adapter runs end to end with no downloaded
weights; real checkpoints plug in through the same protocols.
"""
from traitextract.backbones import (
    AudioEmbedder,
    BackboneSuite,
    FaceDetector,
    GrayPatchEmbedder,
    OvalBlobFaceDetector,
    ProbabilityBackbone,
    ProjectionAgeBackbone,
    ProjectionAttractivenessBackbone,
    ProjectionEmotionBackbone,
    ProjectionEthnicityBackbone,
    ProjectionGenderBackbone,
    ScoreBackbone,
    SpectrumBandEmbedder,
    VisualEmbedder,
    conform_embedding,
    reference_suite,
)
from traitextract.extract import (
    ClipFailure,
    ExtractionJob,
    ExtractionReport,
    JobError,
    extract,
)
from traitextract.media import DecodeError, decode_video, load_wav, sidecar_audio

__version__ = "0.1.0"
