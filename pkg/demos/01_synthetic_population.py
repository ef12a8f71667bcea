"""Generate a synthetic first-impressions corpus and look around inside it.

Every video carries per-frame face attributes, visual and audio embeddings,
five personality labels in [0, 1], and subject metadata. The generator is
fully seeded, so the same knobs always produce the same corpus.
"""
import tempfile
from pathlib import Path

import numpy as np

from traitfusion.dataio import load_dataset, mean_baseline_labels, write_dataset
from traitfusion.synthetic import SynthConfig, generate_synthetic
from traitfusion.types import TRAITS

# A small population: 60 videos of 40 frames each.
config = SynthConfig(n_videos=60, frames_per_video=40, seed=7)
dataset = generate_synthetic(config)

print(f"videos: {len(dataset.records)}")
for split in ("train", "validation", "test"):
    print(f"  {split}: {len(dataset.by_split(split))}")

# Labels are drawn around 0.5 with spread label_std, then clipped to [0, 1].
labels = np.array([r.labels.as_array() for r in dataset.records])
print("label means by trait:")
for trait, mean in zip(TRAITS, labels.mean(axis=0)):
    print(f"  {trait:<17} {mean:.3f}")

# The train-mean predictor is the reference every model must beat.
baseline = mean_baseline_labels(dataset.by_split("train"))
print("train-mean baseline:", np.round(baseline.as_array(), 3))

# Subject metadata drives the audit tables later on.
females = sum(1 for r in dataset.records if r.metadata.gender == "female")
print(f"female share: {100.0 * females / len(dataset.records):.1f}%")

# One video up close: frames, face detections, and embedding shapes.
record = dataset.records[0]
series = dataset.series[record.video_id]
bundle = dataset.embeddings[record.video_id]
faces = int(np.sum(series.face_detected))
print(f"{record.video_id}: {series.frame_count} frames, {faces} with a face")
print(f"  visual embeddings for frames {bundle.visual_frames[:5].tolist()}..., 128 dims each")
print("  audio embeddings: whole/first_half/second_half, 128 dims each")

# Round trip through the on-disk layout: a manifest plus per-video files.
out = Path(tempfile.mkdtemp(prefix="traitfusion_demo01_"))
manifest = write_dataset(dataset, out)
reloaded = load_dataset(manifest)
assert [r.video_id for r in reloaded.records] == [r.video_id for r in dataset.records]
print(f"wrote and reloaded the corpus via {manifest}")
