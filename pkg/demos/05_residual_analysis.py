"""Ask where a trained model actually improves on the mean baseline.

Improvement residuals compare two predictors per video and trait: positive
where the second predictor lands closer to ground truth. The survival curve
shows what fraction of videos improve by at least each threshold, and the
top-improver ranking names the videos that gained the most.
"""
from traitfusion.dataio import mean_baseline_labels
from traitfusion.fusion import build_model, evaluate_split, standard_grid, train
from traitfusion.metrics import residual_curve, residuals, top_improvers
from traitfusion.synthetic import SynthConfig, generate_synthetic

dataset = generate_synthetic(
    SynthConfig(n_videos=200, frames_per_video=30, seed=0, signal_strength=0.9)
)
config = dict(standard_grid())["Proposed"]
model, _ = train(build_model(config, seed=0), dataset, seed=0)

# Align baseline and model predictions over the test split.
_, predictions = evaluate_split(model, dataset, "test")
records = sorted(dataset.by_split("test"), key=lambda r: r.video_id)
ids = [r.video_id for r in records]
truth = [r.labels for r in records]
baseline = [mean_baseline_labels(dataset.by_split("train"))] * len(records)
model_preds = [predictions[i] for i in ids]

d = residuals(baseline, model_preds, truth)
print(f"videos improved on openness: {(d[:, 0] > 0).sum()} of {len(ids)}")

# Survival curve: fraction of videos with residual >= threshold.
curve = residual_curve(baseline, model_preds, truth, grid_step=0.05)
for k in (0, 1, 2, 4):
    th = curve.thresholds[k]
    frac = curve.values[k, 0]
    print(f"  openness residual >= {th:.2f}: {100.0 * frac:.1f}% of videos")

# The five videos the model helped most, per trait.
best = top_improvers(baseline, model_preds, truth, k=5, video_ids=ids)
print("top improvers, openness:", ", ".join(best["openness"]))
print("top improvers, neuroticism:", ", ".join(best["neuroticism"]))
