"""Compare input configurations side by side on one corpus.

Each row of the grid trains the same architecture from the same seed with a
different set of inputs, then reports per-trait accuracy on the test split.
The audio sub-grid below shows that the first half of the soundtrack carries
more usable signal than the second half on this generator.
"""
from traitfusion.fusion import grid_configs, run_ablation, standard_grid
from traitfusion.synthetic import SynthConfig, generate_synthetic

dataset = generate_synthetic(SynthConfig(n_videos=150, frames_per_video=30, seed=0))

# Available grids: the nine-configuration standard grid, plus focused
# sub-grids for the emotion, attractiveness, and audio variants.
print("standard grid rows:", ", ".join(name for name, _ in standard_grid()))

table = run_ablation(dataset, grid_configs("audio"), seed=0)
print()
print(table.format(), end="")

rows = {row.name: row.result.mean_accuracy for row in table.rows}
first = rows["V+Audio[first_half]"]
second = rows["V+Audio[second_half]"]
print()
print(f"first half beats second half by {first - second:+.4f} mean accuracy")
