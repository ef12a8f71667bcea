"""Command-line interface binding the pipeline into reproducible runs.

Every command writes its outputs under a run directory (``--out``) along
with ``config.json`` (the exact flag values, enabling reruns) and
``run_manifest.txt`` (every file the run produced). Outputs are
deterministic: the same flags, seed, and inputs yield byte-identical
files.

Exit codes: 0 success, 2 I/O failure, 3 schema/validation failure,
4 numeric failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from traitfusion import audit as audit_mod
from traitfusion import charts, consensus, dataio, fusion, metrics, rng, synthetic
from traitfusion.nn import grad_check
from traitfusion.types import (
    ATTRIBUTES,
    AUDIO_SLICES,
    CONSENSUS_MODES,
    EMOTIONS,
    ETHNICITIES,
    GENDERS,
    TRAIT_LETTERS,
    TRAITS,
    MissingAttributeError,
    ModalityConfig,
    NumericError,
    SubjectMetadata,
    TraitVector,
    ValidationError,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_SCHEMA = 3
EXIT_NUMERIC = 4
EXIT_USAGE = 64

GRADCHECK_TOLERANCE = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so main() owns codes."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


class RunDir:
    """Output directory that records every file written into it."""

    def __init__(self, out: str) -> None:
        self.root = Path(out)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, rel: str) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def add(self, rel: str) -> None:
        self.files.append(rel)

    def write_text(self, rel: str, text: str) -> Path:
        p = self.path(rel)
        p.write_text(text, encoding="utf-8")
        self.add(rel)
        return p

    def write_json(self, rel: str, obj) -> Path:
        return self.write_text(rel, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def add_tree(self, rel_dir: str) -> None:
        base = self.root / rel_dir
        for p in sorted(base.rglob("*")):
            if p.is_file():
                self.add(str(p.relative_to(self.root)))

    def finish(self) -> None:
        listing = "\n".join(sorted(self.files))
        self.path("run_manifest.txt").write_text(listing + "\n", encoding="utf-8")


def _echo_config(run: RunDir, args: argparse.Namespace) -> None:
    payload = {k: v for k, v in vars(args).items() if k != "func"}
    for k, v in payload.items():
        if isinstance(v, tuple):
            payload[k] = list(v)
    run.write_json("config.json", {"command": args.command, "arguments": payload})


# -- flag value parsers --------------------------------------------------------


def _attributes_flag(text: str) -> tuple[str, ...]:
    if text in ("", "none"):
        return ()
    if text == "all":
        return ATTRIBUTES
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    for p in parts:
        if p not in ATTRIBUTES:
            raise argparse.ArgumentTypeError(
                f"unknown attribute {p!r}; choose from {', '.join(ATTRIBUTES)} or 'all'/'none'"
            )
    return parts


def _bias_flag(text: str) -> tuple[str, int, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("bias must look like group:T:offset, e.g. female:O:+0.05")
    group, letter, value = parts
    if group not in GENDERS + ETHNICITIES:
        raise argparse.ArgumentTypeError(
            f"unknown group {group!r}; choose from {', '.join(GENDERS + ETHNICITIES)}"
        )
    if letter not in TRAIT_LETTERS:
        raise argparse.ArgumentTypeError(f"trait letter must be one of {''.join(TRAIT_LETTERS)}")
    try:
        offset = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad offset {value!r}") from exc
    return group, TRAIT_LETTERS.index(letter), offset


def _shares_flag(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ethnicity shares must be three comma-separated numbers")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad share in {text!r}") from exc
    return values  # type: ignore[return-value]


def _add_modality_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--use-audio", choices=AUDIO_SLICES, default="none", help="audio slice to fuse")
    p.add_argument(
        "--attributes",
        type=_attributes_flag,
        default=(),
        help="comma-separated consensus attributes (or 'all'/'none')",
    )
    p.add_argument("--emotion-consensus", choices=CONSENSUS_MODES, default="orderless")
    p.add_argument("--attractiveness-consensus", choices=CONSENSUS_MODES, default="orderless")
    p.add_argument("--m-train", type=int, default=10, help="training frames per video")
    p.add_argument("--m-test", type=int, default=50, help="prediction frames per video")


def _modality_config(args: argparse.Namespace) -> ModalityConfig:
    return ModalityConfig(
        use_audio=args.use_audio,
        attributes=args.attributes,
        emotion_consensus=args.emotion_consensus,
        attractiveness_consensus=args.attractiveness_consensus,
        m_train=args.m_train,
        m_test=args.m_test,
    )


def _add_epoch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stage-a-epochs", type=int, default=fusion.STAGE_A_EPOCHS)
    p.add_argument("--stage-b-epochs", type=int, default=fusion.STAGE_B_EPOCHS)


def _load(args: argparse.Namespace) -> dataio.Dataset:
    return dataio.load_dataset(args.manifest, invert_neuro=args.invert_neuroticism)


# -- commands -------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    offsets: dict[str, list[float]] = {}
    for group, idx, value in args.bias or ():
        offsets.setdefault(group, [0.0] * len(TRAITS))[idx] += value
    config = synthetic.SynthConfig(
        n_videos=args.videos,
        frames_per_video=args.frames,
        seed=args.seed,
        label_mean=args.label_mean,
        label_std=args.label_std,
        gender_proportion_female=args.female_share,
        ethnicity_proportions=args.ethnicity_shares,
        bias_offsets={g: tuple(v) for g, v in offsets.items()},
        signal_strength=args.signal_strength,
        noise_std=args.noise_std,
    )
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = synthetic.generate_synthetic(config)
    dataio.write_dataset(dataset, run.root / "dataset")
    run.add_tree("dataset")
    run.finish()
    splits = [r.split for r in dataset.records]
    genders = [r.metadata.gender for r in dataset.records]
    ethnicities = [r.metadata.ethnicity for r in dataset.records]
    print(f"wrote {len(dataset.records)} videos x {config.frames_per_video} frames to {run.root / 'dataset'}")
    print("splits: " + ", ".join(f"{s}={splits.count(s)}" for s in ("train", "validation", "test")))
    print("gender shares: " + ", ".join(f"{g}={100 * genders.count(g) / len(genders):.1f}%" for g in GENDERS))
    print(
        "ethnicity shares: "
        + ", ".join(f"{e}={100 * ethnicities.count(e) / len(ethnicities):.1f}%" for e in ETHNICITIES)
    )
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = _load(args)
    config = _modality_config(args)
    model = fusion.build_model(config, args.seed)
    model, report = fusion.train(
        model, dataset, args.seed, stage_a_epochs=args.stage_a_epochs, stage_b_epochs=args.stage_b_epochs
    )
    fusion.save_model(run.path("model.ckpt"), model)
    run.add("model.ckpt")
    run.write_json("train_report.json", report.as_dict())
    rows = ["epoch\ttrain_loss\tvalidation_mae\tlearning_rate"]
    for i in range(report.epochs):
        rows.append(
            f"{i}\t{report.train_loss[i]:.8f}\t{report.validation_mae[i]:.8f}\t{report.learning_rate[i]:.8f}"
        )
    run.write_text("train_curves.tsv", "\n".join(rows) + "\n")
    epochs = list(range(report.epochs))
    run.write_text(
        "train_curves.svg",
        charts.line_chart(
            "training trace",
            "epoch",
            "value",
            [
                ("train loss", epochs, list(report.train_loss)),
                ("validation MAE", epochs, list(report.validation_mae)),
            ],
        ),
    )
    run.finish()
    print(
        f"trained {report.epochs} epochs (stage boundary {report.stage_boundary}); "
        f"final train loss {report.train_loss[-1]:.6f}, validation MAE {report.validation_mae[-1]:.6f}"
    )
    if report.skipped_train or report.skipped_validation:
        print(f"skipped videos: train={len(report.skipped_train)} validation={len(report.skipped_validation)}")
    print(f"checkpoint: {run.path('model.ckpt')}")
    return EXIT_OK


def _predictions_rows(preds: dict[str, TraitVector]) -> str:
    lines = ["video_id\t" + "\t".join(TRAITS)]
    for vid in sorted(preds):
        values = preds[vid].as_array()
        lines.append(vid + "\t" + "\t".join(repr(float(v)) for v in values))
    return "\n".join(lines) + "\n"


def cmd_predict(args: argparse.Namespace) -> int:
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = _load(args)
    model = fusion.load_model(args.model)
    _, preds = fusion.evaluate_split(model, dataset, args.split, m_test=args.m_test)
    run.write_text("predictions.tsv", _predictions_rows(preds))
    run.finish()
    print(f"wrote {len(preds)} predictions for split {args.split!r} to {run.path('predictions.tsv')}")
    return EXIT_OK


def _read_predictions(path: str) -> dict[str, TraitVector]:
    out: dict[str, TraitVector] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if lineno == 1 and cells[0] == "video_id":
            continue
        if len(cells) != 1 + len(TRAITS):
            raise ValidationError(f"{path}:{lineno}: expected video_id plus {len(TRAITS)} scores")
        try:
            values = [float(c) for c in cells[1:]]
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: non-numeric score") from exc
        out[cells[0]] = TraitVector.from_array(np.array(values))
    if not out:
        raise ValidationError(f"{path}: no predictions found")
    return out


def _metric_block(name: str, result: metrics.EvaluationResult) -> list[str]:
    acc = [f"{result.mean_accuracy:.6f}"] + [f"{a:.6f}" for a in result.per_trait_accuracy]
    mae = [f"{result.per_trait_mae.mean():.6f}"] + [f"{m:.6f}" for m in result.per_trait_mae]
    return [
        "\t".join([name, "accuracy"] + acc),
        "\t".join([name, "mae"] + mae),
    ]


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.model and args.predictions:
        raise UsageError("use either --model or --predictions, not both")
    if not (args.model or args.predictions or args.baseline):
        raise UsageError("nothing to evaluate: pass --model, --predictions, and/or --baseline")
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = _load(args)
    records = sorted(dataset.by_split(args.split), key=lambda r: r.video_id)
    if not records:
        raise ValidationError(f"split {args.split!r} is empty")
    ids = [r.video_id for r in records]
    gt = [r.labels for r in records]

    results: list[tuple[str, metrics.EvaluationResult]] = []
    compared: tuple[str, list[TraitVector]] | None = None
    if args.model:
        model = fusion.load_model(args.model)
        _, pred_map = fusion.evaluate_split(model, dataset, args.split, m_test=args.m_test)
        missing = [v for v in ids if v not in pred_map]
        if missing:
            raise ValidationError(f"model produced no prediction for {missing[0]}")
        preds = [pred_map[v] for v in ids]
        results.append(("model", metrics.accuracy(preds, gt)))
        compared = ("model", preds)
    if args.predictions:
        pred_map = _read_predictions(args.predictions)
        missing = [v for v in ids if v not in pred_map]
        if missing:
            raise ValidationError(f"{args.predictions}: missing prediction for {missing[0]}")
        preds = [pred_map[v] for v in ids]
        results.append(("predictions", metrics.accuracy(preds, gt)))
        compared = ("predictions", preds)
    baseline_preds: list[TraitVector] | None = None
    if args.baseline:
        base = dataio.mean_baseline_labels(dataset.by_split("train"))
        baseline_preds = [base] * len(ids)
        results.append(("baseline", metrics.accuracy(baseline_preds, gt)))

    lines = ["\t".join(["source", "metric", "Avg"] + list(TRAIT_LETTERS))]
    for name, result in results:
        lines.extend(_metric_block(name, result))
    run.write_text("metrics.tsv", "\n".join(lines) + "\n")

    if baseline_preds is not None and compared is not None:
        name, preds = compared
        curve = metrics.residual_curve(baseline_preds, preds, gt, grid_step=args.grid_step)
        rows = ["\t".join(["threshold"] + list(TRAITS))]
        for i, th in enumerate(curve.thresholds):
            rows.append("\t".join([f"{th:.3f}"] + [f"{v:.6f}" for v in curve.values[i]]))
        run.write_text("residual_curve.tsv", "\n".join(rows) + "\n")
        run.write_text(
            "residual_curve.svg",
            charts.line_chart(
                f"improvement over baseline ({name})",
                "threshold",
                "fraction of videos",
                [(t, list(curve.thresholds), list(curve.values[:, j])) for j, t in enumerate(TRAITS)],
            ),
        )
        k = min(args.top_k, len(ids))
        improvers = metrics.top_improvers(baseline_preds, preds, gt, k, ids)
        d = metrics.residuals(baseline_preds, preds, gt)
        index = {vid: i for i, vid in enumerate(ids)}
        rows = ["trait\trank\tvideo_id\tresidual"]
        for j, trait in enumerate(TRAITS):
            for rank, vid in enumerate(improvers[trait], start=1):
                rows.append(f"{trait}\t{rank}\t{vid}\t{d[index[vid], j]:.6f}")
        run.write_text("top_improvers.tsv", "\n".join(rows) + "\n")

    run.finish()
    for name, result in results:
        print(f"{name} mean accuracy {result.mean_accuracy:.4f} over {result.n_videos} videos")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = _load(args)
    configs = fusion.grid_configs(args.grid)
    table = fusion.run_ablation(
        dataset,
        configs,
        args.seed,
        jobs=args.jobs,
        stage_a_epochs=args.stage_a_epochs,
        stage_b_epochs=args.stage_b_epochs,
    )
    text = table.format()
    run.write_text("ablation.tsv", text)
    ok_rows = [r for r in table.rows if r.result is not None]
    if ok_rows:
        run.write_text(
            "ablation.svg",
            charts.bar_chart(
                f"ablation ({args.grid})",
                "mean accuracy",
                [r.name for r in ok_rows],
                [("Avg", [r.result.mean_accuracy for r in ok_rows])],
            ),
        )
    run.finish()
    print(text, end="")
    failed = [r for r in table.rows if r.result is None]
    if failed:
        print(f"{len(failed)} config(s) failed", file=sys.stderr)
    return EXIT_OK


def _predicted_metadata(dataset: dataio.Dataset) -> dict[str, SubjectMetadata]:
    out: dict[str, SubjectMetadata] = {}
    for vid, series in dataset.series.items():
        try:
            gender = GENDERS[int(np.argmax(consensus.gender_consensus(series)))]
            ethnicity = ETHNICITIES[int(np.argmax(consensus.ethnicity_consensus(series)))]
        except MissingAttributeError:
            continue
        out[vid] = SubjectMetadata(gender=gender, ethnicity=ethnicity)
    return out


def cmd_audit(args: argparse.Namespace) -> int:
    run = RunDir(args.out)
    _echo_config(run, args)
    dataset = _load(args)
    records = sorted(dataset.records, key=lambda r: r.video_id)

    predicted = _predicted_metadata(dataset) if args.source == "predicted" else None
    groups = audit_mod.group_stats(records, predicted=predicted, source=args.source)
    run.write_text("group_stats.tsv", groups.format())

    ages: dict[str, float] = {}
    for record in records:
        try:
            ages[record.video_id] = consensus.age_consensus(dataset.series[record.video_id])
        except MissingAttributeError:
            pass
    trend = audit_mod.age_trend(records, ages)
    run.write_text("age_trend.tsv", trend.format())
    run.write_text(
        "age_trend.svg",
        charts.bar_chart(
            "trait means by age range",
            "mean label",
            list(trend.labels),
            [(t, np.nan_to_num(trend.means[:, j]).tolist()) for j, t in enumerate(TRAITS)],
        ),
    )

    extreme_records = sorted(dataset.by_split(args.split), key=lambda r: r.video_id)
    if not extreme_records:
        raise ValidationError(f"split {args.split!r} is empty")
    hists = {}
    for record in extreme_records:
        values, _ = consensus.attractiveness_consensus(dataset.series[record.video_id], "orderless")
        hists[record.video_id] = values
    extremes = audit_mod.attractiveness_extremes(extreme_records, hists, fraction=args.fraction)
    run.write_text("extremes.tsv", extremes.format())
    for j, trait in enumerate(TRAITS):
        run.write_text(
            f"extremes_{trait}.svg",
            charts.bar_chart(
                f"attractiveness histograms, {trait} extremes",
                "mean bin mass",
                [f"bin{i}" for i in range(5)],
                [("top", extremes.top[j].tolist()), ("bottom", extremes.bottom[j].tolist())],
            ),
        )

    freqs = audit_mod.emotion_frequencies(
        extreme_records, dataset.series, threshold=args.threshold, fraction=args.fraction
    )
    run.write_text("emotion_frequencies.tsv", freqs.format())
    for j, trait in enumerate(TRAITS):
        run.write_text(
            f"emotion_frequencies_{trait}.svg",
            charts.bar_chart(
                f"high-confidence emotions, {trait} extremes",
                "frame count",
                list(EMOTIONS),
                [("top", freqs.top[j].tolist()), ("bottom", freqs.bottom[j].tolist())],
            ),
        )

    run.finish()
    print(f"group rows: {len(groups.rows)} (source {args.source})")
    print(f"age bins populated: {int((trend.counts > 0).sum())}/{len(trend.labels)}")
    print(
        f"extremes over split {args.split!r}: {extremes.set_size} videos per side, "
        f"{extremes.excluded} excluded"
    )
    print(f"reports written to {run.root}")
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    run = RunDir(args.out)
    _echo_config(run, args)
    config = ModalityConfig(
        use_audio="first_half",
        attributes=ATTRIBUTES,
        emotion_consensus="ordered",
        attractiveness_consensus="ordered",
        m_train=2,
        m_test=4,
    )
    rows = ["seed\tmax_rel_error"]
    worst = 0.0
    for i in range(args.seeds):
        seed = args.seed + i
        dataset = synthetic.generate_synthetic(
            synthetic.SynthConfig(n_videos=8, frames_per_video=12, seed=seed)
        )
        model = fusion.build_model(config, seed)
        samples = fusion.make_training_samples(dataset, config)
        keys = rng.derive_keys(seed, rng.TAG_GRADCHECK, np.arange(len(samples.batch)))
        pick = np.argsort(rng.Xoshiro256PPBank(keys).uniforms(1)[:, 0], kind="stable")[:2]
        err = grad_check(model, samples.batch.subset(pick))
        worst = max(worst, err)
        rows.append(f"{seed}\t{err:.3e}")
    run.write_text("gradcheck.tsv", "\n".join(rows) + "\n")
    run.finish()
    print(f"max relative error over {args.seeds} seed(s): {worst:.3e} (tolerance {args.tolerance:g})")
    if worst >= args.tolerance:
        raise NumericError(f"gradient check failed: {worst:.3e} >= {args.tolerance:g}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="traitfusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--videos", type=int, required=True)
    p.add_argument("--frames", type=int, default=450)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--label-mean", type=float, default=0.5)
    p.add_argument("--label-std", type=float, default=0.15)
    p.add_argument("--female-share", type=float, default=0.55)
    p.add_argument("--ethnicity-shares", type=_shares_flag, default=(0.11, 0.03, 0.86))
    p.add_argument(
        "--bias",
        type=_bias_flag,
        action="append",
        help="label offset group:T:offset (e.g. female:O:+0.05); repeatable",
    )
    p.add_argument("--signal-strength", type=float, default=0.75)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a fusion model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--invert-neuroticism", action="store_true")
    _add_modality_flags(p)
    _add_epoch_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write video-level predictions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "validation", "test"), default="test")
    p.add_argument("--m-test", type=int, default=None)
    p.add_argument("--invert-neuroticism", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against labels")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "validation", "test"), default="test")
    p.add_argument("--model", help="checkpoint to evaluate")
    p.add_argument("--predictions", help="predictions.tsv to evaluate")
    p.add_argument("--baseline", action="store_true", help="also score the train-mean baseline")
    p.add_argument("--m-test", type=int, default=None)
    p.add_argument("--grid-step", type=float, default=0.001)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--invert-neuroticism", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train and score a grid of configurations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", choices=tuple(fusion.GRIDS) + ("all",), default="standard")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--invert-neuroticism", action="store_true")
    _add_epoch_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("audit", help="bias reports over labels and attributes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--source", choices=audit_mod.GROUP_SOURCES, default="metadata")
    p.add_argument("--split", choices=("train", "validation", "test"), default="test",
                   help="split for the extremes/emotion analyses")
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--fraction", type=float, default=0.10)
    p.add_argument("--invert-neuroticism", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gradcheck", help="verify analytic gradients numerically")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds to check")
    p.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
