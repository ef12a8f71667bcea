"""Late-fusion trait regression: architecture assembly, two-stage training,
video-level prediction, and ablation grids.

The network is intentionally small and fully explicit:

* a visual FC layer maps each 128-d frame embedding to 128 dims when audio
  is active, otherwise to 256;
* the raw 128-d audio slice embedding is concatenated unchanged;
* consensus attribute blocks are reduced per attribute (emotion histograms
  through a 7-unit relu layer; ordered attractiveness histograms through a
  5-unit relu layer; age, gender, ethnicity pass through), concatenated in
  a fixed order, and, when two or more attributes are active, reduced by a
  joint relu layer sized ceil(in * 8 / 18) so the all-attributes case is
  exactly 18 -> 8;
* a final sigmoid layer maps the fused vector to the five traits.

With audio and all five attributes the fused vector is 128 + 128 + 8 = 264.

Training runs a fixed two-stage schedule (40 epochs at lr 0.001, then 100
epochs at lr 0.0005) with Adam, MSE loss, batch size 25, and a plateau
scheduler (factor 0.95, patience 5) driven by video-level validation MAE.
Optimizer and scheduler state are rebuilt at the stage boundary. Everything
is deterministic given the seed.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from traitfusion import rng
from traitfusion.consensus import ConsensusVector, build_consensus, select_equidistant_frames
from traitfusion.dataio import Dataset
from traitfusion.metrics import EvaluationResult, accuracy
from traitfusion.nn import (
    AdamState,
    DenseLayer,
    PlateauScheduler,
    adam_step,
    load_checkpoint,
    mse_loss,
    save_checkpoint,
)
from traitfusion.types import (
    ATTRIBUTES,
    EMBEDDING_DIM,
    TRAITS,
    MissingAttributeError,
    ModalityConfig,
    NumericError,
    TraitVector,
    ValidationError,
)

log = logging.getLogger(__name__)

BATCH_SIZE = 25
STAGE_A_EPOCHS = 40
STAGE_B_EPOCHS = 100
STAGE_A_LR = 0.001
STAGE_B_LR = 0.0005

# reduced (post-branch) width of each attribute block
_REDUCED_DIM = {"emotion": 7, "attractiveness": 5, "age": 1, "gender": 2, "ethnicity": 3}
_FULL_JOINT_IN = 18  # all five attributes reduced: 7+5+1+2+3
_FULL_JOINT_OUT = 8

# stable per-layer initialization stream ids
_LAYER_STREAM = {"visual_fc": 0, "emotion_fc": 1, "attractiveness_fc": 2, "attribute_joint_fc": 3, "head": 4}


def _emotion_in_dim(config: ModalityConfig) -> int:
    return 70 if config.emotion_consensus == "ordered" else 35


def _attract_in_dim(config: ModalityConfig) -> int:
    return 10 if config.attractiveness_consensus == "ordered" else 5


def joint_layer_dims(config: ModalityConfig) -> tuple[int, int] | None:
    """(in, out) of the joint attribute layer, or None when it is bypassed."""
    if len(config.attributes) < 2:
        return None
    in_dim = sum(_REDUCED_DIM[a] for a in config.attributes)
    return in_dim, math.ceil(in_dim * _FULL_JOINT_OUT / _FULL_JOINT_IN)


@dataclass
class FusionModel:
    """Late-fusion network; layers absent from the config are None."""

    config: ModalityConfig
    visual_fc: DenseLayer
    head: DenseLayer
    emotion_fc: DenseLayer | None = None
    attractiveness_fc: DenseLayer | None = None
    attribute_joint_fc: DenseLayer | None = None

    @property
    def visual_out_dim(self) -> int:
        return self.visual_fc.out_dim

    @property
    def attribute_block_dim(self) -> int:
        if not self.config.attributes:
            return 0
        joint = joint_layer_dims(self.config)
        if joint is None:
            return _REDUCED_DIM[self.config.attributes[0]]
        return joint[1]

    @property
    def fused_dim(self) -> int:
        audio = EMBEDDING_DIM if self.config.use_audio != "none" else 0
        return self.visual_out_dim + audio + self.attribute_block_dim

    def layers(self) -> list[tuple[str, DenseLayer]]:
        """Present layers in fixed (name, layer) order."""
        out: list[tuple[str, DenseLayer]] = [("visual_fc", self.visual_fc)]
        for name in ("emotion_fc", "attractiveness_fc", "attribute_joint_fc"):
            layer = getattr(self, name)
            if layer is not None:
                out.append((name, layer))
        out.append(("head", self.head))
        return out

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for _, layer in self.layers():
            params.append(layer.weights)
            params.append(layer.bias)
        return params

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    # -- forward / backward over column batches ------------------------------

    def forward_batch(self, batch: "SampleBatch") -> np.ndarray:
        """(n, 5) trait predictions for a batch of frame-level samples."""
        parts = [self.visual_fc.forward(batch.visual)]
        if self.config.use_audio != "none":
            if batch.audio is None:
                raise MissingAttributeError("audio embedding required by config but missing")
            parts.append(batch.audio)
        attr = self._attribute_forward(batch)
        if attr is not None:
            parts.append(attr)
        fused = np.concatenate(parts, axis=1)
        if fused.shape[1] != self.head.in_dim:
            raise ValidationError(
                f"fused width {fused.shape[1]} does not match head input {self.head.in_dim}"
            )
        return self.head.forward(fused)

    def _attribute_forward(self, batch: "SampleBatch") -> np.ndarray | None:
        if not self.config.attributes:
            return None
        blocks: list[np.ndarray] = []
        for attr in self.config.attributes:
            col = batch.attribute(attr)
            if attr == "emotion":
                col = self.emotion_fc.forward(col)
            elif attr == "attractiveness" and self.attractiveness_fc is not None:
                col = self.attractiveness_fc.forward(col)
            blocks.append(col)
        joined = np.concatenate(blocks, axis=1)
        if self.attribute_joint_fc is not None:
            joined = self.attribute_joint_fc.forward(joined)
        return joined

    def backward_batch(self, grad_pred: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients (aligned with parameters()) for the batch last
        passed through forward_batch."""
        grads: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        gw, gb, grad_fused = self.head.backward(grad_pred)
        grads["head"] = (gw, gb)
        offset = self.visual_out_dim
        g_visual = grad_fused[:, :offset]
        if self.config.use_audio != "none":
            offset += EMBEDDING_DIM
        if self.config.attributes:
            g_attr = grad_fused[:, offset:]
            if self.attribute_joint_fc is not None:
                gw, gb, g_attr = self.attribute_joint_fc.backward(g_attr)
                grads["attribute_joint_fc"] = (gw, gb)
            lo = 0
            for attr in self.config.attributes:
                width = _REDUCED_DIM[attr]
                seg = g_attr[:, lo : lo + width]
                lo += width
                if attr == "emotion":
                    gw, gb, _ = self.emotion_fc.backward(seg)
                    grads["emotion_fc"] = (gw, gb)
                elif attr == "attractiveness" and self.attractiveness_fc is not None:
                    gw, gb, _ = self.attractiveness_fc.backward(seg)
                    grads["attractiveness_fc"] = (gw, gb)
        gw, gb, _ = self.visual_fc.backward(g_visual)
        grads["visual_fc"] = (gw, gb)
        out: list[np.ndarray] = []
        for name, _ in self.layers():
            out.extend(grads[name])
        return out

    # -- grad-check protocol --------------------------------------------------

    def loss_on(self, sample: "SampleBatch") -> float:
        pred = self.forward_batch(sample)
        loss, _ = mse_loss(pred, sample.labels)
        return loss

    def grads_on(self, sample: "SampleBatch") -> list[np.ndarray]:
        pred = self.forward_batch(sample)
        _, grad = mse_loss(pred, sample.labels)
        return self.backward_batch(grad)


def build_model(config: ModalityConfig, seed: int) -> FusionModel:
    """Deterministically initialized FusionModel for the configuration."""
    use_audio = config.use_audio != "none"
    visual_out = EMBEDDING_DIM if use_audio else 2 * EMBEDDING_DIM

    def stream(name: str) -> rng.Xoshiro256PP:
        return rng.Xoshiro256PP(rng.derive_key(seed, rng.TAG_INIT, _LAYER_STREAM[name]))

    visual_fc = DenseLayer.init(EMBEDDING_DIM, visual_out, "relu", stream("visual_fc"))
    emotion_fc = None
    attractiveness_fc = None
    attribute_joint_fc = None
    attr_dim = 0
    if config.attributes:
        if "emotion" in config.attributes:
            emotion_fc = DenseLayer.init(_emotion_in_dim(config), 7, "relu", stream("emotion_fc"))
        if "attractiveness" in config.attributes and config.attractiveness_consensus == "ordered":
            attractiveness_fc = DenseLayer.init(10, 5, "relu", stream("attractiveness_fc"))
        joint = joint_layer_dims(config)
        if joint is not None:
            attribute_joint_fc = DenseLayer.init(joint[0], joint[1], "relu", stream("attribute_joint_fc"))
            attr_dim = joint[1]
        else:
            attr_dim = _REDUCED_DIM[config.attributes[0]]
    fused = visual_out + (EMBEDDING_DIM if use_audio else 0) + attr_dim
    head = DenseLayer.init(fused, len(TRAITS), "sigmoid", stream("head"))
    model = FusionModel(
        config=config,
        visual_fc=visual_fc,
        head=head,
        emotion_fc=emotion_fc,
        attractiveness_fc=attractiveness_fc,
        attribute_joint_fc=attribute_joint_fc,
    )
    if model.fused_dim != head.in_dim:
        raise ValidationError(f"fused_dim {model.fused_dim} != head input {head.in_dim}")
    return model


# -- sample assembly ----------------------------------------------------------


@dataclass(frozen=True)
class SampleBatch:
    """Column-oriented frame-level samples sharing one ModalityConfig."""

    visual: np.ndarray  # (n, 128)
    labels: np.ndarray  # (n, 5)
    audio: np.ndarray | None = None  # (n, 128)
    emotion: np.ndarray | None = None  # (n, 35|70)
    attractiveness: np.ndarray | None = None  # (n, 5|10)
    age: np.ndarray | None = None  # (n, 1)
    gender: np.ndarray | None = None  # (n, 2)
    ethnicity: np.ndarray | None = None  # (n, 3)

    def __len__(self) -> int:
        return self.visual.shape[0]

    def attribute(self, attr: str) -> np.ndarray:
        col = getattr(self, attr)
        if col is None:
            raise MissingAttributeError(f"{attr} consensus required by config but missing")
        return col

    def subset(self, idx: np.ndarray) -> "SampleBatch":
        take = lambda a: None if a is None else a[idx]
        return SampleBatch(
            visual=self.visual[idx],
            labels=self.labels[idx],
            audio=take(self.audio),
            emotion=take(self.emotion),
            attractiveness=take(self.attractiveness),
            age=take(self.age),
            gender=take(self.gender),
            ethnicity=take(self.ethnicity),
        )


def _consensus_columns(consensus: ConsensusVector, config: ModalityConfig) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for attr in config.attributes:
        cols[attr] = np.asarray(consensus.block(attr), dtype=np.float64)
    return cols


def _video_rows(
    dataset: Dataset, video_id: str, config: ModalityConfig, m: int
) -> tuple[np.ndarray, np.ndarray | None, dict[str, np.ndarray]] | None:
    """Visual rows for m equidistant frames plus shared audio/consensus.

    Returns None (after logging) when the video has no usable frames or its
    consensus cannot be formed.
    """
    series = dataset.series[video_id]
    bundle = dataset.embeddings[video_id]
    if bundle.visual_frames.size == 0:
        log.warning("video %s skipped: no visual frames", video_id)
        return None
    frames = select_equidistant_frames(series.frame_count, bundle.visual_frames, m)
    visual = bundle.visual_at(frames)
    audio = None
    if config.use_audio != "none":
        audio = np.asarray(bundle.audio_for(config.use_audio), dtype=np.float64)
    try:
        cols = _consensus_columns(build_consensus(series, config), config) if config.attributes else {}
    except MissingAttributeError as exc:
        log.warning("video %s skipped: %s", video_id, exc)
        return None
    return visual, audio, cols


@dataclass(frozen=True)
class VideoGroup:
    """Row range of one video inside a SampleBatch."""

    video_id: str
    start: int
    stop: int
    labels: TraitVector


@dataclass(frozen=True)
class AssembledSplit:
    batch: SampleBatch
    groups: tuple[VideoGroup, ...]
    skipped: tuple[str, ...]


def assemble_split(dataset: Dataset, config: ModalityConfig, split: str, m: int) -> AssembledSplit:
    """Frame-level samples for every usable video of a split, m frames each."""
    records = sorted(dataset.by_split(split), key=lambda r: r.video_id)
    visual_rows: list[np.ndarray] = []
    label_rows: list[np.ndarray] = []
    audio_rows: list[np.ndarray] = []
    attr_rows: dict[str, list[np.ndarray]] = {a: [] for a in config.attributes}
    groups: list[VideoGroup] = []
    skipped: list[str] = []
    cursor = 0
    for record in records:
        rows = _video_rows(dataset, record.video_id, config, m)
        if rows is None:
            skipped.append(record.video_id)
            continue
        visual, audio, cols = rows
        n = visual.shape[0]
        visual_rows.append(visual)
        label_rows.append(np.tile(record.labels.as_array(), (n, 1)))
        if audio is not None:
            audio_rows.append(np.tile(audio, (n, 1)))
        for attr in config.attributes:
            attr_rows[attr].append(np.tile(cols[attr], (n, 1)))
        groups.append(VideoGroup(record.video_id, cursor, cursor + n, record.labels))
        cursor += n
    if not groups:
        raise ValidationError(f"split {split!r} has no usable videos")
    stack = lambda rows: np.concatenate(rows, axis=0) if rows else None
    batch = SampleBatch(
        visual=stack(visual_rows),
        labels=stack(label_rows),
        audio=stack(audio_rows),
        emotion=stack(attr_rows.get("emotion", [])),
        attractiveness=stack(attr_rows.get("attractiveness", [])),
        age=stack(attr_rows.get("age", [])),
        gender=stack(attr_rows.get("gender", [])),
        ethnicity=stack(attr_rows.get("ethnicity", [])),
    )
    return AssembledSplit(batch=batch, groups=tuple(groups), skipped=tuple(skipped))


def make_training_samples(dataset: Dataset, config: ModalityConfig) -> AssembledSplit:
    """Train-split samples: m_train equidistant frames per video, each frame
    paired with the video's shared audio slice, consensus blocks, and labels."""
    return assemble_split(dataset, config, "train", config.m_train)


def forward_sample(
    model: FusionModel,
    visual_embedding: np.ndarray,
    audio_embedding: np.ndarray | None = None,
    consensus: ConsensusVector | None = None,
) -> TraitVector:
    """Trait prediction for one frame-level sample."""
    visual = np.asarray(visual_embedding, dtype=np.float64).reshape(1, -1)
    if visual.shape[1] != EMBEDDING_DIM:
        raise ValidationError(f"visual embedding must have {EMBEDDING_DIM} dims")
    config = model.config
    audio = None
    if config.use_audio != "none":
        if audio_embedding is None:
            raise MissingAttributeError("audio embedding required by config but missing")
        audio = np.asarray(audio_embedding, dtype=np.float64).reshape(1, -1)
    cols: dict[str, np.ndarray] = {}
    if config.attributes:
        if consensus is None:
            raise MissingAttributeError("consensus attributes required by config but missing")
        cols = {a: np.asarray(v, dtype=np.float64).reshape(1, -1) for a, v in _consensus_columns(consensus, config).items()}
    batch = SampleBatch(
        visual=visual,
        labels=np.zeros((1, len(TRAITS))),
        audio=audio,
        emotion=cols.get("emotion"),
        attractiveness=cols.get("attractiveness"),
        age=cols.get("age"),
        gender=cols.get("gender"),
        ethnicity=cols.get("ethnicity"),
    )
    return TraitVector.from_array(model.forward_batch(batch)[0])


def predict_video(
    model: FusionModel,
    series,
    bundle,
    m_test: int | None = None,
) -> TraitVector:
    """Per-trait median over m_test frame-level predictions for one video."""
    config = model.config
    m = config.m_test if m_test is None else m_test
    if bundle.visual_frames.size == 0:
        raise ValidationError(f"video {bundle.video_id}: no usable frames")
    frames = select_equidistant_frames(series.frame_count, bundle.visual_frames, m)
    visual = bundle.visual_at(frames)
    audio = None
    if config.use_audio != "none":
        audio = np.tile(np.asarray(bundle.audio_for(config.use_audio), dtype=np.float64), (len(frames), 1))
    cols: dict[str, np.ndarray] = {}
    if config.attributes:
        consensus = build_consensus(series, config)
        cols = {a: np.tile(v, (len(frames), 1)) for a, v in _consensus_columns(consensus, config).items()}
    batch = SampleBatch(
        visual=visual,
        labels=np.zeros((len(frames), len(TRAITS))),
        audio=audio,
        emotion=cols.get("emotion"),
        attractiveness=cols.get("attractiveness"),
        age=cols.get("age"),
        gender=cols.get("gender"),
        ethnicity=cols.get("ethnicity"),
    )
    preds = model.forward_batch(batch)
    return TraitVector.from_array(np.median(preds, axis=0))


def _grouped_predictions(model: FusionModel, assembled: AssembledSplit) -> tuple[list[TraitVector], list[TraitVector], list[str]]:
    """Video-level medians over an assembled split, plus labels and ids."""
    preds = model.forward_batch(assembled.batch)
    video_preds: list[TraitVector] = []
    labels: list[TraitVector] = []
    ids: list[str] = []
    for group in assembled.groups:
        median = np.median(preds[group.start : group.stop], axis=0)
        video_preds.append(TraitVector.from_array(median))
        labels.append(group.labels)
        ids.append(group.video_id)
    return video_preds, labels, ids


def evaluate_split(
    model: FusionModel, dataset: Dataset, split: str = "test", m_test: int | None = None
) -> tuple[EvaluationResult, dict[str, TraitVector]]:
    """Video-level accuracy of the model over one split."""
    m = model.config.m_test if m_test is None else m_test
    assembled = assemble_split(dataset, model.config, split, m)
    preds, labels, ids = _grouped_predictions(model, assembled)
    return accuracy(preds, labels), dict(zip(ids, preds))


# -- training -----------------------------------------------------------------


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch training trace; stage A covers epochs [0, stage_boundary)."""

    train_loss: tuple[float, ...]
    validation_mae: tuple[float, ...]
    learning_rate: tuple[float, ...]
    stage_boundary: int
    seed: int
    config: ModalityConfig
    skipped_train: tuple[str, ...] = ()
    skipped_validation: tuple[str, ...] = ()

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def as_dict(self) -> dict:
        return {
            "train_loss": list(self.train_loss),
            "validation_mae": list(self.validation_mae),
            "learning_rate": list(self.learning_rate),
            "stage_boundary": self.stage_boundary,
            "seed": self.seed,
            "config": config_to_dict(self.config),
            "skipped_train": list(self.skipped_train),
            "skipped_validation": list(self.skipped_validation),
        }


def _validation_mae(model: FusionModel, assembled: AssembledSplit) -> float:
    preds, labels, _ = _grouped_predictions(model, assembled)
    p = np.array([v.as_array() for v in preds])
    gt = np.array([v.as_array() for v in labels])
    return float(np.abs(p - gt).mean())


def train(
    model: FusionModel,
    dataset: Dataset,
    seed: int,
    stage_a_epochs: int = STAGE_A_EPOCHS,
    stage_b_epochs: int = STAGE_B_EPOCHS,
) -> tuple[FusionModel, TrainReport]:
    """Two-stage schedule; mutates and returns the model plus its trace."""
    train_split = make_training_samples(dataset, model.config)
    val_split = assemble_split(dataset, model.config, "validation", model.config.m_test)
    n = len(train_split.batch)
    params = model.parameters()

    losses: list[float] = []
    maes: list[float] = []
    lrs: list[float] = []
    epoch_index = 0

    for stage_lr, stage_epochs in ((STAGE_A_LR, stage_a_epochs), (STAGE_B_LR, stage_b_epochs)):
        adam = AdamState(params, learning_rate=stage_lr)
        scheduler = PlateauScheduler(learning_rate=stage_lr)
        for _ in range(stage_epochs):
            keys = rng.derive_keys(seed, rng.TAG_BATCH, epoch_index, np.arange(n))
            order = np.argsort(rng.Xoshiro256PPBank(keys).uniforms(1)[:, 0], kind="stable")
            total = 0.0
            for lo in range(0, n, BATCH_SIZE):
                idx = order[lo : lo + BATCH_SIZE]
                batch = train_split.batch.subset(idx)
                pred = model.forward_batch(batch)
                loss, grad = mse_loss(pred, batch.labels)
                if not np.isfinite(loss):
                    raise NumericError(
                        f"non-finite loss {loss!r} at epoch {epoch_index}, batch {lo // BATCH_SIZE}"
                    )
                total += loss * idx.size
                grads = model.backward_batch(grad)
                adam_step(adam, params, grads)
            losses.append(total / n)
            lrs.append(adam.learning_rate)
            mae = _validation_mae(model, val_split)
            maes.append(mae)
            adam.learning_rate = scheduler.step(mae)
            epoch_index += 1

    report = TrainReport(
        train_loss=tuple(losses),
        validation_mae=tuple(maes),
        learning_rate=tuple(lrs),
        stage_boundary=stage_a_epochs,
        seed=seed,
        config=model.config,
        skipped_train=train_split.skipped,
        skipped_validation=val_split.skipped,
    )
    return model, report


# -- checkpoints --------------------------------------------------------------


def config_to_dict(config: ModalityConfig) -> dict:
    return {
        "use_audio": config.use_audio,
        "attributes": list(config.attributes),
        "emotion_consensus": config.emotion_consensus,
        "attractiveness_consensus": config.attractiveness_consensus,
        "m_train": config.m_train,
        "m_test": config.m_test,
    }


def config_from_dict(data: Mapping) -> ModalityConfig:
    return ModalityConfig(
        use_audio=data.get("use_audio", "none"),
        attributes=tuple(data.get("attributes", ())),
        emotion_consensus=data.get("emotion_consensus", "orderless"),
        attractiveness_consensus=data.get("attractiveness_consensus", "orderless"),
        m_train=int(data.get("m_train", 10)),
        m_test=int(data.get("m_test", 50)),
    )


def save_model(path, model: FusionModel) -> None:
    """Write the model to the binary checkpoint format."""
    architecture = {
        "kind": "late_fusion_v1",
        "config": config_to_dict(model.config),
        "layers": [
            {"name": name, "in": layer.in_dim, "out": layer.out_dim, "activation": layer.activation}
            for name, layer in model.layers()
        ],
    }
    save_checkpoint(path, architecture, model.parameters())


def load_model(path) -> FusionModel:
    """Rebuild a FusionModel from a checkpoint file."""
    architecture, flat = load_checkpoint(path)
    if architecture.get("kind") != "late_fusion_v1":
        raise ValidationError(f"checkpoint kind {architecture.get('kind')!r} not supported")
    model = build_model(config_from_dict(architecture.get("config", {})), seed=0)
    expected = [
        {"name": name, "in": layer.in_dim, "out": layer.out_dim, "activation": layer.activation}
        for name, layer in model.layers()
    ]
    if expected != architecture.get("layers"):
        raise ValidationError("checkpoint layer layout does not match its config")
    needed = model.param_count()
    if flat.size != needed:
        raise ValidationError(f"checkpoint has {flat.size} params, model needs {needed}")
    offset = 0
    for p in model.parameters():
        p[...] = flat[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    return model


# -- ablation grids -----------------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    name: str
    config: ModalityConfig
    result: EvaluationResult | None
    error: str | None = None


@dataclass(frozen=True)
class AblationTable:
    rows: tuple[AblationRow, ...]
    seed: int

    def format(self) -> str:
        """Tab-separated table: config, Avg, then the five traits."""
        letters = ["O", "C", "E", "A", "N"]
        lines = ["\t".join(["config", "Avg"] + letters)]
        for row in self.rows:
            if row.result is None:
                lines.append("\t".join([row.name, f"error: {row.error}"] + [""] * 5))
            else:
                cells = [f"{row.result.mean_accuracy:.4f}"] + [
                    f"{a:.4f}" for a in row.result.per_trait_accuracy
                ]
                lines.append("\t".join([row.name] + cells))
        return "\n".join(lines) + "\n"


def _named(name: str, **kwargs) -> tuple[str, ModalityConfig]:
    return name, ModalityConfig(**kwargs)


def standard_grid() -> list[tuple[str, ModalityConfig]]:
    """The nine-configuration modality comparison grid."""
    ordered = {"emotion_consensus": "ordered", "attractiveness_consensus": "ordered"}
    return [
        _named("V"),
        _named("V+Em", attributes=("emotion",), **ordered),
        _named("V+Att", attributes=("attractiveness",), **ordered),
        _named("V+Age", attributes=("age",)),
        _named("V+Gender", attributes=("gender",)),
        _named("V+Ethn", attributes=("ethnicity",)),
        _named("V+Audio", use_audio="whole"),
        _named("V+Em+Att+Age", attributes=("emotion", "attractiveness", "age"), **ordered),
        _named(
            "Proposed",
            use_audio="first_half",
            attributes=("emotion", "attractiveness", "age"),
            **ordered,
        ),
    ]


def emotion_grid() -> list[tuple[str, ModalityConfig]]:
    """V+Emotion under each temporal consensus mode."""
    return [
        _named(f"V+Em[{mode}]", attributes=("emotion",), emotion_consensus=mode)
        for mode in ("orderless", "ordered", "first_half", "second_half")
    ]


def attractiveness_grid() -> list[tuple[str, ModalityConfig]]:
    """V+Attractiveness under each temporal consensus mode."""
    return [
        _named(f"V+Att[{mode}]", attributes=("attractiveness",), attractiveness_consensus=mode)
        for mode in ("orderless", "ordered", "first_half", "second_half")
    ]


def audio_grid() -> list[tuple[str, ModalityConfig]]:
    """Visual plus each audio slice."""
    return [_named(f"V+Audio[{s}]", use_audio=s) for s in ("whole", "first_half", "second_half")]


GRIDS = {
    "standard": standard_grid,
    "emotion": emotion_grid,
    "attractiveness": attractiveness_grid,
    "audio": audio_grid,
}


def grid_configs(grid: str) -> list[tuple[str, ModalityConfig]]:
    if grid == "all":
        out: list[tuple[str, ModalityConfig]] = []
        for name in ("standard", "emotion", "attractiveness", "audio"):
            out.extend(GRIDS[name]())
        return out
    if grid not in GRIDS:
        raise ValidationError(f"unknown ablation grid {grid!r}")
    return GRIDS[grid]()


def run_ablation(
    dataset: Dataset,
    configs: Sequence[tuple[str, ModalityConfig]],
    seed: int,
    jobs: int = 1,
    stage_a_epochs: int = STAGE_A_EPOCHS,
    stage_b_epochs: int = STAGE_B_EPOCHS,
) -> AblationTable:
    """Train and evaluate each configuration with the same seed and splits.

    Failures are captured per row; remaining configurations still run.
    Results are independent of execution order, so jobs > 1 changes wall
    time only.
    """
    if not configs:
        raise ValidationError("configs must be non-empty")

    def run_one(item: tuple[str, ModalityConfig]) -> AblationRow:
        name, config = item
        try:
            model = build_model(config, seed)
            model, _ = train(model, dataset, seed, stage_a_epochs, stage_b_epochs)
            result, _ = evaluate_split(model, dataset, "test")
            return AblationRow(name=name, config=config, result=result)
        except Exception as exc:  # noqa: BLE001 - failed configs are reported, not fatal
            log.warning("ablation config %s failed: %s", name, exc)
            return AblationRow(name=name, config=config, result=None, error=str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_one, configs))
    else:
        rows = [run_one(item) for item in configs]
    return AblationTable(rows=tuple(rows), seed=seed)
