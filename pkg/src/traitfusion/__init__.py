"""Audio-visual apparent-personality regression with temporal attribute
consensus, late fusion, and observed-subject bias audits.

The package is organized bottom-up:

* :mod:`traitfusion.types`: shared domain types and canonical orderings
* :mod:`traitfusion.rng`: deterministic, language-portable random streams
* :mod:`traitfusion.consensus`: temporal consensus of frame attributes
* :mod:`traitfusion.nn`: dense-network substrate (layers, Adam, checks)
* :mod:`traitfusion.dataio`: interchange formats, splits, loading
* :mod:`traitfusion.synthetic`: bias-injectable synthetic datasets
* :mod:`traitfusion.fusion`: the late-fusion model, training, ablations
* :mod:`traitfusion.metrics`: accuracy and residual-improvement curves
* :mod:`traitfusion.audit`: grouped-bias reports over labels
* :mod:`traitfusion.cli`: reproducible command-line workflows
"""

from traitfusion.audit import (
    AgeBinReport,
    EmotionFrequencyReport,
    ExtremesReport,
    GroupStatsTable,
    age_trend,
    attractiveness_extremes,
    emotion_frequencies,
    group_stats,
)
from traitfusion.consensus import (
    ConsensusVector,
    age_consensus,
    attractiveness_consensus,
    build_consensus,
    emotion_consensus,
    ethnicity_consensus,
    gender_consensus,
    histogram_5bin,
    select_equidistant_frames,
    slice_bounds,
)
from traitfusion.dataio import (
    Dataset,
    load_dataset,
    mean_baseline_labels,
    split_dataset,
    write_dataset,
)
from traitfusion.fusion import (
    FusionModel,
    TrainReport,
    build_model,
    evaluate_split,
    forward_sample,
    load_model,
    make_training_samples,
    predict_video,
    run_ablation,
    save_model,
    train,
)
from traitfusion.metrics import (
    EvaluationResult,
    ResidualCurve,
    accuracy,
    residual_curve,
    residuals,
    top_improvers,
)
from traitfusion.synthetic import SynthConfig, generate_synthetic
from traitfusion.types import (
    ATTRIBUTES,
    EMOTIONS,
    ETHNICITIES,
    GENDERS,
    TRAITS,
    EmbeddingBundle,
    FrameAttributeRecord,
    FrameAttributeSeries,
    MissingAttributeError,
    ModalityConfig,
    NumericError,
    SubjectMetadata,
    TraitVector,
    ValidationError,
    VideoRecord,
)

__version__ = "0.1.0"
