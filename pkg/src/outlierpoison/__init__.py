"""Grey-box label-flipping poisoning of multiclass classifiers, guided by boundary distances.

Train a surrogate, rank training points by their distance from its decision
boundary, flip the labels of the farthest ones, retrain, and measure the damage.
"""

__version__ = "0.1.0"

from .attack import (
    PipelineResult,
    PoisonedDataset,
    PoisonPlan,
    StalePlanError,
    apply_plan,
    build_plan,
    poison_pipeline,
)
from .boundary import (
    DistanceReport,
    boundary_disagreement,
    compute_distances,
    svm_margin_score,
    top_outliers,
)
from .dataset import (
    CorrelationSummary,
    Dataset,
    SplitPair,
    correlation_summary,
    load_csv,
    load_idx,
    make_dataset,
    pca_project,
    split,
    synth_generate,
)
from .harness import (
    ANALYSES,
    CellResult,
    ExperimentResult,
    ExperimentSpec,
    class_probability_drift,
    derive_seed,
    importance_drift,
    k_sweep,
    margin_score_table,
    run_sweep,
    variance_table,
)
from .metrics import ConfusionMatrix, Degradation, MetricsReport, confusion, degradation, metrics_bundle
from .models import (
    FAMILIES,
    ConvergenceError,
    DTConfig,
    GNBConfig,
    KNNConfig,
    MLPConfig,
    RFConfig,
    SVMConfig,
    default_config,
    load_model,
    save_model,
    train,
)
