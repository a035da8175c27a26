"""Model-agnostic what-if analysis for tabular data and black-box models.

Load a dataset and one or two models, then edit points and re-infer, find
nearest counterfactuals, sweep partial dependence, profile features, slice
performance intersectionally, and optimize classification thresholds under
cost and fairness constraints. Available as a library (this package), an
HTTP service (``modelprobe.service``), a CLI (``modelprobe.cli``) and a
browser workbench served at /ui.
"""

from .binning import BinAssignment, BinningSpec, ModelField, assign_bins
from .counterfactual import (
    CounterfactualResult,
    DistanceNorm,
    FeatureDistanceStats,
    attach_distance_feature,
    compute_distance_stats,
    datapoint_distance,
    feature_distance,
    nearest_counterfactual,
)
from .dataset import (
    DataPoint,
    Dataset,
    FeatureKind,
    FeatureSchema,
    Origin,
    Snapshot,
    ingest,
)
from .errors import (
    AnalysisError,
    IngestError,
    ModelProbeError,
    ModelSpecError,
    RemoteModelError,
    TypeMismatchError,
    UnknownFeatureError,
    UnknownPointError,
)
from .fairness import (
    GroundTruthBinding,
    SliceSpec,
    Strategy,
    ThresholdAssignment,
    build_slices,
    dataset_slices,
    optimize_fairness,
    optimize_thresholds,
    slice_metrics,
)
from .metrics import (
    ConfusionMatrix,
    RocCurve,
    candidate_thresholds,
    confusion_at,
    optimize_single_threshold,
    regression_metrics,
    roc_curve,
)
from .models import (
    BuiltinModel,
    ModelHandle,
    ModelSession,
    Prediction,
    RemoteModel,
    ScoreDelta,
    Slot,
    TaskKind,
    parse_builtin_spec,
    score_delta,
)
from .pdp import PdpCurve, PdpSpec, eligible_features, global_pdp, is_flat, local_pdp
from .stats import (
    DisplayMode,
    FeatureStatistics,
    SortKey,
    compute_feature_statistics,
    sort_features,
)
from .workspace import Settings, Workspace

__version__ = "0.1.0"
