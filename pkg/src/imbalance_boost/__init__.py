"""Newton-boosted decision trees with weighted cross-entropy and focal losses
for label-imbalanced binary classification."""

from .booster import (
    BoostedModel,
    Dataset,
    TrainConfig,
    TreeNode,
    deserialize,
    load_model,
    predict_determine,
    predict_raw,
    predict_sigmoid,
    predict_two_classes,
    save_model,
    serialize,
    split_gain,
    train,
)
from .estimator import ImbalanceBoostClassifier
from .exceptions import (
    DimensionError,
    InvalidInputError,
    InvalidPlanError,
    ModelFormatError,
    SchemaError,
    UndefinedMetricError,
)
from .losses import GradHess, LossKind, LossParams, batch_grad_hess, sigmoid
from .metrics import ConfusionCounts, CorrectMode, MetricMode, confusion_from_predictions, correct_eval, score
from .model_selection import (
    KFold,
    LeaveOneGroupOut,
    LeaveOneOut,
    SearchGrid,
    cross_validate,
    grid_search,
    make_splits,
    refit,
)

__version__ = "0.1.0"
