"""Newton-boosted regression trees with exact greedy split search.

Each round computes per-instance gradients ``g`` and hessians ``h`` of the
chosen loss at the current raw scores, then grows one depth-wise tree that
minimizes ``sum(g*f + 0.5*h*f**2) + 0.5*lambda*||w||**2``. A leaf covering
instances with sums ``G``/``H`` gets weight ``-G / (H + lambda)``, scaled by
the learning rate before it is stored.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Union

import numpy as np

from .exceptions import DimensionError, InvalidInputError, ModelFormatError
from .losses import LossParams, batch_grad_hess, sigmoid

DENOM_EPS = 1e-16
# gains this close (relative) are ties; equal partitions reached through
# different features can differ by summation-order rounding
GAIN_TIE_RTOL = 1e-12
FORMAT_VERSION = 1


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    group_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionError(f"features must be a 2-d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("features must be finite (missing values are not supported)")
        y = np.asarray(self.labels, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise DimensionError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidInputError("labels must be 0 or 1")
        self.features = X
        self.labels = y
        if self.group_ids is not None:
            g = np.asarray(self.group_ids, dtype=object).ravel()
            if g.shape[0] != X.shape[0]:
                raise DimensionError(f"{X.shape[0]} feature rows but {g.shape[0]} group ids")
            self.group_ids = g

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        groups = None if self.group_ids is None else self.group_ids[idx]
        return Dataset(self.features[idx], self.labels[idx], groups)


@dataclass(frozen=True)
class TrainConfig:
    num_rounds: int = 10
    learning_rate: float = 0.3
    max_depth: int = 6
    reg_lambda: float = 1.0
    min_split_gain: float = 0.0
    min_child_hessian: float = 1.0
    base_score: float = 0.0
    loss: LossParams = field(default_factory=LossParams.plain)
    seed: int = 0

    def __post_init__(self):
        if int(self.num_rounds) != self.num_rounds or self.num_rounds < 1:
            raise InvalidInputError(f"num_rounds must be a positive integer, got {self.num_rounds!r}")
        if not (0.0 < self.learning_rate <= 1.0):
            raise InvalidInputError(f"learning_rate must be in (0, 1], got {self.learning_rate!r}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise InvalidInputError(f"max_depth must be a positive integer, got {self.max_depth!r}")
        for name in ("reg_lambda", "min_split_gain", "min_child_hessian"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidInputError(f"{name} must be nonnegative, got {v!r}")
        if not math.isfinite(self.base_score):
            raise InvalidInputError("base_score must be finite")
        if not isinstance(self.loss, LossParams):
            raise InvalidInputError("loss must be a LossParams instance")

    def to_dict(self) -> dict:
        return {
            "num_rounds": int(self.num_rounds),
            "learning_rate": float(self.learning_rate),
            "max_depth": int(self.max_depth),
            "reg_lambda": float(self.reg_lambda),
            "min_split_gain": float(self.min_split_gain),
            "min_child_hessian": float(self.min_child_hessian),
            "base_score": float(self.base_score),
            "loss": self.loss.to_dict(),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["loss"] = LossParams.from_dict(d["loss"])
        return cls(**d)


@dataclass
class TreeNode:
    """Internal node when ``weight`` is None, leaf otherwise.

    Rows with ``x[feature_index] <= threshold`` go left.
    """

    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    weight: Optional[float] = None

    @classmethod
    def leaf(cls, weight: float) -> "TreeNode":
        return cls(weight=float(weight))

    @property
    def is_leaf(self) -> bool:
        return self.weight is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def leaves(self) -> List["TreeNode"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf weight reached by each row of ``X``."""
        out = np.empty(X.shape[0], dtype=np.float64)
        self._route(X, np.arange(X.shape[0]), out)
        return out

    def _route(self, X, rows, out):
        if self.is_leaf:
            out[rows] = self.weight
            return
        goes_left = X[rows, self.feature_index] <= self.threshold
        self.left._route(X, rows[goes_left], out)
        self.right._route(X, rows[~goes_left], out)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf_weight": self.weight}
        return {
            "feature_index": self.feature_index,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }


@dataclass
class BoostedModel:
    trees: List[TreeNode]
    base_score: float
    loss_params: LossParams
    feature_count: int

    def __len__(self):
        return len(self.trees)

    def truncated(self, n_trees: int) -> "BoostedModel":
        """The model made of the first ``n_trees`` rounds."""
        return replace(self, trees=list(self.trees[:n_trees]))


# -- split search ---------------------------------------------------------------

def _score_term(G, H, reg_lambda):
    denom = H + reg_lambda
    safe = np.where(denom >= DENOM_EPS, denom, 1.0)
    return np.where(denom >= DENOM_EPS, G * G / safe, 0.0)


def split_gain(G_L, H_L, G_R, H_R, reg_lambda=1.0, min_split_gain=0.0):
    """Decrease of the second-order objective from splitting a node.

    ``0.5 * [G_L²/(H_L+λ) + G_R²/(H_R+λ) - (G_L+G_R)²/(H_L+H_R+λ)] - min_split_gain``.
    Terms whose denominator falls below 1e-16 contribute zero. Vectorizes
    over array arguments.
    """
    gain = 0.5 * (
        _score_term(G_L, H_L, reg_lambda)
        + _score_term(G_R, H_R, reg_lambda)
        - _score_term(G_L + G_R, H_L + H_R, reg_lambda)
    ) - min_split_gain
    if np.ndim(gain) == 0:
        return float(gain)
    return gain


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    denom = H + reg_lambda
    if denom < DENOM_EPS:
        return 0.0
    return -G / denom


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    gain: float


def _midpoint(lo: float, hi: float) -> float:
    mid = lo + (hi - lo) * 0.5
    # adjacent doubles can round the midpoint up to ``hi``, which would route it left
    if not (lo <= mid < hi):
        mid = lo
    return mid


def find_best_split(X, grad, hess, rows, config: TrainConfig) -> Optional[SplitCandidate]:
    """Best exact split of ``rows`` or None when no split has positive gain.

    Candidates are midpoints between consecutive distinct sorted values of
    each feature. Children with hessian sum below ``min_child_hessian`` are
    rejected, as are gains not above the relative rounding floor
    ``GAIN_TIE_RTOL``. Equal gains (within the same tolerance) resolve to the
    lowest feature index, then the lowest threshold.
    """
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size < 2:
        return None
    g = grad[rows]
    h = hess[rows]
    G = float(np.sum(g))
    H = float(np.sum(h))
    best = None
    for j in range(X.shape[1]):
        col = X[rows, j]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        # boundary k separates sorted positions [0..k] and [k+1..]
        boundaries = np.nonzero(xs[:-1] < xs[1:])[0]
        if boundaries.size == 0:
            continue
        G_L = np.cumsum(g[order])[boundaries]
        H_L = np.cumsum(h[order])[boundaries]
        G_R = G - G_L
        H_R = H - H_L
        gains = split_gain(G_L, H_L, G_R, H_R, config.reg_lambda, config.min_split_gain)
        # a gain inside the rounding noise of the child terms is not positive
        noise = GAIN_TIE_RTOL * 0.5 * (
            _score_term(G_L, H_L, config.reg_lambda) + _score_term(G_R, H_R, config.reg_lambda)
        )
        ok = (H_L >= config.min_child_hessian) & (H_R >= config.min_child_hessian) & (gains > noise)
        gains = np.where(ok, gains, -np.inf)
        top = gains.max()
        if not top > 0.0:
            continue
        k = int(np.argmax(gains >= top - GAIN_TIE_RTOL * top))
        if best is None or gains[k] > best.gain + GAIN_TIE_RTOL * best.gain:
            b = boundaries[k]
            best = SplitCandidate(j, _midpoint(float(xs[b]), float(xs[b + 1])), float(gains[k]))
    return best


def grow_tree(X, grad, hess, config: TrainConfig) -> TreeNode:
    """Grow one tree level by level; leaf weights are stored post-shrinkage."""
    root = TreeNode()
    frontier = [(root, np.arange(X.shape[0]))]
    for depth in range(config.max_depth + 1):
        next_frontier = []
        for node, rows in frontier:
            split = None
            if depth < config.max_depth:
                split = find_best_split(X, grad, hess, rows, config)
            if split is None:
                G = float(np.sum(grad[rows]))
                H = float(np.sum(hess[rows]))
                node.weight = leaf_weight(G, H, config.reg_lambda) * config.learning_rate
                continue
            node.feature_index = split.feature_index
            node.threshold = split.threshold
            node.left, node.right = TreeNode(), TreeNode()
            goes_left = X[rows, split.feature_index] <= split.threshold
            next_frontier.append((node.left, rows[goes_left]))
            next_frontier.append((node.right, rows[~goes_left]))
        frontier = next_frontier
        if not frontier:
            break
    return root


def train(data: Dataset, config: TrainConfig = TrainConfig()) -> BoostedModel:
    """Fit ``config.num_rounds`` trees to ``data``.

    Training is deterministic: no sampling takes place, so ``config.seed``
    only travels along for provenance.
    """
    if len(data) == 0 or data.n_features == 0:
        raise InvalidInputError("cannot train on an empty dataset")
    X, y = data.features, data.labels
    raw = np.full(X.shape[0], config.base_score, dtype=np.float64)
    trees = []
    for _ in range(config.num_rounds):
        grad, hess = batch_grad_hess(y, raw, config.loss)
        tree = grow_tree(X, grad, hess, config)
        raw = raw + tree.apply(X)
        trees.append(tree)
    return BoostedModel(trees, float(config.base_score), config.loss, data.n_features)


# -- prediction -----------------------------------------------------------------

def _as_matrix(model: BoostedModel, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        # a vector is one row, except for single-feature models where it is one column
        X = X.reshape(-1, 1) if model.feature_count == 1 else X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.feature_count:
        raise DimensionError(
            f"model expects {model.feature_count} feature columns, got shape {X.shape}"
        )
    return X


def predict_raw(model: BoostedModel, features) -> np.ndarray:
    """Raw logits: base score plus the routed leaf weight of every tree."""
    X = _as_matrix(model, features)
    raw = np.full(X.shape[0], model.base_score, dtype=np.float64)
    for tree in model.trees:
        raw = raw + tree.apply(X)
    return raw


def predict_sigmoid(model: BoostedModel, features) -> np.ndarray:
    return sigmoid(predict_raw(model, features))


def determine(raw_scores) -> np.ndarray:
    """Hard labels from raw scores; a score of exactly 0 maps to 0."""
    return (np.asarray(raw_scores, dtype=np.float64) > 0.0).astype(np.int64)


def predict_determine(model: BoostedModel, features) -> np.ndarray:
    return determine(predict_raw(model, features))


def predict_two_classes(model: BoostedModel, features) -> np.ndarray:
    labels = predict_determine(model, features)
    onehot = np.zeros((labels.shape[0], 2), dtype=np.int64)
    onehot[np.arange(labels.shape[0]), labels] = 1
    return onehot


# -- serialization --------------------------------------------------------------

def model_to_dict(model: BoostedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "base_score": model.base_score,
        "learning_rate_folded": True,
        "loss_params": model.loss_params.to_dict(),
        "feature_count": model.feature_count,
        "trees": [t.to_dict() for t in model.trees],
    }


def serialize(model: BoostedModel) -> bytes:
    # float repr is the shortest string that parses back to the same double
    return json.dumps(model_to_dict(model), indent=1, allow_nan=False).encode("utf-8")


def _require(d, key, path, kinds):
    if not isinstance(d, dict):
        raise ModelFormatError("expected an object", path)
    if key not in d:
        raise ModelFormatError(f"missing field {key!r}", path)
    v = d[key]
    # bool is an int subclass but never a valid number here
    if isinstance(v, bool) and bool not in kinds:
        raise ModelFormatError(f"field {key!r} has the wrong type", f"{path}.{key}" if path else key)
    if not isinstance(v, kinds):
        raise ModelFormatError(f"field {key!r} has the wrong type", f"{path}.{key}" if path else key)
    return v


def _node_from_dict(d, path, feature_count) -> TreeNode:
    if not isinstance(d, dict):
        raise ModelFormatError("expected a node object", path)
    if "leaf_weight" in d:
        w = _require(d, "leaf_weight", path, (int, float))
        if not math.isfinite(w):
            raise ModelFormatError("leaf weight must be finite", f"{path}.leaf_weight")
        return TreeNode.leaf(float(w))
    fi = _require(d, "feature_index", path, (int,))
    if not 0 <= fi < feature_count:
        raise ModelFormatError(f"feature index {fi} out of range", f"{path}.feature_index")
    thr = _require(d, "threshold", path, (int, float))
    if not math.isfinite(thr):
        raise ModelFormatError("threshold must be finite", f"{path}.threshold")
    return TreeNode(
        feature_index=fi,
        threshold=float(thr),
        left=_node_from_dict(_require(d, "left", path, (dict,)), f"{path}.left", feature_count),
        right=_node_from_dict(_require(d, "right", path, (dict,)), f"{path}.right", feature_count),
    )


def model_from_dict(d) -> BoostedModel:
    if not isinstance(d, dict):
        raise ModelFormatError("model document must be a JSON object", "$")
    version = _require(d, "format_version", "", (int,))
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version}", "format_version")
    if _require(d, "learning_rate_folded", "", (bool,)) is not True:
        raise ModelFormatError("only models with folded learning rate are supported", "learning_rate_folded")
    base = _require(d, "base_score", "", (int, float))
    if not math.isfinite(base):
        raise ModelFormatError("base_score must be finite", "base_score")
    feature_count = _require(d, "feature_count", "", (int,))
    if feature_count < 1:
        raise ModelFormatError("feature_count must be positive", "feature_count")
    try:
        loss = LossParams.from_dict(_require(d, "loss_params", "", (dict,)))
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"invalid loss_params: {exc}", "loss_params") from None
    trees_raw = _require(d, "trees", "", (list,))
    trees = [_node_from_dict(t, f"trees[{i}]", feature_count) for i, t in enumerate(trees_raw)]
    return BoostedModel(trees, float(base), loss, feature_count)


def deserialize(data: Union[bytes, str]) -> BoostedModel:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError("model file is not UTF-8", f"byte {exc.start}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(exc.msg, f"{exc.lineno}:{exc.colno}") from None
    return model_from_dict(doc)


def save_model(model: BoostedModel, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize(model))


def load_model(path) -> BoostedModel:
    with open(path, "rb") as f:
        return deserialize(f.read())
