"""Cross-validation splitters, per-record CV evaluation and loss-parameter grid search."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .booster import BoostedModel, Dataset, TrainConfig, predict_raw, train
from .exceptions import InvalidInputError, InvalidPlanError
from .losses import LossKind, LossParams
from .metrics import ConfusionCounts, MetricMode, all_scores, confusion_from_predictions, score

# -- plans ------------------------------------------------------------------------


@dataclass(frozen=True)
class KFold:
    """Contiguous folds; with ``seed`` set, rows are permuted first.

    The first ``m % k`` folds receive one extra row.
    """

    k: int
    seed: Optional[int] = None


@dataclass(frozen=True)
class LeaveOneOut:
    pass


@dataclass(frozen=True)
class LeaveOneGroupOut:
    """One fold per distinct group id, in order of first appearance."""


SplitPlan = Union[KFold, LeaveOneOut, LeaveOneGroupOut]
Split = Tuple[np.ndarray, np.ndarray]


def _complement(m: int, test: np.ndarray) -> np.ndarray:
    mask = np.ones(m, dtype=bool)
    mask[test] = False
    return np.nonzero(mask)[0]


def make_splits(data: Union[Dataset, int], plan: SplitPlan, group_ids=None) -> List[Split]:
    """(train, test) index pairs; test sets partition ``range(m)``.

    ``data`` may be a Dataset or a row count (then ``group_ids`` supplies the
    groups for LeaveOneGroupOut). Index arrays are sorted ascending.
    """
    if isinstance(data, Dataset):
        m = len(data)
        if group_ids is None:
            group_ids = data.group_ids
    else:
        m = int(data)

    if isinstance(plan, LeaveOneOut):
        plan_tests = [np.array([i]) for i in range(m)]
    elif isinstance(plan, KFold):
        k = plan.k
        if int(k) != k or k < 1:
            raise InvalidPlanError(f"k must be a positive integer, got {k!r}")
        if k > m:
            raise InvalidPlanError(f"cannot make {k} folds from {m} rows")
        order = np.arange(m)
        if plan.seed is not None:
            order = np.random.default_rng(plan.seed).permutation(m)
        sizes = np.full(k, m // k)
        sizes[: m % k] += 1
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        plan_tests = [np.sort(order[bounds[i]:bounds[i + 1]]) for i in range(k)]
    elif isinstance(plan, LeaveOneGroupOut):
        if group_ids is None:
            raise InvalidPlanError("leave-one-group-out needs group ids")
        groups = list(group_ids)
        if len(groups) != m:
            raise InvalidPlanError(f"{len(groups)} group ids for {m} rows")
        members = {}
        for i, g in enumerate(groups):
            members.setdefault(g, []).append(i)
        plan_tests = [np.array(rows) for rows in members.values()]
    else:
        raise InvalidPlanError(f"unknown split plan {plan!r}")

    return [(_complement(m, test), test.astype(np.intp)) for test in plan_tests]


def parse_plan(text: str) -> SplitPlan:
    """``kfold:5``, ``kfold:5:seed``, ``loo`` or ``logo``."""
    text = text.strip().lower()
    if text == "loo":
        return LeaveOneOut()
    if text == "logo":
        return LeaveOneGroupOut()
    parts = text.split(":")
    if parts[0] == "kfold" and len(parts) in (2, 3):
        try:
            k = int(parts[1])
            seed = int(parts[2]) if len(parts) == 3 else None
        except ValueError:
            raise InvalidPlanError(f"bad k-fold spec {text!r}") from None
        return KFold(k, seed)
    raise InvalidPlanError(f"unknown cross-validation plan {text!r} (use kfold:k, loo or logo)")


def plan_to_dict(plan: SplitPlan) -> dict:
    if isinstance(plan, KFold):
        return {"kind": "kfold", "k": plan.k, "seed": plan.seed}
    if isinstance(plan, LeaveOneOut):
        return {"kind": "loo"}
    return {"kind": "logo"}


# -- cross-validation ---------------------------------------------------------------


@dataclass
class CvReport:
    fold_counts: List[ConfusionCounts]
    pooled: ConfusionCounts
    scores: dict
    params: LossParams

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "pooled": self.pooled.to_dict(),
            "scores": dict(self.scores),
            "folds": [c.to_dict() for c in self.fold_counts],
        }


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [fn(x) for x in items]
    # results come back in submission order, so output does not depend on scheduling
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def _fold_counts(data: Dataset, config: TrainConfig, fold: int, split: Split) -> ConfusionCounts:
    train_idx, test_idx = split
    if train_idx.size == 0:
        raise InvalidPlanError(f"fold {fold} has an empty training side")
    model = train(data.subset(train_idx), replace(config, seed=config.seed + fold))
    raw = predict_raw(model, data.features[test_idx])
    return confusion_from_predictions(data.labels[test_idx], raw)


def cross_validate(data: Dataset, config: TrainConfig, plan: SplitPlan, n_jobs: int = 1) -> CvReport:
    """Train a fresh model per fold and pool per-record confusion counts.

    Fold ``i`` trains with seed ``config.seed + i``.
    """
    splits = make_splits(data, plan)
    counts = _map(lambda item: _fold_counts(data, config, *item), list(enumerate(splits)), n_jobs)
    pooled = ConfusionCounts.merge(counts)
    return CvReport(counts, pooled, all_scores(pooled), config.loss)


# -- grid search ------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchGrid:
    alpha_candidates: Sequence[float] = ()
    gamma_candidates: Sequence[float] = ()
    base_config: TrainConfig = field(default_factory=TrainConfig)

    def candidates(self) -> List[LossParams]:
        """Loss settings to try, chosen by the kind of ``base_config.loss``."""
        kind = self.base_config.loss.kind
        if kind is LossKind.WEIGHTED:
            return [LossParams.weighted(a) for a in self.alpha_candidates]
        if kind is LossKind.FOCAL:
            return [LossParams.focal(g) for g in self.gamma_candidates]
        return [LossParams.plain()]


class SearchResult(NamedTuple):
    best_params: LossParams
    reports: List[CvReport]


def grid_search(
    data: Dataset,
    grid: SearchGrid,
    plan: SplitPlan,
    selection_metric=MetricMode.ACCURACY,
    n_jobs: int = 1,
) -> SearchResult:
    """Cross-validate every candidate and keep the best pooled score.

    Ties go to the earliest candidate in list order.
    """
    candidates = grid.candidates()
    if not candidates:
        raise InvalidInputError("grid has no candidates for the selected loss")
    selection_metric = MetricMode(selection_metric)
    reports = _map(
        lambda p: cross_validate(data, replace(grid.base_config, loss=p), plan),
        candidates,
        n_jobs,
    )
    best_i = 0
    best_score = score(selection_metric, reports[0].pooled)
    for i, rep in enumerate(reports[1:], start=1):
        s = score(selection_metric, rep.pooled)
        if s > best_score:
            best_i, best_score = i, s
    return SearchResult(candidates[best_i], reports)


def refit(data: Dataset, config: TrainConfig, best_params: LossParams) -> BoostedModel:
    """A fresh model on all of ``data`` with the selected loss."""
    return train(data, replace(config, loss=best_params))
