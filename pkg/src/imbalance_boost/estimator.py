"""Estimator-style wrapper around the booster.

When scikit-learn is installed the classifier derives from its
``BaseEstimator``/``ClassifierMixin`` so ``GridSearchCV``, ``cross_validate``
and pipelines accept it. Without scikit-learn a minimal stand-in provides
``get_params``/``set_params``.
"""
from __future__ import annotations

import inspect

import numpy as np

from . import booster as _booster
from .booster import Dataset, TrainConfig
from .losses import LossParams
from .metrics import CorrectMode, MetricMode, correct_eval, score_eval


try:
    from sklearn.base import BaseEstimator, ClassifierMixin
except ImportError:  # pragma: no cover - exercised only without scikit-learn
    class BaseEstimator:
        def get_params(self, deep=True):
            names = list(inspect.signature(type(self).__init__).parameters)[1:]
            return {n: getattr(self, n) for n in names}

        def set_params(self, **params):
            valid = self.get_params()
            for k, v in params.items():
                if k not in valid:
                    raise ValueError(f"invalid parameter {k!r} for {type(self).__name__}")
                setattr(self, k, v)
            return self

    class ClassifierMixin:
        pass


class ImbalanceBoostClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier trained with plain, weighted or focal loss.

    Parameters
    ----------
    special_objective : None, "weighted" or "focal"
        Loss to train with; None trains with plain logistic loss.
    imbalance_alpha : float, optional
        Positive-class weight, required when ``special_objective="weighted"``.
    focal_gamma : float, optional
        Focusing exponent, required when ``special_objective="focal"``.

    The remaining parameters map one to one onto :class:`TrainConfig`.
    ``predict`` returns raw logits; use ``predict_determine`` for labels.
    """

    def __init__(
        self,
        special_objective=None,
        imbalance_alpha=None,
        focal_gamma=None,
        num_rounds=10,
        learning_rate=0.3,
        max_depth=6,
        reg_lambda=1.0,
        min_split_gain=0.0,
        min_child_hessian=1.0,
        base_score=0.0,
        seed=0,
    ):
        self.special_objective = special_objective
        self.imbalance_alpha = imbalance_alpha
        self.focal_gamma = focal_gamma
        self.num_rounds = num_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.min_split_gain = min_split_gain
        self.min_child_hessian = min_child_hessian
        self.base_score = base_score
        self.seed = seed

    def _loss_params(self, imbalance_alpha=None, focal_gamma=None) -> LossParams:
        objective = self.special_objective
        if objective is None:
            return LossParams.plain()
        if objective == "weighted":
            alpha = imbalance_alpha if imbalance_alpha is not None else self.imbalance_alpha
            if alpha is None:
                raise ValueError("argument imbalance_alpha is missing for the weighted objective")
            return LossParams.weighted(alpha)
        if objective == "focal":
            gamma = focal_gamma if focal_gamma is not None else self.focal_gamma
            if gamma is None:
                raise ValueError("argument focal_gamma is missing for the focal objective")
            return LossParams.focal(gamma)
        raise ValueError(f"unknown special_objective {objective!r}")

    def _config(self, loss: LossParams) -> TrainConfig:
        return TrainConfig(
            num_rounds=self.num_rounds,
            learning_rate=self.learning_rate,
            max_depth=self.max_depth,
            reg_lambda=self.reg_lambda,
            min_split_gain=self.min_split_gain,
            min_child_hessian=self.min_child_hessian,
            base_score=self.base_score,
            loss=loss,
            seed=self.seed,
        )

    def fit(self, X, y, imbalance_alpha=None, focal_gamma=None):
        # loss parameters passed to fit() win over the constructor values
        loss = self._loss_params(imbalance_alpha, focal_gamma)
        self.booster_ = _booster.train(Dataset(X, y), self._config(loss))
        self.classes_ = np.array([0, 1])
        return self

    @property
    def booster(self) -> _booster.BoostedModel:
        return self.booster_

    def predict(self, X):
        return _booster.predict_raw(self.booster_, X)

    def predict_sigmoid(self, X):
        return _booster.predict_sigmoid(self.booster_, X)

    def predict_determine(self, X):
        return _booster.predict_determine(self.booster_, X)

    def predict_two_classes(self, X):
        return _booster.predict_two_classes(self.booster_, X)

    def score(self, X, y):
        """Accuracy of the thresholded raw predictions."""
        return score_eval(MetricMode.ACCURACY, y, self.predict(X))

    def score_eval_func(self, X, y, mode="accuracy"):
        return score_eval(MetricMode(mode), y, self.predict(X))

    def correct_eval_func(self, X, y, mode="TP"):
        return correct_eval(CorrectMode(mode), y, self.predict(X))
