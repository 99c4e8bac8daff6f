"""Per-instance losses and their derivatives with respect to the raw logit.

Three binary losses are supported: plain logistic (cross-entropy), weighted
cross-entropy with an imbalance weight ``alpha`` on the positive term, and
focal loss with focusing exponent ``gamma``.

Every derivative is taken with respect to the raw score ``z`` (not the
probability), so these are exactly the ``g_i``/``h_i`` consumed by the
Newton booster. The focal expressions use the label-merged form with the
``(-1)**y`` sign so a single vectorized expression covers both labels.

All functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DimensionError, InvalidInputError

PROB_EPS = 1e-15


class LossKind(str, enum.Enum):
    PLAIN = "plain"
    WEIGHTED = "weighted"
    FOCAL = "focal"


@dataclass(frozen=True)
class LossParams:
    kind: LossKind = LossKind.PLAIN
    alpha: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.WEIGHTED:
            if self.alpha is None:
                raise InvalidInputError("weighted loss requires the imbalance parameter alpha")
            if not (np.isfinite(self.alpha) and self.alpha > 0):
                raise InvalidInputError(f"alpha must be a positive finite number, got {self.alpha!r}")
            object.__setattr__(self, "alpha", float(self.alpha))
        if self.kind is LossKind.FOCAL:
            if self.gamma is None:
                raise InvalidInputError("focal loss requires the focusing parameter gamma")
            if not (np.isfinite(self.gamma) and self.gamma >= 0):
                raise InvalidInputError(f"gamma must be a nonnegative finite number, got {self.gamma!r}")
            object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def plain(cls) -> "LossParams":
        return cls(LossKind.PLAIN)

    @classmethod
    def weighted(cls, alpha: float) -> "LossParams":
        return cls(LossKind.WEIGHTED, alpha=alpha)

    @classmethod
    def focal(cls, gamma: float) -> "LossParams":
        return cls(LossKind.FOCAL, gamma=gamma)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "alpha": self.alpha, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict) -> "LossParams":
        kind = LossKind(d["kind"])
        # parameters irrelevant to the chosen kind are dropped
        return cls(
            kind,
            alpha=d.get("alpha") if kind is LossKind.WEIGHTED else None,
            gamma=d.get("gamma") if kind is LossKind.FOCAL else None,
        )


class GradHess(NamedTuple):
    grad: np.ndarray
    hess: np.ndarray


class EtaTerms(NamedTuple):
    eta1: np.ndarray
    eta2: np.ndarray
    eta3: np.ndarray
    eta4: np.ndarray
    eta5: np.ndarray


def _labels(y):
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise InvalidInputError("labels must be 0 or 1")
    return y


def _probs(p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(p)):
        raise InvalidInputError("probabilities must not be NaN")
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def sigmoid(z):
    """Logistic function, clamped to ``[PROB_EPS, 1 - PROB_EPS]``.

    Raises InvalidInputError for NaN or infinite input.
    """
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("raw scores must be finite")
    # exp(-|z|) never overflows; both branches equal 1 / (1 + exp(-z))
    e = np.exp(-np.abs(z))
    p = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


# -- plain cross-entropy ------------------------------------------------------

def plain_loss_value(y, y_hat):
    y, p = _labels(y), _probs(y_hat)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def plain_grad_hess(y, y_hat) -> GradHess:
    y, p = _labels(y), _probs(y_hat)
    return GradHess(p - y, p * (1.0 - p))


# -- weighted cross-entropy ---------------------------------------------------

def _check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    if not np.all(np.isfinite(alpha) & (alpha > 0)):
        raise InvalidInputError("alpha must be positive and finite")
    return alpha


def _check_gamma(gamma):
    gamma = np.asarray(gamma, dtype=np.float64)
    if not np.all(np.isfinite(gamma) & (gamma >= 0)):
        raise InvalidInputError("gamma must be nonnegative and finite")
    return gamma


def weighted_loss_value(y, y_hat, alpha):
    """``-(alpha*y*log(p) + (1-y)*log(1-p))`` for a single instance."""
    y, p, alpha = _labels(y), _probs(y_hat), _check_alpha(alpha)
    return -(alpha * y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def weighted_grad_hess(y, y_hat, alpha) -> GradHess:
    y, p, alpha = _labels(y), _probs(y_hat), _check_alpha(alpha)
    # alpha**y is 1 for negatives: the weight only touches the positive term
    w = np.power(alpha, y)
    grad = -w * (y - p)
    hess = w * (1.0 - p) * p
    return GradHess(grad, hess)


# -- focal --------------------------------------------------------------------

def eta_terms(y, y_hat) -> EtaTerms:
    """Shorthand quantities of the merged-sign focal derivatives.

    eta2 and eta5 are the same expression; both are returned so the
    derivative formulas read exactly as derived.
    """
    y, p = _labels(y), _probs(y_hat)
    s = 1.0 - 2.0 * y  # (-1)**y
    eta1 = p * (1.0 - p)
    eta2 = y + s * p
    eta3 = p + y - 1.0
    eta4 = 1.0 - y - s * p
    return EtaTerms(eta1, eta2, eta3, eta4, eta2)


def focal_loss_value(y, y_hat, gamma):
    y, p, gamma = _labels(y), _probs(y_hat), _check_gamma(gamma)
    return -(
        y * np.power(1.0 - p, gamma) * np.log(p)
        + (1.0 - y) * np.power(p, gamma) * np.log(1.0 - p)
    )


def focal_grad_hess(y, y_hat, gamma) -> GradHess:
    """Focal loss gradient and hessian in z.

    With gamma == 0 both reduce bit-for-bit to :func:`plain_grad_hess`.
    The hessian is returned unguarded; it can be close to zero (or slightly
    negative for small gamma) and the booster handles that in the leaf
    denominator.
    """
    y, p, gamma = _labels(y), _probs(y_hat), _check_gamma(gamma)
    s = 1.0 - 2.0 * y
    eta1, eta2, eta3, eta4, eta5 = eta_terms(y, p)
    log_eta4 = np.log(eta4)
    eta2_g = np.power(eta2, gamma)
    # eta2 > 0 on the clamped domain, so a negative exponent is safe
    eta2_gm1 = np.power(eta2, gamma - 1.0)

    grad = gamma * eta3 * eta2_g * log_eta4 + s * np.power(eta5, gamma + 1.0)
    hess = eta1 * (
        gamma * ((eta2_g + gamma * s * eta3 * eta2_gm1) * log_eta4 - s * eta3 * eta2_g / eta4)
        + (gamma + 1.0) * np.power(eta5, gamma)
    )
    return GradHess(grad, hess)


# -- dispatch -----------------------------------------------------------------

def loss_value(params: LossParams, y, y_hat):
    if params.kind is LossKind.WEIGHTED:
        return weighted_loss_value(y, y_hat, params.alpha)
    if params.kind is LossKind.FOCAL:
        return focal_loss_value(y, y_hat, params.gamma)
    return plain_loss_value(y, y_hat)


def grad_hess(params: LossParams, y, y_hat) -> GradHess:
    if params.kind is LossKind.WEIGHTED:
        return weighted_grad_hess(y, y_hat, params.alpha)
    if params.kind is LossKind.FOCAL:
        return focal_grad_hess(y, y_hat, params.gamma)
    return plain_grad_hess(y, y_hat)


def batch_grad_hess(labels, raw_scores, params: LossParams) -> GradHess:
    """Gradients and hessians for a batch of raw logits.

    Element ``i`` equals the single-instance kernel applied to
    ``(labels[i], sigmoid(raw_scores[i]))``.
    """
    labels = np.asarray(labels, dtype=np.float64).ravel()
    raw_scores = np.asarray(raw_scores, dtype=np.float64).ravel()
    if labels.shape != raw_scores.shape:
        raise DimensionError(
            f"labels has length {labels.shape[0]} but raw_scores has length {raw_scores.shape[0]}"
        )
    return grad_hess(params, labels, sigmoid(raw_scores))


def mean_loss(labels, raw_scores, params: LossParams) -> float:
    labels = np.asarray(labels, dtype=np.float64).ravel()
    raw_scores = np.asarray(raw_scores, dtype=np.float64).ravel()
    if labels.shape != raw_scores.shape:
        raise DimensionError("labels and raw_scores differ in length")
    if labels.size == 0:
        raise InvalidInputError("mean loss of an empty batch is undefined")
    return float(np.mean(loss_value(params, labels, sigmoid(raw_scores))))
