import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imbalance_boost.exceptions import DimensionError, InvalidInputError
from imbalance_boost.losses import (
    PROB_EPS,
    LossParams,
    batch_grad_hess,
    eta_terms,
    focal_grad_hess,
    focal_loss_value,
    grad_hess,
    plain_grad_hess,
    sigmoid,
    weighted_grad_hess,
    weighted_loss_value,
)

from helpers import fd_grad, loss_ref

LN2 = math.log(2.0)
Z_LN4 = math.log(4.0)

# Frozen from a 50-digit mpmath differentiation of the focal loss in z
# at z = ln 4 (y_hat = 0.8), gamma = 2.
FOCAL_SPOT_GRAD = -0.0222811872841
FOCAL_SPOT_HESS = 0.0519936621978


class TestSigmoid:
    def test_symmetry_point(self):
        assert sigmoid(0.0) == 0.5

    def test_clamped_at_extremes(self):
        assert sigmoid(1000.0) == 1.0 - PROB_EPS
        assert sigmoid(-1000.0) == PROB_EPS

    def test_ln4(self):
        assert sigmoid(Z_LN4) == pytest.approx(0.8, abs=1e-15)

    def test_monotone(self):
        z = np.linspace(-50, 50, 10001)
        assert np.all(np.diff(sigmoid(z)) >= 0)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(InvalidInputError):
            sigmoid(bad)


class TestWeighted:
    def test_alpha_one_is_cross_entropy(self):
        assert weighted_loss_value(1, 0.5, 1.0) == pytest.approx(LN2)

    def test_alpha_inert_on_negatives(self):
        assert weighted_loss_value(0, 0.5, 5.0) == pytest.approx(LN2)
        g, h = weighted_grad_hess(0, 0.5, 3.0)
        assert (g, h) == (0.5, 0.25)

    def test_spot_value(self):
        assert weighted_loss_value(1, 0.8, 2.0) == pytest.approx(-2 * math.log(0.8), rel=1e-14)
        assert weighted_loss_value(1, 0.8, 2.0) == pytest.approx(0.446287, abs=1e-6)

    def test_grad_hess_plain_point(self):
        g, h = weighted_grad_hess(1, 0.5, 1.0)
        assert (g, h) == (-0.5, 0.25)

    def test_grad_hess_matches_finite_difference(self):
        g, h = weighted_grad_hess(1, sigmoid(Z_LN4), 2.0)
        assert g == pytest.approx(-0.4, abs=1e-12)
        assert h == pytest.approx(0.32, abs=1e-12)
        assert g == pytest.approx(fd_grad("weighted", 1, Z_LN4, 2.0), abs=1e-9)
        fd_h = (fd_grad("weighted", 1, Z_LN4 + 1e-4, 2.0) - fd_grad("weighted", 1, Z_LN4 - 1e-4, 2.0)) / 2e-4
        assert h == pytest.approx(fd_h, abs=1e-6)

    def test_loss_is_integral_of_gradient(self):
        # trapezoid integral of the analytic gradient from z=0 recovers the loss change
        z = np.linspace(0.0, Z_LN4, 20001)
        g = weighted_grad_hess(np.ones_like(z), sigmoid(z), 2.0).grad
        integral = np.sum((g[1:] + g[:-1]) * np.diff(z)) / 2
        assert weighted_loss_value(1, 0.5, 2.0) + integral == pytest.approx(0.446287102628, abs=1e-8)

    @given(st.floats(PROB_EPS, 1 - PROB_EPS), st.floats(0.01, 100), st.sampled_from([0, 1]))
    def test_hessian_strictly_positive(self, p, alpha, y):
        assert weighted_grad_hess(y, p, alpha).hess > 0

    def test_rejects_bad_alpha(self):
        with pytest.raises(InvalidInputError):
            weighted_grad_hess(1, 0.5, 0.0)
        with pytest.raises(InvalidInputError):
            LossParams.weighted(-1.0)


class TestFocal:
    def test_gamma_zero_is_cross_entropy(self):
        assert focal_loss_value(1, 0.5, 0.0) == pytest.approx(LN2)
        g, h = focal_grad_hess(1, 0.7, 0.0)
        assert g == pytest.approx(-0.3, abs=1e-15)
        assert h == pytest.approx(0.21, abs=1e-15)

    def test_spot_loss_values(self):
        assert focal_loss_value(1, 0.8, 2.0) == pytest.approx(-0.04 * math.log(0.8), rel=1e-12)
        assert focal_loss_value(1, 0.8, 2.0) == pytest.approx(0.0089257, abs=1e-7)
        assert focal_loss_value(0, 0.2, 2.0) == pytest.approx(focal_loss_value(1, 0.8, 2.0), rel=1e-12)

    def test_spot_grad_hess(self):
        g, h = focal_grad_hess(1, 0.8, 2.0)
        assert g == pytest.approx(FOCAL_SPOT_GRAD, abs=1e-10)
        assert h == pytest.approx(FOCAL_SPOT_HESS, abs=1e-10)
        g0, h0 = focal_grad_hess(0, 0.2, 2.0)
        assert g0 == pytest.approx(-FOCAL_SPOT_GRAD, abs=1e-10)
        assert h0 == pytest.approx(FOCAL_SPOT_HESS, abs=1e-10)

    def test_loss_is_integral_of_gradient(self):
        z = np.linspace(0.0, Z_LN4, 20001)
        g = focal_grad_hess(np.ones_like(z), sigmoid(z), 2.0).grad
        integral = np.sum((g[1:] + g[:-1]) * np.diff(z)) / 2
        assert focal_loss_value(1, 0.5, 2.0) + integral == pytest.approx(0.00892574205257, abs=1e-9)

    def test_eta_terms(self):
        y = np.array([0.0, 1.0, 0.0, 1.0])
        p = np.array([0.2, 0.8, 0.9, 0.1])
        e1, e2, e3, e4, e5 = eta_terms(y, p)
        np.testing.assert_array_equal(e2, e5)
        np.testing.assert_allclose(e1, p * (1 - p))
        # eta2 is the probability of the wrong class, eta4 of the right one
        np.testing.assert_allclose(e2, [0.2, 0.2, 0.9, 0.9])
        np.testing.assert_allclose(e4, [0.8, 0.8, 0.1, 0.1])
        np.testing.assert_allclose(e3, [-0.8, 0.8, -0.1, 0.1])

    @given(st.floats(PROB_EPS, 1 - PROB_EPS), st.sampled_from([0, 1]))
    def test_eta_ranges(self, p, y):
        e1, e2, _, e4, _ = eta_terms(y, p)
        assert 0 < e1 <= 0.25
        assert 0 < e2 < 1 and 0 < e4 < 1

    @settings(max_examples=300)
    @given(st.floats(PROB_EPS, 1 - PROB_EPS), st.floats(0, 6))
    def test_mirror_symmetry(self, p, gamma):
        g1, h1 = focal_grad_hess(1, 1 - p, gamma)
        g0, h0 = focal_grad_hess(0, p, gamma)
        assert g0 == pytest.approx(-g1, abs=1e-12)
        assert h0 == pytest.approx(h1, abs=1e-12)

    def test_well_classified_damping(self):
        # |focal grad| / |CE grad| falls as a positive gets more confidently right
        p = 1.0 - np.logspace(np.log10(0.4999), -14, 2000)
        g_focal = focal_grad_hess(np.ones_like(p), p, 2.0).grad
        g_ce = plain_grad_hess(np.ones_like(p), p).grad
        ratio = np.abs(g_focal) / np.abs(g_ce)
        assert np.all(np.diff(ratio) < 0)

    @pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 1.0, 1.5, 2.5, 3.5, 4.0, 7.3])
    def test_finite_over_clamped_domain(self, gamma):
        p = np.concatenate([[PROB_EPS, 1 - PROB_EPS, 0.0, 1.0], np.linspace(0, 1, 1001)])
        for y in (0, 1):
            g, h = focal_grad_hess(np.full_like(p, y), p, gamma)
            assert np.all(np.isfinite(g)) and np.all(np.isfinite(h))
            assert np.all(np.isfinite(focal_loss_value(np.full_like(p, y), p, gamma)))

    def test_rejects_bad_gamma(self):
        with pytest.raises(InvalidInputError):
            focal_grad_hess(1, 0.5, -0.1)
        with pytest.raises(InvalidInputError):
            LossParams(kind="focal")


def test_reductions_are_exact():
    rng = np.random.default_rng(3)
    p = sigmoid(rng.uniform(-30, 30, 5000))
    y = rng.integers(0, 2, 5000).astype(float)
    g, h = plain_grad_hess(y, p)
    for gh in (focal_grad_hess(y, p, 0.0), weighted_grad_hess(y, p, 1.0)):
        np.testing.assert_array_equal(gh.grad, g)
        np.testing.assert_array_equal(gh.hess, h)


def test_labels_validated():
    with pytest.raises(InvalidInputError):
        plain_grad_hess(2, 0.5)


class TestBatch:
    def test_empty(self):
        g, h = batch_grad_hess([], [], LossParams.plain())
        assert g.shape == (0,) and h.shape == (0,)

    def test_symmetric_point(self):
        g, h = batch_grad_hess([1, 0], [0.0, 0.0], LossParams.plain())
        np.testing.assert_array_equal(g, [-0.5, 0.5])
        np.testing.assert_array_equal(h, [0.25, 0.25])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            batch_grad_hess([1, 0], [0.0], LossParams.plain())

    @pytest.mark.parametrize(
        "params", [LossParams.plain(), LossParams.weighted(0.4), LossParams.focal(1.5)]
    )
    def test_matches_scalar_loop(self, params):
        rng = np.random.default_rng(11)
        y = rng.integers(0, 2, 100)
        z = rng.normal(scale=4, size=100)
        g, h = batch_grad_hess(y, z, params)
        for i in range(100):
            gi, hi = grad_hess(params, int(y[i]), sigmoid(float(z[i])))
            assert g[i] == gi and h[i] == hi


@pytest.mark.parametrize("kind,param", [("plain", None), ("weighted", 3.0), ("focal", 2.0)])
def test_loss_oracle_agrees_with_kernel(kind, param):
    from imbalance_boost.losses import loss_value
    z = np.linspace(-6, 6, 41)
    for y in (0, 1):
        params = {"plain": LossParams.plain(), "weighted": LossParams.weighted(param or 1),
                  "focal": LossParams.focal(param or 0)}[kind]
        np.testing.assert_allclose(
            loss_value(params, np.full_like(z, y), sigmoid(z)), loss_ref(kind, y, z, param), rtol=1e-12
        )
