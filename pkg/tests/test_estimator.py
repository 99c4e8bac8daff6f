import numpy as np
import pytest

from imbalance_boost import ImbalanceBoostClassifier
from imbalance_boost.booster import BoostedModel

from helpers import imbalanced_fixture


@pytest.fixture(scope="module")
def data():
    return imbalanced_fixture(m=200)


def test_fit_requires_parameter(data):
    with pytest.raises(ValueError, match="imbalance_alpha is missing"):
        ImbalanceBoostClassifier(special_objective="weighted").fit(data.features, data.labels)
    with pytest.raises(ValueError, match="focal_gamma is missing"):
        ImbalanceBoostClassifier(special_objective="focal").fit(data.features, data.labels)


def test_prediction_forms_agree(data):
    clf = ImbalanceBoostClassifier(special_objective="focal").fit(data.features, data.labels, focal_gamma=2.0)
    X = data.features
    raw = clf.predict(X)
    np.testing.assert_array_equal(clf.predict_determine(X), (raw > 0).astype(int))
    np.testing.assert_array_equal(clf.predict_two_classes(X)[:, 1], clf.predict_determine(X))
    assert np.all((clf.predict_sigmoid(X) > 0.5) == (raw > 0))
    assert isinstance(clf.booster, BoostedModel)


def test_scores(data):
    clf = ImbalanceBoostClassifier(special_objective="weighted", imbalance_alpha=2.0).fit(data.features, data.labels)
    X, y = data.features, data.labels
    assert clf.score(X, y) == clf.score_eval_func(X, y, mode="accuracy")
    parts = [clf.correct_eval_func(X, y, mode=m) for m in ("TP", "FP", "TN", "FN")]
    assert sum(parts) == len(y)
    tp, fp, tn, fn = parts
    assert clf.score(X, y) == (tp + tn) / len(y)
    assert -1 <= clf.score_eval_func(X, y, mode="mcc") <= 1


def test_sklearn_grid_search(data):
    model_selection = pytest.importorskip("sklearn.model_selection")
    search = model_selection.GridSearchCV(
        ImbalanceBoostClassifier(special_objective="focal", num_rounds=3),
        {"focal_gamma": [1.0, 2.0]}, cv=3,
    )
    search.fit(data.features, data.labels)
    assert search.best_params_["focal_gamma"] in (1.0, 2.0)
