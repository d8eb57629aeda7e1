import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from evotnfin.estimator import TnfinClassifier
from evotnfin.exceptions import ConfigError
from evotnfin.synth import blob_features

FAST = dict(mfs_per_input=2, iterations=5, population=8, epochs_per_iteration=1)


@pytest.fixture(scope="module")
def blobs():
    X, y = blob_features(90, separation=4.0, random_state=1)
    return X[:, :3], y


def test_params_round_trip():
    clf = TnfinClassifier(solver="gd", learning_rate=0.05, inertia=0.9)
    params = clf.get_params()
    assert params["learning_rate"] == 0.05 and params["inertia"] == 0.9
    assert clone(clf).get_params() == params
    assert clf.set_params(population=12).population == 12


def test_fit_predict_shapes(blobs):
    X, y = blobs
    clf = TnfinClassifier(**FAST).fit(X, y, eval_set=(X[:20], y[:20]))
    assert clf.predict(X).shape == (90,)
    assert clf.decision_function(X).shape == (90, 3)
    assert set(clf.predict(X)) <= set(clf.classes_)
    assert clf.curves_["train_mse"].shape == (6,) == clf.curves_["test_mse"].shape
    assert len(clf.networks_) == 3 and clf.n_features_in_ == 3


def test_training_does_not_hurt_train_mse(blobs):
    X, y = blobs
    clf = TnfinClassifier(**FAST).fit(X, y)
    assert clf.mse(X, y) <= clf.mse(X, y, initial=True)
    assert np.all(np.diff(clf.curves_["train_mse"]) <= 1e-15)


def test_train_curve_matches_networks(blobs):
    X, y = blobs
    clf = TnfinClassifier(**FAST).fit(X, y, eval_set=(X, y))
    assert clf.curves_["test_mse"][-1] == pytest.approx(clf.mse(X, y), rel=1e-10)
    # point 0 is the best cat of the initial swarm, which includes the initial network
    assert clf.curves_["test_mse"][0] <= clf.mse(X, y, initial=True) + 1e-12


def test_gd_solver(blobs):
    X, y = blobs
    clf = TnfinClassifier(solver="gd", mfs_per_input=2, gd_epochs=3, learning_rate=1e-3)
    clf.fit(X, y, eval_set=(X, y))
    assert clf.curves_["train_mse"].shape == (4,)
    assert clf.curves_["test_mse"][0] == pytest.approx(clf.curves_["train_mse"][0], rel=1e-10)
    assert clf.curves_["test_mse"][0] == pytest.approx(clf.mse(X, y, initial=True), rel=1e-10)
    assert clf.curves_["test_mse"][-1] == pytest.approx(clf.mse(X, y), rel=1e-10)


def test_deterministic(blobs):
    X, y = blobs
    a = TnfinClassifier(**FAST, random_state=3).fit(X, y).decision_function(X)
    b = TnfinClassifier(**FAST, random_state=3).fit(X, y).decision_function(X)
    np.testing.assert_array_equal(a, b)


def test_string_labels(blobs):
    X, y = blobs
    names = np.array(["cat", "dog", "eel"])[y]
    clf = TnfinClassifier(**FAST).fit(X, names)
    assert set(clf.predict(X)) <= {"cat", "dog", "eel"}
    assert 0 <= clf.score(X, names) <= 1


def test_pipeline(blobs):
    X, y = blobs
    pipe = make_pipeline(StandardScaler(), TnfinClassifier(**FAST, scale_features=False))
    assert pipe.fit(X, y).predict(X).shape == (90,)


def test_validation(blobs):
    X, y = blobs
    with pytest.raises(NotFittedError):
        TnfinClassifier().predict(X)
    with pytest.raises(ConfigError):
        TnfinClassifier(solver="adam").fit(X, y)
    clf = TnfinClassifier(**FAST).fit(X, y)
    with pytest.raises(ValueError):
        clf.predict(X[:, :2])
    with pytest.raises(ValueError):
        TnfinClassifier(**FAST).fit(np.full((5, 2), np.nan), [0, 1, 0, 1, 0])
