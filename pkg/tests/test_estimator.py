import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fpsa_snn.errors import ConfigError
from fpsa_snn.estimator import LatencyEncoder, SpikingPatternClassifier, as_patterns
from fpsa_snn.glyphs import DIGITS


class TestInputValidation:
    def test_flat_matrix_with_grid_shape(self):
        X = np.zeros((2, 20), dtype=int)
        X[0, 0] = 1
        patterns = as_patterns(X, (5, 4))
        assert patterns[0].rows == 5 and patterns[0].cols == 4
        assert patterns[0].pixel(1, 1) == 1

    def test_three_dimensional_input(self):
        X = np.zeros((2, 5, 4), dtype=int)
        patterns = as_patterns(X, None)
        assert patterns[0].cols == 4

    def test_pattern_list_passthrough(self):
        pats = [DIGITS["1"], DIGITS["2"]]
        assert as_patterns(pats, (5, 4)) == pats

    def test_non_binary_rejected(self):
        with pytest.raises(ConfigError, match="binary"):
            as_patterns(np.full((1, 20), 2), (5, 4))

    def test_wrong_width_rejected(self):
        with pytest.raises(ConfigError, match="features"):
            as_patterns(np.zeros((1, 21), dtype=int), (5, 4))


class TestSklearnProtocol:
    def test_get_set_params_and_clone(self):
        clf = SpikingPatternClassifier(max_epochs=7, random_state=3)
        params = clf.get_params()
        assert params["max_epochs"] == 7
        other = clone(clf)
        assert other.get_params()["random_state"] == 3
        clf.set_params(max_epochs=9)
        assert clf.max_epochs == 9

    def test_predict_before_fit_raises(self):
        clf = SpikingPatternClassifier()
        with pytest.raises(NotFittedError):
            clf.predict(np.zeros((1, 20), dtype=int))


@pytest.fixture(scope="module")
def fitted():
    # two-class task keeps the simulated frame short
    X = [DIGITS["1"], DIGITS["2"]]
    y = np.array(["one", "two"])
    clf = SpikingPatternClassifier(max_epochs=40, random_state=0)
    return clf.fit(X, y), X, y


class TestFitPredict:
    def test_converges_and_scores(self, fitted):
        clf, X, y = fitted
        assert clf.converged_epoch_ is not None
        assert list(clf.predict(X)) == list(y)
        assert clf.score(X, y) == 1.0

    def test_decision_windows_one_hot(self, fitted):
        clf, X, _ = fitted
        assert clf.decision_windows(X) == [0, 1]

    def test_classes_sorted(self, fitted):
        clf, _, _ = fitted
        assert list(clf.classes_) == ["one", "two"]


class TestLatencyEncoder:
    def test_transform_matches_formula(self):
        enc = LatencyEncoder(grid_shape=(5, 4))
        X = np.zeros((1, 20), dtype=int)
        X[0, :4] = 1  # top row black
        out = enc.transform(X)
        assert out[0] == [[7.0], [8.0], [9.0], [10.0]]

    def test_fit_is_stateless_identity(self):
        enc = LatencyEncoder()
        assert enc.fit(np.zeros((1, 20), dtype=int)) is enc

    def test_composes_in_sklearn_pipeline(self):
        from sklearn.pipeline import Pipeline
        from sklearn.preprocessing import FunctionTransformer

        # encoder output feeds a trivial consumer stage
        pipe = Pipeline([
            ("encode", LatencyEncoder()),
            ("count", FunctionTransformer(
                lambda trains: np.array([[sum(len(t) for t in p)] for p in trains]))),
        ])
        X = np.stack([np.array(DIGITS[d].pixels) for d in "12"])
        counts = pipe.fit_transform(X)
        assert counts.shape == (2, 1)
        assert counts[0, 0] == sum(DIGITS["1"].pixels)
