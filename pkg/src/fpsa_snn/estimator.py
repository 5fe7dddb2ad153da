"""scikit-learn style facade over the spike-encoding classifier.

``SpikingPatternClassifier`` wraps encode -> weight -> simulate -> detect
inference plus the supervised spike-rule training loop behind the familiar
``fit`` / ``predict`` / ``get_params`` estimator surface so the simulator
composes with sklearn tooling (pipelines, cross-validation, cloning).
``LatencyEncoder`` exposes the latency spike encoding as a transformer.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import defaults
from .encoding import PixelPattern, PulseShape, WindowSpec, encode_pattern
from .errors import ConfigError
from .learning import (
    KernelParams,
    LearningConfig,
    SimulationContext,
    TargetSpec,
    train,
)
from .network import infer
from .yamada import DEFAULT_DT_PS


def as_patterns(X, grid_shape) -> list[PixelPattern]:
    """Normalize estimator input to a list of patterns.

    Accepts a list of PixelPattern, an (n, rows, cols) binary array, or an
    (n, rows*cols) binary matrix interpreted row-major with ``grid_shape``.
    """
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], PixelPattern):
        return list(X)
    arr = np.asarray(X)
    if arr.ndim == 3:
        rows, cols = arr.shape[1], arr.shape[2]
        flat = arr.reshape(arr.shape[0], -1)
    elif arr.ndim == 2:
        rows, cols = grid_shape
        if arr.shape[1] != rows * cols:
            raise ConfigError(
                f"expected {rows * cols} features for grid_shape {grid_shape}, "
                f"got {arr.shape[1]}")
        flat = arr
    else:
        raise ConfigError("X must be a pattern list, (n, rows, cols) or (n, rows*cols)")
    if not np.isin(flat, (0, 1)).all():
        raise ConfigError("pattern pixels must be binary")
    return [
        PixelPattern(rows=rows, cols=cols,
                     pixels=tuple(int(v) for v in row), label=str(i))
        for i, row in enumerate(flat)
    ]


class SpikingPatternClassifier(ClassifierMixin, BaseEstimator):
    """Pattern classifier backed by the simulated excitable-laser neuron.

    Each class occupies one response time window of a single
    time-multiplexed neuron; ``fit`` trains the synaptic weights with the
    kernel-weighted spike rule and ``predict`` returns the class whose
    window fired.

    Parameters mirror the simulation defaults; ``laser_params=None`` uses
    the shipped calibrated parameter set.
    """

    def __init__(
        self,
        grid_shape=(5, 4),
        window_len_ns=None,
        guard_ns=1.0,
        pulse_width_ns=0.2,
        learning_rate=0.4e8,
        max_epochs=100,
        init_high=1e7,
        random_state=0,
        dt_ps=DEFAULT_DT_PS,
        laser_params=None,
    ):
        self.grid_shape = grid_shape
        self.window_len_ns = window_len_ns
        self.guard_ns = guard_ns
        self.pulse_width_ns = pulse_width_ns
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.init_high = init_high
        self.random_state = random_state
        self.dt_ps = dt_ps
        self.laser_params = laser_params

    def _context(self, patterns: list[PixelPattern], n_classes: int) -> SimulationContext:
        rows, cols = patterns[0].rows, patterns[0].cols
        if self.window_len_ns is None:
            span = rows + cols + 5.0
            window_len = 15.0 if span <= 14.0 else float(int(span) + 3)
        else:
            window_len = self.window_len_ns
        window = WindowSpec(n_windows=n_classes, window_len_ns=window_len,
                            guard_ns=self.guard_ns)
        params = self.laser_params if self.laser_params is not None \
            else defaults.default_params()
        return SimulationContext(
            params=params,
            window=window,
            pulse=PulseShape(width_ns=self.pulse_width_ns),
            detect=defaults.default_detect(),
            kernel_params=KernelParams(),
            dt_ps=self.dt_ps,
        )

    def fit(self, X, y):
        patterns = as_patterns(X, self.grid_shape)
        y = np.asarray(y)
        if len(y) != len(patterns):
            raise ConfigError("X and y disagree on sample count")
        self.classes_ = np.unique(y)
        class_index = {c: i for i, c in enumerate(self.classes_)}
        labels = [str(c) for c in y]
        targets = TargetSpec(
            labels=tuple(labels),
            one_hot=tuple(class_index[c] for c in y),
            n_windows=len(self.classes_),
        )
        ctx = self._context(patterns, len(self.classes_))
        cfg = LearningConfig(
            omega_f=self.learning_rate,
            max_epochs=self.max_epochs,
            init_high=self.init_high,
            rng_seed=self.random_state,
        )
        result = train(patterns, targets, cfg, ctx)
        self.ctx_ = ctx
        self.weights_ = result.weights
        self.training_log_ = result.log
        self.converged_epoch_ = result.converged_epoch
        self.n_features_in_ = patterns[0].rows * patterns[0].cols
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("call fit before predict")

    def decision_windows(self, X) -> list[int | None]:
        """Winning window per sample (None when 0 or >1 windows fired)."""
        self._check_fitted()
        patterns = as_patterns(X, self.grid_shape)
        return [infer(p, self.weights_, self.ctx_).winning_window for p in patterns]

    def predict(self, X):
        """Class of the fired window; ambiguous samples fall back to the
        window with the most spikes (first window on a complete tie)."""
        self._check_fitted()
        patterns = as_patterns(X, self.grid_shape)
        out = []
        for p in patterns:
            res = infer(p, self.weights_, self.ctx_)
            if res.winning_window is not None:
                out.append(self.classes_[res.winning_window])
            else:
                counts = [len(t) for t in res.window_times_ns]
                out.append(self.classes_[int(np.argmax(counts))])
        return np.asarray(out)


class LatencyEncoder(TransformerMixin, BaseEstimator):
    """Transformer exposing the latency spike encoding.

    ``transform`` maps binary patterns to per-channel spike-time lists
    (one list per pattern column).
    """

    def __init__(self, grid_shape=(5, 4), offset_ns=5.0):
        self.grid_shape = grid_shape
        self.offset_ns = offset_ns

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        patterns = as_patterns(X, self.grid_shape)
        return [
            [list(train.times) for train in encode_pattern(p, self.offset_ns)]
            for p in patterns
        ]
