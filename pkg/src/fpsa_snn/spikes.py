"""Spike detection on photon-density traces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigError
from .signals import SpikeTrain
from .yamada import Trajectory


@dataclass(frozen=True)
class SpikeDetectConfig:
    """Peak-picking rule for turning an S(t) trace into spike times.

    threshold: absolute photon-density level a peak must reach.
    min_separation_ns: dead time between accepted peaks; when two peaks fall
        closer than this, the larger one wins.
    min_prominence: required peak prominence as a fraction of threshold.
    """

    threshold: float
    min_separation_ns: float = 0.3
    min_prominence: float = 0.5

    def __post_init__(self):
        if not self.threshold > 0:
            raise ConfigError("detection threshold must be > 0")
        if self.min_separation_ns < 0:
            raise ConfigError("min_separation_ns must be >= 0")
        if self.min_prominence < 0:
            raise ConfigError("min_prominence must be >= 0")


def detect_spikes_array(
    S: np.ndarray,
    dt_ns: float,
    cfg: SpikeDetectConfig,
    t0_ns: float = 0.0,
) -> SpikeTrain:
    """Detect spikes on a raw sampled trace; times are peak times in ns."""
    if len(S) < 3:
        return SpikeTrain()
    distance = max(1, int(round(cfg.min_separation_ns / dt_ns)))
    idx, _ = find_peaks(
        S,
        height=cfg.threshold,
        distance=distance,
        prominence=cfg.min_prominence * cfg.threshold,
    )
    return SpikeTrain(tuple(t0_ns + float(i) * dt_ns for i in idx))


def detect_spikes(traj: Trajectory, cfg: SpikeDetectConfig) -> SpikeTrain:
    """Times of local maxima of S that clear the threshold and prominence rule."""
    return detect_spikes_array(traj.S, traj.dt_ns, cfg, t0_ns=traj.t0_ns)
