"""Shared signal types: spike trains and sampled stimulus waveforms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SpikeTrain:
    """Ordered spike times in nanoseconds.

    Times are strictly increasing and non-negative. An empty train is valid.
    """

    times: tuple[float, ...] = ()

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", ts)
        if any(t < 0.0 for t in ts):
            raise ConfigError("spike times must be non-negative")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("spike times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def shifted(self, dt_ns: float) -> "SpikeTrain":
        return SpikeTrain(tuple(t + dt_ns for t in self.times))


@dataclass
class StimulusWaveform:
    """Uniformly sampled injected optical power in model stimulus units.

    ``values[k]`` holds the power on ``[k*dt, (k+1)*dt)`` ps (zero-order
    hold). Values are non-negative; the waveform is zero-extended past its
    last sample by consumers.
    """

    dt_ps: float
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.dt_ps <= 0:
            raise ConfigError("stimulus dt must be positive")
        if self.values.ndim != 1:
            raise ConfigError("stimulus values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("stimulus values must be finite")
        if self.values.size and float(self.values.min()) < 0.0:
            raise ConfigError("stimulus values must be non-negative")

    @property
    def duration_ns(self) -> float:
        return len(self.values) * self.dt_ps * 1e-3

    def t_ns(self) -> np.ndarray:
        return np.arange(len(self.values)) * (self.dt_ps * 1e-3)

    @staticmethod
    def zeros(duration_ns: float, dt_ps: float) -> "StimulusWaveform":
        n = int(round(duration_ns * 1e3 / dt_ps))
        return StimulusWaveform(dt_ps, np.zeros(n))


def rectangular_pulses(
    times_ns,
    amplitudes,
    width_ns: float,
    duration_ns: float,
    dt_ps: float = 10.0,
) -> StimulusWaveform:
    """Sum of center-aligned rectangular pulses, clamped at zero.

    Convenience builder used by the characterization routines and the demo
    stimulus programs; the synaptic path goes through
    ``encoding.synthesize_stimulus`` instead.
    """
    dt_ns = dt_ps * 1e-3
    n = int(round(duration_ns / dt_ns))
    v = np.zeros(n)
    for t, a in zip(times_ns, amplitudes):
        i0 = int(round((t - 0.5 * width_ns) / dt_ns))
        i1 = int(round((t + 0.5 * width_ns) / dt_ns))
        v[max(i0, 0):max(i1, 0)] += a
    np.clip(v, 0.0, None, out=v)
    return StimulusWaveform(dt_ps, v)
