"""Latency spike encoding and time-window multiplexing.

A binary pixel pattern of shape (rows x cols) is encoded column-wise: input
channel m carries one spike per black pixel in column m, at
``t = x + y + offset`` ns for 1-based column x and row y. Per logical
output window, spike trains are weighted into a pulse waveform; windows are
then concatenated (with a guard gap) so a single physical neuron can serve
every logical output in sequence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .signals import SpikeTrain, StimulusWaveform

DEFAULT_ENCODE_OFFSET_NS = 5.0
DEFAULT_STIM_DT_PS = 10.0


@dataclass(frozen=True)
class PixelPattern:
    rows: int
    cols: int
    pixels: tuple[int, ...]          # row-major, 1 = black, 0 = white
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pixels", tuple(int(p) for p in self.pixels))
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("pattern must have at least one row and column")
        if len(self.pixels) != self.rows * self.cols:
            raise ConfigError(
                f"pattern {self.label!r}: {len(self.pixels)} pixels for a "
                f"{self.rows}x{self.cols} grid")
        if any(p not in (0, 1) for p in self.pixels):
            raise ConfigError("pixels must be 0 or 1")

    def pixel(self, row: int, col: int) -> int:
        """1-based (row, col) lookup."""
        return self.pixels[(row - 1) * self.cols + (col - 1)]

    def column(self, col: int) -> tuple[int, ...]:
        return tuple(self.pixel(y, col) for y in range(1, self.rows + 1))

    @staticmethod
    def from_strings(rows: list[str], label: str = "") -> "PixelPattern":
        """Build from glyph art, one string per row, '1'/'#' = black."""
        if not rows:
            raise ConfigError("empty glyph")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ConfigError("ragged glyph rows")
        pixels = tuple(1 if ch in "1#" else 0 for row in rows for ch in row)
        return PixelPattern(rows=len(rows), cols=width, pixels=pixels, label=label)

    def to_strings(self) -> list[str]:
        return ["".join(str(self.pixel(y, x)) for x in range(1, self.cols + 1))
                for y in range(1, self.rows + 1)]


@dataclass(frozen=True)
class PulseShape:
    """Analog pulse emitted per spike, scaled by the synaptic weight."""

    kind: str = "rectangular"        # "rectangular" | "gaussian"
    width_ns: float = 0.2
    amplitude_unit: float = 1.0      # stimulus units per unit weight

    def __post_init__(self):
        if self.kind not in ("rectangular", "gaussian"):
            raise ConfigError(f"unknown pulse kind {self.kind!r}")
        if not 0.0 < self.width_ns < 0.5:
            raise ConfigError("pulse width must lie in (0, 0.5) ns to resolve "
                              "500 ps burst spacing")


@dataclass(frozen=True)
class WindowSpec:
    """Response-window layout for time-multiplexed logical outputs."""

    n_windows: int
    window_len_ns: float = 15.0
    guard_ns: float = 1.0

    def __post_init__(self):
        if self.n_windows < 1:
            raise ConfigError("need at least one response window")
        if self.window_len_ns <= 0 or self.guard_ns < 0:
            raise ConfigError("window length must be > 0 and guard >= 0")

    @property
    def period_ns(self) -> float:
        return self.window_len_ns + self.guard_ns

    @property
    def total_ns(self) -> float:
        return self.n_windows * self.period_ns

    def window_start(self, i: int) -> float:
        return i * self.period_ns


def encode_pattern(
    pattern: PixelPattern,
    offset_ns: float = DEFAULT_ENCODE_OFFSET_NS,
) -> list[SpikeTrain]:
    """One spike train per column: black pixel (x, y) spikes at x + y + offset ns."""
    trains = []
    for x in range(1, pattern.cols + 1):
        times = tuple(float(x + y + offset_ns)
                      for y in range(1, pattern.rows + 1)
                      if pattern.pixel(y, x) == 1)
        trains.append(SpikeTrain(times))
    return trains


def max_encoded_time(pattern: PixelPattern,
                     offset_ns: float = DEFAULT_ENCODE_OFFSET_NS) -> float:
    return pattern.rows + pattern.cols + offset_ns


def synthesize_stimulus(
    trains: list[SpikeTrain],
    weights_row,
    shape: PulseShape,
    dt_ps: float = DEFAULT_STIM_DT_PS,
    duration_ns: float | None = None,
) -> StimulusWaveform:
    """Weighted sum of per-spike pulses, clamped at zero.

    Weights may be negative (trained values are unconstrained); the optical
    power floor clamps the summed waveform, not individual pulses.
    """
    if len(trains) != len(weights_row):
        raise ConfigError(
            f"{len(trains)} spike trains but {len(weights_row)} weights")
    if duration_ns is None:
        latest = max((t.times[-1] for t in trains if len(t)), default=0.0)
        duration_ns = latest + 2.0
    dt_ns = dt_ps * 1e-3
    n = int(round(duration_ns / dt_ns))
    v = np.zeros(n)
    half = 0.5 * shape.width_ns
    for train, w in zip(trains, weights_row):
        a = float(w) * shape.amplitude_unit
        if a == 0.0 or not len(train):
            continue
        if shape.kind == "rectangular":
            for t in train.times:
                i0 = int(round((t - half) / dt_ns))
                i1 = int(round((t + half) / dt_ns))
                v[max(i0, 0):max(i1, 0)] += a
        else:
            sigma = shape.width_ns / 2.3548200450309493  # FWHM -> sigma
            for t in train.times:
                i0 = max(0, int(round((t - 4 * sigma) / dt_ns)))
                i1 = min(n, int(round((t + 4 * sigma) / dt_ns)) + 1)
                if i1 <= i0:
                    continue
                tt = (np.arange(i0, i1) + 0.5) * dt_ns
                v[i0:i1] += a * np.exp(-0.5 * ((tt - t) / sigma) ** 2)
    np.clip(v, 0.0, None, out=v)
    return StimulusWaveform(dt_ps, v)


def time_multiplex(
    per_window_waveforms: list[StimulusWaveform],
    window: WindowSpec,
) -> StimulusWaveform:
    """Shift waveform i into window i and concatenate over the full frame."""
    if len(per_window_waveforms) != window.n_windows:
        raise ConfigError(
            f"got {len(per_window_waveforms)} waveforms for {window.n_windows} windows")
    dt_ps = per_window_waveforms[0].dt_ps
    if any(wf.dt_ps != dt_ps for wf in per_window_waveforms):
        raise ConfigError("all window waveforms must share one sample interval")
    dt_ns = dt_ps * 1e-3
    n_total = int(round(window.total_ns / dt_ns))
    n_window = int(round(window.window_len_ns / dt_ns))
    out = np.zeros(n_total)
    for i, wf in enumerate(per_window_waveforms):
        if len(wf.values) > n_window:
            tail = wf.values[n_window:]
            if np.any(tail != 0.0):
                raise ConfigError(
                    f"waveform {i} is longer than the {window.window_len_ns} ns window")
        o = int(round(window.window_start(i) / dt_ns))
        seg = wf.values[:n_window]
        out[o:o + len(seg)] += seg
    return StimulusWaveform(dt_ps, out)


@dataclass(frozen=True)
class WindowResponse:
    fired: bool
    times_ns: tuple[float, ...]      # window-relative spike times


def demultiplex_response(spikes: SpikeTrain, window: WindowSpec) -> list[WindowResponse]:
    """Bin detected spikes back into their logical windows.

    Times are reported relative to the window start; spikes landing in a
    guard gap or beyond the frame belong to no window and are dropped.
    """
    out = []
    for i in range(window.n_windows):
        w0 = window.window_start(i)
        w1 = w0 + window.window_len_ns
        times = tuple(t - w0 for t in spikes.times if w0 <= t < w1)
        out.append(WindowResponse(fired=len(times) >= 1, times_ns=times))
    return out


def jitter_trains(
    trains: list[SpikeTrain],
    time_sigma_ns: float,
    rng: np.random.Generator,
) -> list[SpikeTrain]:
    """Per-spike Gaussian timing jitter (drive-electronics model for repro runs)."""
    if time_sigma_ns < 0:
        raise ConfigError("time_sigma_ns must be >= 0")
    out = []
    for train in trains:
        times = sorted(max(0.0, t + time_sigma_ns * rng.standard_normal())
                       for t in train.times)
        for i in range(1, len(times)):
            if times[i] <= times[i - 1]:
                times[i] = times[i - 1] + 1e-9
        out.append(SpikeTrain(tuple(times)))
    return out
