"""Inference: single-neuron time-multiplexed classification and the
two-neuron optical cascade."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import PixelPattern, WindowSpec, encode_pattern, demultiplex_response
from .errors import ConfigError
from .learning import SimulationContext, WeightMatrix, run_multiplexed
from .params import LaserParams
from .signals import SpikeTrain, StimulusWaveform
from .spikes import SpikeDetectConfig, detect_spikes
from .yamada import Trajectory, integrate, settle


@dataclass(frozen=True)
class Topology:
    """Layer shape: input channel count and the logical-output window layout."""

    n_pre: int
    n_post_logical: int
    window: WindowSpec

    def __post_init__(self):
        if self.n_pre < 1:
            raise ConfigError("need at least one input channel")
        if self.n_post_logical != self.window.n_windows:
            raise ConfigError("logical output count must equal the window count")


@dataclass(frozen=True)
class CascadeConfig:
    """Optical coupling from the first neuron's output into the second.

    The second stage is driven by ``attenuation * k_inj2 * S1(t - delay)``;
    ``attenuation`` plays the role of a variable optical attenuator setting
    between the stages.
    """

    attenuation: float
    params2: LaserParams
    coupling_delay_ns: float = 0.0
    detect2: SpikeDetectConfig | None = None

    def __post_init__(self):
        if not 0.0 <= self.attenuation <= 1.0:
            raise ConfigError("attenuation must lie in [0, 1]")
        if self.coupling_delay_ns < 0.0:
            raise ConfigError("coupling delay must be >= 0")


@dataclass
class InferenceResult:
    label: str
    fired: list[bool]
    spike_times_ns: list[float]          # frame-global detected spike times
    window_times_ns: list[tuple[float, ...]]
    winning_window: int | None
    unclassified: bool
    trajectory: Trajectory | None = None
    trajectory2: Trajectory | None = None

    @property
    def n_fired(self) -> int:
        return sum(self.fired)


def _resolve(fired: list[bool]) -> tuple[int | None, bool]:
    if sum(fired) == 1:
        return fired.index(True), False
    return None, True


def infer(
    pattern: PixelPattern,
    weights: WeightMatrix,
    ctx: SimulationContext,
    keep_trajectory: bool = False,
) -> InferenceResult:
    """Encode, weight, multiplex, simulate, detect, and bin one pattern.

    The winning window is defined only when exactly one window fired;
    anything else is reported as unclassified rather than raised.
    """
    if weights.n_pre != pattern.cols:
        raise ConfigError(
            f"weights expect {weights.n_pre} inputs, pattern has {pattern.cols} columns")
    trains = encode_pattern(pattern, ctx.encode_offset_ns)
    traj, spikes = run_multiplexed(trains, weights, ctx)
    responses = demultiplex_response(spikes, ctx.window)
    fired = [r.fired for r in responses]
    winning, unclassified = _resolve(fired)
    return InferenceResult(
        label=pattern.label,
        fired=fired,
        spike_times_ns=list(spikes.times),
        window_times_ns=[r.times_ns for r in responses],
        winning_window=winning,
        unclassified=unclassified,
        trajectory=traj if keep_trajectory else None,
    )


def cascade_second_stage(
    traj1: Trajectory,
    cascade: CascadeConfig,
    duration_ns: float,
    ctx: SimulationContext,
) -> tuple[Trajectory, SpikeTrain]:
    """Drive the second neuron with the attenuated output trace of the first."""
    stride = max(1, int(round(ctx.stim_dt_ps / traj1.dt_ps)))
    u2 = cascade.attenuation * traj1.S[::stride]
    delay_samples = int(round(cascade.coupling_delay_ns * 1e3 / ctx.stim_dt_ps))
    if delay_samples:
        u2 = np.concatenate([np.zeros(delay_samples), u2])
    stim2 = StimulusWaveform(ctx.stim_dt_ps, u2)
    rest2 = settle(cascade.params2, dt_ps=ctx.dt_ps)
    traj2 = integrate(cascade.params2, None,
                      duration_ns + cascade.coupling_delay_ns,
                      ctx.dt_ps, initial=rest2, stimulus_post=stim2)
    detect2 = cascade.detect2 if cascade.detect2 is not None else ctx.require_detect()
    spikes2 = detect_spikes(traj2, detect2)
    return traj2, spikes2


def infer_cascaded(
    pattern: PixelPattern,
    weights: WeightMatrix,
    ctx: SimulationContext,
    cascade: CascadeConfig,
    keep_trajectory: bool = False,
) -> InferenceResult:
    """Two-stage inference; classification is read from the second neuron.

    Stage one runs exactly like ``infer``; its photon-density trace,
    attenuated and delayed, becomes the optical drive of the second neuron,
    whose spikes are binned by the same (delay-shifted) windows.
    """
    trains = encode_pattern(pattern, ctx.encode_offset_ns)
    traj1, spikes1 = run_multiplexed(trains, weights, ctx)
    traj2, spikes2 = cascade_second_stage(traj1, cascade, ctx.window.total_ns, ctx)
    shifted = SpikeTrain(tuple(
        t - cascade.coupling_delay_ns for t in spikes2.times
        if t >= cascade.coupling_delay_ns))
    responses = demultiplex_response(shifted, ctx.window)
    fired = [r.fired for r in responses]
    winning, unclassified = _resolve(fired)
    return InferenceResult(
        label=pattern.label,
        fired=fired,
        spike_times_ns=list(spikes2.times),
        window_times_ns=[r.times_ns for r in responses],
        winning_window=winning,
        unclassified=unclassified,
        trajectory=traj1 if keep_trajectory else None,
        trajectory2=traj2 if keep_trajectory else None,
    )


@dataclass
class EvalResult:
    n_patterns: int
    n_correct: int
    n_unclassified: int
    confusion: np.ndarray                # rows true, cols predicted; last col = none
    results: list[InferenceResult]

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_patterns if self.n_patterns else 0.0


def evaluate(
    dataset: list[tuple[PixelPattern, int]],
    weights: WeightMatrix,
    ctx: SimulationContext,
    cascade: CascadeConfig | None = None,
) -> EvalResult:
    """Classification accuracy of (pattern, target-window) pairs."""
    n_windows = ctx.window.n_windows
    confusion = np.zeros((n_windows, n_windows + 1), dtype=int)
    results = []
    n_correct = 0
    n_unclassified = 0
    for pattern, target in dataset:
        if not 0 <= target < n_windows:
            raise ConfigError(f"target window {target} out of range")
        if cascade is None:
            res = infer(pattern, weights, ctx)
        else:
            res = infer_cascaded(pattern, weights, ctx, cascade)
        results.append(res)
        if res.winning_window is None:
            n_unclassified += 1
            confusion[target, n_windows] += 1
        else:
            confusion[target, res.winning_window] += 1
            if res.winning_window == target:
                n_correct += 1
    return EvalResult(
        n_patterns=len(dataset),
        n_correct=n_correct,
        n_unclassified=n_unclassified,
        confusion=confusion,
        results=results,
    )
