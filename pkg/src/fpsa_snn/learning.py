"""Supervised spike-response learning for the time-multiplexed neuron.

The rule is spike-count driven: for each (pattern, logical output) pair the
desired count n_d is compared against the observed count n_o, and weights
move by a kernel-weighted sum over the pattern's input spikes,

    dw =  sum_{t_i <= t_max} K(t_max - t_i)   if n_d = 1, n_o = 0
    dw = -sum_{t_i <= t_out} K(t_out - t_i)   if n_d = 0, n_o = 1
    dw =  0                                   if n_d = n_o

with K(t) = V0 * (exp(-t/tau_m) - exp(-t/tau_s)), t_out the observed spike
time and t_max the time of the window's photon-density maximum. Spike
counts are compared as fired / not-fired booleans by default; the optional
multi-spike extension instead depresses a doubly-firing target window at
its second spike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import (
    DEFAULT_ENCODE_OFFSET_NS,
    DEFAULT_STIM_DT_PS,
    PixelPattern,
    PulseShape,
    WindowSpec,
    encode_pattern,
    demultiplex_response,
    synthesize_stimulus,
    time_multiplex,
)
from .errors import ConfigError
from .params import LaserParams
from .signals import SpikeTrain
from .spikes import SpikeDetectConfig, detect_spikes
from .yamada import DEFAULT_DT_PS, NeuronState, integrate, settle


@dataclass(frozen=True)
class KernelParams:
    """Learning-window kernel constants; v0 normalizes the peak to one."""

    v0: float = 2.1165
    tau_m: float = 1.0
    tau_s_k: float = 0.25

    def __post_init__(self):
        if not (self.tau_m > self.tau_s_k > 0.0):
            raise ConfigError("kernel requires tau_m > tau_s_k > 0")
        if not self.v0 > 0.0:
            raise ConfigError("kernel normalization v0 must be > 0")


def kernel(t: float, kp: KernelParams = KernelParams()) -> float:
    """K(t) = v0 * (exp(-t/tau_m) - exp(-t/tau_s_k)) for lags t >= 0."""
    if t < 0.0:
        raise ConfigError("kernel lag must be non-negative")
    return kp.v0 * (math.exp(-t / kp.tau_m) - math.exp(-t / kp.tau_s_k))


def delta_weight(
    pre_spikes: SpikeTrain,
    n_d: int,
    n_o: int,
    t_out: float | None,
    t_max: float,
    kp: KernelParams = KernelParams(),
    multi_spike_extension: bool = False,
    t_second: float | None = None,
) -> float:
    """Weight change for one synapse given the window outcome.

    ``t_out`` must be present iff at least one output spike was observed.
    With the extension enabled, an n_d = 1, n_o > 1 window is treated as an
    error and depressed at its second spike time ``t_second``.
    """
    if n_d not in (0, 1):
        raise ConfigError("desired spike count must be 0 or 1")
    if n_o < 0:
        raise ConfigError("observed spike count must be >= 0")
    if (n_o >= 1) != (t_out is not None):
        raise ConfigError("t_out must be given exactly when n_o >= 1")
    if not math.isfinite(t_max):
        raise ConfigError("t_max must be finite")

    if n_d == 1 and n_o == 0:
        return sum(kernel(t_max - t, kp) for t in pre_spikes.times if t <= t_max)
    if n_d == 0 and n_o >= 1:
        return -sum(kernel(t_out - t, kp) for t in pre_spikes.times if t <= t_out)
    if multi_spike_extension and n_d == 1 and n_o > 1:
        if t_second is None:
            raise ConfigError("multi-spike extension needs the second spike time")
        return -sum(kernel(t_second - t, kp) for t in pre_spikes.times if t <= t_second)
    return 0.0


@dataclass
class WeightMatrix:
    """Synaptic weights, one row per logical output, one column per input."""

    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.ndim != 2:
            raise ConfigError("weights must be a 2D matrix")
        if not np.all(np.isfinite(self.w)):
            raise ConfigError("weights must be finite")

    @property
    def n_post(self) -> int:
        return self.w.shape[0]

    @property
    def n_pre(self) -> int:
        return self.w.shape[1]

    def copy(self) -> "WeightMatrix":
        return WeightMatrix(self.w.copy())


@dataclass(frozen=True)
class LearningConfig:
    omega_f: float = 0.4e8
    max_epochs: int = 100
    init_scheme: str = "uniform"     # "zeros" | "uniform"
    init_low: float = 0.0
    init_high: float = 1e7
    rng_seed: int = 0
    batch_mode: bool = False
    multi_spike_extension: bool = False

    def __post_init__(self):
        if not self.omega_f > 0:
            raise ConfigError("learning rate omega_f must be > 0")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.init_scheme not in ("zeros", "uniform"):
            raise ConfigError(f"unknown init scheme {self.init_scheme!r}")
        if self.init_scheme == "uniform" and not self.init_high >= self.init_low:
            raise ConfigError("init_high must be >= init_low")


@dataclass(frozen=True)
class TargetSpec:
    """Desired one-hot spike counts: pattern i should fire window target[i]."""

    labels: tuple[str, ...]
    one_hot: tuple[int, ...]         # target window index per pattern
    n_windows: int

    def __post_init__(self):
        if len(self.labels) != len(self.one_hot):
            raise ConfigError("one target window per pattern required")
        if any(not 0 <= t < self.n_windows for t in self.one_hot):
            raise ConfigError("target window index out of range")

    def desired(self, pattern_index: int, window: int) -> int:
        return 1 if self.one_hot[pattern_index] == window else 0

    @staticmethod
    def one_per_window(labels: list[str], n_windows: int) -> "TargetSpec":
        if len(labels) > n_windows:
            raise ConfigError("more patterns than response windows")
        return TargetSpec(tuple(labels), tuple(range(len(labels))), n_windows)


def init_weights(cfg: LearningConfig, n_post: int, n_pre: int) -> WeightMatrix:
    if cfg.init_scheme == "zeros":
        return WeightMatrix(np.zeros((n_post, n_pre)))
    rng = np.random.default_rng(cfg.rng_seed)
    return WeightMatrix(rng.uniform(cfg.init_low, cfg.init_high, size=(n_post, n_pre)))


def apply_update(w: WeightMatrix, deltas: np.ndarray, cfg: LearningConfig) -> WeightMatrix:
    """w + omega_f * deltas, elementwise; no clipping (clamping happens optically)."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.shape != w.w.shape:
        raise ConfigError(
            f"delta shape {deltas.shape} does not match weights {w.w.shape}")
    return WeightMatrix(w.w + cfg.omega_f * deltas)


@dataclass
class SimulationContext:
    """Everything needed to run one multiplexed response simulation."""

    params: LaserParams
    window: WindowSpec
    pulse: PulseShape = PulseShape()
    detect: SpikeDetectConfig | None = None
    kernel_params: KernelParams = KernelParams()
    dt_ps: float = DEFAULT_DT_PS
    stim_dt_ps: float = DEFAULT_STIM_DT_PS
    encode_offset_ns: float = DEFAULT_ENCODE_OFFSET_NS
    _rest_cache: dict = field(default_factory=dict, repr=False)

    def rest_state(self) -> NeuronState:
        key = (self.params, self.dt_ps)
        if key not in self._rest_cache:
            self._rest_cache[key] = settle(self.params, dt_ps=self.dt_ps)
        return self._rest_cache[key]

    def require_detect(self) -> SpikeDetectConfig:
        if self.detect is None:
            raise ConfigError("simulation context has no spike-detection config")
        return self.detect


@dataclass(frozen=True)
class WindowOutcome:
    pattern: str
    window: int
    n_d: int
    n_o: int
    t_out: float | None
    t_max: float
    dw_norm: float = 0.0


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    outcomes: tuple[WindowOutcome, ...]
    all_correct: bool


@dataclass
class TrainResult:
    weights: WeightMatrix
    log: list[EpochRecord]
    converged_epoch: int | None

    @property
    def converged(self) -> bool:
        return self.converged_epoch is not None


#: Relative span below which a window's trace counts as flat (undriven);
#: the potentiation anchor then falls back to the window end.
FLAT_WINDOW_SPAN = 1e-9


def run_multiplexed(
    trains: list[SpikeTrain],
    w: WeightMatrix,
    ctx: SimulationContext,
):
    """Simulate one pattern presentation; returns (trajectory, spike train)."""
    latest = max((t.times[-1] for t in trains if len(t)), default=0.0)
    if latest >= ctx.window.window_len_ns:
        raise ConfigError(
            f"encoded spikes reach {latest} ns but the response window is "
            f"{ctx.window.window_len_ns} ns; enlarge the window")
    per_window = [
        synthesize_stimulus(trains, w.w[i], ctx.pulse, ctx.stim_dt_ps,
                            ctx.window.window_len_ns)
        for i in range(w.n_post)
    ]
    stim = time_multiplex(per_window, ctx.window)
    traj = integrate(ctx.params, stim, ctx.window.total_ns, ctx.dt_ps,
                     initial=ctx.rest_state())
    spikes = detect_spikes(traj, ctx.require_detect())
    return traj, spikes


def window_anchor(traj, window: WindowSpec, i: int) -> float:
    """Window-relative time of the window's S maximum (window end when flat)."""
    dt_ns = traj.dt_ns
    k0 = int(round(window.window_start(i) / dt_ns))
    k1 = int(round((window.window_start(i) + window.window_len_ns) / dt_ns))
    seg = traj.S[k0:k1]
    span = float(seg.max() - seg.min())
    if span <= FLAT_WINDOW_SPAN * max(abs(float(seg.max())), 1e-300):
        return window.window_len_ns
    return float(np.argmax(seg)) * dt_ns


def train_epoch(
    patterns: list[PixelPattern],
    targets: TargetSpec,
    w: WeightMatrix,
    ctx: SimulationContext,
    cfg: LearningConfig,
    epoch: int = 1,
) -> tuple[WeightMatrix, EpochRecord]:
    """One pass over the dataset with per-pattern sequential updates.

    In batch mode every pattern is evaluated against the epoch-start
    weights and a single summed update is applied at the end.
    """
    outcomes = []
    all_correct = True
    batch_delta = np.zeros_like(w.w) if cfg.batch_mode else None
    for p_idx, pattern in enumerate(patterns):
        trains = encode_pattern(pattern, ctx.encode_offset_ns)
        traj, spikes = run_multiplexed(trains, w, ctx)
        responses = demultiplex_response(spikes, ctx.window)
        deltas = np.zeros_like(w.w)
        for i, resp in enumerate(responses):
            n_d = targets.desired(p_idx, i)
            n_o = len(resp.times_ns)
            t_out = resp.times_ns[0] if n_o else None
            t_second = resp.times_ns[1] if n_o > 1 else None
            t_max = window_anchor(traj, ctx.window, i)
            row = np.array([
                delta_weight(train, n_d, n_o, t_out, t_max, ctx.kernel_params,
                             multi_spike_extension=cfg.multi_spike_extension,
                             t_second=t_second)
                for train in trains
            ])
            deltas[i] = row
            correct = (n_d == min(n_o, 1)) if not cfg.multi_spike_extension \
                else (n_d == n_o)
            if not correct:
                all_correct = False
            outcomes.append(WindowOutcome(
                pattern=pattern.label, window=i, n_d=n_d, n_o=n_o,
                t_out=t_out, t_max=t_max,
                dw_norm=float(np.linalg.norm(row))))
        if cfg.batch_mode:
            batch_delta += deltas
        else:
            w = apply_update(w, deltas, cfg)
    if cfg.batch_mode:
        w = apply_update(w, batch_delta, cfg)
    return w, EpochRecord(epoch=epoch, outcomes=tuple(outcomes),
                          all_correct=all_correct)


def train(
    patterns: list[PixelPattern],
    targets: TargetSpec,
    cfg: LearningConfig,
    ctx: SimulationContext,
    initial: WeightMatrix | None = None,
) -> TrainResult:
    """Iterate epochs until every (pattern, window) outcome matches its target.

    Non-convergence within ``cfg.max_epochs`` is reported in the result, not
    raised.
    """
    if len(patterns) != len(targets.labels):
        raise ConfigError("pattern list and target spec disagree on dataset size")
    if targets.n_windows != ctx.window.n_windows:
        raise ConfigError("target spec and window spec disagree on window count")
    w = initial.copy() if initial is not None else \
        init_weights(cfg, targets.n_windows, patterns[0].cols)
    log: list[EpochRecord] = []
    converged = None
    for epoch in range(1, cfg.max_epochs + 1):
        w, record = train_epoch(patterns, targets, w, ctx, cfg, epoch=epoch)
        log.append(record)
        if record.all_correct:
            converged = epoch
            break
    return TrainResult(weights=w, log=log, converged_epoch=converged)
