"""Bias-space characterization: operating regimes, PI curves, calibration.

These routines treat the rate-equation core as a black box and only look at
its photon-density output, mirroring how a bench characterization would
read a photodetector trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, ClampLimitExceeded
from .params import LaserParams
from .signals import StimulusWaveform, rectangular_pulses
from .spikes import SpikeDetectConfig, detect_spikes_array
from .yamada import DEFAULT_DT_PS, NeuronState, integrate, settle

#: Fraction of a run's peak S used as the auto-detection threshold when no
#: calibrated absolute threshold applies (regime scans at arbitrary bias).
AUTO_THRESHOLD_RATIO = 0.25

#: A trace only counts as spiking if its peak clears the quiescent
#: spontaneous-emission level by this factor.
SPIKING_FLOOR_RATIO = 100.0

#: Maximum inter-spike-interval coefficient of variation for a pulse train
#: to count as periodic self-pulsation.
SELF_PULSING_CV = 0.10


@dataclass(frozen=True)
class RegimeReport:
    regime: str                      # "quiescent" | "excitable" | "self_pulsing"
    pulsation_frequency_ghz: float | None = None
    lasing_threshold_current_a: float | None = None

    def __post_init__(self):
        if (self.regime == "self_pulsing") != (self.pulsation_frequency_ghz is not None):
            raise ValueError("pulsation frequency present iff regime is self_pulsing")


@dataclass(frozen=True)
class PiPoint:
    i_a: float            # pump current (A)
    s_mean: float         # steady or time-averaged photon density
    s_floor: float        # predicted spontaneous-emission floor
    self_pulsing: bool


def spontaneous_floor(params: LaserParams) -> float:
    """Below-threshold photon density supported by spontaneous emission.

    Solves the S ~ 0 carrier balance analytically: n_a* = tau_a * pump,
    n_s* = max(0, tau_s * pump_s), then S_floor = spontaneous rate / net
    photon loss. Returns inf at or above the lasing threshold (net loss
    non-positive).
    """
    c = params.rate_coefficients()
    na = c.pump_a / c.ka
    ns = max(0.0, c.pump_s / c.ks)
    net_loss = c.kph - c.ga * (na - c.n0a) - c.gs * (ns - c.n0s)
    if net_loss <= 0.0:
        return math.inf
    return c.spont * na * na / net_loss


def _self_pulsation_scan(
    params: LaserParams,
    horizon_ns: float,
    dt_ps: float,
) -> tuple[int, float | None]:
    """Count periodic spikes in the unperturbed tail; (count, freq GHz or None)."""
    traj = integrate(params, None, horizon_ns, dt_ps)
    tail = traj.S[len(traj.S) // 3:]
    smax = float(tail.max())
    floor = spontaneous_floor(params)
    if smax <= 0.0:
        return 0, None
    if math.isfinite(floor) and smax < SPIKING_FLOOR_RATIO * floor:
        return 0, None
    cfg = SpikeDetectConfig(threshold=AUTO_THRESHOLD_RATIO * smax)
    train = detect_spikes_array(tail, traj.dt_ns, cfg)
    if len(train) < 3:
        return len(train), None
    isi = np.diff(train.times)
    mean = float(isi.mean())
    if mean <= 0 or float(isi.std()) / mean >= SELF_PULSING_CV:
        return len(train), None
    return len(train), 1.0 / mean


def classify_regime(
    params: LaserParams,
    probe: StimulusWaveform | None = None,
    horizon_ns: float = 80.0,
    dt_ps: float = DEFAULT_DT_PS,
) -> RegimeReport:
    """Label the operating point self_pulsing, excitable, or quiescent.

    Self-pulsation is read off the unperturbed run (>= 3 periodic spikes).
    Otherwise the probe pulse decides: a spike response classifies the
    point as excitable. Without a probe the undriven point reports
    quiescent.
    """
    n, freq = _self_pulsation_scan(params, horizon_ns, dt_ps)
    if freq is not None:
        return RegimeReport("self_pulsing", pulsation_frequency_ghz=freq)
    if probe is not None and len(probe.values):
        rest = settle(params, dt_ps=dt_ps)
        duration = max(probe.duration_ns + 10.0, 20.0)
        try:
            traj = integrate(params, probe, duration, dt_ps, initial=rest)
        except ClampLimitExceeded:
            # a probe that pins a carrier density at its floor (deep
            # sub-transparency bias) is certainly not spiking
            return RegimeReport("quiescent")
        smax = float(traj.S.max())
        base = max(rest.S, spontaneous_floor(params))
        if math.isfinite(base) and smax > SPIKING_FLOOR_RATIO * base:
            return RegimeReport("excitable")
    return RegimeReport("quiescent")


def is_self_pulsing(params: LaserParams, horizon_ns: float = 80.0,
                    dt_ps: float = DEFAULT_DT_PS) -> bool:
    return _self_pulsation_scan(params, horizon_ns, dt_ps)[1] is not None


def self_pulsation_onset(
    params: LaserParams,
    search_range: tuple[float, float],
    rel_tol: float = 0.002,
    horizon_ns: float = 80.0,
    dt_ps: float = DEFAULT_DT_PS,
) -> float:
    """Bisect the pump current where periodic self-pulsation switches on."""
    lo, hi = search_range
    if not lo < hi:
        raise CalibrationError("search range must satisfy lo < hi")
    if is_self_pulsing(params.with_(I_a=lo), horizon_ns, dt_ps):
        raise CalibrationError(
            f"lower search bound {lo} A already self-pulses; range does not bracket the onset")
    if not is_self_pulsing(params.with_(I_a=hi), horizon_ns, dt_ps):
        raise CalibrationError(
            f"upper search bound {hi} A does not self-pulse; range does not bracket the onset")
    while (hi - lo) / hi > rel_tol:
        mid = 0.5 * (lo + hi)
        if is_self_pulsing(params.with_(I_a=mid), horizon_ns, dt_ps):
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_excitable_bias(
    params: LaserParams,
    search_range: tuple[float, float],
    fraction: float = 0.98,
    rel_tol: float = 0.002,
    dt_ps: float = DEFAULT_DT_PS,
) -> LaserParams:
    """Set the pump to a fixed fraction of the self-pulsation onset current."""
    if not 0.0 < fraction < 1.0:
        raise CalibrationError("bias fraction must lie in (0, 1)")
    onset = self_pulsation_onset(params, search_range, rel_tol=rel_tol, dt_ps=dt_ps)
    return params.with_(I_a=fraction * onset)


def find_pulse_threshold(
    params: LaserParams,
    amp_range: tuple[float, float] = (1e-3, 1e12),
    pulse_width_ns: float = 0.2,
    rel_tol: float = 0.005,
    dt_ps: float = DEFAULT_DT_PS,
    rest: NeuronState | None = None,
) -> float:
    """Bisect the minimum single-pulse amplitude (stimulus units) that spikes.

    The response criterion is a photon-density excursion SPIKING_FLOOR_RATIO
    above the resting level, which separates full excitable pulses from
    sub-threshold relaxation bumps.
    """
    if rest is None:
        rest = settle(params, dt_ps=dt_ps)
    base = max(rest.S, 1e-30)

    def fires(amp: float) -> bool:
        stim = rectangular_pulses([2.0], [amp], pulse_width_ns, 12.0)
        traj = integrate(params, stim, 12.0, dt_ps, initial=rest)
        smax = float(np.nanmax(traj.S))
        return smax > SPIKING_FLOOR_RATIO * 10.0 * base

    lo, hi = amp_range
    if fires(lo):
        raise CalibrationError(f"lower amplitude bound {lo} already elicits a spike")
    if not fires(hi):
        raise CalibrationError(f"upper amplitude bound {hi} does not elicit a spike")
    while (hi - lo) / hi > rel_tol:
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    return hi


def pi_curve(
    params: LaserParams,
    pump_grid: list[float],
    settle_ns: float = 60.0,
    dt_ps: float = DEFAULT_DT_PS,
) -> list[PiPoint]:
    """Steady (or pulsation-averaged) photon density over a pump-current grid.

    Grid points run as one batch; each point reports the mean S over the
    second half of its run together with the predicted spontaneous floor.
    """
    grid = [float(x) for x in pump_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise CalibrationError("pump grid must be sorted ascending")
    points = []
    for i_a in grid:
        p = params.with_(I_a=i_a)
        traj = integrate(p, None, settle_ns, dt_ps)
        tail = traj.S[len(traj.S) // 2:]
        s_mean = float(tail.mean())
        floor = spontaneous_floor(p)
        pulsing = is_self_pulsing(p, dt_ps=dt_ps) if not math.isfinite(floor) or \
            s_mean > 10.0 * floor else False
        points.append(PiPoint(i_a=i_a, s_mean=s_mean, s_floor=floor,
                              self_pulsing=pulsing))
    return points


def pi_knee(points: list[PiPoint]) -> float | None:
    """First grid current whose output rises clear of the spontaneous floor."""
    for pt in points:
        if not math.isfinite(pt.s_floor) or pt.s_mean > 10.0 * pt.s_floor:
            return pt.i_a
    return None
