"""Regenerate the shipped default-parameter artifact.

Run as ``python -m fpsa_snn.calibrate [--fast] [--out PATH]``. The slow
(default) mode calibrates at the production integration step; --fast uses a
coarser step for quick iteration and is not meant for shipping.

Calibration pipeline, per neuron:
  1. bisect the self-pulsation onset current,
  2. bias at a fixed fraction of the onset (excitable operating point),
  3. bisect the single-pulse threshold in photon-density units and choose
     k_inj so that the threshold sits at A_STAR_TARGET stimulus units,
  4. record the 1.5x threshold response peak; detection threshold = half of it.
Then bisect the cascade attenuation so one stage-1 spike fires stage 2 with
a 1.5x margin, and verify the burst protocols (threshold, integration,
refractory) with the final constants.
"""
from __future__ import annotations

import argparse
import os
import sys

from .characterize import find_pulse_threshold, self_pulsation_onset
from .errors import CalibrationError, NumericalFailure
from .network import CascadeConfig, cascade_second_stage
from .params import ELEMENTARY_CHARGE, LaserParams, write_json_atomic
from .signals import rectangular_pulses
from .spikes import SpikeDetectConfig, detect_spikes
from .yamada import DEFAULT_DT_PS, integrate, settle

#: Stimulus-unit amplitude the single-pulse threshold is normalized to.
#: Chosen so the default learning rate crosses it within a few epochs while
#: leaving headroom above the per-epoch weight quantum.
A_STAR_TARGET = 6.5e8

#: Shipped bias point as a fraction of the self-pulsation onset. Deep
#: enough below onset that the recovery margin lets a 2 ns burst re-excite
#: on alternating pulses (the three-of-five refractory pattern).
BIAS_FRACTION = 0.95

BASE_PARAMS = dict(
    gamma_a=0.06,
    gamma_s=0.05,
    g_a=2.9e-12,
    g_s=14.5e-12,
    n0_a=1.1e24,
    n0_s=0.89e24,
    tau_ph=4.8,
    tau_a=1.0,
    tau_s=0.1,
    beta=1e-5,
    B_r=1.0e-16,
    I_a=2.0e-3,
    I_s=0.0,
    e_charge=ELEMENTARY_CHARGE,
    V_a=2.4e-18,
    V_s=2.4e-18,
    k_inj=1.0,
)

#: The second cascade neuron has a longer absorber section: larger absorber
#: confinement, slightly slower absorber recovery.
STAGE2_OVERRIDES = dict(gamma_s=0.06, tau_s=0.12)

ONSET_SEARCH = (1.0e-3, 3.6e-3)

#: Stimulus-chain jitter for the reproducibility runs, calibrated against
#: the trained digit-task margins: the smallest trained window margin
#: tolerates these sigmas with zero verdict flips over repeated 100-trial
#: probes, with a further 2x amplitude headroom.
DEFAULT_JITTER = dict(amp_jitter_sigma=0.0025, time_jitter_sigma_ns=0.005)


def calibrate_neuron(base: LaserParams, dt_ps: float) -> dict:
    onset = self_pulsation_onset(base, ONSET_SEARCH, dt_ps=dt_ps)
    biased = base.with_(I_a=BIAS_FRACTION * onset)
    rest = settle(biased, dt_ps=dt_ps)
    phi_star = find_pulse_threshold(
        biased, amp_range=(1e16, 1e23), dt_ps=dt_ps, rest=rest)
    k_inj = phi_star / A_STAR_TARGET
    params = biased.with_(k_inj=k_inj)

    stim = rectangular_pulses([2.0], [1.5 * A_STAR_TARGET], 0.2, 14.0)
    traj = integrate(params, stim, 14.0, dt_ps, initial=rest)
    peak = float(traj.S.max())
    return dict(
        params=params,
        onset=onset,
        a_star=A_STAR_TARGET,
        spike_peak=peak,
        detect_threshold=0.5 * peak,
        rest=rest,
    )


def calibrate_cascade(cal1: dict, cal2: dict, dt_ps: float) -> float:
    """Attenuation so a stage-1 spike fires stage 2; returns 1.5x threshold."""
    params1 = cal1["params"]
    params2 = cal2["params"]
    stim = rectangular_pulses([2.0], [1.5 * cal1["a_star"]], 0.2, 14.0)
    traj1 = integrate(params1, stim, 14.0, dt_ps, initial=cal1["rest"])
    s1_peak = float(traj1.S.max())
    rest2 = cal2["rest"]
    base2 = max(rest2.S, 1e-30)

    def fires(kappa: float) -> bool:
        cc = CascadeConfig(attenuation=kappa, params2=params2,
                           detect2=SpikeDetectConfig(threshold=cal2["detect_threshold"]))
        ctx_like = _MiniCtx(params1, dt_ps)
        try:
            traj2, _ = cascade_second_stage(traj1, cc, 14.0, ctx_like)
        except NumericalFailure:
            # gross overdrive; counts as firing for bracketing purposes
            return True
        return float(traj2.S.max()) > 1000.0 * base2

    # attenuation that would deliver a stage-2 peak drive of exactly a_star2;
    # the true threshold sits above it because the spike is much narrower
    # than the calibration pulse
    kappa_ref = cal2["a_star"] / s1_peak
    lo, hi = 1e-3 * kappa_ref, 1e3 * kappa_ref
    if fires(lo):
        raise CalibrationError("cascade attenuation lower bound already fires")
    if not fires(hi):
        raise CalibrationError("cascade attenuation upper bound does not fire")
    while (hi - lo) / hi > 0.005:
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    kappa = 1.5 * hi
    if kappa > 1.0:
        raise CalibrationError(f"calibrated attenuation {kappa} exceeds 1")
    return kappa


class _MiniCtx:
    """Duck-typed stand-in for SimulationContext inside calibration."""

    def __init__(self, params, dt_ps, stim_dt_ps=10.0):
        self.params = params
        self.dt_ps = dt_ps
        self.stim_dt_ps = stim_dt_ps

    def require_detect(self):
        raise CalibrationError("calibration supplies its own detector")


def verify_protocols(cal: dict, dt_ps: float) -> dict:
    """Burst protocols with the final constants; returns observed spike counts."""
    params = cal["params"]
    rest = cal["rest"]
    a = cal["a_star"]
    detect = SpikeDetectConfig(threshold=cal["detect_threshold"])

    def count(times, amps, duration):
        stim = rectangular_pulses(times, amps, 0.2, duration)
        traj = integrate(params, stim, duration, dt_ps, initial=rest)
        return len(detect_spikes(traj, detect))

    report = dict(
        strong_single=count([2.0], [1.5 * a], 14.0),
        weak_single=count([2.0], [0.5 * a], 14.0),
        weak_triplet=count([2.0, 2.5, 3.0], [0.5 * a] * 3, 14.0),
        refractory_burst=count([2.0, 4.0, 6.0, 8.0, 10.0], [1.5 * a] * 5, 24.0),
    )
    ok = (report["strong_single"] == 1 and report["weak_single"] == 0
          and report["weak_triplet"] >= 1 and 1 <= report["refractory_burst"] < 5)
    if not ok:
        raise CalibrationError(f"dynamics protocols failed verification: {report}")
    return report


def run_calibration(dt_ps: float = DEFAULT_DT_PS) -> dict:
    base1 = LaserParams(**BASE_PARAMS)
    base2 = LaserParams(**{**BASE_PARAMS, **STAGE2_OVERRIDES})
    cal1 = calibrate_neuron(base1, dt_ps)
    cal2 = calibrate_neuron(base2, dt_ps)
    kappa = calibrate_cascade(cal1, cal2, dt_ps)
    protocols = verify_protocols(cal1, dt_ps)
    return dict(
        params=cal1["params"].to_dict(),
        params2=cal2["params"].to_dict(),
        calibration=dict(
            a_star=cal1["a_star"],
            spike_peak=cal1["spike_peak"],
            detect_threshold=cal1["detect_threshold"],
            onset_i_a=cal1["onset"],
            bias_fraction=BIAS_FRACTION,
            a_star2=cal2["a_star"],
            spike_peak2=cal2["spike_peak"],
            detect_threshold2=cal2["detect_threshold"],
            onset2_i_a=cal2["onset"],
            kappa=kappa,
            refractory_spike_count=protocols["refractory_burst"],
            **DEFAULT_JITTER,
        ),
        meta=dict(
            dt_ps=dt_ps,
            pulse_width_ns=0.2,
            a_star_target=A_STAR_TARGET,
            protocols=protocols,
        ),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fast", action="store_true",
                        help="calibrate at a coarse 0.5 ps step (development only)")
    parser.add_argument("--out", default=None, help="output JSON path")
    args = parser.parse_args(argv)
    dt = 0.5 if args.fast else DEFAULT_DT_PS
    out = args.out
    if out is None:
        out = os.path.join(os.path.dirname(__file__), "data", "default_params.json")
    result = run_calibration(dt_ps=dt)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    write_json_atomic(result, out)
    print(f"wrote {out}")
    for key, value in result["calibration"].items():
        print(f"  {key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
