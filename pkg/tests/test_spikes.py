import numpy as np
import pytest

from fpsa_snn.errors import ConfigError
from fpsa_snn.spikes import SpikeDetectConfig, detect_spikes
from fpsa_snn.yamada import Trajectory


def make_traj(S, dt_ps=10.0):
    S = np.asarray(S, dtype=float)
    z = np.zeros_like(S)
    return Trajectory(t0_ns=0.0, dt_ps=dt_ps, S=S, n_a=z, n_s=z,
                      phi_pre=z, phi_post=z)


def gaussian_bumps(centers_ns, amps, duration_ns=10.0, dt_ps=10.0, sigma_ns=0.1):
    t = np.arange(int(duration_ns * 1e3 / dt_ps)) * dt_ps * 1e-3
    S = np.zeros_like(t)
    for c, a in zip(centers_ns, amps):
        S += a * np.exp(-0.5 * ((t - c) / sigma_ns) ** 2)
    return make_traj(S, dt_ps)


def test_flat_subthreshold_trace_yields_empty_train():
    traj = make_traj(np.full(1000, 0.4))
    cfg = SpikeDetectConfig(threshold=1.0)
    assert detect_spikes(traj, cfg).times == ()


def test_two_bumps_three_ns_apart_detected_at_centers():
    traj = gaussian_bumps([3.0, 6.0], [2.0, 2.0])
    cfg = SpikeDetectConfig(threshold=1.0)
    times = detect_spikes(traj, cfg).times
    assert len(times) == 2
    assert times[0] == pytest.approx(3.0, abs=traj.dt_ns)
    assert times[1] == pytest.approx(6.0, abs=traj.dt_ns)


def test_close_bumps_keep_only_larger_peak():
    traj = gaussian_bumps([3.0, 3.1], [2.0, 3.0], sigma_ns=0.02)
    cfg = SpikeDetectConfig(threshold=1.0, min_separation_ns=0.5)
    times = detect_spikes(traj, cfg).times
    assert len(times) == 1
    assert times[0] == pytest.approx(3.1, abs=traj.dt_ns)


def test_times_strictly_increasing():
    traj = gaussian_bumps([2.0, 4.0, 6.0], [2.0, 2.5, 2.2])
    cfg = SpikeDetectConfig(threshold=1.0)
    times = detect_spikes(traj, cfg).times
    assert all(b > a for a, b in zip(times, times[1:]))


def test_prominence_filters_plateau_ripple():
    """Ripple on a supra-threshold plateau is not a spike."""
    t = np.linspace(0, 10, 1000)
    S = 2.0 + 0.01 * np.sin(20 * t)
    cfg = SpikeDetectConfig(threshold=1.0, min_prominence=0.5)
    assert detect_spikes(make_traj(S), cfg).times == ()


def test_invalid_config_rejected():
    with pytest.raises(ConfigError):
        SpikeDetectConfig(threshold=0.0)
    with pytest.raises(ConfigError):
        SpikeDetectConfig(threshold=1.0, min_separation_ns=-1.0)
