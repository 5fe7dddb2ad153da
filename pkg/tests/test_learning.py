import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpsa_snn.errors import ConfigError
from fpsa_snn.learning import (
    KernelParams,
    LearningConfig,
    TargetSpec,
    WeightMatrix,
    apply_update,
    delta_weight,
    init_weights,
    kernel,
)
from fpsa_snn.signals import SpikeTrain

KP = KernelParams()


def naive_kernel(t, v0=2.1165, tau_m=1.0, tau_s=0.25):
    """Independent transcription of the kernel used as a brute-force oracle."""
    return v0 * (math.exp(-t / tau_m) - math.exp(-t / tau_s))


def naive_delta(spike_times, n_d, n_o, t_out, t_max):
    if n_d == 1 and n_o == 0:
        total = 0.0
        for t in spike_times:
            if t <= t_max:
                total += naive_kernel(t_max - t)
        return total
    if n_d == 0 and n_o == 1:
        total = 0.0
        for t in spike_times:
            if t <= t_out:
                total += naive_kernel(t_out - t)
        return -total
    return 0.0


class TestKernel:
    def test_zero_lag_is_exactly_zero(self):
        assert kernel(0.0, KP) == 0.0

    def test_value_at_one_ns(self):
        # direct arithmetic oracle: 2.1165 * (e^-1 - e^-4)
        expected = 2.1165 * (math.exp(-1.0) - math.exp(-4.0))
        assert kernel(1.0, KP) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(0.7399, abs=5e-5)

    def test_peak_is_normalized_to_one(self):
        lags = np.linspace(0.0, 5.0, 200001)
        values = [kernel(float(t), KP) for t in lags]
        k = int(np.argmax(values))
        assert values[k] == pytest.approx(1.0, abs=1e-3)
        assert lags[k] == pytest.approx(math.log(4.0) / 3.0, abs=1e-3)

    def test_negative_lag_rejected(self):
        with pytest.raises(ConfigError):
            kernel(-0.1, KP)

    def test_positive_and_unimodal(self):
        lags = np.linspace(1e-6, 8.0, 4001)
        values = np.array([kernel(float(t), KP) for t in lags])
        assert (values > 0.0).all()
        diffs = np.sign(np.diff(values))
        # one sign change: rises to the peak, then decays
        assert np.count_nonzero(np.diff(diffs)) == 1

    @given(tau_m=st.floats(0.2, 5.0), ratio=st.floats(1.5, 10.0),
           t=st.floats(1e-6, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_positive_for_any_valid_taus(self, tau_m, ratio, t):
        kp = KernelParams(v0=1.0, tau_m=tau_m, tau_s_k=tau_m / ratio)
        assert kernel(t, kp) > 0.0

    def test_invalid_taus_rejected(self):
        with pytest.raises(ConfigError):
            KernelParams(tau_m=0.25, tau_s_k=1.0)


class TestDeltaWeight:
    def test_matching_counts_give_exact_zero(self):
        train = SpikeTrain((1.0, 2.0, 3.0))
        assert delta_weight(train, 1, 1, 2.5, 3.0, KP) == 0.0
        assert delta_weight(train, 0, 0, None, 3.0, KP) == 0.0

    def test_single_spike_at_anchor_contributes_k0(self):
        train = SpikeTrain((5.0,))
        assert delta_weight(train, 1, 0, None, 5.0, KP) == 0.0

    def test_worked_potentiation_sum(self):
        train = SpikeTrain((7.0, 9.0, 10.0, 11.0))
        got = delta_weight(train, 1, 0, None, 12.0, KP)
        expected = sum(naive_kernel(12.0 - t) for t in (7.0, 9.0, 10.0, 11.0))
        assert got == pytest.approx(expected, rel=1e-13)

    def test_brute_force_equivalence_randomized(self):
        """1000 random instances against the naive loop oracle."""
        rng = np.random.default_rng(42)
        for _ in range(1000):
            n_spikes = int(rng.integers(0, 11))
            times = tuple(sorted(float(t) for t in
                                 rng.uniform(0.0, 15.0, size=n_spikes)))
            if len(set(times)) != len(times):
                continue
            train = SpikeTrain(times)
            case = rng.integers(0, 3)
            t_anchor = float(rng.uniform(0.0, 15.0))
            if case == 0:
                got = delta_weight(train, 1, 0, None, t_anchor, KP)
                want = naive_delta(times, 1, 0, None, t_anchor)
            elif case == 1:
                got = delta_weight(train, 0, 1, t_anchor, 15.0, KP)
                want = naive_delta(times, 0, 1, t_anchor, 15.0)
            else:
                got = delta_weight(train, 1, 1, t_anchor, 15.0, KP)
                want = 0.0
            if want == 0.0:
                assert got == 0.0
            else:
                assert abs(got - want) <= 1e-12 * abs(want)

    def test_rule_direction(self):
        train = SpikeTrain((1.0, 2.0, 3.0))
        assert delta_weight(train, 1, 0, None, 4.0, KP) > 0.0
        assert delta_weight(train, 0, 1, 4.0, 4.0, KP) < 0.0

    @given(anchor=st.floats(1.1, 14.0))
    @settings(max_examples=100, deadline=None)
    def test_causality_spikes_after_anchor_ignored(self, anchor):
        early = SpikeTrain((0.5, 1.0))
        padded = SpikeTrain((0.5, 1.0, anchor + 0.25, anchor + 1.0))
        lhs = delta_weight(early, 1, 0, None, anchor, KP)
        rhs = delta_weight(padded, 1, 0, None, anchor, KP)
        assert lhs == rhs

    def test_no_spike_before_anchor_gives_zero(self):
        train = SpikeTrain((5.0, 6.0))
        assert delta_weight(train, 1, 0, None, 2.0, KP) == 0.0

    def test_missing_t_out_is_contract_error(self):
        train = SpikeTrain((1.0,))
        with pytest.raises(ConfigError):
            delta_weight(train, 0, 1, None, 5.0, KP)
        with pytest.raises(ConfigError):
            delta_weight(train, 0, 0, 3.0, 5.0, KP)

    def test_multi_spike_extension_depresses_second_spike(self):
        train = SpikeTrain((1.0, 2.0))
        base = delta_weight(train, 1, 2, 3.0, 5.0, KP)
        assert base == 0.0  # disabled by default: fired == desired
        ext = delta_weight(train, 1, 2, 3.0, 5.0, KP,
                           multi_spike_extension=True, t_second=4.0)
        want = -sum(naive_kernel(4.0 - t) for t in (1.0, 2.0))
        assert ext == pytest.approx(want, rel=1e-13)


class TestApplyUpdate:
    def test_zero_delta_is_identity(self):
        w = WeightMatrix(np.arange(12.0).reshape(3, 4))
        out = apply_update(w, np.zeros((3, 4)), LearningConfig())
        assert np.array_equal(out.w, w.w)

    def test_learning_rate_scaling(self):
        w = WeightMatrix(np.zeros((2, 2)))
        out = apply_update(w, np.ones((2, 2)), LearningConfig(omega_f=0.4e8))
        assert np.all(out.w == 0.4e8)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(3)
        w = WeightMatrix(rng.normal(size=(4, 4)))
        d = rng.normal(size=(4, 4))
        cfg = LearningConfig(omega_f=2.5)
        out = apply_update(w, d, cfg)
        for i in range(4):
            for j in range(4):
                assert out.w[i, j] == pytest.approx(w.w[i, j] + 2.5 * d[i, j],
                                                    rel=1e-15)

    def test_shape_mismatch_is_contract_error(self):
        w = WeightMatrix(np.zeros((2, 3)))
        with pytest.raises(ConfigError):
            apply_update(w, np.zeros((3, 2)), LearningConfig())


class TestConfig:
    def test_invalid_configs_rejected(self):
        with pytest.raises(ConfigError):
            LearningConfig(max_epochs=0)
        with pytest.raises(ConfigError):
            LearningConfig(omega_f=0.0)
        with pytest.raises(ConfigError):
            LearningConfig(init_scheme="gaussian")

    def test_init_schemes(self):
        zeros = init_weights(LearningConfig(init_scheme="zeros"), 3, 4)
        assert not zeros.w.any()
        a = init_weights(LearningConfig(rng_seed=5), 3, 4)
        b = init_weights(LearningConfig(rng_seed=5), 3, 4)
        c = init_weights(LearningConfig(rng_seed=6), 3, 4)
        assert np.array_equal(a.w, b.w)
        assert not np.array_equal(a.w, c.w)
        assert a.w.min() >= 0.0

    def test_target_spec_one_hot(self):
        t = TargetSpec.one_per_window(["a", "b", "c"], 3)
        assert [t.desired(0, w) for w in range(3)] == [1, 0, 0]
        assert [t.desired(2, w) for w in range(3)] == [0, 0, 1]
        with pytest.raises(ConfigError):
            TargetSpec.one_per_window(["a", "b"], 1)
