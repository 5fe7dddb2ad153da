import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpsa_snn.encoding import (
    PixelPattern,
    PulseShape,
    WindowSpec,
    demultiplex_response,
    encode_pattern,
    jitter_trains,
    synthesize_stimulus,
    time_multiplex,
)
from fpsa_snn.errors import ConfigError
from fpsa_snn.glyphs import DIGITS, LETTERS
from fpsa_snn.signals import SpikeTrain, StimulusWaveform


class TestEncodePattern:
    def test_worked_example_digit_two(self):
        trains = encode_pattern(DIGITS["2"])
        assert [list(t.times) for t in trains] == [
            [7.0, 9.0, 10.0, 11.0],
            [8.0, 10.0, 12.0],
            [9.0, 11.0, 13.0],
            [10.0, 11.0, 12.0, 14.0],
        ]

    def test_all_white_pattern_gives_empty_trains(self):
        p = PixelPattern(rows=5, cols=4, pixels=(0,) * 20, label="blank")
        assert all(t.times == () for t in encode_pattern(p))

    def test_all_black_column_formula(self):
        # column m of an otherwise white 5-row pattern: times m+6 .. m+10
        for m in range(1, 5):
            pixels = [0] * 20
            for y in range(5):
                pixels[y * 4 + (m - 1)] = 1
            p = PixelPattern(rows=5, cols=4, pixels=tuple(pixels))
            trains = encode_pattern(p)
            assert list(trains[m - 1].times) == [m + 6.0 + k for k in range(5)]
            for j, t in enumerate(trains):
                if j != m - 1:
                    assert t.times == ()

    def test_offset_shifts_every_spike(self):
        base = encode_pattern(DIGITS["3"], offset_ns=5.0)
        moved = encode_pattern(DIGITS["3"], offset_ns=8.0)
        for a, b in zip(base, moved):
            assert [t + 3.0 for t in a.times] == list(b.times)

    def test_injective_on_shipped_glyphs(self):
        def signature(p):
            return tuple(tuple(t.times) for t in encode_pattern(p))

        for pool in (DIGITS, LETTERS):
            sigs = {label: signature(p) for label, p in pool.items()}
            assert len(set(sigs.values())) == len(sigs)

    def test_no_containment_within_any_task(self):
        """No task pattern's spike sets may nest inside another's: after the
        non-negative optical clamp, a contained pattern could never be told
        apart from its superset."""
        from fpsa_snn.glyphs import TASKS, task_patterns

        for task in TASKS:
            patterns = task_patterns(task)
            encoded = [[set(t.times) for t in encode_pattern(p)]
                       for p in patterns]
            for i, a in enumerate(encoded):
                for j, b in enumerate(encoded):
                    if i == j:
                        continue
                    contained = all(sa <= sb for sa, sb in zip(a, b))
                    assert not contained, \
                        f"{task}: pattern {patterns[i].label} nests inside " \
                        f"{patterns[j].label}"


class TestSynthesize:
    def test_zero_weights_yield_silence(self):
        trains = encode_pattern(DIGITS["1"])
        wf = synthesize_stimulus(trains, [0.0] * 4, PulseShape(), 10.0, 15.0)
        assert not wf.values.any()

    def test_single_rectangular_pulse_geometry(self):
        trains = [SpikeTrain((1.0,))]
        wf = synthesize_stimulus(trains, [3.0], PulseShape(width_ns=0.2),
                                 10.0, 3.0)
        t = wf.t_ns()
        inside = (t >= 0.9) & (t < 1.1)
        assert np.allclose(wf.values[inside], 3.0)
        assert np.allclose(wf.values[~inside], 0.0)

    def test_negative_overlap_clamps_at_zero(self):
        # +2 and -3 pulses overlapping on [0.95, 1.05): raw sum -1, clamped 0
        trains = [SpikeTrain((1.0,)), SpikeTrain((1.0,))]
        wf = synthesize_stimulus(trains, [2.0, -3.0], PulseShape(width_ns=0.2),
                                 10.0, 3.0)
        assert wf.values.min() == 0.0
        assert not wf.values.any()
        # hand oracle on a partial overlap: second pulse shifted right
        trains = [SpikeTrain((1.0,)), SpikeTrain((1.1,))]
        wf = synthesize_stimulus(trains, [2.0, -3.0], PulseShape(width_ns=0.2),
                                 10.0, 3.0)
        t = wf.t_ns()
        only_pos = (t >= 0.9) & (t < 1.0)
        overlap = (t >= 1.0) & (t < 1.1)
        assert np.allclose(wf.values[only_pos], 2.0)
        assert np.allclose(wf.values[overlap], 0.0)  # 2 - 3 clamped

    def test_linear_in_weights_before_clamp(self):
        trains = encode_pattern(DIGITS["4"])
        w = [1.0, 0.5, 2.0, 0.25]
        a = synthesize_stimulus(trains, w, PulseShape(), 10.0, 15.0)
        b = synthesize_stimulus(trains, [2 * x for x in w], PulseShape(), 10.0, 15.0)
        assert np.allclose(2 * a.values, b.values)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            synthesize_stimulus([SpikeTrain()], [1.0, 2.0], PulseShape(), 10.0, 5.0)

    def test_gaussian_pulse_integrates_near_rectangular(self):
        trains = [SpikeTrain((2.0,))]
        rect = synthesize_stimulus(trains, [1.0], PulseShape(width_ns=0.2), 10.0, 5.0)
        gauss = synthesize_stimulus(trains, [1.0],
                                    PulseShape(kind="gaussian", width_ns=0.2),
                                    10.0, 5.0)
        # FWHM-matched Gaussian carries ~1.064x the rectangle's area
        ratio = gauss.values.sum() / rect.values.sum()
        assert ratio == pytest.approx(1.064, abs=0.02)


class TestMultiplex:
    def test_single_window_is_identity_up_to_padding(self):
        wf = synthesize_stimulus(encode_pattern(DIGITS["2"]), [1.0] * 4,
                                 PulseShape(), 10.0, 15.0)
        out = time_multiplex([wf], WindowSpec(1, 15.0, 1.0))
        n = len(wf.values)
        assert np.array_equal(out.values[:n], wf.values)
        assert not out.values[n:].any()

    def test_silent_second_window(self):
        w = WindowSpec(2, 15.0, 1.0)
        wf = synthesize_stimulus(encode_pattern(DIGITS["2"]), [1.0] * 4,
                                 PulseShape(), 10.0, 15.0)
        silent = StimulusWaveform(10.0, np.zeros_like(wf.values))
        out = time_multiplex([wf, silent], w)
        half = int(round(w.period_ns / (10.0 * 1e-3)))
        assert not out.values[half:].any()

    def test_energy_bookkeeping_per_window(self):
        w = WindowSpec(4, 15.0, 1.0)
        waveforms = [
            synthesize_stimulus(encode_pattern(DIGITS[d]), [1.0, 0.5, 0.25, 2.0],
                                PulseShape(), 10.0, 15.0)
            for d in "1234"
        ]
        out = time_multiplex(waveforms, w)
        dt_ns = 10.0 * 1e-3
        for i, wf in enumerate(waveforms):
            k0 = int(round(w.window_start(i) / dt_ns))
            k1 = k0 + int(round(w.window_len_ns / dt_ns))
            assert np.sum(out.values[k0:k1] ** 2) == pytest.approx(
                np.sum(wf.values ** 2), rel=1e-12)

    def test_overlong_waveform_rejected(self):
        w = WindowSpec(1, 10.0, 0.0)
        wf = synthesize_stimulus([SpikeTrain((12.0,))], [1.0], PulseShape(),
                                 10.0, 14.0)
        with pytest.raises(ConfigError, match="longer"):
            time_multiplex([wf], w)

    def test_count_mismatch_rejected(self):
        w = WindowSpec(2, 15.0, 1.0)
        wf = StimulusWaveform(10.0, np.zeros(100))
        with pytest.raises(ConfigError):
            time_multiplex([wf], w)


class TestDemultiplex:
    def test_empty_train(self):
        out = demultiplex_response(SpikeTrain(), WindowSpec(4, 15.0, 1.0))
        assert all(not r.fired and r.times_ns == () for r in out)

    def test_spike_in_second_window(self):
        w = WindowSpec(4, 10.0, 0.0)
        out = demultiplex_response(SpikeTrain((15.0,)), w)
        assert [r.fired for r in out] == [False, True, False, False]
        assert out[1].times_ns == (5.0,)

    def test_binning_example(self):
        w = WindowSpec(4, 15.0, 0.0)
        out = demultiplex_response(SpikeTrain((3.0, 18.0, 33.0)), w)
        assert [r.fired for r in out] == [True, True, True, False]

    def test_guard_spikes_are_dropped(self):
        w = WindowSpec(2, 10.0, 2.0)
        out = demultiplex_response(SpikeTrain((10.5,)), w)
        assert [r.fired for r in out] == [False, False]


@given(
    window_idx=st.integers(min_value=0, max_value=3),
    t_rel=st.floats(min_value=0.5, max_value=14.0),
)
@settings(max_examples=50, deadline=None)
def test_multiplex_demultiplex_round_trip(window_idx, t_rel):
    """A pulse placed in logical stream i lands back in window i at time t."""
    w = WindowSpec(4, 15.0, 1.0)
    dt_ps = 10.0
    t_rel = round(t_rel / 0.01) * 0.01  # align to the stimulus grid
    waveforms = []
    for i in range(4):
        if i == window_idx:
            waveforms.append(
                synthesize_stimulus([SpikeTrain((t_rel,))], [1.0],
                                    PulseShape(width_ns=0.2), dt_ps, 15.0))
        else:
            waveforms.append(StimulusWaveform(dt_ps, np.zeros(1500)))
    out = time_multiplex(waveforms, w)
    # recover the pulse center from the multiplexed waveform
    nz = np.nonzero(out.values)[0]
    assert len(nz)
    center_ns = (nz[0] + nz[-1] + 1) / 2 * dt_ps * 1e-3
    resp = demultiplex_response(SpikeTrain((center_ns,)), w)
    assert [r.fired for r in resp] == [i == window_idx for i in range(4)]
    assert resp[window_idx].times_ns[0] == pytest.approx(t_rel, abs=2 * dt_ps * 1e-3)


@given(seed=st.integers(min_value=0, max_value=2**31))
@settings(max_examples=30, deadline=None)
def test_jitter_preserves_train_validity(seed):
    rng = np.random.default_rng(seed)
    trains = encode_pattern(DIGITS["2"])
    out = jitter_trains(trains, 0.05, rng)
    for train in out:
        assert all(b > a for a, b in zip(train.times, train.times[1:]))
        assert all(t >= 0.0 for t in train.times)


def test_waveforms_are_nonnegative_everywhere():
    rng = np.random.default_rng(0)
    trains = encode_pattern(DIGITS["3"])
    for _ in range(20):
        w = rng.normal(scale=2.0, size=4)
        wf = synthesize_stimulus(trains, w, PulseShape(), 10.0, 15.0)
        assert wf.values.min() >= 0.0
