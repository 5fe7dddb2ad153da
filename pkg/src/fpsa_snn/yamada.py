"""Rate-equation core: three-variable laser model and its RK4 integrator.

State is (S, n_a, n_s): intracavity photon density plus the carrier
densities of the gain and absorber sections. Injected light enters the
gain-carrier equation scaled by ``k_inj``; the sign convention is selected
by ``LaserParams.phi_sign`` (see ``params.PHI_SIGN_MODES``).

The integrator is a fixed-step classical RK4 with the stimulus held
constant over each integration step (zero-order hold on the stimulus grid,
which must be an integer multiple of the step). That keeps every run
bit-reproducible and preserves fourth-order convergence on pulse programs
whose edges lie on the stimulus grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ClampLimitExceeded, ConfigError, NumericalFailure
from .params import LaserParams
from .signals import StimulusWaveform

#: Default integration step (ps). Small enough that the photon-lifetime
#: rate (the stiffest in the model at its default scale) satisfies
#: |lambda|*dt < 0.05.
DEFAULT_DT_PS = 0.2

#: integrate() raises when more than this fraction of steps clamp a state
#: component at zero; systematic clamping means the step is too large for
#: the operating point.
CLAMP_FRACTION_LIMIT = 1e-3


@dataclass(frozen=True)
class NeuronState:
    S: float
    n_a: float
    n_s: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.S, self.n_a, self.n_s)


@dataclass(frozen=True)
class NoiseConfig:
    """Stimulus-chain jitter applied to the input waveform before stepping.

    Models drive-electronics imperfections: one multiplicative amplitude
    factor (1 + N(0, amp_sigma)) and one global time shift N(0,
    time_sigma_ns), quantized to the stimulus grid. The intrinsic model
    stays deterministic.
    """

    amp_sigma: float = 0.0
    time_sigma_ns: float = 0.0
    seed: int = 0


@dataclass
class Trajectory:
    """Time-sampled (S, n_a, n_s) path with the co-sampled injection drive.

    ``S[k]`` etc. hold the state at ``t0_ns + k * dt_ps * 1e-3``; index 0 is
    the initial condition. ``phi_pre``/``phi_post`` record the photon-density
    drive applied over the step starting at each sample time.
    """

    t0_ns: float
    dt_ps: float
    S: np.ndarray
    n_a: np.ndarray
    n_s: np.ndarray
    phi_pre: np.ndarray
    phi_post: np.ndarray
    n_clamped_steps: int = 0

    def __len__(self) -> int:
        return len(self.S)

    @property
    def dt_ns(self) -> float:
        return self.dt_ps * 1e-3

    @property
    def clamp_fraction(self) -> float:
        return self.n_clamped_steps / max(1, len(self.S) - 1)

    def t_ns(self) -> np.ndarray:
        return self.t0_ns + np.arange(len(self.S)) * self.dt_ns

    def state_at(self, k: int) -> NeuronState:
        return NeuronState(float(self.S[k]), float(self.n_a[k]), float(self.n_s[k]))

    def final_state(self) -> NeuronState:
        return self.state_at(len(self.S) - 1)


def derivatives(
    state: NeuronState,
    params: LaserParams,
    phi_pre: float = 0.0,
    phi_post: float = 0.0,
) -> tuple[float, float, float]:
    """Right-hand sides (dS/dt, dn_a/dt, dn_s/dt) in per-ns units.

    ``phi_pre`` and ``phi_post`` are injected photon densities (already in
    model units, i.e. after the k_inj conversion). They must be
    non-negative; the configured sign convention decides whether they pump
    or deplete the gain carriers.
    """
    if phi_pre < 0.0 or phi_post < 0.0:
        raise ConfigError("injected photon densities must be non-negative")
    vals = (state.S, state.n_a, state.n_s, phi_pre, phi_post)
    if not all(math.isfinite(v) for v in vals):
        raise NumericalFailure("non-finite state or drive passed to derivatives")
    c = params.rate_coefficients()
    S, na, ns = state.S, state.n_a, state.n_s
    gain = c.ga * (na - c.n0a)
    absorption = c.gs * (ns - c.n0s)
    dS = (gain + absorption - c.kph) * S + c.spont * na * na
    dna = -gain * (S + c.phi_sgn * (phi_pre + phi_post)) - c.ka * na + c.pump_a
    dns = -absorption * S - c.ks * ns + c.pump_s
    return (dS, dna, dns)


def _stimulus_ratio(stim_dt_ps: float, dt_ps: float) -> int:
    m = stim_dt_ps / dt_ps
    mi = int(round(m))
    if mi < 1 or abs(m - mi) > 1e-9:
        raise ConfigError(
            f"stimulus dt ({stim_dt_ps} ps) must be a positive integer multiple "
            f"of the integration dt ({dt_ps} ps)")
    return mi


def _check_step(params: LaserParams, dt_ps: float, duration_ns: float) -> int:
    bound = params.tau_ph / 5.0
    if dt_ps > bound + 1e-12:
        raise ConfigError(
            f"dt={dt_ps} ps exceeds the stability bound tau_ph/5 = {bound:.6g} ps")
    if dt_ps <= 0:
        raise ConfigError("dt must be positive")
    n_steps = int(round(duration_ns * 1e3 / dt_ps))
    if n_steps < 1:
        raise ConfigError("duration must cover at least one integration step")
    return n_steps


def _prepare_drive(
    stimulus: StimulusWaveform | None,
    dt_ps: float,
    kinj: float,
    noise: NoiseConfig | None,
    rng: np.random.Generator | None,
) -> tuple[list[float], int]:
    """Scale a waveform to photon-density units; returns (values, ratio m)."""
    if stimulus is None or len(stimulus.values) == 0:
        return [], 1
    m = _stimulus_ratio(stimulus.dt_ps, dt_ps)
    vals = stimulus.values * kinj
    if noise is not None and rng is not None:
        if noise.amp_sigma > 0.0:
            vals = vals * max(0.0, 1.0 + noise.amp_sigma * rng.standard_normal())
        if noise.time_sigma_ns > 0.0:
            shift = int(round(noise.time_sigma_ns * rng.standard_normal()
                              * 1e3 / stimulus.dt_ps))
            vals = np.roll(vals, shift)
            if shift > 0:
                vals[:shift] = 0.0
            elif shift < 0:
                vals[shift:] = 0.0
    return [float(v) for v in vals], m


def integrate(
    params: LaserParams,
    stimulus: StimulusWaveform | None,
    duration_ns: float,
    dt_ps: float = DEFAULT_DT_PS,
    initial: NeuronState | None = None,
    noise: NoiseConfig | None = None,
    stimulus_post: StimulusWaveform | None = None,
) -> Trajectory:
    """Integrate the rate equations over ``duration_ns`` and record every step.

    ``stimulus`` drives the synaptic (pre) injection channel and
    ``stimulus_post`` the cascade (post) channel; both are zero-extended
    past their last sample and scaled by ``params.k_inj``. Any state
    component pushed below zero by a step is clamped to zero and counted;
    runs whose clamped-step fraction exceeds ``CLAMP_FRACTION_LIMIT`` raise
    ``NumericalFailure``.
    """
    n_steps = _check_step(params, dt_ps, duration_ns)
    rng = np.random.default_rng(noise.seed) if noise is not None else None
    pre_vals, m_pre = _prepare_drive(stimulus, dt_ps, params.k_inj, noise, rng)
    post_vals, m_post = _prepare_drive(stimulus_post, dt_ps, params.k_inj, noise, rng)

    if initial is None:
        initial = NeuronState(0.0, 0.0, 0.0)
    S, na, ns = initial.as_tuple()
    if not all(math.isfinite(v) for v in (S, na, ns)):
        raise NumericalFailure("non-finite initial state")
    if min(S, na, ns) < 0.0:
        raise ConfigError("initial state components must be non-negative")

    c = params.rate_coefficients()
    ga, gs, kph, ka, ks = c.ga, c.gs, c.kph, c.ka, c.ks
    pump_a, pump_s, spont = c.pump_a, c.pump_s, c.spont
    n0a, n0s, sgn = c.n0a, c.n0s, c.phi_sgn

    h = dt_ps * 1e-3
    h2 = h * 0.5
    h6 = h / 6.0
    n_pre = len(pre_vals)
    n_post = len(post_vals)

    rS = [S]
    rA = [na]
    rN = [ns]
    rP = []
    rQ = []
    apS, apA, apN = rS.append, rA.append, rN.append
    apP, apQ = rP.append, rQ.append

    clamped_steps = 0
    k = 0
    while k < n_steps:
        ip = k // m_pre
        iq = k // m_post
        u_pre = pre_vals[ip] if ip < n_pre else 0.0
        u_post = post_vals[iq] if iq < n_post else 0.0
        u = sgn * (u_pre + u_post)
        # run to the next stimulus-segment boundary with a constant drive
        if ip >= n_pre and iq >= n_post:
            kend = n_steps
        else:
            kend = min(n_steps, (ip + 1) * m_pre, (iq + 1) * m_post)
        while k < kend:
            gS = ga * (na - n0a)
            gQ = gs * (ns - n0s)
            d1S = (gS + gQ - kph) * S + spont * na * na
            d1a = -gS * (S + u) - ka * na + pump_a
            d1s = -gQ * S - ks * ns + pump_s

            S2 = S + h2 * d1S
            a2 = na + h2 * d1a
            s2 = ns + h2 * d1s
            gS = ga * (a2 - n0a)
            gQ = gs * (s2 - n0s)
            d2S = (gS + gQ - kph) * S2 + spont * a2 * a2
            d2a = -gS * (S2 + u) - ka * a2 + pump_a
            d2s = -gQ * S2 - ks * s2 + pump_s

            S3 = S + h2 * d2S
            a3 = na + h2 * d2a
            s3 = ns + h2 * d2s
            gS = ga * (a3 - n0a)
            gQ = gs * (s3 - n0s)
            d3S = (gS + gQ - kph) * S3 + spont * a3 * a3
            d3a = -gS * (S3 + u) - ka * a3 + pump_a
            d3s = -gQ * S3 - ks * s3 + pump_s

            S4 = S + h * d3S
            a4 = na + h * d3a
            s4 = ns + h * d3s
            gS = ga * (a4 - n0a)
            gQ = gs * (s4 - n0s)
            d4S = (gS + gQ - kph) * S4 + spont * a4 * a4
            d4a = -gS * (S4 + u) - ka * a4 + pump_a
            d4s = -gQ * S4 - ks * s4 + pump_s

            S = S + h6 * (d1S + 2.0 * (d2S + d3S) + d4S)
            na = na + h6 * (d1a + 2.0 * (d2a + d3a) + d4a)
            ns = ns + h6 * (d1s + 2.0 * (d2s + d3s) + d4s)
            clamp = False
            if S < 0.0:
                S = 0.0
                clamp = True
            elif S == 0.0:
                S = 0.0
            if na < 0.0:
                na = 0.0
                clamp = True
            elif na == 0.0:
                na = 0.0
            if ns < 0.0:
                ns = 0.0
                clamp = True
            elif ns == 0.0:
                ns = 0.0
            if clamp:
                clamped_steps += 1
            apS(S)
            apA(na)
            apN(ns)
            apP(u_pre)
            apQ(u_post)
            k += 1
        if not (math.isfinite(S) and math.isfinite(na) and math.isfinite(ns)):
            raise NumericalFailure(
                f"non-finite state at t={k * h:.4f} ns; reduce dt or the drive amplitude")

    rP.append(rP[-1] if rP else 0.0)
    rQ.append(rQ[-1] if rQ else 0.0)
    traj = Trajectory(
        t0_ns=0.0,
        dt_ps=dt_ps,
        S=np.array(rS),
        n_a=np.array(rA),
        n_s=np.array(rN),
        phi_pre=np.array(rP),
        phi_post=np.array(rQ),
        n_clamped_steps=clamped_steps,
    )
    if traj.clamp_fraction > CLAMP_FRACTION_LIMIT:
        raise ClampLimitExceeded(
            f"{traj.clamp_fraction:.2%} of steps clamped a state component at zero "
            f"(limit {CLAMP_FRACTION_LIMIT:.1%}); use a smaller dt")
    return traj


def integrate_batch(
    params: LaserParams,
    stimuli: Sequence[np.ndarray] | np.ndarray,
    stim_dt_ps: float,
    duration_ns: float,
    dt_ps: float = DEFAULT_DT_PS,
    initial: NeuronState | None = None,
    record_stride: int = 5,
) -> tuple[np.ndarray, float, np.ndarray]:
    """Integrate many runs that share a time grid but differ in stimulus.

    All runs start from the same ``initial`` state. Returns ``(S_rec,
    rec_dt_ns, clamp_fraction)`` where ``S_rec`` has one row per stimulus,
    sampled every ``record_stride`` steps starting at the first step end.
    The arithmetic per element is identical to the scalar ``integrate``
    path, so a batch of one reproduces it bitwise.
    """
    n_steps = _check_step(params, dt_ps, duration_ns)
    m = _stimulus_ratio(stim_dt_ps, dt_ps)
    U = np.asarray(stimuli, dtype=float)
    if U.ndim != 2:
        raise ConfigError("batched stimuli must be a 2D array (runs x samples)")
    if not np.all(np.isfinite(U)) or (U.size and U.min() < 0.0):
        raise ConfigError("stimulus values must be finite and non-negative")
    n_runs, n_stim = U.shape

    if initial is None:
        initial = NeuronState(0.0, 0.0, 0.0)
    c = params.rate_coefficients()
    ga, gs, kph, ka, ks = c.ga, c.gs, c.kph, c.ka, c.ks
    pump_a, pump_s, spont = c.pump_a, c.pump_s, c.spont
    n0a, n0s, sgn = c.n0a, c.n0s, c.phi_sgn

    S = np.full(n_runs, initial.S)
    na = np.full(n_runs, initial.n_a)
    ns = np.full(n_runs, initial.n_s)
    h = dt_ps * 1e-3
    h2 = h * 0.5
    h6 = h / 6.0

    n_rec = (n_steps + record_stride - 1) // record_stride
    S_rec = np.empty((n_runs, n_rec))
    clamped = np.zeros(n_runs, dtype=np.int64)
    zero_col = np.zeros(n_runs)

    r = 0
    for k in range(n_steps):
        i = k // m
        u = sgn * (c.kinj * U[:, i]) if i < n_stim else zero_col

        gS = ga * (na - n0a)
        gQ = gs * (ns - n0s)
        d1S = (gS + gQ - kph) * S + spont * na * na
        d1a = -gS * (S + u) - ka * na + pump_a
        d1s = -gQ * S - ks * ns + pump_s

        S2 = S + h2 * d1S
        a2 = na + h2 * d1a
        s2 = ns + h2 * d1s
        gS = ga * (a2 - n0a)
        gQ = gs * (s2 - n0s)
        d2S = (gS + gQ - kph) * S2 + spont * a2 * a2
        d2a = -gS * (S2 + u) - ka * a2 + pump_a
        d2s = -gQ * S2 - ks * s2 + pump_s

        S3 = S + h2 * d2S
        a3 = na + h2 * d2a
        s3 = ns + h2 * d2s
        gS = ga * (a3 - n0a)
        gQ = gs * (s3 - n0s)
        d3S = (gS + gQ - kph) * S3 + spont * a3 * a3
        d3a = -gS * (S3 + u) - ka * a3 + pump_a
        d3s = -gQ * S3 - ks * s3 + pump_s

        S4 = S + h * d3S
        a4 = na + h * d3a
        s4 = ns + h * d3s
        gS = ga * (a4 - n0a)
        gQ = gs * (s4 - n0s)
        d4S = (gS + gQ - kph) * S4 + spont * a4 * a4
        d4a = -gS * (S4 + u) - ka * a4 + pump_a
        d4s = -gQ * S4 - ks * s4 + pump_s

        S = S + h6 * (d1S + 2.0 * (d2S + d3S) + d4S)
        na = na + h6 * (d1a + 2.0 * (d2a + d3a) + d4a)
        ns = ns + h6 * (d1s + 2.0 * (d2s + d3s) + d4s)
        neg = (S < 0.0) | (na < 0.0) | (ns < 0.0)
        if neg.any():
            clamped += neg
            np.maximum(S, 0.0, out=S)
            np.maximum(na, 0.0, out=na)
            np.maximum(ns, 0.0, out=ns)
        S += 0.0
        na += 0.0
        ns += 0.0
        if k % record_stride == 0:
            S_rec[:, r] = S
            r += 1
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(na)) and np.all(np.isfinite(ns))):
        raise NumericalFailure("non-finite state in batched integration")
    clamp_fraction = clamped / n_steps
    if clamp_fraction.max() > CLAMP_FRACTION_LIMIT:
        raise ClampLimitExceeded(
            f"batched run clamped {clamp_fraction.max():.2%} of steps; use a smaller dt")
    return S_rec, record_stride * h, clamp_fraction


def settle(
    params: LaserParams,
    duration_ns: float = 40.0,
    dt_ps: float = DEFAULT_DT_PS,
    initial: NeuronState | None = None,
) -> NeuronState:
    """Relax the unperturbed laser to its operating point (cold start by default)."""
    traj = integrate(params, None, duration_ns, dt_ps, initial=initial)
    return traj.final_state()
