"""Command line front end.

Subcommands reproduce the standard experiment protocols: ``simulate`` (raw
trajectory runs), ``demo`` (threshold / integration / refractory / cascade
pulse programs), ``train`` / ``infer`` (the classification tasks),
``repro`` (jittered-stimulus Monte Carlo), and ``sweep`` (PI curves and
regime maps).

Exit codes: 0 success, 2 configuration or usage error, 3 training did not
converge, 4 numerical failure. Every run appends one manifest line
recording argv, config hashes, seed, and artifact paths; replaying the
stored argv reproduces the artifacts byte for byte.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import defaults, io
from .encoding import jitter_trains, encode_pattern
from .errors import CalibrationError, ConfigError, NumericalFailure
from .glyphs import TASKS, task_patterns
from .learning import LearningConfig, train
from .manifest import RunManifest, append_manifest, hash_files
from .network import cascade_second_stage, evaluate, infer
from .params import LaserParams, write_json_atomic
from .signals import rectangular_pulses
from .spikes import detect_spikes_array
from .yamada import DEFAULT_DT_PS, NoiseConfig, integrate, integrate_batch, settle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NUMERICAL = 4

LEARNING_CONFIG_KEYS = {
    "omega_f", "max_epochs", "init_scheme", "init_low", "init_high",
    "rng_seed", "batch_mode", "multi_spike_extension",
}


def worker_count() -> int:
    """Parallelism cap from FPSA_SNN_THREADS (default 1, fully deterministic)."""
    raw = os.environ.get("FPSA_SNN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"FPSA_SNN_THREADS must be an integer, got {raw!r}")


def _load_learning_config(path: str | None, seed: int) -> LearningConfig:
    if path is None:
        return defaults.default_learning_config(seed=seed)
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("learning config must be a JSON object")
    unknown = set(doc) - LEARNING_CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown learning config keys: {sorted(unknown)}")
    doc = dict(doc)
    doc["rng_seed"] = seed
    return LearningConfig(**doc)


def _emit_manifest(args, artifacts: list[str], config_paths: list[str],
                   t_start: float, extra: dict | None = None) -> None:
    manifest_path = getattr(args, "manifest", None)
    if manifest_path is None:
        anchor = artifacts[0] if artifacts else "fpsa-snn"
        manifest_path = anchor + ".manifest.jsonl"
    from . import __version__
    manifest = RunManifest(
        argv=list(args._argv),
        config_hash=hash_files(sorted(config_paths)),
        seed=getattr(args, "seed", None),
        artifacts=[os.path.abspath(a) for a in artifacts],
        wall_time_s=time.perf_counter() - t_start,
        version=__version__,
        extra=extra or {},
    )
    append_manifest(manifest_path, manifest)


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    params = LaserParams.load_json(args.params) if args.params else defaults.default_params()
    stim = io.waveform_from_csv(args.stimulus) if args.stimulus else None
    noise = None
    if args.amp_jitter > 0 or args.time_jitter > 0:
        noise = NoiseConfig(amp_sigma=args.amp_jitter,
                            time_sigma_ns=args.time_jitter, seed=args.seed)
    initial = settle(params, dt_ps=args.dt) if args.settle else None
    traj = integrate(params, stim, args.duration, args.dt,
                     initial=initial, noise=noise)
    io.trajectory_to_csv(traj, args.out)
    artifacts = [args.out]
    if args.svg:
        io.render_line_svg(args.svg, traj.t_ns(),
                           {"S": traj.S, "n_a": traj.n_a, "n_s": traj.n_s},
                           title="trajectory")
        artifacts.append(args.svg)
    config_paths = [p for p in (args.params, args.stimulus) if p]
    _emit_manifest(args, artifacts, config_paths, t0,
                   extra={"clamp_fraction": traj.clamp_fraction})
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo

def _demo_program(experiment: str, a_star: float):
    """Pulse times/amplitudes and the per-pulse expectation for each protocol."""
    strong, weak = 1.5 * a_star, 0.5 * a_star
    if experiment == "threshold":
        return dict(times=[2.0, 17.0, 32.0], amps=[strong, weak, weak],
                    duration=45.0, expect="[1, 0, 0] spikes per pulse")
    if experiment == "integration":
        # one weak pulse, then a weak triplet at 500 ps spacing
        return dict(times=[2.0, 17.0, 17.5, 18.0], amps=[weak, weak, weak, weak],
                    duration=32.0, expect="0 spikes then 1 integrated spike")
    if experiment == "refractory":
        return dict(times=[2.0, 4.0, 6.0, 8.0, 10.0], amps=[strong] * 5,
                    duration=24.0, expect="fewer spikes than pulses")
    raise ConfigError(f"unknown demo experiment {experiment!r}")


def _count_spikes_near(spike_times, t_pulse: float, horizon_ns: float = 2.0) -> int:
    return sum(1 for t in spike_times if t_pulse <= t < t_pulse + horizon_ns)


def cmd_demo(args) -> int:
    t0 = time.perf_counter()
    cal = defaults.default_calibration()
    params = defaults.default_params()
    detect = defaults.default_detect()
    os.makedirs(args.outdir, exist_ok=True)
    artifacts = []

    if args.experiment == "cascade":
        verdict = _demo_cascade(args, params, cal, detect, artifacts)
    else:
        prog = _demo_program(args.experiment, cal.a_star)
        stim = rectangular_pulses(prog["times"], prog["amps"], 0.2, prog["duration"])
        rest = settle(params, dt_ps=args.dt)
        traj = integrate(params, stim, prog["duration"], args.dt, initial=rest)
        from .spikes import detect_spikes
        spikes = detect_spikes(traj, detect)
        per_pulse = [_count_spikes_near(spikes.times, t) for t in prog["times"]]
        trace_path = os.path.join(args.outdir, f"{args.experiment}_trace.csv")
        io.trajectory_to_csv(traj, trace_path)
        artifacts.append(trace_path)
        if args.svg:
            svg_path = os.path.join(args.outdir, f"{args.experiment}.svg")
            io.render_line_svg(svg_path, traj.t_ns(),
                               {"phi_pre": traj.phi_pre, "S": traj.S},
                               title=args.experiment)
            artifacts.append(svg_path)
        verdict = {
            "experiment": args.experiment,
            "pulse_times_ns": prog["times"],
            "spikes_per_pulse": per_pulse,
            "total_spikes": len(spikes.times),
            "spike_times_ns": list(spikes.times),
            "expectation": prog["expect"],
        }
        if args.experiment == "threshold":
            verdict["pass"] = per_pulse == [1, 0, 0]
        elif args.experiment == "integration":
            verdict["pass"] = per_pulse[0] == 0 and sum(per_pulse[1:]) >= 1
        else:
            verdict["pass"] = 1 <= len(spikes.times) < 5

    verdict_path = os.path.join(args.outdir, f"{args.experiment}_verdict.json")
    write_json_atomic(verdict, verdict_path)
    artifacts.append(verdict_path)
    _emit_manifest(args, artifacts, [], t0, extra={"pass": verdict["pass"]})
    return EXIT_OK


def _demo_cascade(args, params, cal, detect, artifacts) -> dict:
    """Threshold and integration programs pushed through the two-neuron chain."""
    cascade = defaults.default_cascade()
    ctx = defaults.context_for_task("digits")
    ctx.dt_ps = args.dt
    results = {}
    ok = True
    for name in ("threshold", "integration"):
        prog = _demo_program(name, cal.a_star)
        stim = rectangular_pulses(prog["times"], prog["amps"], 0.2, prog["duration"])
        rest = settle(params, dt_ps=args.dt)
        traj1 = integrate(params, stim, prog["duration"], args.dt, initial=rest)
        from .spikes import detect_spikes
        spikes1 = detect_spikes(traj1, detect)
        traj2, spikes2 = cascade_second_stage(traj1, cascade, prog["duration"], ctx)
        p1 = [_count_spikes_near(spikes1.times, t) for t in prog["times"]]
        p2 = [_count_spikes_near(spikes2.times, t) for t in prog["times"]]
        results[name] = {"stage1_spikes_per_pulse": p1,
                         "stage2_spikes_per_pulse": p2,
                         "verdicts_match": p1 == p2}
        ok = ok and p1 == p2
        for stage, traj in (("stage1", traj1), ("stage2", traj2)):
            path = os.path.join(args.outdir, f"cascade_{name}_{stage}.csv")
            io.trajectory_to_csv(traj, path)
            artifacts.append(path)
    return {"experiment": "cascade", "programs": results, "pass": ok}


# ---------------------------------------------------------------------------
# train

def cmd_train(args) -> int:
    t0 = time.perf_counter()
    seed = args.seed if args.seed is not None else defaults.TASK_SEEDS[args.task]
    args.seed = seed
    cfg = _load_learning_config(args.config, seed)
    ctx = defaults.context_for_task(args.task)
    patterns = task_patterns(args.task)
    targets = defaults.targets_for_task(args.task)
    result = train(patterns, targets, cfg, ctx)
    io.weights_to_json(result.weights, args.out_weights)

    log_lines = []
    for rec in result.log:
        log_lines.append(json.dumps({
            "epoch": rec.epoch,
            "all_correct": rec.all_correct,
            "outcomes": [
                {"pattern": o.pattern, "window": o.window, "n_d": o.n_d,
                 "n_o": o.n_o, "t_out": o.t_out, "t_max": o.t_max,
                 "dw_norm": o.dw_norm}
                for o in rec.outcomes],
        }, sort_keys=True))
    log_lines.append(json.dumps({"converged_epoch": result.converged_epoch},
                                sort_keys=True))
    tmp = f"{args.log}.tmp.{os.getpid()}"
    with open(tmp, "w") as f:
        f.write("\n".join(log_lines) + "\n")
    os.replace(tmp, args.log)

    _emit_manifest(args, [args.out_weights, args.log],
                   [args.config] if args.config else [], t0,
                   extra={"converged_epoch": result.converged_epoch})
    if not result.converged:
        print(f"training did not converge within {cfg.max_epochs} epochs",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(f"converged at epoch {result.converged_epoch}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# infer

def cmd_infer(args) -> int:
    t0 = time.perf_counter()
    weights = io.weights_from_json(args.weights)
    ctx = defaults.context_for_task(args.task)
    patterns = task_patterns(args.task)
    cascade = defaults.default_cascade() if args.cascade else None
    dataset = [(p, i) for i, p in enumerate(patterns)]
    ev = evaluate(dataset, weights, ctx, cascade=cascade)
    doc = {
        "task": args.task,
        "cascade": bool(args.cascade),
        "accuracy": ev.accuracy,
        "n_correct": ev.n_correct,
        "n_unclassified": ev.n_unclassified,
        "results": [io.inference_to_doc(r) for r in ev.results],
    }
    write_json_atomic(doc, args.out)
    _emit_manifest(args, [args.out], [args.weights], t0,
                   extra={"accuracy": ev.accuracy})
    print(f"{ev.n_correct}/{ev.n_patterns} patterns classified correctly")
    return EXIT_OK


# ---------------------------------------------------------------------------
# repro

def cmd_repro(args) -> int:
    t0 = time.perf_counter()
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    ctx = defaults.context_for_task(args.task)
    patterns = task_patterns(args.task)
    if args.weights:
        weights = io.weights_from_json(args.weights)
    else:
        result = train(patterns, defaults.targets_for_task(args.task),
                       defaults.default_learning_config(task=args.task), ctx)
        if not result.converged:
            print("internal training for repro did not converge", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        weights = result.weights
    summary = run_repro(ctx, patterns, weights, args.trials,
                        args.amp_jitter, args.time_jitter, args.seed)
    summary["task"] = args.task
    write_json_atomic(summary, args.out)
    _emit_manifest(args, [args.out], [args.weights] if args.weights else [], t0,
                   extra={"min_consistency": summary["min_consistency"]})
    print(f"min per-pattern consistency: {summary['min_consistency']:.4f}")
    return EXIT_OK


def _batched_spike_windows(ctx, stims, rest):
    """Integrate a stimulus batch, honoring the FPSA_SNN_THREADS cap."""
    window = ctx.window
    threads = min(worker_count(), len(stims))
    if threads <= 1:
        return integrate_batch(ctx.params, stims, ctx.stim_dt_ps,
                               window.total_ns, ctx.dt_ps, initial=rest)[:2]
    # row-wise chunks evaluate independently; concatenation order is fixed
    # by the input order, so the result is thread-count invariant
    from concurrent.futures import ThreadPoolExecutor
    chunks = np.array_split(stims, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda c: integrate_batch(ctx.params, c, ctx.stim_dt_ps,
                                      window.total_ns, ctx.dt_ps,
                                      initial=rest),
            chunks))
    return np.vstack([p[0] for p in parts]), parts[0][1]


def run_repro(ctx, patterns, weights, trials: int, amp_sigma: float,
              time_sigma: float, seed: int) -> dict:
    """Monte Carlo over jittered stimuli; consistency vs the noise-free verdict."""
    from .encoding import synthesize_stimulus, time_multiplex

    rng = np.random.default_rng(seed)
    window = ctx.window
    rest = ctx.rest_state()
    detect = ctx.require_detect()
    per_pattern = {}
    min_consistency = 1.0
    for pattern in patterns:
        nominal = infer(pattern, weights, ctx)
        trains = encode_pattern(pattern, ctx.encode_offset_ns)
        stims = np.empty((trials, int(round(window.total_ns * 1e3 / ctx.stim_dt_ps))))
        for j in range(trials):
            jt = jitter_trains(trains, time_sigma, rng) if time_sigma > 0 else trains
            per_window = [
                synthesize_stimulus(jt, weights.w[i], ctx.pulse, ctx.stim_dt_ps,
                                    window.window_len_ns)
                for i in range(weights.n_post)
            ]
            wf = time_multiplex(per_window, window)
            scale = max(0.0, 1.0 + amp_sigma * rng.standard_normal()) if amp_sigma > 0 else 1.0
            stims[j] = wf.values * scale
        S_rec, rec_dt_ns = _batched_spike_windows(ctx, stims, rest)
        verdicts = []
        for j in range(trials):
            train_j = detect_spikes_array(S_rec[j], rec_dt_ns, detect,
                                          t0_ns=rec_dt_ns)
            fired = [any(window.window_start(i) <= t < window.window_start(i)
                         + window.window_len_ns for t in train_j.times)
                     for i in range(window.n_windows)]
            verdicts.append(fired.index(True) if sum(fired) == 1 else None)
        matches = sum(1 for v in verdicts if v == nominal.winning_window)
        consistency = matches / trials
        min_consistency = min(min_consistency, consistency)
        per_pattern[pattern.label] = {
            "nominal_window": nominal.winning_window,
            "consistency": consistency,
            "verdicts": verdicts,
        }
    return {
        "trials": trials,
        "amp_jitter_sigma": amp_sigma,
        "time_jitter_sigma_ns": time_sigma,
        "seed": seed,
        "per_pattern": per_pattern,
        "min_consistency": min_consistency,
    }


# ---------------------------------------------------------------------------
# sweep

def _parse_pump(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ConfigError(f"--pump must be A:B:N, got {text!r}") from exc
    if n < 1 or b < a:
        raise ConfigError("--pump needs B >= A and N >= 1")
    return np.linspace(a, b, n) if n > 1 else np.array([a])

#: Regime-preset pump grid, as fractions of the calibrated pulsing onset.
REGIME_GRID_FRACTIONS = (0.5, 0.65, 0.8, 0.875, 0.94, 0.97, 1.02, 1.1)


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    params = LaserParams.load_json(args.params) if args.params else defaults.default_params()
    cal = defaults.default_calibration()
    if args.pump:
        grid = _parse_pump(args.pump)
    elif args.mode == "regime":
        grid = np.array(REGIME_GRID_FRACTIONS) * cal.onset_i_a
    else:
        grid = np.linspace(0.3, 1.35, 15) * cal.onset_i_a

    import csv as _csv
    from .characterize import classify_regime, pi_curve, pi_knee

    tmp = f"{args.out}.tmp.{os.getpid()}"
    summary: dict = {"mode": args.mode}
    if args.mode == "pi":
        points = pi_curve(params, list(grid), dt_ps=args.dt)
        with open(tmp, "w", newline="") as f:
            w = _csv.writer(f)
            w.writerow(["i_a", "s_mean", "s_floor", "self_pulsing"])
            for pt in points:
                w.writerow([repr(pt.i_a), repr(pt.s_mean), repr(pt.s_floor),
                            int(pt.self_pulsing)])
        os.replace(tmp, args.out)
        summary["knee_i_a"] = pi_knee(points)
    else:
        probe = rectangular_pulses([2.0], [1.5 * cal.a_star], 0.2, 12.0)
        rows = []
        for i_a in grid:
            rep = classify_regime(params.with_(I_a=float(i_a)), probe,
                                  dt_ps=args.dt)
            rows.append((float(i_a), rep.regime, rep.pulsation_frequency_ghz))
        with open(tmp, "w", newline="") as f:
            w = _csv.writer(f)
            w.writerow(["i_a", "regime", "pulsation_freq_ghz"])
            for i_a, regime, freq in rows:
                w.writerow([repr(i_a), regime, "" if freq is None else repr(freq)])
        os.replace(tmp, args.out)
        summary["regimes"] = [r[1] for r in rows]

    summary_path = args.out + ".summary.json"
    write_json_atomic(summary, summary_path)
    _emit_manifest(args, [args.out, summary_path],
                   [args.params] if args.params else [], t0, extra=summary)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpsa-snn",
        description="Excitable-laser spiking neuron simulator and "
                    "time-multiplexed pattern classifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the rate equations")
    p.add_argument("--params", default=None, help="laser parameter JSON")
    p.add_argument("--stimulus", default=None, help="waveform CSV (t_ns,power)")
    p.add_argument("--duration", type=float, required=True, help="run length (ns)")
    p.add_argument("--dt", type=float, default=DEFAULT_DT_PS, help="step (ps)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="trajectory CSV output")
    p.add_argument("--svg", default=None)
    p.add_argument("--settle", action="store_true",
                   help="start from the relaxed operating point")
    p.add_argument("--amp-jitter", type=float, default=0.0)
    p.add_argument("--time-jitter", type=float, default=0.0)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("demo", help="canonical neuron-dynamics protocols")
    p.add_argument("--experiment", required=True,
                   choices=["threshold", "integration", "refractory", "cascade"])
    p.add_argument("--outdir", required=True)
    p.add_argument("--dt", type=float, default=DEFAULT_DT_PS)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("train", help="train task weights")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--config", default=None, help="learning config JSON")
    p.add_argument("--seed", type=int, default=None,
                   help="weight-init seed (default: shipped per-task seed)")
    p.add_argument("--out-weights", required=True)
    p.add_argument("--log", required=True, help="epoch log (JSON lines)")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="classify task patterns")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--weights", required=True)
    p.add_argument("--cascade", action="store_true",
                   help="read the verdict from the second cascaded neuron")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("repro", help="jittered-stimulus reproducibility runs")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--amp-jitter", type=float, default=None,
                   help="amplitude sigma (default: shipped calibration value)")
    p.add_argument("--time-jitter", type=float, default=None,
                   help="timing sigma in ns (default: shipped calibration value)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weights", default=None,
                   help="trained weights JSON (trains internally when omitted)")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("sweep", help="PI curve or regime map over pump current")
    p.add_argument("--mode", required=True, choices=["pi", "regime"])
    p.add_argument("--params", default=None)
    p.add_argument("--pump", default=None, help="grid as A:B:N (amps)")
    p.add_argument("--dt", type=float, default=DEFAULT_DT_PS)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    args._argv = argv
    if getattr(args, "amp_jitter", None) is None and args.command == "repro":
        args.amp_jitter = defaults.default_calibration().amp_jitter_sigma
    if getattr(args, "time_jitter", None) is None and args.command == "repro":
        args.time_jitter = defaults.default_calibration().time_jitter_sigma_ns
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
