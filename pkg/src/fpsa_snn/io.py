"""File formats: CSV trace exports and schema-checked JSON documents.

Every emit goes through a validator so a malformed document can never be
written; loads run the same validators. Writes are atomic (temp file +
rename) and deterministic (sorted keys, repr floats), so identical inputs
produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .encoding import PixelPattern
from .errors import ConfigError
from .learning import WeightMatrix
from .network import InferenceResult
from .params import write_json_atomic
from .signals import SpikeTrain, StimulusWaveform
from .yamada import Trajectory

TRAJECTORY_HEADER = ["t_ns", "S", "n_a", "n_s", "phi_pre", "phi_post"]
WAVEFORM_HEADER = ["t_ns", "power"]


def _open_atomic(path: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    return tmp, open(tmp, "w", newline="")


def trajectory_to_csv(traj: Trajectory, path: str) -> None:
    t = traj.t_ns()
    tmp, f = _open_atomic(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_HEADER)
        for k in range(len(traj.S)):
            writer.writerow([repr(float(t[k])), repr(float(traj.S[k])),
                             repr(float(traj.n_a[k])), repr(float(traj.n_s[k])),
                             repr(float(traj.phi_pre[k])), repr(float(traj.phi_post[k]))])
    os.replace(tmp, path)


def waveform_to_csv(wf: StimulusWaveform, path: str) -> None:
    t = wf.t_ns()
    tmp, f = _open_atomic(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(WAVEFORM_HEADER)
        for k in range(len(wf.values)):
            writer.writerow([repr(float(t[k])), repr(float(wf.values[k]))])
    os.replace(tmp, path)


def waveform_from_csv(path: str) -> StimulusWaveform:
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise ConfigError(f"cannot read waveform file {path}: {exc}") from exc
    if not rows or rows[0] != WAVEFORM_HEADER:
        raise ConfigError(f"waveform file {path} must start with header "
                          f"{','.join(WAVEFORM_HEADER)}")
    body = rows[1:]
    if len(body) < 2:
        raise ConfigError("waveform file needs at least two samples")
    try:
        t = np.array([float(r[0]) for r in body])
        v = np.array([float(r[1]) for r in body])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"malformed waveform row in {path}: {exc}") from exc
    steps = np.diff(t)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ConfigError("waveform samples must be uniformly spaced")
    return StimulusWaveform(dt_ps=dt * 1e3, values=v)


# ---------------------------------------------------------------------------
# JSON document schemas

def validate_weights_doc(doc: dict) -> None:
    if set(doc) != {"n_post", "n_pre", "data"}:
        raise ConfigError("weights document must have exactly the keys "
                          "{n_post, n_pre, data}")
    n_post, n_pre, data = doc["n_post"], doc["n_pre"], doc["data"]
    if not (isinstance(n_post, int) and isinstance(n_pre, int)
            and n_post >= 1 and n_pre >= 1):
        raise ConfigError("n_post and n_pre must be positive integers")
    if not isinstance(data, list) or len(data) != n_post * n_pre:
        raise ConfigError("data must be a row-major list of n_post*n_pre numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data):
        raise ConfigError("weight entries must be numbers")


def weights_to_json(w: WeightMatrix, path: str) -> None:
    doc = {"n_post": w.n_post, "n_pre": w.n_pre,
           "data": [float(x) for x in w.w.reshape(-1)]}
    validate_weights_doc(doc)
    write_json_atomic(doc, path)


def weights_from_json(path: str) -> WeightMatrix:
    doc = _read_json(path)
    validate_weights_doc(doc)
    w = np.array(doc["data"], dtype=float).reshape(doc["n_post"], doc["n_pre"])
    return WeightMatrix(w)


def validate_spike_trains_doc(doc: dict) -> None:
    if not isinstance(doc, dict) or not doc:
        raise ConfigError("spike-train document must be a non-empty object")
    for key, times in doc.items():
        if not key.isdigit():
            raise ConfigError("spike-train keys are channel indices")
        if not isinstance(times, list):
            raise ConfigError("spike times must be lists")
        if any(not isinstance(t, (int, float)) or isinstance(t, bool) for t in times):
            raise ConfigError("spike times must be numbers")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("spike times must be strictly increasing")


def spike_trains_to_json(trains: list[SpikeTrain], path: str) -> None:
    doc = {str(i): list(train.times) for i, train in enumerate(trains)}
    validate_spike_trains_doc(doc)
    write_json_atomic(doc, path)


def spike_trains_from_json(path: str) -> list[SpikeTrain]:
    doc = _read_json(path)
    validate_spike_trains_doc(doc)
    return [SpikeTrain(tuple(doc[k])) for k in sorted(doc, key=int)]


def validate_pattern_doc(doc: dict) -> None:
    if set(doc) != {"label", "rows", "cols", "pixels"}:
        raise ConfigError("pattern document must have exactly the keys "
                          "{label, rows, cols, pixels}")
    if not isinstance(doc["label"], str):
        raise ConfigError("pattern label must be a string")
    if not (isinstance(doc["rows"], int) and isinstance(doc["cols"], int)):
        raise ConfigError("rows and cols must be integers")
    pixels = doc["pixels"]
    if not isinstance(pixels, list) or any(p not in (0, 1) for p in pixels):
        raise ConfigError("pixels must be a list of 0/1")
    if len(pixels) != doc["rows"] * doc["cols"]:
        raise ConfigError("pixels length must equal rows*cols")


def pattern_to_json(pattern: PixelPattern, path: str) -> None:
    doc = {"label": pattern.label, "rows": pattern.rows, "cols": pattern.cols,
           "pixels": list(pattern.pixels)}
    validate_pattern_doc(doc)
    write_json_atomic(doc, path)


def pattern_from_json(path: str) -> PixelPattern:
    doc = _read_json(path)
    validate_pattern_doc(doc)
    return PixelPattern(rows=doc["rows"], cols=doc["cols"],
                        pixels=tuple(doc["pixels"]), label=doc["label"])


def validate_inference_doc(doc: dict) -> None:
    required = {"label", "fired", "winning_window", "spike_times_ns", "unclassified"}
    if set(doc) != required:
        raise ConfigError(f"inference document must have exactly the keys {sorted(required)}")
    if not isinstance(doc["fired"], list) or \
            any(not isinstance(b, bool) for b in doc["fired"]):
        raise ConfigError("fired must be a list of booleans")
    ww = doc["winning_window"]
    if ww is not None and not isinstance(ww, int):
        raise ConfigError("winning_window must be an integer or null")
    if not isinstance(doc["unclassified"], bool):
        raise ConfigError("unclassified must be a boolean")


def inference_to_doc(res: InferenceResult) -> dict:
    doc = {
        "label": res.label,
        "fired": list(res.fired),
        "winning_window": res.winning_window,
        "spike_times_ns": [float(t) for t in res.spike_times_ns],
        "unclassified": res.unclassified,
    }
    validate_inference_doc(doc)
    return doc


def _read_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Minimal self-contained SVG line plots (optional CLI output)

def render_line_svg(path: str, t: np.ndarray, series: dict[str, np.ndarray],
                    title: str = "", width: int = 900, height: int = 320) -> None:
    colors = ["#1f6feb", "#d1242f", "#1a7f37", "#8250df"]
    pad = 40
    lines = []
    lines.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
                 f'height="{height * len(series)}">')
    for row, (name, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        y0 = row * height
        ymin, ymax = float(y.min()), float(y.max())
        if ymax == ymin:
            ymax = ymin + 1.0
        xs = pad + (t - t[0]) / max(t[-1] - t[0], 1e-30) * (width - 2 * pad)
        ys = y0 + height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad)
        step = max(1, len(t) // 4000)
        pts = " ".join(f"{x:.1f},{yy:.1f}" for x, yy in zip(xs[::step], ys[::step]))
        color = colors[row % len(colors)]
        lines.append(f'<rect x="0" y="{y0}" width="{width}" height="{height}" '
                     f'fill="white" stroke="#ddd"/>')
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1"/>')
        label = f"{title} {name}".strip()
        lines.append(f'<text x="{pad}" y="{y0 + 20}" font-family="monospace" '
                     f'font-size="13">{label} (min {ymin:.3g}, max {ymax:.3g})</text>')
    lines.append("</svg>")
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
