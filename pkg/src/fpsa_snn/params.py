"""Laser parameter set for the two-section (gain + saturable absorber) model.

Units follow the conventions documented in ``FIELD_UNITS``: carrier
densities in m^-3, volumes in m^3, differential gain in m^3/s, the photon
lifetime in picoseconds and the carrier lifetimes in nanoseconds. All rate
computations convert to a per-nanosecond system once, in
``rate_coefficients``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, asdict, replace
from typing import NamedTuple

from .errors import ConfigError

ELEMENTARY_CHARGE = 1.602176634e-19

#: Injection sign conventions for the gain-carrier equation. With
#: "excitatory" (default) injected light adds carriers to the gain section,
#: so positive stimulus pulses push the neuron toward threshold. With
#: "depleting" injected photons stimulate extra carrier recombination
#: instead, which suppresses the gain.
PHI_SIGN_MODES = ("excitatory", "depleting")

FIELD_UNITS = {
    "gamma_a": "dimensionless confinement factor, gain section",
    "gamma_s": "dimensionless confinement factor, absorber section",
    "g_a": "differential gain, gain section (m^3/s)",
    "g_s": "differential absorption, absorber section (m^3/s)",
    "n0_a": "transparency carrier density, gain section (m^-3)",
    "n0_s": "transparency carrier density, absorber section (m^-3)",
    "tau_ph": "photon lifetime (ps)",
    "tau_a": "gain-section carrier lifetime (ns)",
    "tau_s": "absorber-section carrier lifetime (ns)",
    "beta": "spontaneous emission factor (dimensionless)",
    "B_r": "bimolecular recombination coefficient (m^3/s)",
    "I_a": "gain-section bias current (A)",
    "I_s": "absorber-section bias current (A; <= 0 models reverse bias)",
    "e_charge": "elementary charge (C)",
    "V_a": "gain-section active volume (m^3)",
    "V_s": "absorber-section active volume (m^3)",
    "k_inj": "stimulus amplitude to photon density conversion (m^-3 per stimulus unit)",
    "phi_sign": "injection convention: 'excitatory' or 'depleting'",
}


class RateCoefficients(NamedTuple):
    """Per-nanosecond coefficient bundle consumed by the integrators."""

    ga: float        # gamma_a * g_a, m^3/ns
    gs: float        # gamma_s * g_s, m^3/ns
    kph: float       # 1/tau_ph, 1/ns
    ka: float        # 1/tau_a, 1/ns
    ks: float        # 1/tau_s, 1/ns
    pump_a: float    # I_a/(e V_a), m^-3/ns
    pump_s: float    # I_s/(e V_s), m^-3/ns
    spont: float     # beta * B_r, m^3/ns
    n0a: float
    n0s: float
    kinj: float
    phi_sgn: float   # -1.0 excitatory, +1.0 depleting


@dataclass(frozen=True)
class LaserParams:
    gamma_a: float
    gamma_s: float
    g_a: float
    g_s: float
    n0_a: float
    n0_s: float
    tau_ph: float
    tau_a: float
    tau_s: float
    beta: float
    B_r: float
    I_a: float
    I_s: float
    e_charge: float
    V_a: float
    V_s: float
    k_inj: float
    phi_sign: str = "excitatory"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positives = ("tau_ph", "tau_a", "tau_s", "V_a", "V_s", "e_charge")
        for name in positives:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        nonneg = ("beta", "B_r", "k_inj", "gamma_a", "gamma_s", "g_a", "g_s",
                  "n0_a", "n0_s")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in FIELD_UNITS:
            if name == "phi_sign":
                continue
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.phi_sign not in PHI_SIGN_MODES:
            raise ConfigError(
                f"phi_sign must be one of {PHI_SIGN_MODES}, got {self.phi_sign!r}")

    def rate_coefficients(self) -> RateCoefficients:
        e = self.e_charge
        return RateCoefficients(
            ga=self.gamma_a * self.g_a * 1e-9,
            gs=self.gamma_s * self.g_s * 1e-9,
            kph=1.0 / (self.tau_ph * 1e-3),
            ka=1.0 / self.tau_a,
            ks=1.0 / self.tau_s,
            pump_a=self.I_a / (e * self.V_a) * 1e-9,
            pump_s=self.I_s / (e * self.V_s) * 1e-9,
            spont=self.beta * self.B_r * 1e-9,
            n0a=self.n0_a,
            n0s=self.n0_s,
            kinj=self.k_inj,
            phi_sgn=-1.0 if self.phi_sign == "excitatory" else 1.0,
        )

    def with_(self, **changes) -> "LaserParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "LaserParams":
        if not isinstance(d, dict):
            raise ConfigError("laser parameter config must be a JSON object")
        known = set(FIELD_UNITS)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown laser parameter keys: {sorted(unknown)}")
        missing = (known - {"phi_sign"}) - set(d)
        if missing:
            raise ConfigError(f"missing laser parameter keys: {sorted(missing)}")
        values = {}
        for key in d:
            if key == "phi_sign":
                values[key] = d[key]
            else:
                v = d[key]
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"laser parameter {key} must be a number")
                values[key] = float(v)
        return LaserParams(**values)

    def save_json(self, path: str) -> None:
        write_json_atomic(self.to_dict(), path)

    @staticmethod
    def load_json(path: str) -> "LaserParams":
        try:
            with open(path) as f:
                d = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read parameter file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed parameter file {path}: {exc}") from exc
        return LaserParams.from_dict(d)


def write_json_atomic(obj, path: str) -> None:
    """Serialize deterministically (sorted keys, repr floats) and rename into place."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)
