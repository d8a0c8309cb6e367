"""Scenario configuration: YAML schema, validation, units, hashing.

One YAML file per scenario.  Rates are entered in MHz as plain frequencies
nu and converted internally to angular frequencies w = 2*pi*nu*1e6 rad/s;
times are entered in microseconds.  Reports convert back, so a kappa
entered as 2.4 stays 2.4 MHz on the way out.

Schema (defaults in parentheses):

    kind: fidelity-sweep | g-sweep | decoupling | transport-noise |
          protocol-run | leakage-demo
    name: artifact base name (kind)
    seed: integer (12345)
    physics:            # fidelity-sweep, g-sweep
      g_mhz (27.0), kappa_mhz (2.4), gamma_mhz (2.6)
    pulse:
      duration_over_kappa (200.0), alpha (1.26), kind (odd_cat)
    sweep:
      start, stop, points        # grid, scenario-specific meaning
    noise:              # decoupling, transport-noise
      model (band-limited-white), tau_co_ms (1.0), cutoff_hz (100.0)
    echo:
      dt_cutoff_product ([0.01 .. 0.1]), n_cycles (1)
    realizations (10000)
    transport:          # transport-noise
      tau_t_us (100.0), d_um (10.0)
    protocol:           # protocol-run
      teleported-cnot | bsm | hadamard
    trials (100)
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

MHZ = 2.0 * math.pi * 1e6
US = 1e-6

KINDS = (
    "fidelity-sweep",
    "g-sweep",
    "decoupling",
    "transport-noise",
    "protocol-run",
    "leakage-demo",
)


class ConfigError(ValueError):
    pass


def rate_to_internal(nu_mhz: float) -> float:
    """MHz entry -> rad/s."""
    return nu_mhz * MHZ


def rate_to_mhz(omega: float) -> float:
    """rad/s -> MHz for display."""
    return omega / MHZ


@dataclass
class ScenarioConfig:
    kind: str
    name: str
    seed: int
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        out = {"kind": self.kind, "name": self.name, "seed": self.seed}
        out.update(self.data)
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        if "kind" not in raw:
            raise ConfigError("config is missing the 'kind' field")
        raw = dict(raw)
        kind = raw.pop("kind")
        name = raw.pop("name", kind)
        seed = raw.pop("seed", 12345)
        cfg = cls(kind=kind, name=str(name), seed=int(seed), data=raw)
        cfg.validate()
        return cfg

    @classmethod
    def from_yaml(cls, text: str) -> "ScenarioConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_yaml(fh.read())

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_yaml().encode()).hexdigest()[:16]

    # -- section accessors with defaults ---------------------------------
    def section(self, key: str) -> dict:
        val = self.data.get(key, {})
        if val is None:
            val = {}
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be a mapping")
        return val

    def physics(self):
        from .cavity import CavityParams

        sec = self.section("physics")
        g = float(sec.get("g_mhz", 27.0))
        kappa = float(sec.get("kappa_mhz", 2.4))
        gamma = float(sec.get("gamma_mhz", 2.6))
        if g <= 0 or kappa <= 0 or gamma <= 0:
            raise ConfigError("physics rates must be positive")
        return CavityParams(rate_to_internal(g), rate_to_internal(kappa),
                            rate_to_internal(gamma))

    def pulse(self, params=None):
        from .cavity import PulseSpec

        sec = self.section("pulse")
        params = params if params is not None else self.physics()
        ratio = float(sec.get("duration_over_kappa", 200.0))
        if ratio <= 0:
            raise ConfigError("pulse duration must be positive")
        alpha = complex(sec.get("alpha", 1.26))
        kind = str(sec.get("kind", "odd_cat"))
        return PulseSpec.gaussian(ratio / params.kappa, alpha, kind)

    def sweep_grid(self, default_start, default_stop, default_points,
                   log_spaced=False):
        sec = self.section("sweep")
        start = float(sec.get("start", default_start))
        stop = float(sec.get("stop", default_stop))
        points = int(sec.get("points", default_points))
        if points < 1:
            raise ConfigError("sweep grid must not be empty")
        if log_spaced:
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid needs positive bounds")
            return np.geomspace(start, stop, points)
        return np.linspace(start, stop, points)

    def noise_spectrum(self):
        from .noise import NoiseSpectrum

        sec = self.section("noise")
        model = str(sec.get("model", "band-limited-white"))
        tau_co = float(sec.get("tau_co_ms", 1.0)) * 1e-3
        cutoff = 2.0 * math.pi * float(sec.get("cutoff_hz", 100.0))
        if model == "band-limited-white":
            return NoiseSpectrum.band_limited_white(tau_co=tau_co, cutoff=cutoff)
        if model == "lorentzian":
            return NoiseSpectrum.lorentzian(tau_co=tau_co, cutoff=cutoff)
        if model == "table":
            path = sec.get("table_path")
            if not path:
                raise ConfigError("table model needs 'table_path'")
            return NoiseSpectrum.from_table_file(path)
        raise ConfigError(f"unknown noise model {model!r}")

    def transport_noise(self):
        from .noise import TransportNoise

        sec = self.section("transport")
        tau_t = float(sec.get("tau_t_us", 100.0)) * US
        d = float(sec.get("d_um", 10.0)) * 1e-6
        return TransportNoise(d=d, tau_T=tau_t, base=self.noise_spectrum())

    # -- validation ------------------------------------------------------
    def validate(self):
        self.section("physics")
        if self.kind in ("fidelity-sweep", "g-sweep"):
            self.physics()
            self.pulse()
            if self.kind == "fidelity-sweep":
                grid = self.sweep_grid(0.1, 4.0, 20)
                if np.any(grid < 0):
                    raise ConfigError("mean photon numbers must be >= 0")
            else:
                grid = self.sweep_grid(0.5, 1.0, 11)
                if np.any(grid <= 0):
                    raise ConfigError("coupling ratios must be positive")
        elif self.kind == "decoupling":
            self.noise_spectrum()
            if int(self.data.get("realizations", 10000)) < 100:
                raise ConfigError("decoupling needs at least 100 realizations")
        elif self.kind == "transport-noise":
            self.transport_noise()
        elif self.kind == "protocol-run":
            protocol = str(self.data.get("protocol", "teleported-cnot"))
            if protocol not in ("teleported-cnot", "bsm", "hadamard"):
                raise ConfigError(f"unknown protocol {protocol!r}")
            if int(self.data.get("trials", 100)) < 1:
                raise ConfigError("trials must be >= 1")
        elif self.kind == "leakage-demo":
            if int(self.data.get("random_inputs", 50)) < 0:
                raise ConfigError("random_inputs must be >= 0")
        return self
