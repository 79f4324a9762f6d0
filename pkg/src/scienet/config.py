"""Parameter containers and the YAML config loader.

Every numeric default here is a choice of this implementation; the
checked-in ``default_config.yaml`` mirrors them and is what the CLI loads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, ParameterError

ENCODING_MODES = ("poisson", "periodic")


def _require(cond, msg):
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class LifParams:
    a: float = 0.0
    b: float = -0.05
    c: float = 1.0
    v_reset: float = 0.0
    v_threshold: float = 280.0
    dt: float = 0.1

    def __post_init__(self):
        _require(self.v_threshold > self.v_reset, "v_threshold must exceed v_reset")
        _require(self.dt > 0, "dt must be positive")
        _require(self.b < 0, "leak coefficient b must be negative")


@dataclass(frozen=True)
class InhibitionParams:
    t_inh: float = 10.0
    dv_inh: float = 280.0

    def __post_init__(self):
        _require(self.t_inh >= 0, "t_inh must be non-negative")
        _require(self.dv_inh >= 0, "dv_inh must be non-negative")


@dataclass(frozen=True)
class HomeostasisParams:
    """Adaptive threshold: each learning-mode spike raises the firing neuron's
    threshold offset by ``theta_plus``; offsets decay with ``tau_theta`` (ms
    of presented time).  ``theta_plus = 0`` disables it."""

    theta_plus: float = 2.0
    tau_theta: float = 1e5

    def __post_init__(self):
        _require(self.theta_plus >= 0, "theta_plus must be non-negative")
        _require(self.tau_theta > 0, "tau_theta must be positive")


@dataclass(frozen=True)
class EncoderConfig:
    f_min: float = 20.0
    f_max: float = 200.0
    mode: str = "poisson"
    duration: float = 350.0  # ms per presentation

    def __post_init__(self):
        _require(0 <= self.f_min < self.f_max, "need 0 <= f_min < f_max")
        _require(self.mode in ENCODING_MODES, f"mode must be one of {ENCODING_MODES}")
        _require(self.duration > 0, "duration must be positive")


@dataclass(frozen=True)
class StdpParams:
    alpha_p: float = 0.01
    beta_p: float = 3.0
    alpha_d: float = 0.01
    beta_d: float = 3.0
    g_min: float = 0.0
    g_max: float = 1.0
    t_window: float = 20.0
    gamma_pot: float = 0.5
    gamma_dep: float = 0.5
    tau_pot: float = 10.0
    tau_dep: float = 10.0
    phi_pot: float = 2.0
    phi_dep: float = 2.0
    f_min: float = 20.0
    f_max: float = 200.0
    ltd_on_silent: bool = True
    ltd_on_pre: bool = True

    def __post_init__(self):
        _require(self.g_min < self.g_max, "g_min must be below g_max")
        _require(self.t_window > 0, "t_window must be positive")
        _require(self.tau_pot > 0 and self.tau_dep > 0, "tau values must be positive")
        for name in ("gamma_pot", "gamma_dep"):
            v = getattr(self, name)
            _require(0.0 <= v <= 1.0, f"{name} must lie in [0, 1]")
        _require(self.f_min < self.f_max, "f_min must be below f_max")


@dataclass(frozen=True)
class ContextConfig:
    w: float = 0.1
    k: int = 5

    def __post_init__(self):
        _require(0.0 <= self.w <= 1.0, "blend weight w must lie in [0, 1]")
        _require(self.k >= 1, "k must be at least 1")


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 256
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 20
    lr_decay: float = 0.5
    lr_step: int = 8
    validation_size: int = 1000

    def __post_init__(self):
        _require(self.hidden >= 1, "hidden must be >= 1")
        _require(self.learning_rate > 0, "learning_rate must be positive")
        _require(0 <= self.momentum < 1, "momentum must lie in [0, 1)")
        _require(self.batch_size >= 1, "batch_size must be >= 1")
        _require(self.epochs >= 0, "epochs must be >= 0")
        _require(self.lr_step >= 1, "lr_step must be >= 1")
        _require(self.validation_size >= 0, "validation_size must be >= 0")


@dataclass(frozen=True)
class SnnConfig:
    d: int = 100
    epochs: int = 1
    init_low: float = 0.4  # fraction of [g_min, g_max]
    init_high: float = 0.6

    def __post_init__(self):
        _require(self.d >= 1, "d must be >= 1")
        _require(self.epochs >= 0, "epochs must be >= 0")
        _require(0 <= self.init_low <= self.init_high <= 1, "bad init range")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    dataset: str = ""
    train_images: int = 0  # 0 = all
    test_images: int = 0
    workers: int = 1
    snn: SnnConfig = field(default_factory=SnnConfig)
    lif: LifParams = field(default_factory=LifParams)
    inhibition: InhibitionParams = field(default_factory=InhibitionParams)
    homeostasis: HomeostasisParams = field(default_factory=HomeostasisParams)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    stdp: StdpParams = field(default_factory=StdpParams)
    context: ContextConfig = field(default_factory=ContextConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    snr_levels: tuple = (40.0, 30.0, 20.0, 10.0)
    rain: dict = field(default_factory=dict)  # preset name -> streak parameter overrides

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_levels"] = list(self.snr_levels)
        return d

    def digest(self) -> str:
        """Short hash of the canonical JSON form, embedded in every artifact.

        ``workers`` is left out: it never changes results.
        """
        d = self.to_dict()
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SECTIONS = {
    "snn": SnnConfig,
    "lif": LifParams,
    "inhibition": InhibitionParams,
    "homeostasis": HomeostasisParams,
    "encoder": EncoderConfig,
    "stdp": StdpParams,
    "context": ContextConfig,
    "mlp": MlpConfig,
}


def _build(cls, values: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"invalid [{where}] section: {exc}") from exc


def config_from_dict(raw: dict[str, Any]) -> PipelineConfig:
    raw = dict(raw or {})
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        kwargs[name] = _build(cls, dict(raw.pop(name, None) or {}), name)
    if "snr_levels" in raw:
        levels = raw.pop("snr_levels")
        kwargs["snr_levels"] = tuple(float(x) for x in levels)
    rain = raw.pop("rain", None) or {}
    if not isinstance(rain, dict) or any(not isinstance(v, dict) for v in rain.values()):
        raise ConfigError("[rain] must map preset names to parameter overrides")
    kwargs["rain"] = {str(k): dict(v) for k, v in rain.items()}
    top = {f.name for f in fields(PipelineConfig)} - set(_SECTIONS) - {"snr_levels", "rain"}
    unknown = set(raw) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs.update(raw)
    cfg = PipelineConfig(**kwargs)
    # encoder and stdp share the frequency bounds
    if (cfg.encoder.f_min, cfg.encoder.f_max) != (cfg.stdp.f_min, cfg.stdp.f_max):
        raise ConfigError("encoder and stdp frequency bounds differ")
    return cfg


def default_config_text() -> str:
    return resources.files("scienet").joinpath("default_config.yaml").read_text()


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load the packaged defaults, then overlay ``path`` if given."""
    raw = yaml.safe_load(default_config_text()) or {}
    if path is not None:
        try:
            user = yaml.safe_load(Path(path).read_text()) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        raw = _merge(raw, user)
    return config_from_dict(raw)


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def override(cfg: PipelineConfig, dotted: dict[str, Any]) -> PipelineConfig:
    """Apply ``{"stdp.alpha_p": 0.02, "seed": 3}``-style overrides."""
    raw = cfg.to_dict()
    for key, value in dotted.items():
        if value is None:
            continue
        node = raw
        parts = key.split(".")
        for p in parts[:-1]:
            if p not in node or not isinstance(node[p], dict):
                raise ConfigError(f"unknown config section {p!r}")
            node = node[p]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node[parts[-1]] = value
    return config_from_dict(raw)

