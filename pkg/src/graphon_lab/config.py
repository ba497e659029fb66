"""Plain-text experiment configuration: ``key = value`` lines, ``#`` comments."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

EXPERIMENTS = ("leader", "balanced_cycle", "symmetric_switch", "non_consensus", "rate_sweep", "custom")
PHIS = ("one", "cucker_smale")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending line and field when known."""

    def __init__(self, message: str, line: Optional[int] = None, field_name: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_name is not None:
            where.append(f"field '{field_name}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field_name = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment settings.  ``None`` means "use the experiment's default"."""

    experiment: str = "custom"
    n: int = 100
    d: int = 1
    dt: Optional[float] = None
    t_end: Optional[float] = None
    tau: Optional[float] = None
    T: float = 10.0
    n_kernel: int = 10
    kernel: Optional[str] = None
    phi: Optional[str] = None
    initial_profile: str = "sin2_4i"
    out_dir: str = "out"
    sweep_ns: tuple = (10, 20, 40, 80)
    record_stride: Optional[int] = None
    quadrature_order: int = 4
    decay_threshold: float = 1e-3
    tail_fraction: float = 0.5
    block_duration: float = 1.0

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}", field_name="experiment")
        for name in ("n", "d", "n_kernel", "quadrature_order"):
            if getattr(self, name) < 1:
                raise ConfigError("must be a positive integer", field_name=name)
        for name in ("dt", "t_end", "tau", "T", "decay_threshold", "block_duration"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError("must be positive", field_name=name)
        if self.record_stride is not None and self.record_stride < 1:
            raise ConfigError("must be a positive integer", field_name="record_stride")
        if not 0 < self.tail_fraction <= 1:
            raise ConfigError("must lie in (0, 1]", field_name="tail_fraction")
        if self.phi is not None and self.phi not in PHIS:
            raise ConfigError(f"expected one of {', '.join(PHIS)}", field_name="phi")
        ns = self.sweep_ns
        if not ns or any(k < 1 for k in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("must be strictly increasing positive integers", field_name="sweep_ns")
        if self.dt is not None and self.t_end is not None and self.dt > self.t_end:
            raise ConfigError("dt must not exceed t_end", field_name="dt")
        return self


_INT = {"n", "d", "n_kernel", "record_stride", "quadrature_order"}
_FLOAT = {"dt", "t_end", "tau", "T", "decay_threshold", "tail_fraction", "block_duration"}
_STR = {"experiment", "kernel", "phi", "initial_profile", "out_dir"}
KEYS = _INT | _FLOAT | _STR | {"sweep_ns"}


def _convert(key: str, raw: str, line: Optional[int]):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key == "sweep_ns":
            return tuple(int(p) for p in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r}", line, key) from None
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text.

    Raises
    ------
    ConfigError
        On malformed lines, unknown keys, duplicate keys or invalid values.
    """
    values: dict = {}
    where: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", lineno, key)
        if key in values:
            raise ConfigError("duplicate key", lineno, key)
        if not val:
            raise ConfigError("empty value", lineno, key)
        values[key] = _convert(key, val, lineno)
        where[key] = lineno
    try:
        return ExperimentConfig(**values).validate()
    except ConfigError as exc:
        if exc.field_name in where and exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1], where[exc.field_name], exc.field_name) from None
        raise


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    return str(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` for every valid configuration."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def override(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    """Return ``cfg`` with the non-None keyword values replaced, validated."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw).validate()
