"""Flat ``key = value`` run configuration with validated defaults."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .dg1d import Mesh1D, PenaltyParams
from .eos import IdealGasEos
from .models import ModelKind, ModelParams


class ConfigError(ValueError):
    """Invalid configuration entry; carries the offending key and line number."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}" if key else f"{where}{message}")


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_times(text):
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


@dataclass(frozen=True)
class Config:
    model: ModelKind = ModelKind.IGR
    n_cells: int = 512
    gamma: float = 1.4
    alpha_coefficient: float = 5.0
    cfl: float = 0.95
    substeps: int = 3
    t_end: float = 0.5
    output_times: tuple = (0.0, 0.125, 0.25, 0.375, 0.5)
    x1: float = 0.25
    x2: float = 0.75
    delta: float = 0.02
    penalty: float = 20.0
    flux_dissipation_scale: float = 1.0
    pressureless: bool = False
    seed: int = 0

    @property
    def h(self):
        return 1.0 / self.n_cells

    @property
    def alpha(self):
        return self.alpha_coefficient * self.h**2

    def mesh(self):
        return Mesh1D(self.n_cells)

    def model_params(self):
        return ModelParams(
            kind=self.model, alpha=self.alpha, eos=IdealGasEos(self.gamma),
            penalty=PenaltyParams(self.penalty),
            flux_dissipation_scale=self.flux_dissipation_scale,
            pressureless=self.pressureless,
        )

    def validate(self, lines=None):
        lines = lines or {}

        def need(ok, key, msg):
            if not ok:
                raise ConfigError(msg, key, lines.get(key))

        need(self.n_cells >= 4, "n_cells", "must be >= 4")
        need(self.gamma > 1.0, "gamma", "must be > 1")
        need(self.alpha_coefficient >= 0, "alpha_coefficient", "must be >= 0")
        need(0 < self.cfl <= 1, "cfl", "must lie in (0, 1]")
        need(self.substeps >= 1, "substeps", "must be >= 1")
        need(self.t_end >= 0, "t_end", "must be >= 0")
        need(all(0 <= t <= self.t_end for t in self.output_times), "output_times",
             "every output time must lie in [0, t_end]")
        need(0 <= self.x1 < self.x2 <= 1, "x2", "need 0 <= x1 < x2 <= 1")
        need(self.delta > 0, "delta", "must be > 0")
        need(self.penalty > 0, "penalty", "must be > 0")
        need(self.flux_dissipation_scale >= 0, "flux_dissipation_scale", "must be >= 0")
        return self

    def to_text(self):
        """Fully resolved config in the same ``key = value`` format (round-trips)."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, ModelKind):
                v = v.value
            elif isinstance(v, tuple):
                v = ", ".join(repr(float(t)) for t in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name} = {v}")
        out.append(f"# alpha = {self.alpha!r}")
        return "\n".join(out) + "\n"

    def as_dict(self):
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = v.value if isinstance(v, ModelKind) else (list(v) if isinstance(v, tuple) else v)
        d["alpha"] = self.alpha
        return d


_PARSERS = {
    "model": ModelKind.parse,
    "n_cells": int,
    "gamma": float,
    "alpha_coefficient": float,
    "cfl": float,
    "substeps": int,
    "t_end": float,
    "output_times": _parse_times,
    "x1": float,
    "x2": float,
    "delta": float,
    "penalty": float,
    "flux_dissipation_scale": float,
    "pressureless": _parse_bool,
    "seed": int,
}


def parse_config(text, base=None):
    """Parse ``key = value`` lines (``#`` starts a comment) into a :class:`Config`.

    Unknown or repeated keys, malformed lines, type mismatches and
    constraint violations raise :class:`ConfigError` naming key and line.
    When ``t_end`` is set but ``output_times`` is not, the default snapshot
    times beyond ``t_end`` are dropped and ``t_end`` itself is added.
    """
    values, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", None, no)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError("unknown key", key, no)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key, no)
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value {value!r} ({exc})", key, no) from None
        lines[key] = no
    cfg = replace(base or Config(), **values)
    if "t_end" in values and "output_times" not in values:
        kept = tuple(t for t in cfg.output_times if t < cfg.t_end)
        cfg = replace(cfg, output_times=kept + (cfg.t_end,))
    cfg = replace(cfg, output_times=tuple(sorted(set(cfg.output_times))))
    return cfg.validate(lines)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
