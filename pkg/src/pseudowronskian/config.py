"""Scenario configuration: flat ``dotted.key = value`` text files.

Blank lines and ``#`` comments are ignored. Values are parsed as booleans
(``true``/``false``), numbers, comma-separated number lists, or left as
strings. Unknown keys are rejected so typos do not silently fall back to
defaults.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import coefficient_from_preset, tabulated_coefficient
from .core import Coefficient, Nonlinearity, identity, power, tabulated_nonlinearity
from .errors import PseudoWronskianError

OUTPUT_ENV = "PSEUDOWRONSKIAN_OUT"

DEFAULTS: dict[str, object] = {
    "coefficient.preset": "exp-cos",
    "coefficient.table": "",
    "nonlinearity.preset": "identity",
    "nonlinearity.table": "",
    "nonlinearity.lipschitz_k": 0.0,
    "problem.c": 1.0,
    "problem.eta": 1.0,
    "problem.eta_grid": [1.0, 0.5, 0.25],
    "problem.d": 1.0,
    "problem.p": 0.5,
    "problem.alpha": 4,
    "problem.t0": 0.0,
    "problem.lambda": 2.0,
    "tolerance.quadrature": 1e-10,
    "tolerance.picard": 1e-12,
    "tolerance.knaster": 1e-12,
    "tolerance.rk_rel": 1e-10,
    "tolerance.rk_abs": 1e-12,
    "grid.horizon": 60.0,
    "grid.density": 10000.0,
    "monotone.horizon": 1e4,
    "monotone.density": 2000.0,
    "solver.max_iter": 200,
    "indicators.t_max": 30.0,
    "indicators.n": 200,
    "indicators.k_max": 1000,
    "indicators.closed_form": True,
    "indicators.margin": 0.1,
    "witness.n_wanted": 5,
    "witness.t_max": 30.0,
    "tails.t_min": 1.0,
    "tails.t_max": 20.0,
    "tails.n": 50,
    "verify.horizon": 20.0,
    "verify.anchors": [5.0, 10.0],
    "lp.k_max": 100,
    "lp.max_horizon": 1e5,
    "lp.flat_threshold": 1e-6,
    "output.dir": "",
}


class ConfigError(PseudoWronskianError):
    """Unreadable file, unknown key or a value of the wrong kind."""


_LINE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*=\s*(.*?)\s*$")


def parse_value(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    if "," in text:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return [float(p) for p in parts]
        except ValueError:
            return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigError(f"line {n}: expected 'dotted.key = value', got {raw.strip()!r}")
        out[m.group(1)] = parse_value(m.group(2))
    return out


def _coerce(key: str, value):
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if isinstance(default, list):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return [float(value)]
        if not isinstance(value, list):
            raise ConfigError(f"{key} must be a comma-separated list of numbers")
        return [float(v) for v in value]
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key} must be an integer")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    return str(value)


@dataclass(frozen=True)
class ScenarioConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    source: str = ""

    def __getitem__(self, key: str):
        return self.values[key]

    @classmethod
    def from_mapping(cls, mapping: dict, source: str = "") -> ScenarioConfig:
        vals = dict(DEFAULTS)
        for key, value in mapping.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            vals[key] = _coerce(key, value)
        cfg = cls(vals, source)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike | None, overrides: dict | None = None) -> ScenarioConfig:
        mapping = {}
        if path is not None:
            try:
                mapping = parse_text(Path(path).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        mapping.update(overrides or {})
        return cls.from_mapping(mapping, str(path or ""))

    def validate(self) -> None:
        for key in ("tolerance.quadrature", "tolerance.picard", "tolerance.knaster",
                    "tolerance.rk_rel", "tolerance.rk_abs", "grid.density", "grid.horizon",
                    "monotone.horizon", "monotone.density", "problem.eta", "problem.d"):
            if not self.values[key] > 0:
                raise ConfigError(f"{key} must be positive")
        if not 0 < self.values["problem.p"] < 1:
            raise ConfigError("problem.p must lie in (0, 1)")
        if self.values["problem.c"] == 0:
            raise ConfigError("problem.c must be nonzero")
        if not self.values["problem.eta_grid"] or min(self.values["problem.eta_grid"]) <= 0:
            raise ConfigError("problem.eta_grid must hold positive values")
        try:
            self.coefficient()
            self.nonlinearity()
        except PseudoWronskianError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def coefficient(self) -> Coefficient:
        table = self.values["coefficient.table"]
        if table:
            data = _load_table(table)
            return tabulated_coefficient(data[:, 0], data[:, 1], name=f"table:{Path(table).name}")
        return coefficient_from_preset(self.values["coefficient.preset"])

    def nonlinearity(self) -> Nonlinearity:
        spec = str(self.values["nonlinearity.preset"]).strip()
        k = self.values["nonlinearity.lipschitz_k"] or None
        if spec == "identity":
            return identity()
        if spec.startswith("power:"):
            try:
                lam = float(spec.split(":", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"bad power exponent in {spec!r}") from exc
            return power(lam, k)
        if spec == "custom-table":
            table = self.values["nonlinearity.table"]
            if not table:
                raise ConfigError("custom-table nonlinearity needs nonlinearity.table")
            data = _load_table(table)
            return tabulated_nonlinearity(data[:, 0], data[:, 1], name=f"table:{Path(table).name}")
        raise ConfigError(f"unknown nonlinearity preset {spec!r}")

    def t_start(self, coeff: Coefficient) -> float:
        t0 = self.values["problem.t0"]
        return coeff.domain_start if t0 <= 0 else float(t0)

    def output_dir(self, cli_value: str | None = None) -> Path:
        chosen = cli_value or self.values["output.dir"] or os.environ.get(OUTPUT_ENV) or "pw-out"
        return Path(chosen)

    def to_dict(self) -> dict:
        return dict(sorted(self.values.items()))


def _load_table(path: str) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    if data.shape[1] < 2:
        raise ConfigError(f"table {path} needs two columns")
    return data


def parse_overrides(items: list[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = parse_value(value.strip())
    return out
