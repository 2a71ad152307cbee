"""
HYB - Experiment Configuration

INI-style experiment files (see docs/CONFIG_FORMAT.md):

    experiment = spectrum          # keys before any header belong to [run]
    units = angular

    [params]
    delta_a = 1e7
    omega_m = 1e7
    lam = 2pi*7e3                  # 2pi*X and 2*pi*X are accepted

    [sweep]
    G_over_omega_m = 0:0.5:51      # start:stop:points[:linear|log]
    delta_a_over_omega_m = 1, 10   # explicit list

Dotted keys (`params.kappa = 1e6`) may appear in any section. Runtime
defaults come from the environment: HYBSIM_OUT_DIR, HYBSIM_THREADS,
HYBSIM_LOG_LEVEL, HYBSIM_METRICS.
"""
import configparser
import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from hyb_errors import ConfigError

logger = logging.getLogger("CONFIG")

SECTIONS = ("run", "params", "model", "numerics", "sweep")
UNITS = ("angular", "hertz")

# Keys scaled by 2*pi when units = hertz
RATE_KEYS = frozenset({
    'omega_a', 'omega_m', 'omega_d', 'g', 'kappa', 'gamma_m', 'Omega_d', 'Omega_NV', 'omega_NV',
    'lam', 'gamma_perp', 'gamma_par', 'delta_a', 'G', 'omega_minus', 'lam_plus', 'lam_plus1',
    'lam_plus2', 'delta', 'delta1', 'delta2', 'delta_nv',
})

# Everything an experiment may read from [params] or sweep over
PARAM_KEYS = RATE_KEYS | frozenset({
    'L_a', 'd', 'T', 'Q', 'B_ex',
    'delta_a_over_omega_m', 'G_over_omega_m', 'G_over_Gc', 'Gc_minus_G_over_omega_m',
    'omega_minus_over_delta_a', 'delta_ratio', 'zeta', 'N_pl', 'n_a_th', 'n_m_th', 'N',
})

RUN_KEYS = frozenset({'experiment', 'output', 'name', 'threads', 'units', 'description'})
MODEL_KEYS = frozenset({
    'labeling', 'lambda_from_geometry', 'meanfield', 'epsilon', 'enforce_resonance',
    'thermal_from_T', 'kappa_from_Q',
})
NUMERIC_KEYS = frozenset({
    'n_max', 'n_a', 'n_b', 'dt', 't_final', 'periods', 'gate_periods', 'tol', 'n_times', 'sample_every',
})

_TWO_PI = re.compile(r'^2\s*\*?\s*pi\s*\*\s*(.+)$', re.IGNORECASE)
_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}

Scalar = Union[float, int, bool, str]


def parse_number(text: str) -> float:
    """Float with optional 2pi* prefix"""
    s = text.strip()
    m = _TWO_PI.match(s)
    try:
        if m:
            return 2.0 * math.pi * float(m.group(1))
        if s.lower() == 'pi':
            return math.pi
        return float(s)
    except ValueError:
        raise ConfigError(f"[CONFIG] Cannot parse number '{text}'")


def parse_value(text: str) -> Scalar:
    s = text.strip()
    low = s.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    try:
        return parse_number(s)
    except ConfigError:
        return s


@dataclass(frozen=True)
class AxisSpec:
    name: str
    values: Tuple[float, ...]
    spacing: str = "list"

    def __post_init__(self):
        if len(self.values) < 1:
            raise ConfigError(f"[CONFIG] Axis '{self.name}' has no values")


def parse_axis(name: str, text: str) -> AxisSpec:
    """`start:stop:points[:linear|log]` or `v1, v2, ...`"""
    s = text.strip()
    if ':' in s:
        parts = [p.strip() for p in s.split(':')]
        if len(parts) not in (3, 4):
            raise ConfigError(f"[CONFIG] Axis '{name}': expected start:stop:points[:linear|log], got '{text}'")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        try:
            points = int(parts[2])
        except ValueError:
            raise ConfigError(f"[CONFIG] Axis '{name}': points must be an integer, got '{parts[2]}'")
        if points < 2:
            raise ConfigError(f"[CONFIG] Axis '{name}': points must be >= 2, got {points}")
        spacing = parts[3].lower() if len(parts) == 4 else "linear"
        if spacing == "linear":
            values = np.linspace(start, stop, points)
        elif spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"[CONFIG] Axis '{name}': log spacing needs positive bounds")
            values = np.geomspace(start, stop, points)
        else:
            raise ConfigError(f"[CONFIG] Axis '{name}': unknown spacing '{parts[3]}'")
        return AxisSpec(name, tuple(float(v) for v in values), spacing)

    values = tuple(parse_number(v) for v in s.split(',') if v.strip())
    if not values:
        raise ConfigError(f"[CONFIG] Axis '{name}' is empty")
    return AxisSpec(name, values, "list")


@dataclass
class ExperimentConfig:
    experiment: str
    params: Dict[str, float] = field(default_factory=dict)
    model: Dict[str, Scalar] = field(default_factory=dict)
    numerics: Dict[str, Scalar] = field(default_factory=dict)
    sweep: List[AxisSpec] = field(default_factory=list)
    units: str = "angular"
    output: Optional[str] = None
    name: Optional[str] = None
    threads: Optional[int] = None
    source: Optional[str] = None

    def validate(self) -> 'ExperimentConfig':
        if self.units not in UNITS:
            raise ConfigError(f"[CONFIG] units must be one of {UNITS}, got '{self.units}'")
        names = [a.name for a in self.sweep]
        if len(set(names)) != len(names):
            raise ConfigError(f"[CONFIG] Duplicate sweep axes in {names}")
        for axis in self.sweep:
            if axis.name not in PARAM_KEYS:
                raise ConfigError(f"[CONFIG] Sweep axis '{axis.name}' is not a known parameter")
        for key in ('n_max', 'n_a', 'n_b'):
            if key in self.numerics and int(self.numerics[key]) < 2:
                raise ConfigError(f"[CONFIG] numerics.{key} must be >= 2, got {self.numerics[key]}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"[CONFIG] threads must be >= 1, got {self.threads}")
        return self

    def scale(self, key: str, value: float) -> float:
        """Apply the unit convention to one parameter value"""
        if self.units == "hertz" and key in RATE_KEYS:
            return 2.0 * math.pi * value
        return value

    def resolved_params(self) -> Dict[str, float]:
        return {k: self.scale(k, v) for k, v in self.params.items()}

    def resolved_axes(self) -> List[AxisSpec]:
        return [AxisSpec(a.name, tuple(self.scale(a.name, v) for v in a.values), a.spacing)
                for a in self.sweep]

    @property
    def stem(self) -> str:
        return self.name or self.experiment


def _route(section: str, key: str) -> Tuple[str, str]:
    if '.' in key:
        head, _, rest = key.partition('.')
        if head in SECTIONS:
            return head, rest
    return section, key


def loads(text: str, source: str = "<string>") -> ExperimentConfig:
    """
    Parse config text

    Raises:
        ConfigError: syntax errors, unknown sections/keys, bad values
    """
    body = text
    first = next((ln.strip() for ln in text.splitlines()
                  if ln.strip() and not ln.strip().startswith(('#', ';'))), "")
    if not first.startswith('['):
        body = "[run]\n" + text

    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(body, source=source)
    except configparser.Error as e:
        raise ConfigError(f"[CONFIG] {source}: {e}")

    raw: Dict[str, Dict[str, str]] = {s: {} for s in SECTIONS}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"[CONFIG] {source}: unknown section [{section}]")
        for key, value in parser.items(section):
            target, name = _route(section, key)
            raw[target][name] = value

    run = raw['run']
    unknown = set(run) - RUN_KEYS
    if unknown:
        raise ConfigError(f"[CONFIG] {source}: unknown run keys {sorted(unknown)}")
    for section, allowed in (('params', PARAM_KEYS), ('model', MODEL_KEYS), ('numerics', NUMERIC_KEYS)):
        unknown = set(raw[section]) - allowed
        if unknown:
            raise ConfigError(f"[CONFIG] {source}: unknown {section} keys {sorted(unknown)}")

    params = {k: parse_number(v) for k, v in raw['params'].items()}
    model = {k: parse_value(v) for k, v in raw['model'].items()}
    numerics = {k: parse_number(v) for k, v in raw['numerics'].items()}
    sweep = [parse_axis(k, v) for k, v in raw['sweep'].items()]

    threads = run.get('threads')
    try:
        threads = int(threads) if threads is not None else None
    except ValueError:
        raise ConfigError(f"[CONFIG] {source}: threads must be an integer, got '{threads}'")

    cfg = ExperimentConfig(
        experiment=run.get('experiment', '').strip(),
        params=params,
        model=model,
        numerics=numerics,
        sweep=sweep,
        units=run.get('units', 'angular').strip().lower(),
        output=run.get('output'),
        name=run.get('name'),
        threads=threads,
        source=source,
    )
    return cfg.validate()


def load(path: Union[str, Path]) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"[CONFIG] Cannot read {p}: {e}")
    cfg = loads(text, source=str(p))
    logger.debug(f"[LOAD] {p}: experiment={cfg.experiment or '-'} axes={[a.name for a in cfg.sweep]}")
    return cfg


def env_out_dir(default: str = "results") -> str:
    return os.environ.get("HYBSIM_OUT_DIR", default)


def env_threads(default: int = 1) -> int:
    value = os.environ.get("HYBSIM_THREADS")
    if value is None:
        return default
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"[CONFIG] HYBSIM_THREADS must be an integer, got '{value}'")
    if n < 1:
        raise ConfigError(f"[CONFIG] HYBSIM_THREADS must be >= 1, got {n}")
    return n


def env_log_level(default: str = "INFO") -> str:
    return os.environ.get("HYBSIM_LOG_LEVEL", default).upper()


def env_metrics_path() -> Optional[str]:
    return os.environ.get("HYBSIM_METRICS") or None


__all__ = [
    'AxisSpec', 'ExperimentConfig', 'loads', 'load', 'parse_axis', 'parse_number', 'parse_value',
    'RATE_KEYS', 'PARAM_KEYS', 'UNITS', 'env_out_dir', 'env_threads', 'env_log_level',
    'env_metrics_path',
]
