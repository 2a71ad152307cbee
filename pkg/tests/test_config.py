"""
HYB - Experiment Configuration Tests

Tests the INI config layer:
- Number parsing with 2pi prefixes
- Sweep axis grammar (ranges, log spacing, lists)
- Section routing, dotted keys, unknown keys
- Unit convention and environment defaults
"""
import math

import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from hyb_config import (
    ExperimentConfig, env_out_dir, env_threads, load, loads, parse_axis, parse_number, parse_value,
)
from hyb_errors import ConfigError
from tests import TWO_PI


def test_parse_number():
    """
    Test 1: Numbers with and without 2pi

    Expected: 2pi*X and 2*pi*X scale by 2 pi; garbage raises ConfigError
    """
    assert parse_number("1e7") == 1e7
    assert parse_number("2pi*7e3") == pytest.approx(TWO_PI * 7e3)
    assert parse_number(" 2*pi*3.5e6 ") == pytest.approx(TWO_PI * 3.5e6)
    assert parse_number("pi") == pytest.approx(math.pi)
    with pytest.raises(ConfigError):
        parse_number("seven")


def test_parse_value():
    """
    Test 2: Model values

    Expected: booleans, numbers, bare strings
    """
    assert parse_value("yes") is True
    assert parse_value("off") is False
    assert parse_value("0.5") == 0.5
    assert parse_value("normal-mode") == "normal-mode"


def test_axis_grammar():
    """
    Test 3: start:stop:points[:spacing] and lists

    Expected: inclusive linear grid, geometric log grid, explicit list order kept
    """
    axis = parse_axis("G_over_omega_m", "0:0.5:51")
    assert len(axis.values) == 51
    assert axis.values[0] == 0.0 and axis.values[-1] == pytest.approx(0.5)
    assert axis.spacing == "linear"

    log = parse_axis("Gc_minus_G_over_omega_m", "1e-4:0.4:40:log")
    assert len(log.values) == 40
    assert log.values[0] == pytest.approx(1e-4)
    assert log.values[1] / log.values[0] == pytest.approx(log.values[-1] / log.values[-2])

    explicit = parse_axis("N_pl", "3, 0, 1")
    assert explicit.values == (3.0, 0.0, 1.0)
    assert explicit.spacing == "list"


@pytest.mark.parametrize("text", ["0:1", "0:1:1", "0:1:x", "0:1:5:cubic", "-1:1:5:log", " , "])
def test_axis_errors(text):
    """
    Test 4: Malformed axes

    Expected: ConfigError
    """
    with pytest.raises(ConfigError):
        parse_axis("zeta", text)


def test_loads_sections():
    """
    Test 5: Full config text

    Expected: header-less keys land in [run], dotted keys are routed, axes parsed
    """
    cfg = loads("""
# comment line
experiment = coupling-map
name = coupling_run
numerics.n_max = 6

[params]
omega_m = 1e7
lam = 2pi*7e3          # inline comment

[model]
labeling = normal-mode
meanfield = no

[sweep]
delta_a_over_omega_m = 1, 10
""")
    assert cfg.experiment == "coupling-map"
    assert cfg.stem == "coupling_run"
    assert cfg.params['lam'] == pytest.approx(TWO_PI * 7e3)
    assert cfg.model == {'labeling': 'normal-mode', 'meanfield': False}
    assert cfg.numerics['n_max'] == 6
    assert [a.name for a in cfg.sweep] == ['delta_a_over_omega_m']


def test_numerics_accept_integral_values():
    """
    Test 6: Numeric settings equal to 0 or 1

    Expected: parsed as numbers, not booleans
    """
    cfg = loads("experiment = rabi\n[numerics]\nperiods = 1\ngate_periods = 1\n")
    assert cfg.numerics['periods'] == 1.0
    assert cfg.numerics['gate_periods'] == 1.0


@pytest.mark.parametrize("text", [
    "[bogus]\nx = 1\n",
    "experiment = spectrum\ncolour = red\n",
    "[params]\nomega_mm = 1\n",
    "[model]\nlabelling = printed\n",
    "[numerics]\nn_max = 1\n",
    "[numerics]\ndt = fast\n",
    "[sweep]\nfoo = 1, 2\n",
    "[sweep]\nG = 1, 2\nG = 3\n",
    "threads = 0\n",
    "threads = many\n",
    "units = furlongs\n",
    "[params\n",
])
def test_loads_rejects(text):
    """
    Test 7: Configuration errors

    Expected: ConfigError for unknown sections/keys, bad values, duplicate keys, syntax
    """
    with pytest.raises(ConfigError):
        loads(text)


def test_hertz_units():
    """
    Test 8: units = hertz

    Expected: rate keys and rate axes scaled by 2 pi, ratios untouched
    """
    cfg = loads("""
units = hertz
[params]
lam_plus = 3.5e6
zeta = 0.1
[sweep]
delta = 35e6, 70e6
""")
    params = cfg.resolved_params()
    assert params['lam_plus'] == pytest.approx(TWO_PI * 3.5e6)
    assert params['zeta'] == 0.1
    assert cfg.resolved_axes()[0].values == pytest.approx((TWO_PI * 35e6, TWO_PI * 70e6))


def test_load_file(tmp_path):
    """
    Test 9: Loading from disk

    Expected: source recorded; missing file is a ConfigError
    """
    path = tmp_path / "stark.conf"
    path.write_text("experiment = stark\n[params]\nlam_plus = 2pi*3.5e6\n")
    cfg = load(path)
    assert cfg.source == str(path)
    assert cfg.experiment == "stark"
    with pytest.raises(ConfigError):
        load(tmp_path / "missing.conf")


def test_validate_programmatic_config():
    """
    Test 10: Configs built in code

    Expected: same validation as parsed ones
    """
    ExperimentConfig(experiment="spectrum").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="spectrum", units="radians").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="rabi", numerics={'n_max': 1}).validate()


def test_environment_defaults(monkeypatch):
    """
    Test 11: HYBSIM_* variables

    Expected: defaults without variables, values with them, invalid threads raise
    """
    monkeypatch.delenv("HYBSIM_OUT_DIR", raising=False)
    monkeypatch.delenv("HYBSIM_THREADS", raising=False)
    assert env_out_dir() == "results"
    assert env_threads() == 1

    monkeypatch.setenv("HYBSIM_OUT_DIR", "/tmp/hyb")
    monkeypatch.setenv("HYBSIM_THREADS", "4")
    assert env_out_dir() == "/tmp/hyb"
    assert env_threads() == 4

    monkeypatch.setenv("HYBSIM_THREADS", "0")
    with pytest.raises(ConfigError):
        env_threads()
