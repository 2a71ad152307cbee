"""
HYB - Run Metrics Tests

Tests the Prometheus exporter:
- Counters and gauges on a private registry
- Trace-drift maximum
- Textfile output and the global singleton
"""
import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from prometheus_client import CollectorRegistry

from hyb_dynamics import DissipatorSpec, evolve
from hyb_operators import DensityMatrix, annihilation, number
from prometheus_exporter import SimMetricsExporter, get_exporter, reset_exporter


@pytest.fixture
def exporter():
    return SimMetricsExporter(CollectorRegistry())


def sample(exporter, name, labels=None):
    return exporter.registry.get_sample_value(name, labels or {})


def test_point_counters(exporter):
    """
    Test 1: Sweep point accounting

    Expected: counter per (experiment, status), histogram count per experiment
    """
    exporter.record_point("spectrum", "ok", 0.002)
    exporter.record_point("spectrum", "ok", 0.003)
    exporter.record_point("spectrum", "unstable", 0.001)
    assert sample(exporter, "hybsim_points_total", {"experiment": "spectrum", "status": "ok"}) == 2.0
    assert sample(exporter, "hybsim_points_total", {"experiment": "spectrum", "status": "unstable"}) == 1.0
    assert sample(exporter, "hybsim_point_duration_seconds_count", {"experiment": "spectrum"}) == 3.0


def test_trace_drift_keeps_maximum(exporter):
    """
    Test 2: Drift gauge

    Expected: only larger values replace the stored maximum
    """
    exporter.record_trace_drift(1e-12)
    exporter.record_trace_drift(1e-10)
    exporter.record_trace_drift(1e-11)
    assert sample(exporter, "hybsim_trace_drift_max") == pytest.approx(1e-10)


def test_run_and_solver_counters(exporter):
    """
    Test 3: Run status and solver fallbacks

    Expected: counters increment
    """
    exporter.record_run("ok")
    exporter.record_run("config_error")
    exporter.record_solver_fallback()
    exporter.record_rk4_steps(80)
    assert sample(exporter, "hybsim_runs_total", {"status": "config_error"}) == 1.0
    assert sample(exporter, "hybsim_meanfield_fallbacks_total") == 1.0
    assert sample(exporter, "hybsim_rk4_steps_total") == 80.0


def test_text_and_textfile(exporter, tmp_path):
    """
    Test 4: Exposition

    Expected: text contains metric names; textfile written
    """
    exporter.record_run("ok")
    text = exporter.get_metrics_text()
    assert "hybsim_runs_total" in text
    path = tmp_path / "hybsim.prom"
    exporter.write_textfile(str(path))
    assert 'hybsim_runs_total{status="ok"} 1.0' in path.read_text()


def test_integrator_reports_to_global_exporter():
    """
    Test 5: RK4 runs feed the singleton

    Expected: step count recorded; reset gives a fresh instance
    """
    reset_exporter()
    rho0 = DensityMatrix.thermal(0.2, 4)
    evolve(rho0, number(4), [DissipatorSpec(annihilation(4), 1.0, 0.2)], 1.0, dt=0.1)
    prom = get_exporter()
    assert prom.registry.get_sample_value("hybsim_rk4_steps_total") == 10.0
    reset_exporter()
    assert get_exporter() is not prom
    reset_exporter()
