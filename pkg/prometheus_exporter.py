"""
PROMETHEUS_EXPORTER.PY - Run Metrics for the hybrid simulator

Exports per-run metrics:
- hybsim_points_total{experiment, status}
- hybsim_point_duration_seconds{experiment}
- hybsim_rk4_steps_total
- hybsim_trace_drift_max
- hybsim_meanfield_fallbacks_total
- hybsim_process_rss_bytes

No HTTP endpoint: metrics are rendered as text or written to a node-exporter
textfile after a run.

Usage:
    from prometheus_exporter import get_exporter

    exporter = get_exporter()
    exporter.record_point("spectrum", "ok", duration_s=0.002)
    exporter.write_textfile("/var/lib/node_exporter/hybsim.prom")
"""
import logging
import threading
from typing import Optional

from prometheus_client import (
    CollectorRegistry, Counter, Gauge, Histogram, generate_latest, write_to_textfile,
)

# Try to import psutil for RSS tracking
try:
    import psutil
    HAS_PSUTIL = True
except ImportError:
    HAS_PSUTIL = False

logger = logging.getLogger("PROMETHEUS")

DURATION_BUCKETS = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0)


class SimMetricsExporter:
    """Prometheus metrics for sweeps and integrator runs"""

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        """
        Initialize exporter

        Args:
            registry: Registry to attach metrics to (private one by default,
                      so repeated exporters in tests never collide)
        """
        self.registry = registry if registry is not None else CollectorRegistry()
        self._lock = threading.Lock()
        self._max_drift = 0.0

        self.points = Counter(
            "hybsim_points", "Sweep points evaluated", ["experiment", "status"], registry=self.registry
        )
        self.point_duration = Histogram(
            "hybsim_point_duration_seconds", "Wall time per sweep point", ["experiment"],
            buckets=DURATION_BUCKETS, registry=self.registry,
        )
        self.rk4_steps = Counter("hybsim_rk4_steps", "RK4 steps taken", registry=self.registry)
        self.trace_drift = Gauge(
            "hybsim_trace_drift_max", "Largest |Tr rho - 1| seen in any run", registry=self.registry
        )
        self.solver_fallbacks = Counter(
            "hybsim_meanfield_fallbacks", "Mean-field solves that needed the cubic fallback",
            registry=self.registry,
        )
        self.runs = Counter("hybsim_runs", "CLI runs by exit status", ["status"], registry=self.registry)
        self.process_rss = Gauge("hybsim_process_rss_bytes", "Process RSS memory in bytes", registry=self.registry)

        logger.debug("Prometheus exporter initialized")

    def record_point(self, experiment: str, status: str, duration_s: float = 0.0):
        """Record one evaluated sweep point"""
        self.points.labels(experiment=experiment, status=status).inc()
        self.point_duration.labels(experiment=experiment).observe(max(duration_s, 0.0))

    def record_rk4_steps(self, steps: int):
        self.rk4_steps.inc(steps)

    def record_trace_drift(self, drift: float):
        """Keep the maximum drift over all runs"""
        with self._lock:
            if drift > self._max_drift:
                self._max_drift = drift
                self.trace_drift.set(drift)

    def record_solver_fallback(self):
        self.solver_fallbacks.inc()

    def record_run(self, status: str):
        self.runs.labels(status=status).inc()

    def update_rss(self):
        """Sample current process RSS"""
        if not HAS_PSUTIL:
            return
        try:
            self.process_rss.set(psutil.Process().memory_info().rss)
        except Exception as e:
            logger.warning(f"[RSS] Failed to update RSS: {e}")

    def get_metrics_text(self) -> str:
        """
        Prometheus text exposition of all metrics

        Returns:
            Metrics in Prometheus text format
        """
        self.update_rss()
        return generate_latest(self.registry).decode("utf-8")

    def write_textfile(self, path: str):
        """Write metrics for the node-exporter textfile collector"""
        self.update_rss()
        write_to_textfile(path, self.registry)
        logger.info(f"[METRICS] Written to {path}")


# Global exporter instance
_global_exporter = None
_global_lock = threading.Lock()


def get_exporter() -> SimMetricsExporter:
    """Get global exporter instance (singleton)"""
    global _global_exporter
    with _global_lock:
        if _global_exporter is None:
            _global_exporter = SimMetricsExporter()
        return _global_exporter


def reset_exporter():
    """Drop the global instance (tests)"""
    global _global_exporter
    with _global_lock:
        _global_exporter = None
