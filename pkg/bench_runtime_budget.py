"""
HYB - RUNTIME BUDGET CHECK

Times the acceptance workloads outside pytest, at full size:

- Critical point, 100 random pairs         < 1 s
- Closed form vs symplectic, 50 x 50 grid   < 5 s
- Rabi run, n_max = 8, 5 periods            < 30 s
- iSWAP factorization + fidelity, n = 20    < 120 s
- Spectrum + coupling-map CSVs              < 10 s

Results go to perf_artifacts/runtime_budget.json.

Usage:
    python bench_runtime_budget.py [--skip-gate]
"""
import argparse
import math
import sys
import tempfile
import time
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np
import orjson

from hyb_config import ExperimentConfig
from hyb_dynamics import GateParams, RabiParams, full_dissipative_experiment, rabi_experiment
from hyb_polariton import critical_coupling, polariton_frequencies
from hyb_sweep import run_sweep, write_outputs
from hyb_test_utils import oscillation_period, rng

TWO_PI = 2.0 * math.pi
LAM_PLUS = TWO_PI * 3.5e6
DELTA = TWO_PI * 35e6


def critical_point() -> Dict:
    g = rng(42)
    worst = 0.0
    for _ in range(100):
        delta_a, omega_m = 10.0 ** g.uniform(4, 9, size=2)
        w_plus, w_minus = polariton_frequencies(delta_a, omega_m, critical_coupling(delta_a, omega_m))
        worst = max(worst, w_minus / w_plus)
    return {"pass": worst <= 1e-12, "worst_relative": worst}


def closed_form_grid() -> Dict:
    omega_m = 1.0e7
    worst = 0.0
    for ratio in np.linspace(0.1, 10.0, 50):
        delta_a = ratio * omega_m
        for G in np.linspace(0.0, 0.95 * critical_coupling(delta_a, omega_m), 50):
            Kx = np.array([[delta_a, -2.0 * G], [-2.0 * G, omega_m]])
            numeric = np.sqrt(np.sort(np.linalg.eigvals(np.diag([delta_a, omega_m]) @ Kx).real))
            w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
            worst = max(worst, abs(w_minus - numeric[0]) / numeric[0], abs(w_plus - numeric[1]) / numeric[1])
    return {"pass": worst <= 1e-10, "worst_relative": worst}


def rabi() -> Dict:
    params = RabiParams(lam_plus=LAM_PLUS, kappa=1.0e6, gamma_perp=1.0e3, n_max=8, periods=5)
    traj = rabi_experiment(params)
    period = oscillation_period(traj.times, traj.observables['P_e'], 0.5)
    error = abs(period - params.rabi_period) / params.rabi_period
    drift = traj.metadata['max_trace_drift']
    return {"pass": error < 0.02 and drift < 1e-8, "period_error": error, "trace_drift": drift,
            "steps": traj.metadata['steps']}


def gate(n: int) -> Dict:
    boson_only = GateParams(lam_plus1=LAM_PLUS, delta1=DELTA, kappa=1.0e6, gamma_m=10.0,
                            n_a_th=0.5, n_m_th=0.5, gamma_perp=0.0, n_a=n, n_b=n)
    distance = float(np.max(full_dissipative_experiment(boson_only).observables['distance_ideal']))
    with_spins = GateParams(lam_plus1=LAM_PLUS, delta1=DELTA, kappa=1.0e6, gamma_m=10.0,
                            n_a_th=0.5, n_m_th=0.5, gamma_perp=1.0e3, n_a=n, n_b=n)
    fidelity = full_dissipative_experiment(with_spins).metadata['gate_fidelity']
    return {"pass": distance < 1e-6 and fidelity >= 0.995, "max_distance": distance,
            "gate_fidelity": fidelity, "n_max": n}


def figure_csvs() -> Dict:
    with tempfile.TemporaryDirectory() as tmp:
        spectrum = run_sweep(ExperimentConfig(experiment="spectrum", params={'delta_a': 1e7, 'omega_m': 1e7}))
        write_outputs(spectrum, Path(tmp), "spectrum")
        coupling = run_sweep(ExperimentConfig(experiment="coupling-map"))
        write_outputs(coupling, Path(tmp), "coupling-map")
    minus = [r['omega_minus'] for r in spectrum.rows() if r['status'] == "ok"]
    plus = [r['omega_plus'] for r in spectrum.rows() if r['status'] == "ok"]
    monotone = bool(np.all(np.diff(minus) < 0) and np.all(np.diff(plus) > 0))
    return {"pass": monotone and coupling.n_failed == 0, "spectrum_points": len(minus),
            "coupling_rows": len(coupling.rows())}


def timed(name: str, budget_s: float, fn: Callable[[], Dict]) -> Dict:
    print(f"\n[RUN] {name} (budget {budget_s:.0f}s)")
    start = time.perf_counter()
    result = fn()
    elapsed = time.perf_counter() - start
    result.update({"name": name, "elapsed_s": elapsed, "budget_s": budget_s,
                   "within_budget": elapsed < budget_s})
    symbol = "[OK]" if result["pass"] and result["within_budget"] else "[FAIL]"
    print(f"  {symbol} {elapsed:.3f}s")
    for key, value in result.items():
        if key not in ("name", "pass", "elapsed_s", "budget_s", "within_budget"):
            print(f"       {key}: {value}")
    return result


def main() -> int:
    parser = argparse.ArgumentParser(description="Acceptance runtime budgets")
    parser.add_argument("--skip-gate", action="store_true", help="Skip the n_max = 20 gate run")
    parser.add_argument("--gate-n", type=int, default=20, help="Boson truncation of the gate run")
    args = parser.parse_args()

    print("=" * 70)
    print("HYB - RUNTIME BUDGET CHECK")
    print("=" * 70)

    results: List[Dict] = [
        timed("critical_point", 1.0, critical_point),
        timed("closed_form_grid", 5.0, closed_form_grid),
        timed("rabi_n8", 30.0, rabi),
    ]
    if not args.skip_gate:
        results.append(timed(f"gate_n{args.gate_n}", 120.0, lambda: gate(args.gate_n)))
    results.append(timed("figure_csvs", 10.0, figure_csvs))

    all_passed = all(r["pass"] and r["within_budget"] for r in results)
    print("\n" + "=" * 70)
    print("FINAL VERDICT: " + ("[PASS] All budgets met" if all_passed else "[FAIL] Some budgets missed"))
    print("=" * 70)

    out = Path("perf_artifacts") / "runtime_budget.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(orjson.dumps({
        "test_date": time.strftime("%Y-%m-%d %H:%M:%S UTC", time.gmtime()),
        "results": results,
    }, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))
    print(f"\nResults saved to: {out}")
    return 0 if all_passed else 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n[INTERRUPTED] Run interrupted by user")
