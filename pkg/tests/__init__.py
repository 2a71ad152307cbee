"""
HYB - Test Configuration Lock
Binding tolerances for all test executions
"""
import math
from enum import Enum


class TestTier(str, Enum):
    """Test tiers"""
    UNIT = "unit"
    ACCEPTANCE = "acceptance"
    CLI = "cli"


TWO_PI = 2.0 * math.pi

# Acceptance tolerances (binding)
ACCEPTANCE = {
    "critical_point_rel": 1e-12,
    "closed_vs_numeric_rel": 1e-10,
    "enhancement_ratio_rel": 0.01,
    "eta_minus_over_lambda_max": 0.02,
    "eta_plus_rel": 0.05,
    "rabi_period_rel": 0.02,
    "trace_drift_max": 1e-8,
    "stark_exact_rel": 0.02,
    "iswap_identity_gap": 1e-9,
    "factorization_distance": 1e-6,
    "gate_fidelity_min": 0.995,
}

# Reference parameters (binding)
RABI_RUN = {
    "lam_plus": TWO_PI * 3.5e6,
    "kappa": 1.0e6,
    "gamma_perp": 1.0e3,
    "omega_minus": 100.0,
}

GATE_RUN = {
    "lam_plus": TWO_PI * 3.5e6,
    "delta": TWO_PI * 35e6,
    "g_eff": TWO_PI * 350e3,
    "kappa": 1.0e6,
    "gamma_m": 10.0,
    "gamma_perp": 1.0e3,
}

LAMBDA_BARE = TWO_PI * 7e3


def print_test_header(tier: TestTier, name: str):
    """Print test banner to stdout"""
    print("=" * 70)
    print(f"TIER: {tier.value}")
    print(f"TEST: {name}")
    print("=" * 70)
