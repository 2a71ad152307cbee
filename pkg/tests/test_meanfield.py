"""
HYB - Mean-Field Steady State Tests

Tests the driven classical steady state and the constant helpers:
- Trivial limits (no drive, no coupling)
- Self-consistency and cubic elimination
- Branch tracking and bistable termination
- Coupling estimate, Bose occupations, linewidth
"""
import math

import numpy as np
import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from hyb_errors import ConvergenceError, PhysicsDomainError
from hyb_meanfield import (
    CONSTANTS, SystemParams, cavity_linewidth, coupling_estimate, cubic_residual, drive_for_photon_number,
    frequency_for_occupation, solve_mean_fields, spin_drive_for_cancellation, spin_transition_frequency,
    thermal_occupation,
)
from tests import TWO_PI


def dimensionless(g: float = 0.1, Omega_d: complex = 1.0) -> SystemParams:
    """Delta_0 = 1, kappa = 0.1, omega_m = 1, gamma_m = 0, so chi = 2 g^2"""
    return SystemParams(omega_a=2.0, omega_d=1.0, omega_m=1.0, gamma_m=0.0, kappa=0.1, g=g, Omega_d=Omega_d)


def test_no_drive():
    """
    Test 1: Undriven system

    Expected: zero fields, Delta_a = Delta_0, G = 0
    """
    mf = solve_mean_fields(dimensionless(Omega_d=0.0))
    assert mf.a_mean == 0
    assert mf.N == 0
    assert mf.delta_a == pytest.approx(1.0)
    assert mf.G == 0


def test_no_coupling():
    """
    Test 2: Drive without optomechanical coupling

    Expected: <a> = -Omega_d / (Delta_0 - i kappa), Delta_a unshifted
    """
    mf = solve_mean_fields(dimensionless(g=0.0))
    expected = -1.0 / (1.0 - 0.1j)
    assert mf.a_mean == pytest.approx(expected)
    assert mf.N == pytest.approx(1.0 / 1.01)
    assert mf.delta_a == pytest.approx(1.0)


def test_self_consistency():
    """
    Test 3: Weak coupling steady state

    Expected: residual below tolerance, all three relations hold, cubic vanishes
    """
    p = dimensionless(g=0.1)
    mf = solve_mean_fields(p)
    assert mf.residual < 1e-12
    assert mf.a_mean == pytest.approx(-p.Omega_d / (mf.delta_a - 1j * p.kappa), rel=1e-12)
    assert mf.b_mean == pytest.approx(p.g * mf.N / (p.omega_m - 1j * p.gamma_m), rel=1e-12)
    assert mf.delta_a == pytest.approx(p.delta_a0 - 2.0 * p.g * mf.b_mean.real, rel=1e-12)
    assert abs(cubic_residual(p, mf.N)) < 1e-9
    assert mf.G == pytest.approx(p.g * math.sqrt(mf.N))
    # Radiation pressure pulls the detuning down
    assert mf.delta_a < p.delta_a0


def test_branch_connected_to_zero_coupling():
    """
    Test 4: Three steady states, low branch selected

    Expected: drive chosen for N = 2 at chi = 0.02 returns N = 2 even though
              the cubic has two further roots at larger N
    """
    p = dimensionless(g=0.1)
    p = p.replace(Omega_d=drive_for_photon_number(p, 2.0))
    mf = solve_mean_fields(p)
    assert mf.N == pytest.approx(2.0, rel=1e-9)
    assert mf.delta_a == pytest.approx(1.0 - 0.02 * 2.0, rel=1e-9)


def test_moderate_coupling_branch():
    """
    Test 5: Branch still exists at chi = 0.1

    Expected: converged root stays on the high-detuning side (Delta_a > 0.66)
    """
    mf = solve_mean_fields(dimensionless(g=math.sqrt(0.05)))
    assert mf.delta_a > 0.66
    assert mf.residual < 1e-12


def test_bistable_branch_ends():
    """
    Test 6: Drive past the saddle-node of the connected branch

    Expected: ConvergenceError at chi = 0.3
    """
    with pytest.raises(ConvergenceError):
        solve_mean_fields(dimensionless(g=math.sqrt(0.15)))


def test_resonant_undamped_drive():
    """
    Test 7: Resonant drive on a lossless cavity

    Expected: ConvergenceError (no steady state)
    """
    p = SystemParams(omega_a=1.0, omega_d=1.0, kappa=0.0, g=0.0, Omega_d=1.0)
    with pytest.raises(ConvergenceError):
        solve_mean_fields(p)


def test_parameter_validation():
    """
    Test 8: Unphysical parameters

    Expected: PhysicsDomainError for negative rates, zero omega_m, bad tolerance
    """
    with pytest.raises(PhysicsDomainError):
        SystemParams(kappa=-1.0)
    with pytest.raises(PhysicsDomainError):
        SystemParams(omega_m=0.0)
    with pytest.raises(PhysicsDomainError):
        solve_mean_fields(dimensionless(), tol=0.0)
    with pytest.raises(PhysicsDomainError):
        drive_for_photon_number(dimensionless(), -1.0)


def test_coupling_estimate():
    """
    Test 9: Spin-cavity coupling from the vacuum current

    Expected: about 25.6 rad/s at d = 50 um, omega_a = 2pi 2 GHz, L_a = 2 nH;
              scales as 1/d, sqrt(omega_a), 1/sqrt(L_a)
    """
    omega_a = 2.0 * math.pi * 2.0e9
    lam = coupling_estimate(50e-6, omega_a, 2e-9)
    assert lam == pytest.approx(25.6, rel=0.01)
    assert coupling_estimate(25e-6, omega_a, 2e-9) == pytest.approx(2.0 * lam)
    assert coupling_estimate(50e-6, 4.0 * omega_a, 2e-9) == pytest.approx(2.0 * lam)
    assert coupling_estimate(50e-6, omega_a, 8e-9) == pytest.approx(0.5 * lam)
    with pytest.raises(PhysicsDomainError):
        coupling_estimate(0.0, omega_a, 2e-9)


def test_thermal_occupation():
    """
    Test 10: Bose factors at 20 mK

    Expected: mechanics (1e7 rad/s) ~ 261 quanta, cavity (2pi 2 GHz) ~ 0.008;
              T = 0 gives 0; inverse recovers the frequency
    """
    n_m = thermal_occupation(1.0e7, 0.02)
    assert 255 < n_m < 265
    n_a = thermal_occupation(2.0 * math.pi * 2.0e9, 0.02)
    assert 0.005 < n_a < 0.012
    assert thermal_occupation(1.0e7, 0.0) == 0.0
    assert frequency_for_occupation(n_m, 0.02) == pytest.approx(1.0e7, rel=1e-10)
    with pytest.raises(PhysicsDomainError):
        thermal_occupation(0.0, 0.02)


def test_linewidth_and_spin_frequency():
    """
    Test 11: kappa = omega_a / Q, NV lower transition, drive cancellation

    Expected: closed forms
    """
    assert cavity_linewidth(3.0e10, 3.0e4) == pytest.approx(1.0e6)
    assert spin_transition_frequency(0.0) == pytest.approx(CONSTANTS.D)
    assert spin_transition_frequency(0.01) < CONSTANTS.D
    assert spin_drive_for_cancellation(2.0, 0.5 - 0.25j) == pytest.approx(1.0 - 0.5j)
    with pytest.raises(PhysicsDomainError):
        cavity_linewidth(1.0, 0.0)


def test_physical_scale_steady_state():
    """
    Test 12: Drive for 10^6 photons at laboratory scale

    Expected: omega_a - omega_d = 2pi 10 MHz, kappa = 1e6, g = 2pi 100 Hz gives N = 1e6,
              residual below 1e-12, the three relations and the cubic all satisfied
    """
    p = SystemParams(omega_a=TWO_PI * 2.0e9, omega_d=TWO_PI * 2.0e9 - TWO_PI * 1.0e7, kappa=1.0e6,
                     g=TWO_PI * 100.0)
    p = p.replace(Omega_d=drive_for_photon_number(p, 1.0e6))
    mf = solve_mean_fields(p)
    assert mf.N == pytest.approx(1.0e6, rel=1e-9)
    assert mf.residual < 1e-12
    assert mf.a_mean == pytest.approx(-p.Omega_d / (mf.delta_a - 1j * p.kappa), rel=1e-12)
    assert mf.b_mean == pytest.approx(p.g * mf.N / (p.omega_m - 1j * p.gamma_m), rel=1e-12)
    assert mf.delta_a == pytest.approx(p.delta_a0 - 2.0 * p.g * mf.b_mean.real, rel=1e-12)
    assert abs(cubic_residual(p, mf.N)) / abs(p.Omega_d) ** 2 < 1e-9
    assert mf.G == pytest.approx(p.g * 1.0e3, rel=1e-9)


def test_photon_number_monotone_in_drive():
    """
    Test 13: N along a drive ramp below the saddle-node

    Expected: N strictly increasing in |Omega_d|, reaching the targeted N = 8
    """
    p = dimensionless(g=0.1)
    drives = np.linspace(0.0, drive_for_photon_number(p, 8.0), 12)
    N = np.array([solve_mean_fields(p.replace(Omega_d=w)).N for w in drives])
    assert N[0] == 0
    assert np.all(np.diff(N) > 0)
    assert N[-1] == pytest.approx(8.0, rel=1e-9)
