"""
HYB - Electromechanical Polariton Tests

Tests the normal modes of the linearized cavity-mechanics Hamiltonian:
- Critical point and stability boundary
- Closed forms against the symplectic diagonalization
- Spin-polariton enhancement and decoupling limits
- Low-polariton operator and spin + polariton Hamiltonians
"""
import math

import numpy as np
import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from hyb_errors import CouplingRangeError, PhysicsDomainError, SingularCouplingError, UnstableRegimeError
from hyb_polariton import (
    bogoliubov_diagonalize, coupling_for_omega_minus, critical_coupling, extract_spin_couplings,
    linearized_hamiltonian, low_polariton_operator, mixing_angle, near_critical_polariton_operator,
    polariton_frequencies, spin_polariton_couplings, symplectic_deviation, transformed_hamiltonian,
)
from hyb_test_utils import rng
from tests import ACCEPTANCE, LAMBDA_BARE, TWO_PI


def test_critical_point_random_pairs():
    """
    Test 1: omega_minus vanishes at G_c

    Expected: omega_minus(G_c) = 0 to 1e-12 relative for 100 random stable pairs
    """
    g = rng(42)
    for _ in range(100):
        delta_a, omega_m = 10.0 ** g.uniform(4, 9, size=2)
        G_c = critical_coupling(delta_a, omega_m)
        w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G_c)
        assert w_minus <= ACCEPTANCE["critical_point_rel"] * w_plus


def test_closed_form_matches_symplectic_eigenvalues():
    """
    Test 2: Closed-form frequencies on a 50 x 50 grid

    Expected: match sqrt(eig(K_p K_x)) of the quadrature form to 1e-10 relative
    """
    omega_m = 1.0e7
    for ratio in np.linspace(0.1, 10.0, 50):
        delta_a = ratio * omega_m
        G_c = critical_coupling(delta_a, omega_m)
        for G in np.linspace(0.0, 0.95 * G_c, 50):
            Kx = np.array([[delta_a, -2.0 * G], [-2.0 * G, omega_m]])
            Kp = np.diag([delta_a, omega_m])
            numeric = np.sqrt(np.sort(np.linalg.eigvals(Kp @ Kx).real))
            w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
            assert w_minus == pytest.approx(numeric[0], rel=ACCEPTANCE["closed_vs_numeric_rel"])
            assert w_plus == pytest.approx(numeric[1], rel=ACCEPTANCE["closed_vs_numeric_rel"])


def test_uncoupled_limit():
    """
    Test 3: G = 0

    Expected: omega_plus = max(Delta_a, omega_m), omega_minus = min, theta = 0 for Delta_a > omega_m
    """
    w_plus, w_minus = polariton_frequencies(3.0, 1.0, 0.0)
    assert w_plus == pytest.approx(3.0)
    assert w_minus == pytest.approx(1.0)
    assert mixing_angle(3.0, 1.0, 0.0) == pytest.approx(0.0)


def test_mixing_angle_at_degeneracy():
    """
    Test 4: Delta_a = omega_m

    Expected: theta = pi/4 for any G > 0
    """
    assert mixing_angle(1.0, 1.0, 0.2) == pytest.approx(math.pi / 4)


def test_unstable_regime():
    """
    Test 5: G beyond G_c and negative G

    Expected: UnstableRegimeError carrying |omega_minus^2|; CouplingRangeError for G < 0
    """
    G_c = critical_coupling(1.0, 1.0)
    with pytest.raises(UnstableRegimeError) as exc:
        polariton_frequencies(1.0, 1.0, 1.1 * G_c)
    assert exc.value.magnitude > 0
    assert exc.value.status == "unstable"
    with pytest.raises(CouplingRangeError):
        polariton_frequencies(1.0, 1.0, -0.1)
    with pytest.raises(PhysicsDomainError):
        critical_coupling(0.0, 1.0)


def test_spectrum_monotone_in_G():
    """
    Test 6: Spectrum shape

    Expected: omega_minus decreasing, omega_plus increasing on [0, G_c)
    """
    G_c = critical_coupling(1.0e7, 1.0e7)
    values = [polariton_frequencies(1.0e7, 1.0e7, G) for G in np.linspace(0.0, 0.999 * G_c, 60)]
    plus = np.array([v[0] for v in values])
    minus = np.array([v[1] for v in values])
    assert np.all(np.diff(minus) < 0)
    assert np.all(np.diff(plus) > 0)


def test_coupling_for_omega_minus():
    """
    Test 7: Inverse of the low-polariton frequency

    Expected: round trip to 1e-4; omega_minus = 0 gives G_c; out of range raises
    """
    delta_a, omega_m = 1.0e8, 1.0e7
    for target in (1.0e2, 1.0e4, 3.0e6):
        G = coupling_for_omega_minus(delta_a, omega_m, target)
        assert polariton_frequencies(delta_a, omega_m, G)[1] == pytest.approx(target, rel=1e-4)
    assert coupling_for_omega_minus(delta_a, omega_m, 0.0) == pytest.approx(critical_coupling(delta_a, omega_m))
    with pytest.raises(CouplingRangeError):
        coupling_for_omega_minus(delta_a, omega_m, 2.0 * omega_m)
    with pytest.raises(CouplingRangeError):
        coupling_for_omega_minus(delta_a, omega_m, -1.0)


def test_enhancement_ratio():
    """
    Test 8: Coupling enhancement near the critical point

    Expected: Delta_a = 1e6 omega_minus, Delta_a/omega_m = 10 gives lambda_plus/lambda ~ 500
              and lambda_plus ~ 2pi 3.5 MHz for lambda = 2pi 7 kHz, both within 1%
    """
    omega_m = 1.0e7
    delta_a = 10.0 * omega_m
    G = coupling_for_omega_minus(delta_a, omega_m, delta_a * 1e-6)
    lam_plus = spin_polariton_couplings(1.0, delta_a, omega_m, G)[0]
    assert lam_plus == pytest.approx(500.0, rel=ACCEPTANCE["enhancement_ratio_rel"])

    lam_plus_abs = spin_polariton_couplings(LAMBDA_BARE, delta_a, omega_m, G)[0]
    assert lam_plus_abs == pytest.approx(TWO_PI * 3.5e6, rel=ACCEPTANCE["enhancement_ratio_rel"])


def test_decoupling_limits():
    """
    Test 9: High polariton decouples for Delta_a >> omega_m

    Expected: at G = 0.999 G_c, Delta_a/omega_m = 100:
              eta_minus/lambda < 0.02, eta_plus within 5% of lambda omega_m/Delta_a
    """
    delta_a, omega_m = 100.0, 1.0
    G = 0.999 * critical_coupling(delta_a, omega_m)
    _, _, eta_plus, eta_minus = spin_polariton_couplings(1.0, delta_a, omega_m, G)
    assert abs(eta_minus) < ACCEPTANCE["eta_minus_over_lambda_max"]
    reference = omega_m / delta_a
    assert abs(eta_plus - reference) / reference < ACCEPTANCE["eta_plus_rel"]


def test_singular_coupling_guard():
    """
    Test 10: Couplings at and near the critical point

    Expected: SingularCouplingError at G_c, and below the epsilon guard
    """
    G_c = critical_coupling(1.0, 1.0)
    with pytest.raises(SingularCouplingError):
        spin_polariton_couplings(1.0, 1.0, 1.0, G_c)
    with pytest.raises(SingularCouplingError):
        bogoliubov_diagonalize(1.0, 1.0, G_c)
    G = coupling_for_omega_minus(1.0, 1.0, 1e-3)
    spin_polariton_couplings(1.0, 1.0, 1.0, G)
    with pytest.raises(SingularCouplingError):
        spin_polariton_couplings(1.0, 1.0, 1.0, G, epsilon=1e-2)
    with pytest.raises(PhysicsDomainError):
        spin_polariton_couplings(1.0, 1.0, 1.0, 0.1, labeling="textbook")


def test_bogoliubov_is_symplectic():
    """
    Test 11: Numeric transform preserves commutators

    Expected: deviation below 1e-10, frequencies equal the closed form,
              quadratic form rebuilt from S equals blockdiag(K_x, K_p)
    """
    delta_a, omega_m = 2.0, 1.0
    G = 0.5 * critical_coupling(delta_a, omega_m)
    basis = bogoliubov_diagonalize(delta_a, omega_m, G)
    assert symplectic_deviation(basis) < 1e-10

    w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
    assert basis.omega_plus == pytest.approx(w_plus, rel=1e-12)
    assert basis.omega_minus == pytest.approx(w_minus, rel=1e-12)

    H = np.zeros((4, 4))
    H[:2, :2] = [[delta_a, -2.0 * G], [-2.0 * G, omega_m]]
    H[2:, 2:] = np.diag([delta_a, omega_m])
    assert np.allclose(basis.quadratic_form(), H, rtol=1e-10, atol=1e-12)


def test_extracted_couplings_follow_normal_modes():
    """
    Test 12: Couplings read off the transform

    Expected: magnitudes equal the closed form under the normal-mode labeling
    """
    delta_a, omega_m = 3.0, 1.0
    G = 0.7 * critical_coupling(delta_a, omega_m)
    basis = bogoliubov_diagonalize(delta_a, omega_m, G, lam=0.01)
    extracted = np.abs(extract_spin_couplings(basis))
    closed = np.abs(spin_polariton_couplings(0.01, delta_a, omega_m, G, labeling="normal-mode"))
    assert extracted == pytest.approx(closed, rel=1e-9)


def test_low_polariton_commutator():
    """
    Test 13: Exact low-polariton operator is a bosonic mode

    Expected: <00|[a-, a-^+]|00> = 1 on the truncated space
    """
    basis = bogoliubov_diagonalize(1.0, 1.0, 0.25)
    a = low_polariton_operator(basis, 4, 4)
    comm = a.commutator(a.dag()).matrix
    assert comm[0, 0].real == pytest.approx(1.0, rel=1e-9)


def test_near_critical_operator_limit():
    """
    Test 14: Near-critical form of the low polariton

    Expected: within 1e-3 (relative) of the exact row when omega_minus = 1e-4 omega_m
    """
    G = coupling_for_omega_minus(1.0, 1.0, 1e-4)
    basis = bogoliubov_diagonalize(1.0, 1.0, G, labeling="normal-mode")
    exact = low_polariton_operator(basis, 3, 3).matrix
    approx = near_critical_polariton_operator(basis, 3, 3).matrix
    assert np.linalg.norm(exact - approx) / np.linalg.norm(exact) < 1e-3


def test_spin_polariton_hamiltonians():
    """
    Test 15: Spin + polariton Hamiltonians

    Expected: Hermitian; selecting no coupling terms leaves a diagonal operator
    """
    basis = bogoliubov_diagonalize(2.0, 1.0, 0.3, lam=0.05)
    H = transformed_hamiltonian(basis, delta_nv=0.5, truncations=(3, 3))
    assert H.space.dims == (2, 3, 3)
    assert H.is_hermitian()

    bare = transformed_hamiltonian(basis, delta_nv=0.5, truncations=(3, 3), terms=())
    assert np.allclose(bare.matrix, np.diag(np.diag(bare.matrix)))

    with pytest.raises(PhysicsDomainError):
        transformed_hamiltonian(basis, 0.5, terms=("lam_zero",))

    lin = linearized_hamiltonian(2.0, 1.0, 0.3, delta_nv=0.5, lam=0.05, truncations=(3, 3))
    assert lin.space.labels == ("spin", "cavity", "mechanics")
    assert lin.is_hermitian()


def test_near_critical_operator_detuned_default():
    """
    Test 16: Near-critical form away from degeneracy

    Expected: Delta_a/omega_m = 10, G = 0.9999 G_c on a printed-labeling basis:
              default form within 5% of the exact row, the printed form is not
    """
    delta_a, omega_m = 10.0, 1.0
    basis = bogoliubov_diagonalize(delta_a, omega_m, 0.9999 * critical_coupling(delta_a, omega_m))
    assert basis.labeling == "printed"
    exact = low_polariton_operator(basis, 6, 6).matrix
    default = near_critical_polariton_operator(basis, 6, 6).matrix
    printed = near_critical_polariton_operator(basis, 6, 6, labeling="printed").matrix
    assert np.linalg.norm(exact - default) / np.linalg.norm(exact) < 0.05
    assert np.linalg.norm(exact - printed) / np.linalg.norm(exact) > 0.5


def test_mixing_angle_at_critical_point():
    """
    Test 17: theta at G = G_c for Delta_a/omega_m = 10

    Expected: theta = atan(20/99)/2 ~ 0.0997 rad; just below G_c the low
              normal mode is (sin theta, cos theta) on (cavity, mechanics)
    """
    G_c = critical_coupling(10.0, 1.0)
    theta = mixing_angle(10.0, 1.0, G_c)
    assert theta == pytest.approx(0.5 * math.atan(20.0 / 99.0), rel=1e-12)
    assert abs(theta - 0.0997) < 5e-5

    basis = bogoliubov_diagonalize(10.0, 1.0, 0.999 * G_c)
    low, high = basis.normal_mode_amplitudes()
    th = basis.theta
    assert np.abs(low) == pytest.approx([math.sin(th), math.cos(th)], abs=1e-9)
    assert np.abs(high) == pytest.approx([math.cos(th), math.sin(th)], abs=1e-9)


def test_rotating_wave_hamiltonian_is_jaynes_cummings():
    """
    Test 18: Keeping only the lambda_+ term

    Expected: spectrum equals the Jaynes-Cummings spectrum of (spin, low polariton)
              plus k omega_+ for each high-polariton occupation k
    """
    from hyb_dynamics import jc_hamiltonian

    basis = bogoliubov_diagonalize(2.0, 1.0, 0.3, lam=0.05)
    n_low, n_high = 4, 3
    delta_nv = basis.omega_minus
    H = transformed_hamiltonian(basis, delta_nv, truncations=(n_low, n_high), terms=("lam_plus",))
    jc = jc_hamiltonian(delta_nv, basis.omega_minus, basis.lam_plus, n_low)
    jc_levels = np.linalg.eigvalsh(jc.matrix)
    expected = np.sort([e + k * basis.omega_plus for e in jc_levels for k in range(n_high)])
    assert np.linalg.eigvalsh(H.matrix) == pytest.approx(expected, abs=1e-10)
