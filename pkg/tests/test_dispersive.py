"""
HYB - Dispersive Coupling Tests

Tests the two-spin effective model:
- Effective coupling and Stark shift closed forms
- Exact Jaynes-Cummings cross-check
- Resonance condition for unequal couplings
- iSWAP construction and the full-model validation sweep
"""
import logging
import math

import numpy as np
import pytest
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from hyb_dispersive import (
    IDX_EE, IDX_EG, IDX_GE, IDX_GG, DispersiveParams, average_gate_fidelity, dispersive_error_check,
    effective_hamiltonian, exact_stark_shift, flip_flop, ideal_iswap, iswap_evolution, resonant_second_detuning,
    stark_shift, two_spin_jc_hamiltonian,
)
from hyb_errors import DimensionError, DispersiveRegimeError, PhysicsDomainError
from tests import ACCEPTANCE, GATE_RUN, TWO_PI


@pytest.fixture
def symmetric():
    """Two identical spins at zeta = 0.1"""
    return DispersiveParams((GATE_RUN["lam_plus"],) * 2, (GATE_RUN["delta"],) * 2)


def test_effective_coupling(symmetric):
    """
    Test 1: g_eff for the symmetric gate

    Expected: lambda = 2pi 3.5 MHz, delta = 2pi 35 MHz gives g_eff = 2pi 350 kHz
    """
    assert symmetric.g_eff == pytest.approx(GATE_RUN["g_eff"], rel=1e-12)
    assert symmetric.g_eff_hz == pytest.approx(350e3, rel=1e-12)
    assert symmetric.zeta == pytest.approx((0.1, 0.1))
    assert symmetric.detuning_mismatch == pytest.approx(0.0)
    assert symmetric.gate_time() == pytest.approx(math.pi / (2.0 * GATE_RUN["g_eff"]))


def test_stark_shift_closed_form():
    """
    Test 2: Stark shift per polariton

    Expected: zero-point lambda zeta, single-polariton shift 2 lambda zeta = 2pi 0.7 MHz
    """
    zero_point, shift = stark_shift(GATE_RUN["lam_plus"], GATE_RUN["delta"], 1)
    assert zero_point == pytest.approx(TWO_PI * 0.35e6, rel=1e-12)
    assert shift == pytest.approx(TWO_PI * 0.7e6, rel=1e-12)
    assert stark_shift(GATE_RUN["lam_plus"], GATE_RUN["delta"], 0)[1] == 0.0
    # Signed for spins below the polariton
    assert stark_shift(GATE_RUN["lam_plus"], -GATE_RUN["delta"], 1)[1] == pytest.approx(-TWO_PI * 0.7e6)
    with pytest.raises(PhysicsDomainError):
        stark_shift(GATE_RUN["lam_plus"], GATE_RUN["delta"], -1)


def test_exact_stark_cross_check():
    """
    Test 3: Dressed Jaynes-Cummings energies

    Expected: within 2% of 2 lambda zeta at zeta = 0.1, equal to
              sqrt(delta^2/4 + 2 lambda^2) - delta/2
    """
    lam, delta = GATE_RUN["lam_plus"], GATE_RUN["delta"]
    exact = exact_stark_shift(lam, delta, 1)
    closed = stark_shift(lam, delta, 1)[1]
    assert abs(exact - closed) / closed < ACCEPTANCE["stark_exact_rel"]
    assert exact == pytest.approx(math.sqrt(delta ** 2 / 4 + 2 * lam ** 2) - delta / 2, rel=1e-9)
    assert exact_stark_shift(lam, delta, 0) == pytest.approx(0.0, abs=1e-6 * closed)
    with pytest.raises(PhysicsDomainError):
        exact_stark_shift(lam, delta, 1.5)


def test_zeta_limits(caplog):
    """
    Test 4: Dispersive regime boundaries

    Expected: zeta >= 1 raises, zeta > 0.2 only warns, delta = 0 raises
    """
    lam = 1.0
    with pytest.raises(DispersiveRegimeError):
        DispersiveParams((lam, lam), (1.0, 1.0))
    with pytest.raises(DispersiveRegimeError):
        DispersiveParams((lam, lam), (0.0, 10.0))
    with caplog.at_level(logging.WARNING, logger="DISPERSIVE"):
        DispersiveParams((lam, lam), (3.0, 10.0))
    assert any("zeta" in r.getMessage() for r in caplog.records)
    with pytest.raises(DimensionError):
        DispersiveParams((lam,), (10.0,))


def test_resonant_second_detuning():
    """
    Test 5: Resonance for unequal couplings

    Expected: chosen delta_2 equalizes the effective spin frequencies, also with polaritons present
    """
    lam1, lam2 = TWO_PI * 3.5e6, TWO_PI * 2.0e6
    delta1 = 10.0 * lam1
    for N_pl in (0.0, 2.0):
        delta2 = resonant_second_detuning(lam1, delta1, lam2, N_pl)
        dp = DispersiveParams((lam1, lam2), (delta1, delta2), N_pl=N_pl)
        assert abs(dp.detuning_mismatch) < 1e-9 * delta1
        assert delta2 > 0
    # Equal couplings keep the detuning
    assert resonant_second_detuning(lam1, delta1, lam1) == pytest.approx(delta1)


def test_effective_hamiltonian_structure(symmetric):
    """
    Test 6: Effective Hamiltonian in the spins' frame

    Expected: Hermitian, flip-flop element g_eff between |eg> and |ge>,
              equal diagonal entries in the single-excitation sector
    """
    mean = symmetric.delta_eff[0]
    H = effective_hamiltonian(symmetric, frame=mean).matrix
    assert np.allclose(H, H.conj().T)
    assert H[IDX_EG, IDX_GE].real == pytest.approx(symmetric.g_eff)
    assert H[IDX_EG, IDX_EG] == pytest.approx(H[IDX_GE, IDX_GE])


def test_iswap_identity():
    """
    Test 7: Flip-flop evolution at the gate time

    Expected: average gate fidelity with the ideal iSWAP >= 1 - 1e-9
    """
    g_eff = GATE_RUN["g_eff"]
    U = iswap_evolution(g_eff, math.pi / (2.0 * g_eff))
    fid = average_gate_fidelity(U, ideal_iswap())
    assert fid >= 1.0 - ACCEPTANCE["iswap_identity_gap"]
    assert average_gate_fidelity(np.eye(4), ideal_iswap()) < 0.5
    with pytest.raises(PhysicsDomainError):
        iswap_evolution(-1.0, 0.1)
    with pytest.raises(DimensionError):
        average_gate_fidelity(np.eye(2), np.eye(4))


def test_two_spin_jc_hamiltonian():
    """
    Test 8: Shared-polariton model

    Expected: Hermitian on (spin1, spin2, polariton), commutes with the excitation number
    """
    H = two_spin_jc_hamiltonian((1.1, 0.9), 1.0, (0.05, 0.07), n_max=4)
    assert H.space.labels == ("spin1", "spin2", "polariton")
    assert H.is_hermitian()
    # Excitation number: spins' P_e plus polariton number
    pe = np.diag([1.0, 0.0])
    n = np.diag(np.arange(4.0))
    N = (np.kron(np.kron(pe, np.eye(2)), np.eye(4)) + np.kron(np.kron(np.eye(2), pe), np.eye(4))
         + np.kron(np.eye(4), n))
    assert np.allclose(H.matrix @ N, N @ H.matrix)
    with pytest.raises(DimensionError):
        two_spin_jc_hamiltonian((1.0, 1.0), 1.0, (0.1, 0.1), n_max=1)


def test_dispersive_validation_sweep():
    """
    Test 9: Full versus effective dynamics

    Expected: error shrinks with zeta, small at zeta = 0.05; zeta > 0.2 refused
    """
    lam = GATE_RUN["lam_plus"]
    distances = [dispersive_error_check((lam, lam), (lam / z, lam / z), n_max=4, n_times=101)
                 for z in (0.2, 0.1, 0.05)]
    assert distances[2] < distances[1] < distances[0]
    assert distances[2] < 0.05
    with pytest.raises(DispersiveRegimeError):
        dispersive_error_check((lam, lam), (lam / 0.3, lam / 0.3))


def total_sz() -> np.ndarray:
    sz = np.diag([1.0, -1.0])
    return np.kron(sz, np.eye(2)) + np.kron(np.eye(2), sz)


def test_iswap_half_swap():
    """
    Test 10: Flip-flop at g_eff t = pi/4

    Expected: |eg> splits (1/2, 1/2) between |eg> and |ge>; sz_1 + sz_2 conserved
    """
    g_eff = GATE_RUN["g_eff"]
    U = iswap_evolution(g_eff, 0.25 * math.pi / g_eff)
    column = U[:, IDX_EG]
    assert abs(column[IDX_EG]) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert abs(column[IDX_GE]) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(flip_flop() @ total_sz(), total_sz() @ flip_flop())
    assert np.allclose(U @ total_sz(), total_sz() @ U, atol=1e-12)
    assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-12)


def test_ideal_iswap_squared():
    """
    Test 11: Two iSWAPs

    Expected: diag(1, -1, -1, 1)
    """
    U = ideal_iswap()
    assert np.allclose(U @ U, np.diag([1.0, -1.0, -1.0, 1.0]))
    assert U[IDX_EE, IDX_EE] == 1.0 and U[IDX_GG, IDX_GG] == 1.0


def test_effective_hamiltonian_decoupled_spin():
    """
    Test 12: lambda_+^(2) = 0

    Expected: g_eff = 0, spin 2 keeps its bare detuning and commutes with H
    """
    lam, delta = GATE_RUN["lam_plus"], GATE_RUN["delta"]
    dp = DispersiveParams((lam, 0.0), (delta, delta))
    assert dp.g_eff == 0.0
    assert dp.delta_eff[1] == pytest.approx(dp.delta_nv[1])
    H = effective_hamiltonian(dp).matrix
    sz2 = np.kron(np.eye(2), np.diag([1.0, -1.0]))
    assert np.allclose(H @ sz2, sz2 @ H)
    assert H[IDX_EG, IDX_GE] == 0.0
    with pytest.raises(PhysicsDomainError):
        dp.gate_time()


def test_effective_hamiltonian_spin_exchange(symmetric):
    """
    Test 13: Symmetric spins

    Expected: H invariant under exchanging spin 1 and spin 2
    """
    swap = np.eye(4)[[IDX_EE, IDX_GE, IDX_EG, IDX_GG]]
    H = effective_hamiltonian(symmetric).matrix
    assert np.allclose(swap @ H @ swap.T, H)


def test_dispersive_check_limits():
    """
    Test 14: Validation sweep end points

    Expected: exactly zero distance without coupling, at most 0.15 at zeta = 0.1
    """
    lam, delta = GATE_RUN["lam_plus"], GATE_RUN["delta"]
    assert dispersive_error_check((0.0, 0.0), (delta, delta), n_times=51) < 1e-12
    assert dispersive_error_check((lam, lam), (delta, delta), n_times=101) <= 0.15
