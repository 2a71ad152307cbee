"""
HYB - Dispersive Spin-Spin Coupling

Second-order elimination of the low polariton between two detuned spins:
- Effective two-spin Hamiltonian (shifted frequencies + flip-flop coupling)
- ac Stark shift and its exact Jaynes-Cummings cross-check
- iSWAP construction from the flip-flop evolution
- Full two-spin + shared-polariton model used to validate the reduction

Detunings are signed (delta_i = Delta_NV^(i) - omega_minus). For
delta_i > 0 the shifts reduce to lambda_i * zeta_i.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from hyb_errors import DimensionError, DispersiveRegimeError, PhysicsDomainError
from hyb_operators import (
    EXCITED, GROUND, HilbertSpace, Operator, annihilation, basis_ket, embed,
    partial_trace_array, sigma_minus, sigma_z, trace_distance,
)

logger = logging.getLogger("DISPERSIVE")

ZETA_WARNING = 0.2
ZETA_LIMIT = 1.0

TWO_SPINS = HilbertSpace((2, 2), ("spin1", "spin2"))
# Two-spin computational basis order: |ee>, |eg>, |ge>, |gg>
IDX_EE, IDX_EG, IDX_GE, IDX_GG = 0, 1, 2, 3


def _zeta(lam_plus: float, delta: float) -> float:
    if delta == 0:
        raise DispersiveRegimeError("[DISPERSIVE] Zero spin-polariton detuning: no dispersive regime")
    return abs(lam_plus) / abs(delta)


def _check_zeta(zeta: float, which: str = ""):
    if zeta >= ZETA_LIMIT:
        raise DispersiveRegimeError(
            f"[DISPERSIVE] zeta{which}={zeta:.4g} >= 1: dispersive reduction does not apply"
        )
    if zeta > ZETA_WARNING:
        logger.warning(f"[DISPERSIVE] zeta{which}={zeta:.4g} > {ZETA_WARNING}; "
                       f"effective Hamiltonian is only qualitative")


@dataclass(frozen=True)
class DispersiveParams:
    """Two spins dispersively coupled through the low polariton"""

    lam_plus: Tuple[float, float]
    delta: Tuple[float, float]
    omega_minus: float = 0.0
    N_pl: float = 0.0

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam_plus)
        delta = tuple(float(x) for x in self.delta)
        if len(lam) != 2 or len(delta) != 2:
            raise DimensionError("[DISPERSIVE] Exactly two spins are supported")
        if self.N_pl < 0:
            raise PhysicsDomainError(f"[DISPERSIVE] N_pl must be >= 0, got {self.N_pl!r}")
        object.__setattr__(self, 'lam_plus', lam)
        object.__setattr__(self, 'delta', delta)
        for i in range(2):
            _check_zeta(_zeta(lam[i], delta[i]), which=f"_{i + 1}")

    @property
    def zeta(self) -> Tuple[float, float]:
        return tuple(_zeta(l, d) for l, d in zip(self.lam_plus, self.delta))

    @property
    def delta_nv(self) -> Tuple[float, float]:
        return tuple(self.omega_minus + d for d in self.delta)

    @property
    def delta_eff(self) -> Tuple[float, float]:
        """Delta_NV^(i) + lambda_i^2 (1 + 2 N_pl) / delta_i"""
        n = 1.0 + 2.0 * self.N_pl
        return tuple(dn + l * l * n / d for dn, l, d in zip(self.delta_nv, self.lam_plus, self.delta))

    @property
    def g_eff(self) -> float:
        """1/2 lambda_1 lambda_2 (1/delta_1 + 1/delta_2)"""
        (l1, l2), (d1, d2) = self.lam_plus, self.delta
        return 0.5 * l1 * l2 * (1.0 / d1 + 1.0 / d2)

    @property
    def g_eff_hz(self) -> float:
        return self.g_eff / (2.0 * math.pi)

    @property
    def detuning_mismatch(self) -> float:
        d1, d2 = self.delta_eff
        return d1 - d2

    def gate_time(self) -> float:
        """t with |g_eff| t = pi/2"""
        if self.g_eff == 0:
            raise PhysicsDomainError("[DISPERSIVE] g_eff = 0: no iSWAP time")
        return 0.5 * math.pi / abs(self.g_eff)


def dispersive_params(lam_plus1: float, lam_plus2: float, delta1: float, delta2: float,
                      N_pl: float = 0.0, omega_minus: float = 0.0) -> DispersiveParams:
    return DispersiveParams((lam_plus1, lam_plus2), (delta1, delta2), omega_minus, N_pl)


def resonant_second_detuning(lam_plus1: float, delta1: float, lam_plus2: float,
                             N_pl: float = 0.0) -> float:
    """
    delta_2 making Delta_eff^(1) = Delta_eff^(2)

    delta + lambda^2 (1 + 2 N_pl)/delta must agree for both spins, i.e.
    delta_2^2 - C delta_2 + lambda_2^2 (1 + 2 N_pl) = 0; the root on the
    side of delta_1 with the larger magnitude is the dispersive one.
    """
    n = 1.0 + 2.0 * N_pl
    _check_zeta(_zeta(lam_plus1, delta1), which="_1")
    C = delta1 + lam_plus1 ** 2 * n / delta1
    disc = C * C - 4.0 * lam_plus2 ** 2 * n
    if disc < 0:
        raise DispersiveRegimeError(
            f"[DISPERSIVE] No dispersive detuning matches spin 1 (lambda_2={lam_plus2:.6g} too strong)"
        )
    delta2 = 0.5 * (C + math.copysign(math.sqrt(disc), C))
    _check_zeta(_zeta(lam_plus2, delta2), which="_2")
    return delta2


def flip_flop() -> np.ndarray:
    """s+_1 s-_2 + s-_1 s+_2 on two spins"""
    sm = sigma_minus().matrix
    sp = sm.conj().T
    return np.kron(sp, sm) + np.kron(sm, sp)


def effective_hamiltonian(dp: DispersiveParams, frame: float = 0.0) -> Operator:
    """
    sum_i 1/2 Delta_eff^(i) sz_i + g_eff (s+_1 s-_2 + s-_1 s+_2)

    `frame` subtracts 1/2 frame (sz_1 + sz_2), the spins' rotating frame.
    """
    sz = sigma_z().matrix
    eye = np.eye(2)
    d1, d2 = dp.delta_eff
    H = (0.5 * (d1 - frame) * np.kron(sz, eye) + 0.5 * (d2 - frame) * np.kron(eye, sz)
         + dp.g_eff * flip_flop())
    return Operator(TWO_SPINS, H)


def stark_shift(lam_plus: float, delta: float, N_pl: float) -> Tuple[float, float]:
    """
    (zero_point, shift) = (lambda zeta, 2 lambda zeta N_pl) for delta > 0

    Signed generalization: lambda^2/delta and 2 lambda^2 N_pl/delta.
    """
    _check_zeta(_zeta(lam_plus, delta))
    if N_pl < 0:
        raise PhysicsDomainError(f"[DISPERSIVE] N_pl must be >= 0, got {N_pl!r}")
    zero_point = lam_plus * lam_plus / delta
    return zero_point, 2.0 * zero_point * N_pl


def _dressed_spin_frequency(lam: float, delta: float, omega: float, n: int) -> float:
    """E(dressed |e,n>) - E(dressed |g,n>) for H = 1/2 Delta sz + omega a^+a + lam (a^+ s- + a s+)"""
    big_delta = omega + delta

    def manifold(k):
        # Basis (|e, k-1>, |g, k>) of the k-excitation manifold
        block = np.array([
            [0.5 * big_delta + omega * (k - 1), lam * math.sqrt(k)],
            [lam * math.sqrt(k), -0.5 * big_delta + omega * k],
        ])
        return np.linalg.eigh(block)

    w_up, v_up = manifold(n + 1)
    e_excited = w_up[int(np.argmax(np.abs(v_up[0])))]
    if n == 0:
        e_ground = -0.5 * big_delta
    else:
        w_dn, v_dn = manifold(n)
        e_ground = w_dn[int(np.argmax(np.abs(v_dn[1])))]
    return float(e_excited - e_ground)


def exact_stark_shift(lam_plus: float, delta: float, N_pl: int = 1, omega_minus: float = 0.0) -> float:
    """
    Spin-frequency change between N_pl and zero polaritons from exact
    dressed Jaynes-Cummings energies

    For one excitation this is sqrt(delta^2/4 + 2 lambda^2) - delta/2.
    """
    if N_pl < 0 or int(N_pl) != N_pl:
        raise PhysicsDomainError(f"[DISPERSIVE] N_pl must be a nonnegative integer, got {N_pl!r}")
    return (_dressed_spin_frequency(lam_plus, delta, omega_minus, int(N_pl))
            - _dressed_spin_frequency(lam_plus, delta, omega_minus, 0))


def ideal_iswap() -> np.ndarray:
    """|eg> -> -i|ge>, |ge> -> -i|eg>, |ee> and |gg> fixed"""
    U = np.eye(4, dtype=complex)
    U[IDX_EG, IDX_EG] = 0.0
    U[IDX_GE, IDX_GE] = 0.0
    U[IDX_EG, IDX_GE] = -1j
    U[IDX_GE, IDX_EG] = -1j
    return U


def iswap_evolution(g_eff: float, t: float) -> np.ndarray:
    """exp(-i g_eff t (s+ s- + s- s+))"""
    if g_eff < 0:
        raise PhysicsDomainError(f"[DISPERSIVE] g_eff must be >= 0, got {g_eff!r}")
    return linalg.expm(-1j * g_eff * t * flip_flop())


def average_gate_fidelity(U: np.ndarray, V: np.ndarray) -> float:
    """(|Tr(U^+ V)|^2 + d) / (d (d + 1)) for unitaries of dimension d"""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape != V.shape:
        raise DimensionError(f"[DISPERSIVE] Gate shapes differ: {U.shape} vs {V.shape}")
    d = U.shape[0]
    overlap = abs(np.trace(U.conj().T @ V)) ** 2
    return float((overlap + d) / (d * (d + 1)))


def two_spin_jc_hamiltonian(delta_nv: Sequence[float], omega_minus: float, lam_plus: Sequence[float],
                            n_max: int, frame: float = 0.0) -> Operator:
    """
    Two spins Jaynes-Cummings coupled to one shared polariton

    sum_i 1/2 Delta_NV^(i) sz_i + omega_- a^+ a + sum_i lambda_i (a^+ s-_i + a s+_i)
    in the frame rotating at `frame` (subtracts frame * (a^+ a + 1/2 sum_i sz_i)).
    Slots are (spin1, spin2, polariton).
    """
    if n_max < 2:
        raise DimensionError(f"[DISPERSIVE] Polariton truncation must be >= 2, got {n_max}")
    space = HilbertSpace((2, 2, n_max), ("spin1", "spin2", "polariton"))
    a = embed(annihilation(n_max), 2, space)
    H = (omega_minus - frame) * (a.dag() @ a)
    for i in range(2):
        sz = embed(sigma_z(), i, space)
        sm = embed(sigma_minus(), i, space)
        H = H + 0.5 * (delta_nv[i] - frame) * sz + lam_plus[i] * (a.dag() @ sm + a @ sm.dag())
    return H


def _unitary_propagator(H: np.ndarray):
    w, V = np.linalg.eigh(H)

    def at(t):
        return (V * np.exp(-1j * w * t)) @ V.conj().T

    return at


def dispersive_error_check(lam_plus: Sequence[float], delta: Sequence[float], n_max: int = 4,
                           t_final: Optional[float] = None, n_times: int = 201,
                           omega_minus: float = 0.0) -> float:
    """
    Max trace distance between the full and effective two-spin dynamics

    Full model: two_spin_jc_hamiltonian from |g>|e>|0>, reduced to the spins.
    Effective: effective_hamiltonian with N_pl = 0 from |g>|e>.
    Both run exactly (eigendecomposition) in the frame rotating at omega_minus.
    t_final defaults to one full swap period pi/|g_eff|.
    """
    lam_plus = tuple(lam_plus)
    delta = tuple(delta)
    zetas = [_zeta(l, d) for l, d in zip(lam_plus, delta)]
    if max(zetas) > ZETA_WARNING * (1.0 + 1e-12):
        raise DispersiveRegimeError(
            f"[DISPERSIVE] Validation requires zeta <= {ZETA_WARNING}, got {max(zetas):.4g}"
        )
    dp = DispersiveParams(lam_plus, delta, omega_minus=omega_minus, N_pl=0.0)
    if t_final is None:
        t_final = math.pi / abs(dp.g_eff) if dp.g_eff != 0 else 2.0 * math.pi / max(abs(d) for d in delta)
    if n_max < 3:
        logger.warning(f"[CHECK] Polariton truncation {n_max} keeps only one virtual excitation")

    H_full = two_spin_jc_hamiltonian(dp.delta_nv, omega_minus, lam_plus, n_max, frame=omega_minus)
    H_eff = effective_hamiltonian(dp, frame=omega_minus)

    psi_full = basis_ket(H_full.space, (GROUND, EXCITED, 0))
    psi_eff = basis_ket(TWO_SPINS, (GROUND, EXCITED))
    u_full = _unitary_propagator(H_full.matrix)
    u_eff = _unitary_propagator(H_eff.matrix)

    worst = 0.0
    for t in np.linspace(0.0, t_final, n_times):
        pf = u_full(t) @ psi_full
        rho_full = partial_trace_array(np.outer(pf, pf.conj()), H_full.space.dims, (0, 1))
        pe = u_eff(t) @ psi_eff
        worst = max(worst, trace_distance(rho_full, np.outer(pe, pe.conj())))

    logger.debug(f"[CHECK] zeta={max(zetas):.3g} g_eff={dp.g_eff:.6g} max distance={worst:.3e}")
    return worst


__all__ = [
    'DispersiveParams', 'dispersive_params', 'resonant_second_detuning', 'effective_hamiltonian',
    'flip_flop', 'stark_shift', 'exact_stark_shift', 'ideal_iswap', 'iswap_evolution', 'average_gate_fidelity',
    'two_spin_jc_hamiltonian', 'dispersive_error_check', 'TWO_SPINS',
    'IDX_EE', 'IDX_EG', 'IDX_GE', 'IDX_GG', 'ZETA_WARNING',
]
