"""
HYB - Mean-Field Steady State

Classical driven steady state of the cavity electromechanical subsystem:
- <a> = -Omega_d / (Delta_a - i kappa)
- <b> = g |<a>|^2 / (omega_m - i gamma_m)
- Delta_a = omega_a - omega_d - g (<b> + <b>*)

plus the physical-constant helpers (spin-cavity coupling estimate,
Bose occupations, cavity linewidth, NV transition frequency).

All frequencies and rates are angular (rad/s).
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import constants as sc

from hyb_errors import ConvergenceError, PhysicsDomainError

logger = logging.getLogger("MEANFIELD")

RELAXATION = 0.5
MAX_ITERATIONS = 200
NEWTON_STEPS = 8
HOMOTOPY_STEPS = 16
MAX_HALVINGS = 40
# Branch is considered continuous while one homotopy step moves Delta_a by
# less than this fraction of max(|Delta_a|, kappa)
JUMP_FRACTION = 0.25


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants plus the NV-specific values"""

    hbar: float = sc.hbar
    k_B: float = sc.k
    mu_0: float = sc.mu_0
    mu_B: float = sc.physical_constants['Bohr magneton'][0]
    g_e: float = 2.0
    D: float = 2.0 * math.pi * 2.87e9


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SystemParams:
    """
    Every physical symbol of the hybrid model

    Frequencies and rates in rad/s, L_a in H, d in m, T in K.
    """

    omega_a: float = 2.0 * math.pi * 2.0e9
    omega_m: float = 1.0e7
    omega_d: float = 2.0 * math.pi * 2.0e9 - 1.0e8
    g: float = 2.0 * math.pi * 100.0
    kappa: float = 1.0e6
    gamma_m: float = 10.0
    Omega_d: complex = 0.0
    Omega_NV: complex = 0.0
    omega_NV: float = 2.0 * math.pi * 2.87e9
    lam: float = 2.0 * math.pi * 7.0e3
    gamma_perp: float = 1.0e3
    gamma_par: float = 0.0
    L_a: float = 2.0e-9
    d: float = 50.0e-9
    T: float = 0.02
    Q: float = 3.0e4
    constants: PhysicalConstants = field(default=CONSTANTS, repr=False)

    def __post_init__(self):
        nonneg = ('omega_a', 'omega_d', 'g', 'kappa', 'gamma_m', 'omega_NV', 'lam',
                  'gamma_perp', 'gamma_par', 'T', 'Q')
        for name in nonneg:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise PhysicsDomainError(f"[MEANFIELD] {name} must be finite and >= 0, got {value!r}")
        for name in ('omega_m', 'd', 'L_a'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise PhysicsDomainError(f"[MEANFIELD] {name} must be > 0, got {value!r}")

    @property
    def delta_a0(self) -> float:
        """Bare cavity detuning omega_a - omega_d"""
        return self.omega_a - self.omega_d

    @property
    def delta_nv(self) -> float:
        """Spin detuning from the drive, omega_NV - omega_d"""
        return self.omega_NV - self.omega_d

    def replace(self, **changes) -> 'SystemParams':
        return replace(self, **changes)


@dataclass(frozen=True)
class MeanFields:
    a_mean: complex
    b_mean: complex
    N: float
    delta_a: float
    G: float
    residual: float
    used_fallback: bool = False


def _chi(p: SystemParams) -> float:
    """Photon-number pull on the detuning: Delta_a = Delta_0 - chi * N"""
    return 2.0 * p.g ** 2 * p.omega_m / (p.omega_m ** 2 + p.gamma_m ** 2)


def cubic_residual(p: SystemParams, N: float) -> float:
    """
    Real cubic in N obtained by eliminating <b> and Delta_a

    chi^2 N^3 - 2 Delta_0 chi N^2 + (Delta_0^2 + kappa^2) N - |Omega_d|^2
    """
    chi = _chi(p)
    d0 = p.delta_a0
    return (chi ** 2 * N ** 3 - 2.0 * d0 * chi * N ** 2
            + (d0 ** 2 + p.kappa ** 2) * N - abs(p.Omega_d) ** 2)


def _fixed_point_map(delta, d0, chi, omega2, kappa):
    return d0 - chi * omega2 / (delta * delta + kappa * kappa)


def _damped_iteration(delta, d0, chi, omega2, kappa, tol, max_iter):
    scale = max(abs(d0), kappa, 1.0)
    with np.errstate(all='ignore'):
        for _ in range(max_iter):
            new = (1.0 - RELAXATION) * delta + RELAXATION * _fixed_point_map(delta, d0, chi, omega2, kappa)
            if not np.isfinite(new):
                return None
            if abs(new - delta) <= tol * scale:
                return new
            delta = new
    return None


def _cubic_roots(d0, chi, omega2, kappa):
    """Delta_a values of the nonnegative real roots of the photon-number cubic"""
    roots = np.roots([chi ** 2, -2.0 * d0 * chi, d0 ** 2 + kappa ** 2, -omega2])
    scale = max(np.max(np.abs(roots), initial=0.0), 1e-300)
    real = [r.real for r in roots if abs(r.imag) <= 1e-7 * scale and r.real >= 0.0]
    return [d0 - chi * n for n in real]


def _newton_polish(delta, d0, chi, omega2, kappa):
    for _ in range(NEWTON_STEPS):
        den = delta * delta + kappa * kappa
        f = delta - d0 + chi * omega2 / den
        fp = 1.0 - 2.0 * chi * omega2 * delta / (den * den)
        if fp == 0.0 or not np.isfinite(fp):
            break
        step = f / fp
        delta -= step
        if abs(step) <= 1e-16 * max(abs(delta), kappa, 1.0):
            break
    return delta


def _solve_at(p: SystemParams, g: float, start: float, tol: float, max_iter: int):
    """Single fixed-point solve at coupling g starting from `start`"""
    d0 = p.delta_a0
    kappa = p.kappa
    omega2 = abs(p.Omega_d) ** 2
    chi = _chi(replace(p, g=g))

    delta = _damped_iteration(start, d0, chi, omega2, kappa, tol, max_iter)
    fallback = False
    if delta is not None and abs(delta - start) > JUMP_FRACTION * max(abs(start), kappa):
        # Iteration left the branch (repelling fixed point); let the cubic decide
        delta = None
    if delta is None:
        fallback = True
        candidates = _cubic_roots(d0, chi, omega2, kappa)
        if not candidates:
            raise ConvergenceError(f"[MEANFIELD] No real steady state at g={g!r}")
        delta = min(candidates, key=lambda c: abs(c - start))
        logger.debug(f"[SOLVER] Iteration stalled at g={g:.6g}; cubic root Delta_a={delta:.6g}")
        _record_fallback()

    return _newton_polish(delta, d0, chi, omega2, kappa), fallback


def _record_fallback():
    try:
        from prometheus_exporter import get_exporter
        get_exporter().record_solver_fallback()
    except Exception:
        pass


def _residual(p: SystemParams, a, b, delta) -> float:
    """Largest relative mismatch of the three defining relations"""
    om = abs(p.Omega_d)
    scale_d = max(abs(p.delta_a0), abs(delta), p.kappa, 1.0)
    r_a = abs(a * (delta - 1j * p.kappa) + p.Omega_d) / max(om, 1e-300) if om > 0 else abs(a)
    nb = p.g * abs(a) ** 2
    r_b = abs(b * (p.omega_m - 1j * p.gamma_m) - nb) / max(nb, 1e-300) if nb > 0 else abs(b)
    r_d = abs(delta - (p.delta_a0 - p.g * 2.0 * b.real)) / scale_d
    return float(max(r_a, r_b, r_d))


def _assemble(p: SystemParams, delta: float, fallback: bool) -> MeanFields:
    a = complex(-p.Omega_d / (delta - 1j * p.kappa)) if p.Omega_d != 0 else 0j
    N = abs(a) ** 2
    b = complex(p.g * N / (p.omega_m - 1j * p.gamma_m))
    return MeanFields(
        a_mean=a,
        b_mean=b,
        N=N,
        delta_a=float(delta),
        G=p.g * math.sqrt(N),
        residual=_residual(p, a, b, delta),
        used_fallback=fallback,
    )


def solve_mean_fields(p: SystemParams, tol: float = 1e-12, max_iter: int = MAX_ITERATIONS,
                      homotopy_steps: int = HOMOTOPY_STEPS) -> MeanFields:
    """
    Self-consistent steady state on the branch connected to g = 0

    The coupling is ramped from 0 to p.g; each stage starts from the
    previous Delta_a. A stage whose solution jumps discontinuously is
    retried with half the step; if the step collapses the branch has ended
    (saddle-node of the bistable drive regime).

    Raises:
        PhysicsDomainError: tol <= 0
        ConvergenceError: branch terminates, or no real steady state
    """
    if not tol > 0:
        raise PhysicsDomainError(f"[MEANFIELD] Solver tolerance must be > 0, got {tol!r}")

    d0 = p.delta_a0
    if p.Omega_d == 0 or p.g == 0:
        if p.Omega_d != 0 and d0 == 0 and p.kappa == 0:
            raise ConvergenceError("[MEANFIELD] Resonant drive with kappa=0 has no steady state")
        return _assemble(p, d0, False)

    delta = d0
    g_done = 0.0
    step = p.g / max(int(homotopy_steps), 1)
    fallback_used = False
    halvings = 0

    while g_done < p.g:
        g_next = min(g_done + step, p.g)
        new, fallback = _solve_at(p, g_next, delta, tol, max_iter)

        jump = abs(new - delta)
        if not np.isfinite(new) or jump > JUMP_FRACTION * max(abs(delta), p.kappa):
            halvings += 1
            if halvings > MAX_HALVINGS:
                raise ConvergenceError(
                    f"[MEANFIELD] Steady-state branch connected to g=0 ends near g={g_done:.6g} "
                    f"(target g={p.g:.6g}); drive is in the bistable regime"
                )
            step *= 0.5
            continue

        fallback_used = fallback_used or fallback
        delta = new
        g_done = g_next
        # Recover the step after a successful stage
        if halvings:
            halvings = max(halvings - 1, 0)
            step *= 2.0

    result = _assemble(p, delta, fallback_used)
    if result.residual >= tol:
        raise ConvergenceError(
            f"[MEANFIELD] Residual {result.residual:.3e} above tolerance {tol:.1e}"
        )
    logger.debug(f"[SOLVER] N={result.N:.6g} Delta_a={result.delta_a:.6g} G={result.G:.6g} "
                 f"residual={result.residual:.2e}")
    return result


# ---------------------------------------------------------------------------
# Constant helpers
# ---------------------------------------------------------------------------

def coupling_estimate(d: float, omega_a: float, L_a: float,
                      constants: PhysicalConstants = CONSTANTS) -> float:
    """
    Spin-cavity coupling lambda [rad/s] from the conductor's vacuum current

    I_rms = sqrt(hbar omega_a / 2 L_a), B = mu_0 I_rms / (2 pi d),
    lambda = 2 g_e mu_B B / hbar
    """
    for name, value in (('d', d), ('omega_a', omega_a), ('L_a', L_a)):
        if not value > 0:
            raise PhysicsDomainError(f"[MEANFIELD] {name} must be > 0, got {value!r}")
    c = constants
    i_rms = math.sqrt(c.hbar * omega_a / (2.0 * L_a))
    b_rms = c.mu_0 * i_rms / (2.0 * math.pi * d)
    return 2.0 * c.g_e * c.mu_B * b_rms / c.hbar


def thermal_occupation(omega: float, T: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Bose factor 1/(exp(hbar omega / k_B T) - 1)"""
    if not omega > 0:
        raise PhysicsDomainError(f"[MEANFIELD] Mode frequency must be > 0, got {omega!r}")
    if T < 0:
        raise PhysicsDomainError(f"[MEANFIELD] Temperature must be >= 0, got {T!r}")
    if T == 0:
        return 0.0
    x = constants.hbar * omega / (constants.k_B * T)
    with np.errstate(over='ignore'):
        return float(1.0 / np.expm1(x))


def frequency_for_occupation(n_th: float, T: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Angular frequency whose Bose occupation at temperature T is n_th"""
    if not n_th > 0 or not T > 0:
        raise PhysicsDomainError(f"[MEANFIELD] Need n_th > 0 and T > 0, got n_th={n_th!r}, T={T!r}")
    return constants.k_B * T / constants.hbar * math.log1p(1.0 / n_th)


def cavity_linewidth(omega_a: float, Q: float) -> float:
    """kappa = omega_a / Q"""
    if not Q > 0:
        raise PhysicsDomainError(f"[MEANFIELD] Quality factor must be > 0, got {Q!r}")
    return omega_a / Q


def spin_transition_frequency(B_ex: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """omega_NV = D - g_e mu_B B_ex / hbar (lower transition, rad/s)"""
    return constants.D - constants.g_e * constants.mu_B * B_ex / constants.hbar


def spin_drive_for_cancellation(lam: float, a_mean: complex) -> complex:
    """Spin drive amplitude that cancels the drive-induced spin flip: lambda <a>"""
    return lam * a_mean


def drive_for_photon_number(p: SystemParams, N: float) -> float:
    """
    Drive amplitude |Omega_d| giving intracavity photon number N

    Direct inversion of the cubic; the solver still decides whether N is
    reached on the g=0 branch.
    """
    if N < 0:
        raise PhysicsDomainError(f"[MEANFIELD] Photon number must be >= 0, got {N!r}")
    delta = p.delta_a0 - _chi(p) * N
    return math.sqrt(N * (delta ** 2 + p.kappa ** 2))


__all__ = [
    'PhysicalConstants', 'CONSTANTS', 'SystemParams', 'MeanFields',
    'solve_mean_fields', 'cubic_residual', 'coupling_estimate', 'thermal_occupation',
    'frequency_for_occupation', 'cavity_linewidth', 'spin_transition_frequency',
    'spin_drive_for_cancellation', 'drive_for_photon_number',
]
