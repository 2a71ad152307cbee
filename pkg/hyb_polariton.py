"""
HYB - Electromechanical Polaritons

Normal modes of the linearized cavity electromechanical Hamiltonian

    H_LEM = Delta_a da^+ da + omega_m db^+ db - G (da + da^+)(db + db^+)

- Closed-form polariton frequencies, mixing angle and critical coupling
- Symplectic (Bogoliubov) diagonalization of the quadrature form, which is
  the numeric ground truth the closed forms are checked against
- Spin-polariton couplings (closed form and read off the transform)
- Low-polariton operator on Fock(n_a) x Fock(n_b)
- Spin + two-polariton Hamiltonian with all rotating and counter-rotating terms

Labeling of the closed-form couplings:
    "printed"      lambda_pm carry cos(theta), eta_pm carry sin(theta). This
                   is the labeling under which lambda_plus -> (lambda/2)
                   sqrt(Delta_a/omega_minus) near the critical point.
    "normal-mode"  the cavity amplitude of each normal mode as produced by
                   the Bogoliubov transform: sin(theta) for the low
                   polariton, cos(theta) for the high one.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from hyb_errors import (
    CouplingRangeError, DimensionError, PhysicsDomainError, SingularCouplingError,
    UnstableRegimeError,
)
from hyb_operators import (
    HilbertSpace, Operator, annihilation, embed, identity, sigma_minus, sigma_z,
)

logger = logging.getLogger("POLARITON")

LABELINGS = ("printed", "normal-mode")
SYMPLECTIC_TOL = 1e-10

# Commutator form of (x, x^+) for one mode and for two modes
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
K4 = linalg.block_diag(J2, J2)


def _check_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise PhysicsDomainError(f"[POLARITON] {name} must be > 0, got {value!r}")


def _check_labeling(labeling: str):
    if labeling not in LABELINGS:
        raise PhysicsDomainError(f"[POLARITON] Unknown labeling '{labeling}', expected one of {LABELINGS}")


def critical_coupling(delta_a: float, omega_m: float) -> float:
    """G_c = sqrt(Delta_a omega_m) / 2"""
    _check_positive(delta_a=delta_a, omega_m=omega_m)
    return 0.5 * math.sqrt(delta_a * omega_m)


def _squared_frequencies(delta_a: float, omega_m: float, G: float) -> Tuple[float, float]:
    """(omega_plus^2, omega_minus^2); omega_minus^2 < 0 beyond G_c"""
    _check_positive(delta_a=delta_a, omega_m=omega_m)
    if G < 0:
        raise CouplingRangeError(f"[POLARITON] Coupling G must be >= 0, got {G!r}")
    s = math.sqrt(delta_a * omega_m)
    total = delta_a ** 2 + omega_m ** 2
    disc = (delta_a ** 2 - omega_m ** 2) ** 2 + 16.0 * G ** 2 * delta_a * omega_m
    w_plus2 = 0.5 * (total + math.sqrt(disc))
    # Factored determinant: exact zero at G = G_c
    det = delta_a * omega_m * (s - 2.0 * G) * (s + 2.0 * G)
    return w_plus2, det / w_plus2


def polariton_frequencies(delta_a: float, omega_m: float, G: float) -> Tuple[float, float]:
    """
    (omega_plus, omega_minus) of the linearized electromechanical subsystem

    Raises:
        UnstableRegimeError: G > G_c; `magnitude` carries |omega_minus^2|
    """
    w_plus2, w_minus2 = _squared_frequencies(delta_a, omega_m, G)
    if w_minus2 < 0:
        raise UnstableRegimeError(
            f"[POLARITON] Unstable regime: G={G:.6g} exceeds G_c={critical_coupling(delta_a, omega_m):.6g} "
            f"(omega_minus^2 = {w_minus2:.6g})",
            magnitude=abs(w_minus2),
        )
    return math.sqrt(w_plus2), math.sqrt(w_minus2)


def mixing_angle(delta_a: float, omega_m: float, G: float) -> float:
    """
    theta with tan(2 theta) = 4 G sqrt(Delta_a omega_m) / (Delta_a^2 - omega_m^2)

    2 theta is taken in [0, pi] so cos(theta), sin(theta) >= 0.
    """
    polariton_frequencies(delta_a, omega_m, G)
    return 0.5 * math.atan2(4.0 * G * math.sqrt(delta_a * omega_m), delta_a ** 2 - omega_m ** 2)


def coupling_for_omega_minus(delta_a: float, omega_m: float, omega_minus: float) -> float:
    """
    Linearized coupling G placing the low polariton at omega_minus

    Raises:
        CouplingRangeError: omega_minus outside [0, min(Delta_a, omega_m)]
    """
    _check_positive(delta_a=delta_a, omega_m=omega_m)
    if omega_minus < 0 or omega_minus > min(delta_a, omega_m):
        raise CouplingRangeError(
            f"[POLARITON] omega_minus={omega_minus!r} not reachable; must lie in "
            f"[0, {min(delta_a, omega_m)!r}]"
        )
    w2 = omega_minus ** 2
    num = (delta_a * omega_m) ** 2 - w2 * (delta_a ** 2 + omega_m ** 2 - w2)
    return math.sqrt(max(num, 0.0) / (4.0 * delta_a * omega_m))


def _require_regular(omega_minus: float, omega_m: float, epsilon: float):
    if omega_minus == 0.0 or omega_minus < epsilon * omega_m:
        raise SingularCouplingError(
            f"[POLARITON] omega_minus={omega_minus:.6g} below the guard {epsilon:g}*omega_m; "
            f"spin-polariton couplings diverge at the critical point"
        )


def _pair(lam: float, amplitude: float, delta_a: float, w: float) -> Tuple[float, float]:
    root = 2.0 * math.sqrt(delta_a * w)
    return lam * amplitude * (delta_a + w) / root, lam * amplitude * (delta_a - w) / root


def spin_polariton_couplings(lam: float, delta_a: float, omega_m: float, G: float,
                             labeling: str = "printed",
                             epsilon: float = 0.0) -> Tuple[float, float, float, float]:
    """
    (lambda_plus, lambda_minus, eta_plus, eta_minus)

    lambda_pm = lambda A_low (Delta_a +- omega_minus) / (2 sqrt(Delta_a omega_minus))
    eta_pm    = lambda A_high (Delta_a +- omega_plus) / (2 sqrt(Delta_a omega_plus))

    Raises:
        SingularCouplingError: omega_minus == 0 or below epsilon * omega_m
    """
    _check_labeling(labeling)
    w_plus, w_minus = polariton_frequencies(delta_a, omega_m, G)
    _require_regular(w_minus, omega_m, epsilon)
    theta = mixing_angle(delta_a, omega_m, G)
    if labeling == "printed":
        a_low, a_high = math.cos(theta), math.sin(theta)
    else:
        a_low, a_high = math.sin(theta), math.cos(theta)
    lam_plus, lam_minus = _pair(lam, a_low, delta_a, w_minus)
    eta_plus, eta_minus = _pair(lam, a_high, delta_a, w_plus)
    return lam_plus, lam_minus, eta_plus, eta_minus


@dataclass(frozen=True)
class PolaritonBasis:
    delta_a: float
    omega_m: float
    omega_plus: float
    omega_minus: float
    theta: float
    G: float
    G_c: float
    lam_plus: float
    lam_minus: float
    eta_plus: float
    eta_minus: float
    bogo: np.ndarray
    symplectic: np.ndarray
    labeling: str = "printed"
    lam: float = 1.0

    @property
    def bogo_inverse(self) -> np.ndarray:
        """(da, da^+, db, db^+) in terms of (a-, a-^+, a+, a+^+)"""
        return K4 @ self.bogo.T @ K4.T

    def normal_mode_amplitudes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Orthogonal (cavity, mechanics) amplitudes of the low and high modes"""
        return _orthogonal_from_bogo(self)

    def quadratic_form(self) -> np.ndarray:
        """Quadrature Hamiltonian matrix (xxpp ordering) rebuilt from the symplectic map"""
        S = self.symplectic
        D = np.diag([self.omega_minus, self.omega_plus, self.omega_minus, self.omega_plus])
        return S.T @ D @ S


def _orthogonal_from_bogo(basis: PolaritonBasis):
    # Rows of S's x-block: W^(1/2) O^T P^(-1) -> recover O
    P = np.diag([math.sqrt(basis.delta_a), math.sqrt(basis.omega_m)])
    W = np.array([basis.omega_minus, basis.omega_plus])
    Ot = np.diag(W ** -0.5) @ basis.symplectic[:2, :2] @ P
    return Ot[0], Ot[1]


def bogoliubov_diagonalize(delta_a: float, omega_m: float, G: float, lam: float = 1.0,
                           labeling: str = "printed", epsilon: float = 0.0) -> PolaritonBasis:
    """
    Symplectic diagonalization of H_LEM

    Quadratures x = (a + a^+)/sqrt(2), p = (a - a^+)/(i sqrt(2)) give
    H = 1/2 x^T K_x x + 1/2 p^T K_p p with K_x = [[Delta_a, -2G], [-2G, omega_m]]
    and K_p = diag(Delta_a, omega_m). With P = K_p^(1/2) the symmetric matrix
    M = P K_x P = O W^2 O^T yields the normal modes; the symplectic map in
    xxpp ordering is S = blockdiag(W^(1/2) O^T P^(-1), W^(-1/2) O^T P).

    Raises:
        UnstableRegimeError: G > G_c
        SingularCouplingError: omega_minus == 0 (or below epsilon * omega_m)
    """
    _check_labeling(labeling)
    _check_positive(delta_a=delta_a, omega_m=omega_m)
    # Raises for G > G_c
    polariton_frequencies(delta_a, omega_m, G)

    sa, sm = math.sqrt(delta_a), math.sqrt(omega_m)
    P = np.diag([sa, sm])
    Kx = np.array([[delta_a, -2.0 * G], [-2.0 * G, omega_m]])
    M = P @ Kx @ P

    evals, O = linalg.eigh(M)
    w_plus2 = float(evals[1])
    # Small eigenvalue from the factored determinant avoids cancellation near G_c
    s = sa * sm
    w_minus2 = delta_a * omega_m * (s - 2.0 * G) * (s + 2.0 * G) / w_plus2
    w_minus = math.sqrt(max(w_minus2, 0.0))
    w_plus = math.sqrt(w_plus2)
    _require_regular(w_minus, omega_m, epsilon)

    low = O[:, 0].copy()
    high = O[:, 1].copy()
    if low[1] < 0:
        low = -low
    if high[0] < 0:
        high = -high
    # Orthogonality fixes the relative sign; enforce it after the flips
    if abs(low @ high) > 1e-12:
        raise PhysicsDomainError("[POLARITON] Normal-mode vectors lost orthogonality")
    O = np.column_stack([low, high])

    W = np.array([w_minus, w_plus])
    Pinv = np.diag([1.0 / sa, 1.0 / sm])
    Sx = np.diag(np.sqrt(W)) @ O.T @ Pinv
    Sp = np.diag(1.0 / np.sqrt(W)) @ O.T @ P
    S = linalg.block_diag(Sx, Sp)

    bogo = _bogo_from_quadratures(Sx, Sp)
    theta = 0.5 * math.atan2(4.0 * G * s, delta_a ** 2 - omega_m ** 2)
    lam_plus, lam_minus, eta_plus, eta_minus = spin_polariton_couplings(
        lam, delta_a, omega_m, G, labeling=labeling, epsilon=epsilon
    )

    basis = PolaritonBasis(
        delta_a=delta_a, omega_m=omega_m, omega_plus=w_plus, omega_minus=w_minus,
        theta=theta, G=G, G_c=critical_coupling(delta_a, omega_m),
        lam_plus=lam_plus, lam_minus=lam_minus, eta_plus=eta_plus, eta_minus=eta_minus,
        bogo=bogo, symplectic=S, labeling=labeling, lam=lam,
    )
    _check_symplectic(basis)
    return basis


def _bogo_from_quadratures(Sx: np.ndarray, Sp: np.ndarray) -> np.ndarray:
    """
    Map (da, da^+, db, db^+) -> (a-, a-^+, a+, a+^+)

    a_k = (X_k + i P_k)/sqrt(2) with X = Sx x, P = Sp p. Coefficients are real.
    """
    bogo = np.zeros((4, 4))
    for k in range(2):
        for j in range(2):
            # x_j = (c + c^+)/sqrt(2), i p_j = (c - c^+)/sqrt(2)
            plus = 0.5 * (Sx[k, j] + Sp[k, j])
            minus = 0.5 * (Sx[k, j] - Sp[k, j])
            bogo[2 * k, 2 * j] = plus
            bogo[2 * k, 2 * j + 1] = minus
            bogo[2 * k + 1, 2 * j] = minus
            bogo[2 * k + 1, 2 * j + 1] = plus
    return bogo


def _check_symplectic(basis: PolaritonBasis):
    S = basis.symplectic
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    dev_s = float(np.max(np.abs(S @ J @ S.T - J)))
    dev_b = float(np.max(np.abs(basis.bogo @ K4 @ basis.bogo.T - K4)))
    scale = max(1.0, float(np.max(np.abs(S))) ** 2)
    if dev_s > SYMPLECTIC_TOL * scale or dev_b > SYMPLECTIC_TOL * scale:
        logger.warning(f"[BOGO] Symplectic deviation S={dev_s:.2e} bogo={dev_b:.2e} "
                       f"(G/G_c={basis.G / basis.G_c:.12f})")


def symplectic_deviation(basis: PolaritonBasis) -> float:
    """max |bogo K bogo^T - K| relative to the transform's scale"""
    dev = float(np.max(np.abs(basis.bogo @ K4 @ basis.bogo.T - K4)))
    return dev / max(1.0, float(np.max(np.abs(basis.bogo))) ** 2)


def extract_spin_couplings(basis: PolaritonBasis, lam: Optional[float] = None) -> Tuple[float, float, float, float]:
    """
    (lambda_plus, lambda_minus, eta_plus, eta_minus) read off the transform

    Substituting da = sum_k c_k u_k into lambda (da^+ s- + da s+) gives the
    coefficients of (a-^+ s- + h.c.), (a- s- + h.c.), (a+^+ s- + h.c.) and
    (a+ s- + h.c.) respectively.
    """
    lam = basis.lam if lam is None else lam
    row = basis.bogo_inverse[0]
    return lam * row[0], lam * row[1], lam * row[2], lam * row[3]


# ---------------------------------------------------------------------------
# Operators on Fock(n_a) x Fock(n_b)
# ---------------------------------------------------------------------------

def _mode_ladders(n_a: int, n_b: int):
    if n_a < 2 or n_b < 2:
        raise DimensionError(f"[POLARITON] Truncations must be >= 2, got n_a={n_a}, n_b={n_b}")
    space = HilbertSpace((n_a, n_b), ("cavity", "mechanics"))
    da = embed(annihilation(n_a), 0, space)
    db = embed(annihilation(n_b), 1, space)
    return space, da, db


def low_polariton_operator(basis: PolaritonBasis, n_a: int, n_b: int) -> Operator:
    """a- on Fock(n_a) x Fock(n_b), exact row of the Bogoliubov map"""
    _, da, db = _mode_ladders(n_a, n_b)
    c = basis.bogo[0]
    return c[0] * da + c[1] * da.dag() + c[2] * db + c[3] * db.dag()


def near_critical_polariton_operator(basis: PolaritonBasis, n_a: int, n_b: int,
                                     labeling: Optional[str] = None) -> Operator:
    """
    a- in the omega_minus -> 0 limit

    a- = 1/2 [A_a sqrt(Delta_a/omega_minus)(da - da^+) + s A_b sqrt(omega_m/omega_minus)(db - db^+)]

    "normal-mode" (default): A_a = sin(theta), A_b = cos(theta), s = +1, the
    limit of the exact row whatever labeling the basis carries.
    "printed": A_a = cos(theta), A_b = sin(theta), s = -1, opt-in only; swaps
    the quadrature weights and misses the exact row by O(1) for Delta_a != omega_m.
    """
    labeling = "normal-mode" if labeling is None else labeling
    _check_labeling(labeling)
    _require_regular(basis.omega_minus, basis.omega_m, 0.0)
    _, da, db = _mode_ladders(n_a, n_b)
    th = basis.theta
    if labeling == "printed":
        amp_a, amp_b = math.cos(th), -math.sin(th)
    else:
        amp_a, amp_b = math.sin(th), math.cos(th)
    ca = 0.5 * amp_a * math.sqrt(basis.delta_a / basis.omega_minus)
    cb = 0.5 * amp_b * math.sqrt(basis.omega_m / basis.omega_minus)
    return ca * (da - da.dag()) + cb * (db - db.dag())


HAMILTONIAN_TERMS = ("lam_plus", "lam_minus", "eta_plus", "eta_minus")


def transformed_hamiltonian(basis: PolaritonBasis, delta_nv: float, lam: Optional[float] = None,
                            truncations: Sequence[int] = (4, 4),
                            terms: Sequence[str] = HAMILTONIAN_TERMS) -> Operator:
    """
    Spin (x) low polariton (x) high polariton Hamiltonian

    1/2 Delta_NV sz + omega_+ a+^+ a+ + omega_- a-^+ a-
      + lambda_+ (a-^+ s- + a- s+) + lambda_- (a-^+ s+ + a- s-)
      + eta_+ (a+^+ s- + a+ s+) + eta_- (a+^+ s+ + a+ s-)

    Slots are (spin, low, high). `terms` selects which coupling terms are kept.
    """
    n_low, n_high = truncations
    if n_low < 2 or n_high < 2:
        raise DimensionError(f"[POLARITON] Truncations must be >= 2, got {tuple(truncations)}")
    unknown = set(terms) - set(HAMILTONIAN_TERMS)
    if unknown:
        raise PhysicsDomainError(f"[POLARITON] Unknown Hamiltonian terms {sorted(unknown)}")
    _require_regular(basis.omega_minus, basis.omega_m, 0.0)

    scale = 1.0 if lam is None else lam / basis.lam
    couplings = {
        'lam_plus': basis.lam_plus * scale,
        'lam_minus': basis.lam_minus * scale,
        'eta_plus': basis.eta_plus * scale,
        'eta_minus': basis.eta_minus * scale,
    }

    space = HilbertSpace((2, n_low, n_high), ("spin", "low", "high"))
    sz = embed(sigma_z(), 0, space)
    sm = embed(sigma_minus(), 0, space)
    sp = sm.dag()
    am = embed(annihilation(n_low), 1, space)
    ap = embed(annihilation(n_high), 2, space)

    H = 0.5 * delta_nv * sz + basis.omega_plus * (ap.dag() @ ap) + basis.omega_minus * (am.dag() @ am)
    pieces: Dict[str, Operator] = {
        'lam_plus': am.dag() @ sm + am @ sp,
        'lam_minus': am.dag() @ sp + am @ sm,
        'eta_plus': ap.dag() @ sm + ap @ sp,
        'eta_minus': ap.dag() @ sp + ap @ sm,
    }
    for name in terms:
        H = H + couplings[name] * pieces[name]
    return H


def linearized_hamiltonian(delta_a: float, omega_m: float, G: float, delta_nv: float, lam: float,
                           truncations: Sequence[int] = (4, 4)) -> Operator:
    """
    Spin (x) cavity (x) mechanics form before the normal-mode transform

    1/2 Delta_NV sz + Delta_a da^+ da + omega_m db^+ db
      - G (da + da^+)(db + db^+) + lambda (da^+ s- + da s+)
    """
    n_a, n_b = truncations
    if n_a < 2 or n_b < 2:
        raise DimensionError(f"[POLARITON] Truncations must be >= 2, got {tuple(truncations)}")
    space = HilbertSpace((2, n_a, n_b), ("spin", "cavity", "mechanics"))
    sz = embed(sigma_z(), 0, space)
    sm = embed(sigma_minus(), 0, space)
    da = embed(annihilation(n_a), 1, space)
    db = embed(annihilation(n_b), 2, space)
    xa = da + da.dag()
    xb = db + db.dag()
    return (0.5 * delta_nv * sz + delta_a * (da.dag() @ da) + omega_m * (db.dag() @ db)
            - G * (xa @ xb) + lam * (da.dag() @ sm + da @ sm.dag()))


__all__ = [
    'LABELINGS', 'PolaritonBasis', 'critical_coupling', 'polariton_frequencies', 'mixing_angle',
    'coupling_for_omega_minus', 'spin_polariton_couplings', 'bogoliubov_diagonalize',
    'extract_spin_couplings', 'symplectic_deviation', 'low_polariton_operator',
    'near_critical_polariton_operator', 'transformed_hamiltonian', 'linearized_hamiltonian',
    'HAMILTONIAN_TERMS', 'K4',
]
