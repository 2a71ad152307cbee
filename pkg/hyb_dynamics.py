"""
HYB - Open-System Dynamics

Lindblad master equation

    d rho/dt = -i [H, rho] + sum_k r_k D[L_k] rho,
    D[o] rho = o rho o^+ - 1/2 (o^+ o rho + rho o^+ o)

integrated with fixed-step RK4, and the two time-domain experiments built
on it:
- Rabi oscillations between one spin and the low polariton
- iSWAP gate under thermal cavity/mechanical damping and spin relaxation

Operators given as LocalOperator are applied by tensor contraction, so the
2 x 2 x Fock x Fock gate runs never build dense superoperators.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from hyb_dispersive import IDX_EG, IDX_GE, DispersiveParams, flip_flop, resonant_second_detuning
from hyb_errors import DimensionError, PhysicsDomainError, TraceDriftError, TruncationError
from hyb_operators import (
    EXCITED, GROUND, DensityMatrix, HilbertSpace, LocalOperator, Operator, annihilation,
    apply_left, apply_right_dag, basis_ket, embed, embed_local, min_eigenvalue, number,
    partial_trace_array, projector_excited, purity, sigma_minus, sigma_z, thermal_tail,
    trace_distance,
)

logger = logging.getLogger("DYNAMICS")

TRACE_WARN = 1e-8
TRACE_ABORT = 1e-6
STEPS_PER_PERIOD = 50
TAIL_WARN = 1e-6

AnyOperator = Union[Operator, LocalOperator]
Observable = Union[AnyOperator, Callable[[np.ndarray, float], float]]


@dataclass(frozen=True)
class DissipatorSpec:
    """Jump operator with rate and thermal occupation"""

    jump: AnyOperator
    rate: float
    n_th: float = 0.0
    label: str = ""

    def __post_init__(self):
        if not self.rate >= 0:
            raise PhysicsDomainError(f"[DYNAMICS] Dissipator rate must be >= 0, got {self.rate!r}")
        if not self.n_th >= 0:
            raise PhysicsDomainError(f"[DYNAMICS] Thermal occupation must be >= 0, got {self.n_th!r}")

    def channels(self) -> List[Tuple[float, AnyOperator]]:
        """(rate (n_th + 1), L) and, when n_th > 0, (rate n_th, L^+)"""
        out = []
        if self.rate > 0:
            out.append((self.rate * (self.n_th + 1.0), self.jump))
            if self.n_th > 0:
                out.append((self.rate * self.n_th, self.jump.dag()))
        return out


@dataclass
class Trajectory:
    """Time grid plus named observable series"""

    times: np.ndarray
    observables: Dict[str, np.ndarray]
    final_state: DensityMatrix
    metadata: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise PhysicsDomainError("[DYNAMICS] Trajectory times must be strictly increasing")
        for name, series in self.observables.items():
            series = np.asarray(series, dtype=float)
            if series.shape != self.times.shape:
                raise DimensionError(
                    f"[DYNAMICS] Series '{name}' has {series.size} samples for {self.times.size} times"
                )
            self.observables[name] = series

    def value_at(self, name: str, t: float) -> float:
        """Linear interpolation of a series at time t"""
        return float(np.interp(t, self.times, self.observables[name]))

    def columns(self) -> List[str]:
        return ['t'] + list(self.observables)


def _terms(H) -> List[AnyOperator]:
    if isinstance(H, (Operator, LocalOperator)):
        return [H]
    return list(H)


def _band(factor: np.ndarray) -> Optional[Tuple[int, np.ndarray]]:
    """(k, values) when every nonzero of `factor` lies on diagonal k, else None"""
    rows, cols = np.nonzero(factor)
    offsets = np.unique(cols - rows)
    if offsets.size > 1:
        return None
    k = int(offsets[0]) if offsets.size else 0
    d = factor.shape[0]
    idx = np.arange(max(0, -k), min(d, d - k))
    return k, factor[idx, idx + k].copy()


def _on_middle(M: np.ndarray, band, view: np.ndarray) -> np.ndarray:
    """M applied to the middle axis of a (before, d, after) view"""
    if band is not None:
        k, v = band
        if k == 0:
            return view * v[None, :, None]
        d = view.shape[1]
        lo, hi = max(0, -k), min(d, d - k)
        out = np.zeros(view.shape, dtype=complex)
        out[:, lo:hi, :] = v[None, :, None] * view[:, lo + k:hi + k, :]
        return out
    before, _, after = view.shape
    if before == 1:
        return (M @ view[0])[None]
    if after == 1:
        return (view[:, :, 0] @ M.T)[:, :, None]
    return np.matmul(M, view)


class _SlotTerm:
    """
    Factor on a run of consecutive slots, applied to a flat density matrix

    Row (or column) indices split as (before, d, after) around the slots, so
    F rho and rho F^+ are fixed reshapes plus one contraction; ladder and
    diagonal factors reduce to shifted elementwise products. Factors on
    non-adjacent slots go through apply_left / apply_right_dag.
    """

    def __init__(self, factor: np.ndarray, slots: Tuple[int, ...], dims: Tuple[int, ...]):
        self.factor = np.asarray(factor, dtype=complex)
        self.slots = tuple(slots)
        self.dims = tuple(dims)
        self.total = int(np.prod(dims))
        self.d = self.factor.shape[0]
        self.contiguous = list(self.slots) == list(range(self.slots[0], self.slots[-1] + 1))
        self.before = int(np.prod(dims[:self.slots[0]]))
        self.after = self.total // (self.before * self.d)
        self.band = _band(self.factor)
        self.conj = self.factor.conj()
        self.band_conj = None if self.band is None else (self.band[0], self.band[1].conj())

    def left(self, rho: np.ndarray) -> np.ndarray:
        """(F (x) I) rho"""
        n = self.total
        if not self.contiguous:
            return apply_left(self.factor, self.slots, self.dims, rho.reshape(self.dims * 2)).reshape(n, n)
        view = rho.reshape(self.before, self.d, self.after * n)
        return _on_middle(self.factor, self.band, view).reshape(n, n)

    def right_dag(self, rho: np.ndarray) -> np.ndarray:
        """rho (F (x) I)^+"""
        n = self.total
        if not self.contiguous:
            return apply_right_dag(self.factor, self.slots, self.dims, rho.reshape(self.dims * 2)).reshape(n, n)
        view = rho.reshape(n * self.before, self.d, self.after)
        return _on_middle(self.conj, self.band_conj, view).reshape(n, n)

    def sandwich_into(self, out: np.ndarray, rho: np.ndarray, rate: float):
        """out += rate L rho L^+; `out` must be C-contiguous"""
        if not (self.contiguous and self.band is not None):
            out += rate * self.right_dag(self.left(rho))
            return
        k, v = self.band
        lo, hi = max(0, -k), min(self.d, self.d - k)
        shape = (self.before, self.d, self.after) * 2
        o = out.reshape(shape)
        x = rho.reshape(shape)
        w = rate * np.outer(v, v.conj())
        o[:, lo:hi, :, :, lo:hi, :] += (w[None, :, None, None, :, None]
                                        * x[:, lo + k:hi + k, :, :, lo + k:hi + k, :])


class Liouvillian:
    """
    Precomputed Lindblad generator

    rho' = K rho + rho K^+ + sum_k r_k L_k rho L_k^+,  K = -iH - 1/2 sum_k r_k L_k^+ L_k

    H may be an operator or a sequence of operators to be summed. When every
    operator involved is a LocalOperator the generator is applied through
    tensor contractions on the slot structure; otherwise dense matrices are
    used.
    """

    def __init__(self, H, dissipators: Sequence[DissipatorSpec] = ()):
        h_terms = _terms(H)
        channels = [c for spec in dissipators for c in spec.channels()]
        ops = h_terms + [op for _, op in channels]
        if not ops:
            raise DimensionError("[DYNAMICS] Liouvillian needs at least one operator")

        self.space = ops[0].space
        for op in ops[1:]:
            if not op.space.matches(self.space):
                raise DimensionError(
                    f"[DYNAMICS] Operator on {op.space.dims} does not match {self.space.dims}"
                )
        self.dims = self.space.dims
        self.h_terms = h_terms
        self.channels = channels
        self.local = all(isinstance(op, LocalOperator) for op in ops)

        if self.local:
            k_terms: Dict[Tuple[int, ...], np.ndarray] = {}
            for op in h_terms:
                k_terms[op.slots] = k_terms.get(op.slots, 0) + (-1j) * op.factor
            for rate, op in channels:
                f = op.factor
                k_terms[op.slots] = k_terms.get(op.slots, 0) - 0.5 * rate * (f.conj().T @ f)
            self._k_local = [_SlotTerm(f, slots, self.dims) for slots, f in k_terms.items()]
            self._jumps_local = [(rate, _SlotTerm(op.factor, op.slots, self.dims)) for rate, op in channels]
        else:
            d = self.space.total
            K = np.zeros((d, d), dtype=complex)
            for op in h_terms:
                K += -1j * op.matrix
            for rate, op in channels:
                K -= 0.5 * rate * (op.matrix.conj().T @ op.matrix)
            self._k = K
            self._k_dag = K.conj().T
            self._jumps = [(rate, op.matrix, op.matrix.conj().T) for rate, op in channels]

    def apply(self, rho: np.ndarray, hermitian: bool = False) -> np.ndarray:
        """Generator applied to rho; `hermitian` lets rho K^+ be taken as (K rho)^+"""
        if self.local:
            return self._apply_local(rho, hermitian)
        left = self._k @ rho
        out = left + (left.conj().T if hermitian else rho @ self._k_dag)
        for rate, L, L_dag in self._jumps:
            out += rate * (L @ rho @ L_dag)
        return out

    def _apply_local(self, rho: np.ndarray, hermitian: bool) -> np.ndarray:
        rho = np.ascontiguousarray(rho, dtype=complex)
        left = np.zeros_like(rho)
        for term in self._k_local:
            left += term.left(rho)
        if hermitian:
            out = left + left.conj().T
        else:
            out = left
            for term in self._k_local:
                out += term.right_dag(rho)
        for rate, term in self._jumps_local:
            term.sandwich_into(out, rho, rate)
        return out

    def max_frequency(self) -> float:
        """max(spectral radius of H, largest channel rate)"""
        radius = 0.0
        for op in self.h_terms:
            m = op.factor if isinstance(op, LocalOperator) else op.matrix
            radius += float(np.max(np.abs(np.linalg.eigvals(m)), initial=0.0))
        rate = max((r for r, _ in self.channels), default=0.0)
        return max(radius, rate)


def lindblad_rhs(rho: Operator, H, dissipators: Sequence[DissipatorSpec] = ()) -> Operator:
    """d rho / dt for the given Hamiltonian and dissipators"""
    L = Liouvillian(H, dissipators)
    if not rho.space.matches(L.space):
        raise DimensionError(f"[DYNAMICS] State on {rho.space.dims} does not match {L.space.dims}")
    return Operator(rho.space, L.apply(np.array(rho.matrix)))


def default_time_step(H, dissipators: Sequence[DissipatorSpec] = ()) -> float:
    """1 / (50 max(spectral radius of H, largest channel rate))"""
    scale = Liouvillian(H, dissipators).max_frequency()
    if scale <= 0:
        raise PhysicsDomainError("[DYNAMICS] Generator is zero; give dt explicitly")
    return 1.0 / (STEPS_PER_PERIOD * scale)


def _expect(rho: np.ndarray, op: AnyOperator, dims) -> float:
    if isinstance(op, LocalOperator):
        reduced = partial_trace_array(rho, dims, op.slots)
        return float(np.real(np.einsum('ij,ji->', reduced, op.factor)))
    return float(np.real(np.einsum('ij,ji->', rho, op.matrix)))


def _record_run(steps: int, drift: float):
    try:
        from prometheus_exporter import get_exporter
        prom = get_exporter()
        prom.record_rk4_steps(steps)
        prom.record_trace_drift(drift)
    except Exception:
        pass


def evolve(rho0: DensityMatrix, H, dissipators: Sequence[DissipatorSpec], t_final: float,
           dt: Optional[float] = None, observables: Optional[Mapping[str, Observable]] = None,
           sampler: Optional[Callable[[np.ndarray, float], Mapping[str, float]]] = None,
           sample_every: int = 1) -> Trajectory:
    """
    Fixed-step RK4 integration of the master equation

    dt is shrunk so an integer number of steps lands on t_final. The state
    is re-symmetrized after every step; the trace is never renormalized,
    only monitored.

    Args:
        observables: name -> operator (real expectation) or callable(rho, t)
        sampler: callable(rho, t) returning several named values at once
        sample_every: record every n-th step (t=0 and t_final always kept)

    Raises:
        TraceDriftError: |Tr rho - 1| exceeds 1e-6 during the run
    """
    rho0 = DensityMatrix(rho0.space, rho0.matrix).validate()
    if not t_final >= 0:
        raise PhysicsDomainError(f"[DYNAMICS] t_final must be >= 0, got {t_final!r}")
    L = Liouvillian(H, dissipators)
    if not rho0.space.matches(L.space):
        raise DimensionError(f"[DYNAMICS] State on {rho0.space.dims} does not match {L.space.dims}")
    if dt is None:
        dt = default_time_step(H, dissipators)
    if not dt > 0:
        raise PhysicsDomainError(f"[DYNAMICS] dt must be > 0, got {dt!r}")

    n_steps = max(1, int(math.ceil(t_final / dt - 1e-9))) if t_final > 0 else 0
    h = t_final / n_steps if n_steps else 0.0
    observables = dict(observables or {})
    dims = rho0.space.dims

    times: List[float] = []
    series: Dict[str, List[float]] = {name: [] for name in observables}

    def sample(rho, t):
        times.append(t)
        for name, obs in observables.items():
            if callable(obs) and not isinstance(obs, (Operator, LocalOperator)):
                series[name].append(float(obs(rho, t)))
            else:
                series[name].append(_expect(rho, obs, dims))
        if sampler is not None:
            for name, value in sampler(rho, t).items():
                series.setdefault(name, []).append(float(value))

    rho = np.array(rho0.matrix)
    sample(rho, 0.0)
    max_drift = 0.0
    start = time.perf_counter()

    for step in range(1, n_steps + 1):
        k1 = L.apply(rho, hermitian=True)
        k2 = L.apply(rho + 0.5 * h * k1, hermitian=True)
        k3 = L.apply(rho + 0.5 * h * k2, hermitian=True)
        k4 = L.apply(rho + h * k3, hermitian=True)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)

        drift = abs(float(np.real(np.trace(rho))) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > TRACE_ABORT:
            raise TraceDriftError(
                f"[RK4] Trace drift {drift:.3e} at t={step * h:.6g} exceeds {TRACE_ABORT:.0e}; "
                f"step size {h:.3e} is too large for this generator, try dt <= {0.25 * h:.3e}"
            )
        if step % sample_every == 0 or step == n_steps:
            sample(rho, step * h)

    elapsed = time.perf_counter() - start
    if max_drift > TRACE_WARN:
        logger.warning(f"[RK4] Trace drift {max_drift:.3e} above {TRACE_WARN:.0e} (dt={h:.3e})")
    logger.debug(f"[RK4] {n_steps} steps of {h:.4e}s on dim {rho.shape[0]} in {elapsed:.2f}s")
    _record_run(n_steps, max_drift)

    final = DensityMatrix(rho0.space, rho)
    metadata = {'dt': h, 'steps': float(n_steps), 'max_trace_drift': max_drift,
                'elapsed_s': elapsed}
    return Trajectory(np.array(times), {k: np.array(v) for k, v in series.items()}, final, metadata)


# ---------------------------------------------------------------------------
# Jaynes-Cummings / Rabi
# ---------------------------------------------------------------------------

def jc_hamiltonian(delta_nv: float, omega_minus: float, lam_plus: float, n_max: int) -> Operator:
    """1/2 Delta_NV sz + omega_- a^+ a + lambda_+ (a^+ s- + a s+) on spin (x) Fock(n_max)"""
    if n_max < 2:
        raise DimensionError(f"[DYNAMICS] Fock truncation must be >= 2, got {n_max}")
    space = HilbertSpace((2, n_max), ("spin", "polariton"))
    sz = embed(sigma_z(), 0, space)
    sm = embed(sigma_minus(), 0, space)
    a = embed(annihilation(n_max), 1, space)
    return 0.5 * delta_nv * sz + omega_minus * (a.dag() @ a) + lam_plus * (a.dag() @ sm + a @ sm.dag())


def excitation_number(n_max: int) -> Operator:
    """a^+ a + s+ s- on spin (x) Fock(n_max)"""
    space = HilbertSpace((2, n_max), ("spin", "polariton"))
    return embed(number(n_max), 1, space) + embed(projector_excited(), 0, space)


@dataclass(frozen=True)
class RabiParams:
    lam_plus: float = 2.0 * math.pi * 3.5e6
    omega_minus: float = 100.0
    delta_nv: Optional[float] = None
    kappa: float = 1.0e6
    gamma_perp: float = 1.0e3
    gamma_par: float = 0.0
    n_max: int = 8
    periods: float = 10.0
    t_final: Optional[float] = None
    dt: Optional[float] = None

    @property
    def spin_detuning(self) -> float:
        return self.omega_minus if self.delta_nv is None else self.delta_nv

    @property
    def rabi_period(self) -> float:
        """Vacuum Rabi period of P_e: pi / lambda_+"""
        return math.pi / self.lam_plus


def rabi_experiment(params: RabiParams, n_max: Optional[int] = None, t_final: Optional[float] = None,
                    dt: Optional[float] = None) -> Trajectory:
    """
    Spin in |e>, polariton in |0>, evolved under the JC Hamiltonian with
    kappa D[a-] + gamma_perp D[s-] (+ gamma_par D[sz])

    Series: P_e, n_polariton.
    """
    n_max = params.n_max if n_max is None else n_max
    if t_final is None:
        t_final = params.t_final if params.t_final is not None else params.periods * params.rabi_period
    dt = params.dt if dt is None else dt

    H = jc_hamiltonian(params.spin_detuning, params.omega_minus, params.lam_plus, n_max)
    space = H.space
    a = embed(annihilation(n_max), 1, space)
    dissipators = [
        DissipatorSpec(a, params.kappa, label="kappa"),
        DissipatorSpec(embed(sigma_minus(), 0, space), params.gamma_perp, label="gamma_perp"),
    ]
    if params.gamma_par > 0:
        dissipators.append(DissipatorSpec(embed(sigma_z(), 0, space), params.gamma_par, label="gamma_par"))

    rho0 = DensityMatrix.from_pure(basis_ket(space, (EXCITED, 0)), space)
    observables = {
        'P_e': embed(projector_excited(), 0, space),
        'n_polariton': a.dag() @ a,
    }
    logger.info(f"[RABI] lambda_+={params.lam_plus:.6g} rad/s, n_max={n_max}, t_final={t_final:.4g}s")
    traj = evolve(rho0, H, dissipators, t_final, dt, observables=observables)

    traj.metadata.update({
        'rabi_period': params.rabi_period,
        'purity_final': purity(traj.final_state),
        'min_eigenvalue': min_eigenvalue(traj.final_state),
    })
    return traj


# ---------------------------------------------------------------------------
# Gate under thermal dissipation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateParams:
    lam_plus1: Optional[float] = None
    lam_plus2: Optional[float] = None
    delta1: Optional[float] = None
    delta2: Optional[float] = None
    delta_ratio: float = 10.0
    omega_minus: float = 100.0
    N_pl: float = 0.0
    kappa: float = 1.0e6
    gamma_m: float = 10.0
    n_a_th: float = 0.01
    n_m_th: float = 260.0
    gamma_perp: float = 1.0e3
    gamma_par: float = 0.0
    n_a: int = 6
    n_b: int = 6
    gate_periods: float = 1.0
    t_final: Optional[float] = None
    dt: Optional[float] = None
    enforce_resonance: bool = True


def _capped_occupation(n_th: float, n_max: int, name: str) -> float:
    """Occupation actually simulated on a truncation of n_max levels (n_max >= 10 n_th)"""
    cap = n_max / 10.0
    if n_th > cap:
        logger.warning(
            f"[GATE] {name} occupation {n_th:g} needs n_max >= {math.ceil(10 * n_th)}; simulating "
            f"{cap:g} on {n_max} levels (two-spin dynamics does not depend on it)"
        )
        return cap
    return n_th


def gate_dispersive_params(params: GateParams, basis=None) -> DispersiveParams:
    """Resolve couplings and detunings of a gate run"""
    lam1 = params.lam_plus1
    if lam1 is None:
        if basis is None:
            raise PhysicsDomainError("[GATE] Need lam_plus1 or a polariton basis")
        lam1 = basis.lam_plus
    lam2 = lam1 if params.lam_plus2 is None else params.lam_plus2
    delta1 = params.delta1 if params.delta1 is not None else params.delta_ratio * lam1
    omega_minus = basis.omega_minus if basis is not None else params.omega_minus

    if params.enforce_resonance:
        delta2 = resonant_second_detuning(lam1, delta1, lam2, params.N_pl)
        if params.delta2 is not None and not math.isclose(delta2, params.delta2, rel_tol=1e-9):
            logger.info(f"[GATE] delta2 moved {params.delta2:.6g} -> {delta2:.6g} for resonance")
    else:
        delta2 = params.delta2 if params.delta2 is not None else delta1
    return DispersiveParams((lam1, lam2), (delta1, delta2), omega_minus=omega_minus, N_pl=params.N_pl)


def full_dissipative_experiment(params: GateParams, basis=None,
                                truncations: Optional[Sequence[int]] = None,
                                t_final: Optional[float] = None, dt: Optional[float] = None) -> Trajectory:
    """
    iSWAP run on spin1 (x) spin2 (x) Fock(n_a) (x) Fock(n_b)

    Spins evolve under the effective Hamiltonian in the frame rotating at
    the mean effective frequency (exactly the flip-flop term when the two
    spins are resonant); cavity and mechanics carry thermal damping pairs,
    spins carry gamma_perp D[s-] (and gamma_par D[sz] if set). Initial state
    |g>|e> (x) thermal (x) thermal.

    Series: fidelity against exp(-i g_eff t flip-flop)|g e>, P_ge, P_eg,
    distance_ideal (trace distance of the two-spin state to the ideal one).
    """
    dp = gate_dispersive_params(params, basis)
    n_a, n_b = truncations if truncations is not None else (params.n_a, params.n_b)
    if n_a < 2 or n_b < 2:
        raise TruncationError(f"[GATE] Boson truncations must be >= 2, got ({n_a}, {n_b})")

    n_a_th = _capped_occupation(params.n_a_th, n_a, "cavity")
    n_m_th = _capped_occupation(params.n_m_th, n_b, "mechanical")
    for name, n_th, n_max in (("cavity", n_a_th, n_a), ("mechanical", n_m_th, n_b)):
        tail = thermal_tail(n_th, n_max)
        if tail > TAIL_WARN:
            logger.warning(f"[GATE] {name} thermal tail {tail:.2e} at level {n_max - 1} exceeds {TAIL_WARN:.0e}")

    space = HilbertSpace((2, 2, n_a, n_b), ("spin1", "spin2", "cavity", "mechanics"))
    g_eff = abs(dp.g_eff)
    d1, d2 = dp.delta_eff
    mean = 0.5 * (d1 + d2)
    sz = sigma_z().matrix
    eye = np.eye(2)
    generator = flip_flop()
    h_spins = 0.5 * (d1 - mean) * np.kron(sz, eye) + 0.5 * (d2 - mean) * np.kron(eye, sz) + dp.g_eff * generator
    H = embed_local(h_spins, (0, 1), space)

    sm = sigma_minus().matrix
    dissipators = [
        DissipatorSpec(embed_local(annihilation(n_a), 2, space), params.kappa, n_a_th, label="kappa"),
        DissipatorSpec(embed_local(annihilation(n_b), 3, space), params.gamma_m, n_m_th, label="gamma_m"),
        DissipatorSpec(embed_local(sm, 0, space), params.gamma_perp, label="gamma_perp_1"),
        DissipatorSpec(embed_local(sm, 1, space), params.gamma_perp, label="gamma_perp_2"),
    ]
    if params.gamma_par > 0:
        dissipators += [
            DissipatorSpec(embed_local(sz, 0, space), params.gamma_par, label="gamma_par_1"),
            DissipatorSpec(embed_local(sz, 1, space), params.gamma_par, label="gamma_par_2"),
        ]

    spins0 = DensityMatrix.from_pure(basis_ket(HilbertSpace((2, 2)), (GROUND, EXCITED)), HilbertSpace((2, 2)))
    rho0 = DensityMatrix.product(
        spins0,
        DensityMatrix.thermal(n_a_th, n_a, "cavity"),
        DensityMatrix.thermal(n_m_th, n_b, "mechanics"),
    )
    rho0 = DensityMatrix(space, rho0.matrix)

    gate_time = 0.5 * math.pi / g_eff if g_eff > 0 else 0.0
    if t_final is None:
        t_final = params.t_final if params.t_final is not None else params.gate_periods * gate_time
    if dt is None:
        dt = params.dt
    psi0 = basis_ket(HilbertSpace((2, 2)), (GROUND, EXCITED))

    def spin_readout(rho, t):
        spins = partial_trace_array(rho, space.dims, (0, 1))
        ideal = linalg.expm(-1j * dp.g_eff * t * generator) @ psi0
        fid = float(np.real(np.vdot(ideal, spins @ ideal)))
        return {
            'fidelity': min(max(fid, 0.0), 1.0),
            'P_ge': float(np.real(spins[IDX_GE, IDX_GE])),
            'P_eg': float(np.real(spins[IDX_EG, IDX_EG])),
            'distance_ideal': trace_distance(spins, np.outer(ideal, ideal.conj())),
        }

    logger.info(f"[GATE] g_eff={dp.g_eff:.6g} rad/s ({dp.g_eff_hz:.6g} Hz), gate time {gate_time:.4g}s, "
                f"dims {space.dims}")
    traj = evolve(rho0, H, dissipators, t_final, dt, sampler=spin_readout)

    meta = {
        'g_eff': dp.g_eff,
        'g_eff_hz': dp.g_eff_hz,
        'gate_time': gate_time,
        'delta1': dp.delta[0],
        'delta2': dp.delta[1],
        'n_a_th_simulated': n_a_th,
        'n_m_th_simulated': n_m_th,
        'min_eigenvalue': min_eigenvalue(traj.final_state),
    }
    if 0 < gate_time <= traj.times[-1] * (1 + 1e-12):
        meta['gate_fidelity'] = traj.value_at('fidelity', gate_time)
    traj.metadata.update(meta)
    return traj


__all__ = [
    'DissipatorSpec', 'Trajectory', 'Liouvillian', 'lindblad_rhs', 'evolve', 'default_time_step',
    'jc_hamiltonian', 'excitation_number', 'RabiParams', 'rabi_experiment', 'GateParams',
    'gate_dispersive_params', 'full_dissipative_experiment',
]
