"""
HYB - Operator Core

Dense complex-matrix substrate shared by every physics module:
- Composite Hilbert spaces (spins + truncated bosonic modes)
- Operators, local operators and density matrices
- Embedding, expectation values, partial traces, fidelities

Conventions (fixed):
- Kronecker ordering: slot 0 is the slowest-varying index
- Qubit basis is (|e>, |g>): sigma_z|e> = +|e>, sigma_minus|e> = |g>
- Fock basis |0>, |1>, ..., |n_max-1>

All values are immutable after construction; every function here is pure.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from hyb_errors import DimensionError, InvalidStateError

logger = logging.getLogger("OPERATORS")

# Density-matrix tolerances
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8

# Qubit basis indices
EXCITED = 0
GROUND = 1


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of subsystems"""

    dims: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("[OPERATORS] HilbertSpace needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise DimensionError(f"[OPERATORS] Subsystem dimensions must be >= 1, got {dims}")

        labels = tuple(self.labels) if self.labels else tuple(f"s{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise DimensionError(
                f"[OPERATORS] {len(labels)} labels given for {len(dims)} subsystems"
            )

        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'labels', labels)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_slots(self) -> int:
        return len(self.dims)

    def slot(self, label: str) -> int:
        """Index of the subsystem with the given label"""
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"[OPERATORS] No subsystem labelled '{label}' in {self.labels}")

    def subspace(self, slots: Iterable[int]) -> 'HilbertSpace':
        """Space of the given slots, in ascending slot order"""
        keep = sorted(set(slots))
        return HilbertSpace(tuple(self.dims[s] for s in keep), tuple(self.labels[s] for s in keep))

    def matches(self, other: 'HilbertSpace') -> bool:
        return self.dims == other.dims

    @classmethod
    def single(cls, dim: int, label: str = "x") -> 'HilbertSpace':
        return cls((dim,), (label,))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on a HilbertSpace"""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"[OPERATORS] Operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.space.total:
            raise DimensionError(
                f"[OPERATORS] Matrix dimension {m.shape[0]} does not match space {self.space.dims}"
            )
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @classmethod
    def on(cls, matrix, label: str = "x") -> 'Operator':
        """Single-subsystem operator"""
        m = np.asarray(matrix)
        return cls(HilbertSpace.single(m.shape[0], label), m)

    @property
    def dim(self) -> int:
        return self.space.total

    def dag(self) -> 'Operator':
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def commutator(self, other: 'Operator') -> 'Operator':
        _check_same_space(self, other)
        return Operator(self.space, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def eigenvalues(self) -> np.ndarray:
        if self.is_hermitian(1e-10):
            return np.linalg.eigvalsh(self.matrix)
        return np.linalg.eigvals(self.matrix)

    def __matmul__(self, other):
        if isinstance(other, (Operator, LocalOperator)):
            _check_same_space(self, other)
            return Operator(self.space, self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)

    def __add__(self, other: 'Operator') -> 'Operator':
        _check_same_space(self, other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: 'Operator') -> 'Operator':
        _check_same_space(self, other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> 'Operator':
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar) -> 'Operator':
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """
    Operator that acts non-trivially only on a few slots

    `factor` is the matrix on the listed slots (ascending, Kronecker-ordered
    among themselves); every other slot carries the identity. The dense
    matrix is only built when `.matrix` is accessed, so large composite
    spaces can be integrated through tensor contractions instead.
    """

    space: HilbertSpace
    slots: Tuple[int, ...]
    factor: np.ndarray

    def __post_init__(self):
        slots = tuple(int(s) for s in self.slots)
        if not slots or list(slots) != sorted(set(slots)):
            raise DimensionError(f"[OPERATORS] Local slots must be unique and ascending, got {slots}")
        if slots[-1] >= self.space.n_slots or slots[0] < 0:
            raise DimensionError(f"[OPERATORS] Slots {slots} out of range for {self.space.dims}")

        f = np.array(self.factor, dtype=complex)
        expected = int(np.prod([self.space.dims[s] for s in slots]))
        if f.shape != (expected, expected):
            raise DimensionError(
                f"[OPERATORS] Factor shape {f.shape} does not match slots {slots} of {self.space.dims}"
            )
        f.setflags(write=False)
        object.__setattr__(self, 'slots', slots)
        object.__setattr__(self, 'factor', f)

    @property
    def dim(self) -> int:
        return self.space.total

    @cached_property
    def matrix(self) -> np.ndarray:
        d = self.space.total
        ident = np.eye(d, dtype=complex).reshape(self.space.dims * 2)
        m = apply_left(self.factor, self.slots, self.space.dims, ident).reshape(d, d)
        m.setflags(write=False)
        return m

    def to_operator(self) -> Operator:
        return Operator(self.space, self.matrix)

    def dag(self) -> 'LocalOperator':
        return LocalOperator(self.space, self.slots, self.factor.conj().T)

    def __mul__(self, scalar) -> 'LocalOperator':
        return LocalOperator(self.space, self.slots, self.factor * complex(scalar))

    __rmul__ = __mul__


AnyOperator = Union[Operator, LocalOperator]


def _check_same_space(a, b):
    if not a.space.matches(b.space):
        raise DimensionError(f"[OPERATORS] Space mismatch: {a.space.dims} vs {b.space.dims}")


# ---------------------------------------------------------------------------
# Tensor application (shared with the Lindblad integrator)
# ---------------------------------------------------------------------------

def apply_left(factor: np.ndarray, slots: Sequence[int], dims: Sequence[int],
               tensor: np.ndarray) -> np.ndarray:
    """
    (F (x) I) X for X stored as a tensor of shape dims + dims

    Only the row indices of X on `slots` are contracted.
    """
    k = len(slots)
    f = np.asarray(factor).reshape([dims[s] for s in slots] * 2)
    res = np.tensordot(f, tensor, axes=(list(range(k, 2 * k)), list(slots)))
    return np.moveaxis(res, list(range(k)), list(slots))


def apply_right_dag(factor: np.ndarray, slots: Sequence[int], dims: Sequence[int],
                    tensor: np.ndarray) -> np.ndarray:
    """X (F (x) I)^dagger for X stored as a tensor of shape dims + dims"""
    n = len(dims)
    k = len(slots)
    f = np.asarray(factor).conj().reshape([dims[s] for s in slots] * 2)
    res = np.tensordot(tensor, f, axes=([n + s for s in slots], list(range(k, 2 * k))))
    return np.moveaxis(res, list(range(2 * n - k, 2 * n)), [n + s for s in slots])


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _as_matrix(op) -> np.ndarray:
    if isinstance(op, (Operator, LocalOperator)):
        return op.matrix
    return np.asarray(op, dtype=complex)


def embed(op, slot: int, space: HilbertSpace) -> Operator:
    """
    Place a single-subsystem operator at `slot`, identity elsewhere

    Raises:
        DimensionError: operator dimension differs from space.dims[slot]
    """
    m = _as_matrix(op)
    if not 0 <= slot < space.n_slots:
        raise DimensionError(f"[OPERATORS] Slot {slot} out of range for {space.dims}")
    if m.shape != (space.dims[slot], space.dims[slot]):
        raise DimensionError(
            f"[OPERATORS] Operator of dimension {m.shape[0]} cannot sit in slot {slot} "
            f"of dimension {space.dims[slot]}"
        )
    left = int(np.prod(space.dims[:slot]))
    right = int(np.prod(space.dims[slot + 1:]))
    full = np.kron(np.kron(np.eye(left), m), np.eye(right))
    return Operator(space, full)


def embed_local(op, slots: Union[int, Sequence[int]], space: HilbertSpace) -> LocalOperator:
    """Lazy counterpart of embed(), also for operators spanning several slots"""
    if isinstance(slots, (int, np.integer)):
        slots = (int(slots),)
    return LocalOperator(space, tuple(slots), _as_matrix(op))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.total))


def annihilation(n_max: int, label: str = "mode") -> Operator:
    """Truncated bosonic annihilation operator: <n-1|a|n> = sqrt(n)"""
    if n_max < 2:
        raise DimensionError(f"[OPERATORS] Fock truncation must be >= 2, got {n_max}")
    return Operator.on(np.diag(np.sqrt(np.arange(1, n_max)), k=1), label)


def creation(n_max: int, label: str = "mode") -> Operator:
    return annihilation(n_max, label).dag()


def number(n_max: int, label: str = "mode") -> Operator:
    if n_max < 2:
        raise DimensionError(f"[OPERATORS] Fock truncation must be >= 2, got {n_max}")
    return Operator.on(np.diag(np.arange(n_max, dtype=float)), label)


def sigma_z(label: str = "spin") -> Operator:
    return Operator.on(np.diag([1.0, -1.0]), label)


def sigma_minus(label: str = "spin") -> Operator:
    """|g><e| in the (|e>, |g>) basis"""
    return Operator.on(np.array([[0.0, 0.0], [1.0, 0.0]]), label)


def sigma_plus(label: str = "spin") -> Operator:
    return sigma_minus(label).dag()


def projector_excited(label: str = "spin") -> Operator:
    return Operator.on(np.diag([1.0, 0.0]), label)


def basis_ket(space: HilbertSpace, indices: Sequence[int]) -> np.ndarray:
    """Product basis vector |i_0, i_1, ...> (Kronecker ordered)"""
    if len(indices) != space.n_slots:
        raise DimensionError(f"[OPERATORS] {len(indices)} indices for {space.n_slots} slots")
    for i, d in zip(indices, space.dims):
        if not 0 <= i < d:
            raise DimensionError(f"[OPERATORS] Basis index {i} out of range for dimension {d}")
    psi = np.zeros(space.total, dtype=complex)
    psi[np.ravel_multi_index(tuple(indices), space.dims)] = 1.0
    return psi


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator"""

    def validate(self, herm_tol: float = HERMITIAN_TOL, trace_tol: float = TRACE_TOL,
                 pos_tol: float = POSITIVITY_TOL) -> 'DensityMatrix':
        """
        Check the density-matrix invariants

        Raises:
            InvalidStateError: on the first violated invariant
        """
        m = self.matrix
        herm = float(np.max(np.abs(m - m.conj().T), initial=0.0))
        if herm > herm_tol:
            raise InvalidStateError(f"[OPERATORS] Density matrix not Hermitian (deviation {herm:.3e})")

        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > trace_tol:
            raise InvalidStateError(f"[OPERATORS] Density matrix trace {tr!r} != 1")

        lowest = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lowest < -pos_tol * tr:
            raise InvalidStateError(f"[OPERATORS] Density matrix not positive (eigenvalue {lowest:.3e})")
        return self

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @classmethod
    def from_matrix(cls, space: HilbertSpace, matrix, validate: bool = True, **tols) -> 'DensityMatrix':
        rho = cls(space, matrix)
        return rho.validate(**tols) if validate else rho

    @classmethod
    def from_pure(cls, psi, space: HilbertSpace) -> 'DensityMatrix':
        psi = _normalized(psi, space.total)
        return cls(space, np.outer(psi, psi.conj())).validate()

    @classmethod
    def thermal(cls, n_th: float, n_max: int, label: str = "mode") -> 'DensityMatrix':
        """Bose-Einstein state with mean occupation n_th, renormalized on the truncation"""
        if n_max < 1:
            raise DimensionError(f"[OPERATORS] Fock truncation must be >= 1, got {n_max}")
        if n_th < 0:
            raise InvalidStateError(f"[OPERATORS] Thermal occupation must be >= 0, got {n_th}")
        populations = thermal_populations(n_th, n_max)
        return cls(HilbertSpace.single(n_max, label), np.diag(populations)).validate()

    @classmethod
    def product(cls, *states: 'DensityMatrix') -> 'DensityMatrix':
        """Kronecker product, slot order = argument order"""
        if not states:
            raise DimensionError("[OPERATORS] product() needs at least one state")
        m = states[0].matrix
        dims = list(states[0].space.dims)
        labels = list(states[0].space.labels)
        for st in states[1:]:
            m = np.kron(m, st.matrix)
            dims += list(st.space.dims)
            labels += list(st.space.labels)
        return cls(HilbertSpace(tuple(dims), tuple(labels)), m)


def thermal_populations(n_th: float, n_max: int) -> np.ndarray:
    """Truncated geometric distribution p_n ~ (n_th/(n_th+1))^n"""
    if n_th == 0:
        p = np.zeros(n_max)
        p[0] = 1.0
        return p
    x = n_th / (n_th + 1.0)
    p = x ** np.arange(n_max)
    return p / p.sum()


def thermal_tail(n_th: float, n_max: int) -> float:
    """Population of the highest retained Fock level"""
    return float(thermal_populations(n_th, n_max)[-1]) if n_max > 1 else 1.0


def _normalized(psi, dim: int) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.size != dim:
        raise DimensionError(f"[OPERATORS] State vector of size {v.size} for dimension {dim}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-10:
        raise InvalidStateError(f"[OPERATORS] State vector not normalized (norm {norm!r})")
    return v


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------

def expectation(rho: Operator, A: AnyOperator) -> complex:
    """Tr(rho A)"""
    _check_same_space(rho, A)
    return complex(np.einsum('ij,ji->', rho.matrix, A.matrix))


def partial_trace_array(matrix: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every slot not in `keep`; kept slots stay in ascending order"""
    dims = list(dims)
    keep = sorted(set(keep))
    if not keep:
        raise DimensionError("[OPERATORS] partial_trace needs a nonempty keep set")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"[OPERATORS] Keep slots {keep} out of range for {dims}")

    t = np.asarray(matrix).reshape(dims * 2)
    remaining = len(dims)
    for s in sorted(set(range(len(dims))) - set(keep), reverse=True):
        t = np.trace(t, axis1=s, axis2=s + remaining)
        remaining -= 1

    d_keep = int(np.prod([dims[s] for s in keep]))
    return t.reshape(d_keep, d_keep)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = sorted(set(keep))
    reduced = partial_trace_array(rho.matrix, rho.space.dims, keep)
    return DensityMatrix(rho.space.subspace(keep), reduced)


def fidelity_pure(psi, rho: Operator) -> float:
    """
    <psi|rho|psi>

    Values within TRACE_TOL outside [0, 1] are clipped; anything further
    out means rho is not a density matrix.

    Raises:
        InvalidStateError: overlap below -TRACE_TOL or above 1 + TRACE_TOL
    """
    v = _normalized(psi, rho.space.total)
    value = float(np.real(np.vdot(v, rho.matrix @ v)))
    if value < -TRACE_TOL or value > 1.0 + TRACE_TOL:
        raise InvalidStateError(f"[OPERATORS] Pure-state fidelity {value:.6g} outside [0, 1]")
    return float(np.clip(value, 0.0, 1.0))


def trace_distance(rho, sigma) -> float:
    """(1/2) || rho - sigma ||_1"""
    a = _as_matrix(rho)
    b = _as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"[OPERATORS] trace_distance shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def purity(rho) -> float:
    m = _as_matrix(rho)
    return float(np.real(np.einsum('ij,ji->', m, m)))


def min_eigenvalue(rho) -> float:
    m = _as_matrix(rho)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


__all__ = [
    'HilbertSpace', 'Operator', 'LocalOperator', 'DensityMatrix',
    'embed', 'embed_local', 'identity', 'annihilation', 'creation', 'number',
    'sigma_z', 'sigma_minus', 'sigma_plus', 'projector_excited', 'basis_ket',
    'thermal_populations', 'thermal_tail',
    'expectation', 'partial_trace', 'partial_trace_array', 'fidelity_pure',
    'trace_distance', 'purity', 'min_eigenvalue', 'apply_left', 'apply_right_dag',
    'EXCITED', 'GROUND',
]
