"""
HYB - Test Utilities

Shared states and oracles for the test suites and the runtime bench.
Random states come from a seeded numpy Generator so every failure is
reproducible from the seed printed in the assertion.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from hyb_operators import EXCITED, GROUND, DensityMatrix, HilbertSpace


def rng(seed: int = 1234) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_density_matrix(dim: int, generator: Optional[np.random.Generator] = None,
                          rank: Optional[int] = None) -> np.ndarray:
    """
    Random full-rank (or rank-limited) density matrix

    Built as G G^+ / Tr(G G^+) from a complex Ginibre matrix, which is
    Hermitian and positive by construction.
    """
    g = generator if generator is not None else rng()
    k = dim if rank is None else rank
    m = g.normal(size=(dim, k)) + 1j * g.normal(size=(dim, k))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def random_state(space: HilbertSpace, generator: Optional[np.random.Generator] = None) -> DensityMatrix:
    return DensityMatrix(space, random_density_matrix(space.total, generator))


def random_ket(dim: int, generator: Optional[np.random.Generator] = None) -> np.ndarray:
    g = generator if generator is not None else rng()
    v = g.normal(size=dim) + 1j * g.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim: int, generator: Optional[np.random.Generator] = None, scale: float = 1.0) -> np.ndarray:
    g = generator if generator is not None else rng()
    m = g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim))
    return scale * 0.5 * (m + m.conj().T)


def bell_state(kind: str = "phi+") -> np.ndarray:
    """
    Two-qubit Bell ket in the |ee>, |eg>, |ge>, |gg> order

    kind: phi+, phi-, psi+, psi-
    """
    v = np.zeros(4, dtype=complex)
    ee, eg, ge, gg = 0, 1, 2, 3
    if kind == "phi+":
        v[ee], v[gg] = 1.0, 1.0
    elif kind == "phi-":
        v[ee], v[gg] = 1.0, -1.0
    elif kind == "psi+":
        v[eg], v[ge] = 1.0, 1.0
    elif kind == "psi-":
        v[eg], v[ge] = 1.0, -1.0
    else:
        raise ValueError(f"Unknown Bell state '{kind}'")
    return v / np.sqrt(2.0)


def bell_density(kind: str = "phi+") -> np.ndarray:
    v = bell_state(kind)
    return np.outer(v, v.conj())


def qubit_ket(level: int) -> np.ndarray:
    """|e> for EXCITED, |g> for GROUND"""
    v = np.zeros(2, dtype=complex)
    v[level] = 1.0
    return v


def product_ket(*levels: int) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for level in levels:
        out = np.kron(out, qubit_ket(level))
    return out


def thermal_reference(n_th: float, n_max: int) -> np.ndarray:
    """Normalized truncated Bose populations, computed directly"""
    if n_th == 0:
        p = np.zeros(n_max)
        p[0] = 1.0
        return p
    x = n_th / (1.0 + n_th)
    p = np.array([x ** n for n in range(n_max)])
    return p / p.sum()


def partial_trace_oracle(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """
    Reference partial trace by explicit index loops

    Small spaces only.
    """
    dims = tuple(dims)
    keep = tuple(sorted(keep))
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    kept_dims = [dims[i] for i in keep]
    traced_dims = [dims[i] for i in traced]
    out_dim = int(np.prod(kept_dims)) if kept_dims else 1
    out = np.zeros((out_dim, out_dim), dtype=complex)

    def flat(index: Tuple[int, ...]) -> int:
        f = 0
        for i, d in zip(index, dims):
            f = f * d + i
        return f

    for k_row in np.ndindex(*kept_dims):
        for k_col in np.ndindex(*kept_dims):
            total = 0.0 + 0.0j
            for t in np.ndindex(*traced_dims):
                row = [0] * n
                col = [0] * n
                for pos, slot in enumerate(keep):
                    row[slot] = k_row[pos]
                    col[slot] = k_col[pos]
                for pos, slot in enumerate(traced):
                    row[slot] = t[pos]
                    col[slot] = t[pos]
                total += rho[flat(tuple(row)), flat(tuple(col))]
            r = int(np.ravel_multi_index(k_row, kept_dims)) if kept_dims else 0
            c = int(np.ravel_multi_index(k_col, kept_dims)) if kept_dims else 0
            out[r, c] = total
    return out


def zero_crossings(t: np.ndarray, y: np.ndarray, level: float = 0.0) -> np.ndarray:
    """Linearly interpolated times where y crosses `level`"""
    t = np.asarray(t, dtype=float)
    s = np.asarray(y, dtype=float) - level
    idx = np.where(np.signbit(s[:-1]) != np.signbit(s[1:]))[0]
    return t[idx] - s[idx] * (t[idx + 1] - t[idx]) / (s[idx + 1] - s[idx])


def oscillation_period(t: np.ndarray, y: np.ndarray, level: float = 0.5) -> float:
    """
    Period from the crossings of `level`

    Downward and upward crossings are timed separately; the period is the
    mean of their average spacings.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    crossings = zero_crossings(t, y, level)
    if crossings.size < 3:
        raise ValueError(f"Need at least three crossings of {level}, found {crossings.size}")
    idx = np.searchsorted(t, crossings)
    falling = y[idx - 1] > level
    periods = [np.mean(np.diff(crossings[mask])) for mask in (falling, ~falling) if np.count_nonzero(mask) >= 2]
    return float(np.mean(periods))


__all__ = [
    'rng', 'random_density_matrix', 'random_state', 'random_ket', 'random_hermitian', 'bell_state',
    'bell_density', 'qubit_ket', 'product_ket', 'thermal_reference', 'partial_trace_oracle',
    'zero_crossings', 'oscillation_period', 'EXCITED', 'GROUND',
]
