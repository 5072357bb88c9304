"""Dense complex linear algebra on truncated Fock spaces.

Operators and density matrices are plain ``numpy`` complex128 arrays.
Mode indices are zero-based; mode 0 is the slowest-varying tensor factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .errors import ContractError, DimensionError, NotPSDError

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-13
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class HilbertLayout:
    """Per-mode truncation dimensions of a multimode Fock space."""

    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims:
            raise DimensionError("layout needs at least one mode")
        if any(d < 2 for d in dims):
            raise DimensionError(f"mode dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.n_modes:
            raise DimensionError(f"mode {mode} out of range for {self.n_modes} modes")


def qubits(n: int = 2) -> HilbertLayout:
    return HilbertLayout((2,) * n)


def annihilation(dim: int) -> np.ndarray:
    """Truncated lowering operator with ``A[n-1, n] = sqrt(n)``."""
    if dim < 2:
        raise DimensionError(f"Fock dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def embed(op: np.ndarray, mode: int, layout: HilbertLayout) -> np.ndarray:
    """Place a single-mode operator on ``mode``, identity elsewhere."""
    layout.check_mode(mode)
    op = np.asarray(op, dtype=complex)
    d = layout.mode_dims[mode]
    if op.shape != (d, d):
        raise DimensionError(f"operator shape {op.shape} does not match mode dim {d}")
    factors = [np.eye(dm, dtype=complex) for dm in layout.mode_dims]
    factors[mode] = op
    return reduce(np.kron, factors)


def mode_operator(layout: HilbertLayout, mode: int, dagger: bool = False) -> np.ndarray:
    a = annihilation(layout.mode_dims[mode])
    return embed(a.conj().T if dagger else a, mode, layout)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(float(np.max(np.abs(m))), 1.0) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Sweep of ``n - 1`` (or ``n``) rounds, each a set of disjoint index pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(x, y), max(x, y)) for x, y in pairs if max(x, y) < n]
        rounds.append((np.array([x for x, _ in pairs]), np.array([y for _, y in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotate_pairs(a: np.ndarray, v: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Annihilate ``a[p, q]`` for disjoint pairs with one simultaneous rotation."""
    apq = a[p, q]
    mag = np.abs(apq)
    ph = np.exp(-1j * np.angle(apq))
    app, aqq = a[p, p].real, a[q, q].real
    with np.errstate(over="ignore"):
        zeta = (aqq - app) / (2.0 * mag)
    az = np.abs(zeta)
    # hypot avoids overflow of zeta**2; an infinite zeta gives t = 0
    t = np.where(zeta >= 0, 1.0, -1.0) / (az + np.hypot(1.0, az))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # columns: [a_p, a_q] @ [[c, s], [-s ph, c ph]]
    cp, cq = a[:, p], a[:, q]
    a[:, p], a[:, q] = c * cp - s * ph * cq, s * cp + c * ph * cq
    rp, rq = a[p, :], a[q, :]
    a[p, :] = c[:, None] * rp - (s * np.conj(ph))[:, None] * rq
    a[q, :] = s[:, None] * rp + (c * np.conj(ph))[:, None] * rq
    a[p, q] = a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag
    vp, vq = v[:, p], v[:, q]
    v[:, p], v[:, q] = c * vp - s * ph * vq, s * vp + c * ph * vq
    return a, v


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    as columns.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    if not is_hermitian(a):
        raise ContractError("eig_hermitian requires a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a)
    if n == 1 or norm == 0.0:
        return np.real(np.diag(a)).copy(), v
    target = JACOBI_TOL * norm

    rounds = _round_robin(n)
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        # threshold Jacobi: entries below this cannot keep off() above target
        skip = target / n
        for p, q in rounds:
            live = np.abs(a[p, q]) > skip
            if live.any():
                a, v = _rotate_pairs(a, v, p[live], q[live])
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix."""
    w, v = eig_hermitian(m)
    if w[0] < -1e-8:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} < -1e-8")
    # eigenvalues at roundoff level are zeros; their square roots would not be
    cut = 64 * np.finfo(float).eps * max(float(np.max(np.abs(w))), 0.0)
    w = np.where(w > cut, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
