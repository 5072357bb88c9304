"""Quantum states on truncated Fock spaces and their moments."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from math import lgamma, log
from typing import Union

import numpy as np

from .errors import DimensionError, InvalidStateError, TruncationError
from .fock import HilbertLayout, annihilation, is_hermitian, qubits
from .ordering import Monomial, Poly

LEAKAGE_TOL = 1e-9
COHERENT_TAIL_TOL = 1e-20


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    layout: HilbertLayout

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != self.layout.dim:
            raise DimensionError(f"{amps.size} amplitudes for layout of dim {self.layout.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidStateError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, layout: HilbertLayout) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(amps / np.linalg.norm(amps), layout)

    def density(self) -> "QuantumState":
        psi = self.amplitudes
        return QuantumState(np.outer(psi, psi.conj()), self.layout)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix with its Fock layout; validated on construction."""

    rho: np.ndarray
    layout: HilbertLayout
    check: bool = True

    def __post_init__(self):
        rho = _frozen(self.rho)
        n = self.layout.dim
        if rho.shape != (n, n):
            raise DimensionError(f"density matrix shape {rho.shape} does not match dim {n}")
        object.__setattr__(self, "rho", rho)
        if self.check:
            validate_density(rho)

    @property
    def dim(self) -> int:
        return self.layout.dim


State = Union[QuantumState, PureState]


def validate_density(rho: np.ndarray) -> None:
    if not is_hermitian(rho):
        raise InvalidStateError("density matrix is not Hermitian within 1e-10")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9:
        raise InvalidStateError(f"density matrix trace {tr!r} differs from 1")
    # min eigenvalue >= -1e-8  <=>  rho + 1e-8 I is positive semidefinite
    try:
        np.linalg.cholesky(0.5 * (rho + rho.conj().T) + 1.0001e-8 * np.eye(rho.shape[0]))
    except np.linalg.LinAlgError:
        raise InvalidStateError("density matrix has an eigenvalue below -1e-8") from None


def as_density(state: State) -> QuantumState:
    return state.density() if isinstance(state, PureState) else state


def fock_state(ns: tuple[int, ...] | int, layout: HilbertLayout | None = None) -> PureState:
    ns = (ns,) if isinstance(ns, int) else tuple(ns)
    layout = layout or HilbertLayout(tuple(max(2, n + 1) for n in ns))
    if len(ns) != layout.n_modes or any(n >= d for n, d in zip(ns, layout.mode_dims)):
        raise DimensionError(f"Fock state {ns} does not fit layout {layout.mode_dims}")
    amps = np.zeros(layout.dim, dtype=complex)
    amps[np.ravel_multi_index(ns, layout.mode_dims)] = 1.0
    return PureState(amps, layout)


def product_state(*states: PureState) -> PureState:
    layout = HilbertLayout(sum((s.layout.mode_dims for s in states), ()))
    return PureState(reduce(np.kron, [s.amplitudes for s in states]), layout)


def product_density(*states: State) -> QuantumState:
    dens = [as_density(s) for s in states]
    layout = HilbertLayout(sum((s.layout.mode_dims for s in dens), ()))
    return QuantumState(reduce(np.kron, [s.rho for s in dens]), layout)


def _check_tail(alpha0: complex, dim: int) -> None:
    n2 = abs(alpha0) ** 2
    if n2 == 0.0:
        return
    if dim * log(n2) - lgamma(dim + 1) >= log(COHERENT_TAIL_TOL):
        raise TruncationError(
            f"dim={dim} too small for |alpha0|^2={n2:g}: |alpha0|^(2 dim)/dim! >= {COHERENT_TAIL_TOL:g}"
        )


def default_dim(alpha0: complex) -> int:
    """Default Fock cutoff ``5 max(1, |alpha0|^2) + 15`` used for Kerr runs."""
    return int(np.ceil(5 * max(1.0, abs(alpha0) ** 2) + 15))


def _coherent_amplitudes(alpha0: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    log_fact = np.array([lgamma(k + 1) for k in n])
    mag = abs(alpha0)
    with np.errstate(divide="ignore"):
        log_mod = n * np.log(mag) - 0.5 * log_fact - 0.5 * mag**2 if mag > 0 else None
    if log_mod is None:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    return np.exp(log_mod) * np.exp(1j * n * np.angle(alpha0))


def coherent_state(alpha0: complex, dim: int) -> PureState:
    _check_tail(alpha0, dim)
    return PureState.normalized(_coherent_amplitudes(alpha0, dim), HilbertLayout((dim,)))


def kerr_state(alpha0: complex, tau: float, dim: int) -> PureState:
    """Coherent state with Kerr phases ``exp[i n(n-1) tau / 2]`` on each Fock amplitude."""
    _check_tail(alpha0, dim)
    n = np.arange(dim)
    amps = _coherent_amplitudes(alpha0, dim) * np.exp(0.5j * n * (n - 1) * tau)
    return PureState.normalized(amps, HilbertLayout((dim,)))


def bell_phi_plus() -> PureState:
    """(|00> + |11>)/sqrt(2)."""
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), qubits())


def converter_bell() -> PureState:
    """(|01> - i|10>)/sqrt(2)."""
    return PureState(np.array([0, 1, -1j, 0]) / np.sqrt(2), qubits())


def werner_like(p: float, psi: PureState) -> QuantumState:
    """``p |psi><psi| + (1-p) I/4`` on two qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight p={p} outside [0, 1]")
    if psi.layout.mode_dims != (2, 2):
        raise DimensionError("Werner-like states are defined on a 2x2 layout")
    v = psi.amplitudes
    return QuantumState(p * np.outer(v, v.conj()) + (1.0 - p) / 4.0 * np.eye(4), psi.layout)


@lru_cache(maxsize=1024)
def _monomial_operator(dims: tuple[int, ...], exps: tuple[tuple[int, int], ...]) -> np.ndarray:
    factors = []
    for d, (p, q) in zip(dims, exps):
        a = annihilation(d)
        # (a^p)^dagger a^q is exact on the truncated space; a+^p a^q computed as a
        # product of truncated matrices is not
        factors.append(np.linalg.matrix_power(a, p).conj().T @ np.linalg.matrix_power(a, q))
    op = reduce(np.kron, factors)
    op.setflags(write=False)
    return op


def monomial_operator(layout: HilbertLayout, mono: Monomial) -> np.ndarray:
    if mono.n_modes != layout.n_modes:
        raise DimensionError(f"monomial on {mono.n_modes} modes, layout has {layout.n_modes}")
    return _monomial_operator(layout.mode_dims, mono.exps)


def trace_with(matrix: np.ndarray, op: np.ndarray) -> complex:
    """``Tr(matrix @ op)`` without forming the product."""
    return complex(np.sum(matrix * op.T))


def moment(state: State, mono: Monomial) -> complex:
    """Normally ordered moment ``Tr(rho prod_m a_m+^p_m a_m^q_m)``."""
    op = monomial_operator(state.layout, mono)
    if isinstance(state, PureState):
        psi = state.amplitudes
        return complex(np.vdot(psi, op @ psi))
    return trace_with(state.rho, op)


def matrix_moment(matrix: np.ndarray, layout: HilbertLayout, mono: Monomial) -> complex:
    """Moment against an arbitrary operator, e.g. a partially transposed density matrix."""
    return trace_with(matrix, monomial_operator(layout, mono))


def poly_expectation(state: State, poly: Poly) -> complex:
    return sum((c * moment(state, m) for m, c in poly.items()), 0j)


def partial_transpose(state: QuantumState | np.ndarray, mode: int, layout: HilbertLayout | None = None) -> np.ndarray:
    """Transpose the tensor factor of ``mode`` by index permutation."""
    if isinstance(state, (QuantumState, PureState)):
        rho, layout = as_density(state).rho, state.layout
    else:
        rho = np.asarray(state)
        if layout is None:
            raise ValueError("layout required when passing a bare matrix")
    layout.check_mode(mode)
    dims = layout.mode_dims
    k = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * k))
    axes[mode], axes[mode + k] = axes[mode + k], axes[mode]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(state: State, keep: tuple[int, ...] | int) -> QuantumState:
    """Reduced density matrix of the modes in ``keep``."""
    st = as_density(state)
    keep = (keep,) if isinstance(keep, int) else tuple(sorted(keep))
    for m in keep:
        st.layout.check_mode(m)
    dims = st.layout.mode_dims
    k = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:k])
    cols = [rows[i] if i not in keep else letters[k + i].upper() for i in range(k)]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, st.rho.reshape(dims + dims))
    sub = HilbertLayout(tuple(dims[i] for i in keep))
    return QuantumState(reduced.reshape(sub.dim, sub.dim), sub, check=False)


def qubit_project(state: State) -> QuantumState:
    """Restrict a two-mode state to the ``{0,1} x {0,1}`` Fock block."""
    st = as_density(state)
    dims = st.layout.mode_dims
    if len(dims) != 2:
        raise DimensionError("qubit projection needs a two-mode state")
    if dims == (2, 2):
        return st
    idx = [np.ravel_multi_index((i, j), dims) for i in (0, 1) for j in (0, 1)]
    block = st.rho[np.ix_(idx, idx)]
    kept = np.trace(block).real
    leak = 1.0 - kept
    if leak > LEAKAGE_TOL:
        raise TruncationError(f"population {leak:.3e} outside the single-photon-per-mode block")
    return QuantumState(block / kept, qubits())


def top_level_population(state: State) -> float:
    """Largest population on any mode's highest Fock level (truncation monitor)."""
    st = as_density(state)
    worst = 0.0
    for m, d in enumerate(st.layout.mode_dims):
        red = partial_trace(st, m).rho
        worst = max(worst, float(red[d - 1, d - 1].real))
    return worst
