"""Entanglement and nonclassicality witnesses, raw and truncated.

Every witness returns a :class:`WitnessValue` whose ``raw`` field is signed so
that ``raw > 0`` means "nonclassicality (or entanglement) detected" and
``truncated`` is the nonnegative witness that exhibits sudden vanishing.
For ``B`` the raw quantity is ``B'^2 = max_{j<k}(u_j + u_k) - 1`` and the
truncated value is ``sqrt(max(0, raw))``; for all others ``truncated =
max(0, raw)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError
from .fock import eig_hermitian, psd_sqrt
from .ordering import Monomial, Poly
from .states import (
    QuantumState,
    State,
    as_density,
    moment,
    partial_transpose,
    poly_expectation,
    qubit_project,
)

WITNESS_IDS = ("C", "N", "B", "H", "Hp", "S", "D", "Q1", "Q2", "Sx", "Sopt")
TWO_QUBIT = {"C", "B"}
TWO_MODE = {"N", "H", "Hp", "S", "D", "Q2"}

_SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_YY = np.kron(_SIGMA["y"], _SIGMA["y"])
# sigma_i (x) sigma_j stacked as (i, j, 4, 4)
_PAULI_PAIRS = np.array([[np.kron(_SIGMA[i], _SIGMA[j]) for j in "xyz"] for i in "xyz"])
# roundoff floor for eigenvalues entering square roots
_EIG_FLOOR = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class WitnessValue:
    id: str
    raw: float
    truncated: float
    threshold: float = 0.0


@dataclass(frozen=True)
class WitnessParams:
    """Caller-chosen thresholds and quadrature settings (all default to 0)."""

    s0: float = 0.0
    d0: float = 0.0
    phis: tuple[float, ...] = ()
    coeffs: tuple[float, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)


def truncate(f: float, f0: float = 0.0) -> float:
    """``max(0, f0 - f)``."""
    if f0 < 0:
        raise ValueError("threshold must be nonnegative")
    return max(0.0, f0 - f)


def _value(wid: str, raw: float, threshold: float = 0.0) -> WitnessValue:
    raw = float(raw)
    return WitnessValue(wid, raw, max(0.0, raw), threshold)


def _two_qubit(state: State) -> QuantumState:
    st = as_density(state)
    if st.layout.n_modes != 2:
        raise DimensionError("two-qubit witness needs a two-mode state")
    return qubit_project(st)


# -- entanglement measures ---------------------------------------------------


def concurrence_value(state: State) -> WitnessValue:
    rho = _two_qubit(state).rho
    root = psd_sqrt(rho)
    flipped = _YY @ rho.conj() @ _YY
    r = root @ flipped @ root
    w, _ = eig_hermitian(0.5 * (r + r.conj().T))
    w = np.where(w > _EIG_FLOOR * max(w[-1], 0.0), w, 0.0)
    lam = np.sqrt(w)
    return _value("C", 2.0 * lam[-1] - lam.sum())


def concurrence(state: State) -> float:
    return concurrence_value(state).truncated


def negativity_value(state: State, mode: int = 0) -> WitnessValue:
    st = as_density(state)
    if st.layout.n_modes < 2:
        raise DimensionError("negativity needs a bipartite state")
    w, _ = eig_hermitian(partial_transpose(st, mode))
    return _value("N", -2.0 * w[0])


def negativity(state: State, mode: int = 0) -> float:
    return negativity_value(state, mode).truncated


def correlation_matrix(state: State) -> np.ndarray:
    rho = _two_qubit(state).rho
    return np.einsum("ab,ijba->ij", rho, _PAULI_PAIRS).real


def chsh_value(state: State) -> WitnessValue:
    t = correlation_matrix(state)
    u, _ = eig_hermitian((t.T @ t).astype(complex))
    raw = u[-1] + u[-2] - 1.0
    return WitnessValue("B", float(raw), float(np.sqrt(max(0.0, raw))))


def chsh_B(state: State) -> float:
    return chsh_value(state).truncated


# -- moment-based witnesses --------------------------------------------------


def _mono(n_modes: int, *spec: tuple[int, int, int]) -> Monomial:
    exps = [[0, 0] for _ in range(n_modes)]
    for mode, p, q in spec:
        exps[mode] = [p, q]
    return Monomial(tuple(tuple(e) for e in exps))


def number_poly(n_modes: int, mode: int) -> Poly:
    return Poly.of(_mono(n_modes, (mode, 1, 1)))


def normal_variance(state: State, op: Poly) -> float:
    """``<:(Delta O)^2:> = <:O^2:> - <O>^2`` for Hermitian ``O``."""
    mean = poly_expectation(state, op)
    return float((poly_expectation(state, op.colon_mul(op)) - mean * mean).real)


def _require_modes(state: State, n: int, wid: str) -> None:
    if state.layout.n_modes < n:
        raise DimensionError(f"witness {wid} needs at least {n} modes")


def hillery_value(state: State) -> WitnessValue:
    _require_modes(state, 2, "H")
    k = state.layout.n_modes
    a1a2d = moment(state, _mono(k, (0, 0, 1), (1, 1, 0)))
    n1n2 = moment(state, _mono(k, (0, 1, 1), (1, 1, 1))).real
    return _value("H", abs(a1a2d) ** 2 - n1n2)


def hillery_H(state: State) -> float:
    return hillery_value(state).truncated


def hillery_prime_value(state: State) -> WitnessValue:
    _require_modes(state, 2, "Hp")
    k = state.layout.n_modes
    a1a2 = moment(state, _mono(k, (0, 0, 1), (1, 0, 1)))
    n1 = moment(state, _mono(k, (0, 1, 1))).real
    n2 = moment(state, _mono(k, (1, 1, 1))).real
    return _value("Hp", abs(a1a2) ** 2 - n1 * n2)


def hillery_Hprime(state: State) -> float:
    return hillery_prime_value(state).truncated


def _difference(k: int) -> Poly:
    return number_poly(k, 0) - number_poly(k, 1)


def pnd_S_value(state: State, s0: float = 0.0) -> WitnessValue:
    _require_modes(state, 2, "S")
    if s0 < 0:
        raise ValueError("S0 must be nonnegative")
    return _value("S", -normal_variance(state, _difference(state.layout.n_modes)) - s0, s0)


def pnd_S(state: State, s0: float = 0.0) -> float:
    return pnd_S_value(state, s0).truncated


def pnd_D_value(state: State, d0: float = 0.0) -> WitnessValue:
    _require_modes(state, 2, "D")
    k = state.layout.n_modes
    op = _difference(k) + Poly.constant(k, d0)
    return _value("D", -poly_expectation(state, op.colon_mul(op)).real, d0)


def pnd_D(state: State, d0: float = 0.0) -> float:
    return pnd_D_value(state, d0).truncated


def mandel_value(state: State, mode: int = 0) -> WitnessValue:
    state.layout.check_mode(mode)
    n = number_poly(state.layout.n_modes, mode)
    mean = poly_expectation(state, n).real
    wid = f"Q{mode + 1}"
    if mean <= 1e-12:
        return WitnessValue(wid, 0.0, 0.0)
    return _value(wid, -normal_variance(state, n) / mean)


def mandel_Q(state: State, mode: int = 0) -> float:
    return mandel_value(state, mode).truncated


def quadrature_poly(n_modes: int, phis: Sequence[float], coeffs: Sequence[float] | None = None) -> Poly:
    """``sum_m c_m (a_m e^{i phi_m} + a_m^dagger e^{-i phi_m})``."""
    coeffs = [1.0] * n_modes if coeffs is None or len(coeffs) == 0 else list(coeffs)
    if len(phis) != n_modes or len(coeffs) != n_modes:
        raise ValueError(f"need {n_modes} angles and coefficients, got {len(phis)} and {len(coeffs)}")
    out = Poly()
    for m, (phi, c) in enumerate(zip(phis, coeffs)):
        out = out + Poly.of(_mono(n_modes, (m, 0, 1)), c * np.exp(1j * phi))
        out = out + Poly.of(_mono(n_modes, (m, 1, 0)), c * np.exp(-1j * phi))
    return out


def quad_variance(state: State, phis: Sequence[float], coeffs: Sequence[float] | None = None) -> float:
    """Normally ordered quadrature variance ``S_{x_phi}``."""
    return normal_variance(state, quadrature_poly(state.layout.n_modes, phis, coeffs))


def quad_squeezing_value(
    state: State, phis: Sequence[float], coeffs: Sequence[float] | None = None, s0: float = 0.0
) -> WitnessValue:
    if s0 < 0:
        raise ValueError("S0 must be nonnegative")
    return _value("Sx", -quad_variance(state, phis, coeffs) - s0, s0)


def quad_squeezing(state: State, phis, coeffs=None, s0: float = 0.0) -> float:
    return quad_squeezing_value(state, phis, coeffs, s0).truncated


def principal_variance(state: State) -> float:
    """``S_opt = 2(<Da+ Da> - |<(Da)^2>|)`` for a single mode."""
    if state.layout.n_modes != 1:
        raise DimensionError("principal squeezing is evaluated on single-mode states")
    a = moment(state, _mono(1, (0, 0, 1)))
    a2 = moment(state, _mono(1, (0, 0, 2)))
    n = moment(state, _mono(1, (0, 1, 1))).real
    return float(2.0 * ((n - abs(a) ** 2) - abs(a2 - a * a)))


def principal_squeezing_value(state: State, s0: float = 0.0) -> WitnessValue:
    if s0 < 0:
        raise ValueError("S0 must be nonnegative")
    return _value("Sopt", -principal_variance(state) - s0, s0)


def principal_squeezing(state: State, s0: float = 0.0) -> float:
    return principal_squeezing_value(state, s0).truncated


def golden_min(fn: Callable[[float], float], lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Golden-section minimum of a unimodal ``fn`` on ``[lo, hi]``."""
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, min(fn(x), fc, fd)


def min_quadrature_variance(state: State, n_grid: int = 64) -> tuple[float, float]:
    """Minimise ``S_{x_phi}`` over phi by grid search plus golden-section refinement.

    Independent numerical route to :func:`principal_variance`; returns ``(phi, S)``.
    """
    grid = np.linspace(0.0, np.pi, n_grid, endpoint=False)
    vals = [quad_variance(state, [phi]) for phi in grid]
    i = int(np.argmin(vals))
    step = grid[1] - grid[0]
    x, val = golden_min(lambda phi: quad_variance(state, [phi]), grid[i] - step, grid[i] + step, 1e-12)
    return float(x), float(min(val, vals[i]))


# -- registry ----------------------------------------------------------------


def witness_modes(wid: str) -> int:
    """Minimum number of modes a witness needs."""
    if wid not in WITNESS_IDS:
        raise ValueError(f"unknown witness id {wid!r}; expected one of {WITNESS_IDS}")
    return 2 if wid in TWO_QUBIT | TWO_MODE else 1


def evaluate(wid: str, state: State, params: WitnessParams = WitnessParams()) -> WitnessValue:
    """Evaluate witness ``wid`` (one of :data:`WITNESS_IDS`) on ``state``."""
    if state.layout.n_modes < witness_modes(wid):
        raise DimensionError(f"witness {wid} needs a two-mode state")
    if wid == "C":
        return concurrence_value(state)
    if wid == "N":
        return negativity_value(state)
    if wid == "B":
        return chsh_value(state)
    if wid == "H":
        return hillery_value(state)
    if wid == "Hp":
        return hillery_prime_value(state)
    if wid == "S":
        return pnd_S_value(state, params.s0)
    if wid == "D":
        return pnd_D_value(state, params.d0)
    if wid in ("Q1", "Q2"):
        return mandel_value(state, int(wid[1]) - 1)
    k = state.layout.n_modes
    if wid == "Sx":
        phis = (tuple(params.phis) + (0.0,) * k)[:k]
        coeffs = (tuple(params.coeffs) + (1.0,) * k)[:k]
        return quad_squeezing_value(state, phis, coeffs, params.s0)
    if wid == "Sopt":
        if k != 1:
            raise DimensionError("Sopt is a single-mode witness")
        return principal_squeezing_value(state, params.s0)
    raise AssertionError(wid)
