"""Matrices of normally ordered and partially transposed moments.

``moment_matrix`` builds ``M[i, j] = <: f_i^dagger f_j :>`` (creation operators
moved left without commutators).  ``pt_moment_matrix`` builds
``M[i, j] = tr(f_i^dagger f_j rho^Gamma)`` from an explicit partial transpose,
with the operator product ``f_i^dagger f_j`` normal-ordered symbolically so no
truncated ``a a^dagger`` products are ever formed.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError
from .ordering import Word, normal_order, parse_word_list, word_adjoint, word_colon
from .states import State, as_density, matrix_moment, moment, partial_transpose

DET_TOL = 1e-10


def _words(fs: Sequence[Word] | str) -> list[Word]:
    words = parse_word_list(fs) if isinstance(fs, str) else [tuple(w) for w in fs]
    if not words:
        raise ValueError("monomial list must not be empty")
    if len(set(words)) != len(words):
        raise ValueError("monomial list entries must be distinct")
    return words


def _check_modes(words: list[Word], n_modes: int) -> None:
    for w in words:
        for m, _ in w:
            if m >= n_modes:
                raise DimensionError(f"monomial uses mode {m + 1} but the state has {n_modes} modes")


def moment_matrix(state: State, fs: Sequence[Word] | str) -> np.ndarray:
    words = _words(fs)
    k = state.layout.n_modes
    _check_modes(words, k)
    n = len(words)
    out = np.empty((n, n), dtype=complex)
    for i, fi in enumerate(words):
        for j in range(i, n):
            val = moment(state, word_colon(word_adjoint(fi) + words[j], k))
            out[i, j] = val
            out[j, i] = np.conj(val)
    for i in range(n):
        out[i, i] = out[i, i].real
    return out


def pt_moment_matrix(state: State, fs: Sequence[Word] | str, mode: int = 1) -> np.ndarray:
    words = _words(fs)
    st = as_density(state)
    k = st.layout.n_modes
    if k < 2:
        raise DimensionError("partially transposed moments need a bipartite state")
    _check_modes(words, k)
    rho_pt = partial_transpose(st, mode)
    n = len(words)
    out = np.empty((n, n), dtype=complex)
    for i, fi in enumerate(words):
        for j in range(n):
            poly = normal_order(word_adjoint(fi) + words[j], k)
            out[i, j] = sum((c * matrix_moment(rho_pt, st.layout, m) for m, c in poly.items()), 0j)
    return 0.5 * (out + out.conj().T)


def determinant(m: np.ndarray) -> float:
    """Determinant of a Hermitian moment matrix (LU with partial pivoting)."""
    return float(np.linalg.det(m).real)


def _negative_det(m: np.ndarray) -> bool:
    diag = np.abs(np.diag(m))
    scale = float(np.prod(diag))
    if scale == 0.0:
        scale = float(np.max(np.abs(m), initial=0.0)) ** m.shape[0]
    if scale == 0.0:
        return False
    return determinant(m) < -DET_TOL * scale


def nonclassicality_detected(state: State, fs: Sequence[Word] | str) -> bool:
    return _negative_det(moment_matrix(state, fs))


def npt_detected(state: State, fs: Sequence[Word] | str, mode: int = 1) -> bool:
    return _negative_det(pt_moment_matrix(state, fs, mode))


def default_lists(n_modes: int) -> list[str]:
    """Monomial lists scanned by default for an ``n_modes`` state."""
    out = []
    for m in range(1, n_modes + 1):
        out += [f"1,a{m}", f"a{m},a{m}+", f"1,a{m}+a{m}", f"1,a{m},a{m}+"]
    if n_modes >= 2:
        out += ["a1,a2+", "a1,a2", "1,a1a2", "a1+a2,a1+a1,a2+a2"]
    return out
