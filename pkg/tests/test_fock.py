import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svsr.errors import ContractError, DimensionError, NotPSDError
from svsr.fock import (
    HilbertLayout,
    annihilation,
    commutator,
    creation,
    eig_hermitian,
    embed,
    is_hermitian,
    number,
    psd_sqrt,
    qubits,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def random_hermitian(n, rng):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (x + x.conj().T) / 2


def test_annihilation_small():
    assert np.array_equal(annihilation(2), [[0, 1], [0, 0]])
    a3 = annihilation(3)
    assert a3[0, 1] == 1 and np.isclose(a3[1, 2], np.sqrt(2))
    assert np.count_nonzero(a3) == 2


def test_number_from_ladder():
    a = annihilation(4)
    assert np.allclose(creation(4) @ a, np.diag([0, 1, 2, 3]))
    assert np.allclose(number(4), creation(4) @ a)


def test_annihilation_rejects_small_dim():
    with pytest.raises(DimensionError):
        annihilation(1)


def test_truncated_commutator():
    d = 6
    c = commutator(annihilation(d), creation(d))
    assert np.allclose(c[: d - 1, : d - 1], np.eye(d - 1), atol=1e-14)
    assert np.isclose(c[-1, -1], 1 - d)


def test_embed_kron_ordering():
    lay = qubits()
    assert np.allclose(embed(SZ, 0, lay), np.diag([1, 1, -1, -1]))
    assert np.allclose(embed(SZ, 1, lay), np.diag([1, -1, 1, -1]))
    assert np.allclose(embed(np.eye(3), 1, HilbertLayout((2, 3, 2))), np.eye(12))


def test_embed_three_modes_matches_nested_kron():
    lay = HilbertLayout((2, 3, 2))
    a = annihilation(3)
    nested = np.kron(np.kron(np.eye(2), a), np.eye(2))
    assert np.max(np.abs(embed(a, 1, lay) - nested)) <= 1e-14


def test_embed_errors():
    with pytest.raises(DimensionError):
        embed(SZ, 2, qubits())
    with pytest.raises(DimensionError):
        embed(np.eye(3), 0, qubits())


def test_layout_validation():
    assert HilbertLayout((2, 3)).dim == 6
    with pytest.raises(DimensionError):
        HilbertLayout((1, 3))


def test_eig_examples():
    w, _ = eig_hermitian(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert np.allclose(w, [1, 2, 3])
    w, _ = eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(w, [-1, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(ContractError):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


@pytest.mark.parametrize("n", [1, 2, 6, 12])
def test_eig_reconstruction_against_numpy(n):
    rng = np.random.default_rng(n)
    m = random_hermitian(n, rng)
    w, v = eig_hermitian(m)
    scale = np.linalg.norm(m)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-9 * scale
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-9
    assert np.linalg.norm(m @ v - v * w) <= 1e-9 * scale
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-11 * scale)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_eig_residual_property(n, seed):
    m = random_hermitian(n, np.random.default_rng(seed))
    w, v = eig_hermitian(m)
    assert np.linalg.norm(m @ v - v * w) <= 1e-9 * max(np.linalg.norm(m), 1e-300)


def test_eig_degenerate_spectrum():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    m = q @ np.diag([1.0, 1.0, 1.0, 2.0, 2.0]) @ q.conj().T
    w, v = eig_hermitian((m + m.conj().T) / 2)
    assert np.allclose(w, [1, 1, 1, 2, 2], atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(5), atol=1e-10)


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.eye(3, dtype=complex)), np.eye(3))
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0]).astype(complex)), np.diag([2, 3]))


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = x @ x.conj().T
    s = psd_sqrt(m)
    assert is_hermitian(s)
    assert np.max(np.abs(s @ s - m)) <= 1e-9 * np.linalg.norm(m)
    assert np.min(np.linalg.eigvalsh(s)) >= -1e-12


def test_psd_sqrt_clamps_tiny_negatives_and_rejects_large():
    s = psd_sqrt(np.diag([1.0, -1e-11]).astype(complex))
    assert np.allclose(s, np.diag([1, 0]))
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-6]).astype(complex))
