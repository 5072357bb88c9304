import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svsr.fock import HilbertLayout, annihilation, creation
from svsr.ordering import (
    Monomial,
    Poly,
    format_word,
    normal_order,
    parse_word,
    parse_word_list,
    reorder_antinormal,
    word_adjoint,
    word_colon,
)


def test_colon_product_adds_exponents():
    a = Monomial(((1, 0), (0, 1)))
    b = Monomial(((0, 2), (1, 0)))
    assert a.colon_mul(b) == Monomial(((1, 2), (1, 1)))
    assert a.adjoint() == Monomial(((0, 1), (1, 0)))


def test_normal_order_a_adag():
    # a a+ = a+ a + 1
    poly = normal_order(((0, False), (0, True)), 1)
    assert poly == Poly({Monomial(((1, 1),)): 1.0, Monomial(((0, 0),)): 1.0})


def test_n_squared_expansion():
    # n^2 = a+^2 a^2 + a+ a
    n = ((0, True), (0, False))
    poly = normal_order(n + n, 1)
    assert poly == Poly({Monomial(((2, 2),)): 1.0, Monomial(((1, 1),)): 1.0})


@pytest.mark.parametrize("q,p", [(1, 1), (2, 1), (2, 3), (3, 3)])
def test_closed_form_matches_rewriting(q, p):
    word = ((0, False),) * q + ((0, True),) * p
    poly = normal_order(word, 1)
    closed = reorder_antinormal(q, p)
    assert {m.exps[0]: c for m, c in poly.items()} == pytest.approx(closed)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.booleans()), min_size=1, max_size=5))
def test_normal_order_matches_fock_matrices(word):
    # check on a space large enough that truncation never reaches the low block
    d = 8
    lay = HilbertLayout((d, d))
    ops = {False: annihilation(d), True: creation(d)}
    eye = np.eye(d)
    full = np.eye(d * d, dtype=complex)
    for m, dag in word:
        f = np.kron(ops[dag], eye) if m == 0 else np.kron(eye, ops[dag])
        full = full @ f
    recon = np.zeros_like(full)
    for mono, c in normal_order(tuple(word), 2).items():
        term = np.eye(1)
        for p, q in mono.exps:
            term = np.kron(term, np.linalg.matrix_power(creation(d), p) @ np.linalg.matrix_power(annihilation(d), q))
        recon += c * term
    # rows/cols with at most d-1-len(word) photons per mode are exact
    k = d - 1 - len(word)
    idx = [i * d + j for i in range(k) for j in range(k)]
    assert np.allclose(full[np.ix_(idx, idx)], recon[np.ix_(idx, idx)])
    assert lay.dim == d * d


def test_grammar_roundtrip():
    assert parse_word("a1+a2") == ((0, True), (1, False))
    assert parse_word("1") == ()
    words = parse_word_list("a1,a2+")
    assert words == [((0, False),), ((1, True),)]
    assert [format_word(w) for w in parse_word_list("1,a1+a1,a1a2")] == ["1", "a1+a1", "a1a2"]


@pytest.mark.parametrize("bad", ["b1", "a0", "a1,a1", "", "a1x"])
def test_grammar_errors(bad):
    with pytest.raises(ValueError):
        parse_word_list(bad)


def test_word_helpers():
    w = parse_word("a1a2+")
    assert word_adjoint(w) == ((1, False), (0, True))
    assert word_colon(word_adjoint(w) + w, 2) == Monomial(((1, 1), (1, 1)))


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        Monomial(((-1, 0),))
