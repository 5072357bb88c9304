import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svsr.dynamics import ModelConfig, analytic_freq_converter_pure, analytic_kerr_witnesses
from svsr.errors import DimensionError
from svsr.fock import HilbertLayout, qubits
from svsr.states import (
    PureState,
    QuantumState,
    bell_phi_plus,
    coherent_state,
    converter_bell,
    fock_state,
    kerr_state,
    product_density,
    product_state,
    werner_like,
)
from svsr.witnesses import (
    WITNESS_IDS,
    WitnessParams,
    chsh_B,
    concurrence,
    evaluate,
    hillery_H,
    hillery_Hprime,
    mandel_Q,
    min_quadrature_variance,
    negativity,
    pnd_D,
    pnd_S,
    principal_squeezing,
    principal_variance,
    quad_squeezing,
    quad_variance,
    truncate,
)

ALPHA = np.sqrt(0.5)
MIXED = QuantumState(np.eye(4) / 4, qubits())


def random_density(n, rng, rank=None):
    x = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def kerr_cfg(phi=0.0):
    return ModelConfig("kerr", alpha0=ALPHA, phi=phi, dim=20)


def test_truncate_examples():
    assert truncate(-0.3, 0) == pytest.approx(0.3)
    assert truncate(0.5, 0) == 0
    assert truncate(-0.47, 0.03) == pytest.approx(0.5)  # max(0, f0 - f)
    assert truncate(0.47, 0.03) == 0
    with pytest.raises(ValueError):
        truncate(0.1, -1)


def test_concurrence_examples():
    assert concurrence(bell_phi_plus()) == pytest.approx(1, abs=1e-12)
    assert concurrence(MIXED) == pytest.approx(0, abs=1e-12)
    assert concurrence(werner_like(0.8, bell_phi_plus())) == pytest.approx(0.7, abs=1e-12)


def test_negativity_examples():
    assert negativity(bell_phi_plus()) == pytest.approx(1)
    prod = product_density(coherent_state(0.4, 20), fock_state(2, HilbertLayout((4,))))
    assert negativity(prod) == pytest.approx(0, abs=1e-12)
    assert negativity(werner_like(0.8, bell_phi_plus())) == pytest.approx(0.7)


def test_chsh_examples():
    assert chsh_B(bell_phi_plus()) == pytest.approx(1)
    assert chsh_B(MIXED) == 0
    assert chsh_B(werner_like(0.8, bell_phi_plus())) == pytest.approx(np.sqrt(0.28))
    assert np.sqrt(0.28) == pytest.approx(0.52915, abs=1e-5)


def test_hillery_examples():
    vac = fock_state((0, 0), qubits())
    assert hillery_H(vac) == 0 and hillery_Hprime(vac) == 0
    assert hillery_H(converter_bell()) == pytest.approx(0.25)
    assert hillery_Hprime(converter_bell()) == 0
    assert hillery_H(analytic_freq_converter_pure(1.0, np.pi / 8)) == pytest.approx(1 / 8)
    eps = 0.1
    tms = PureState.normalized([1, 0, 0, eps], qubits())
    assert hillery_Hprime(tms) == pytest.approx((eps**2 - eps**4) / (1 + eps**2) ** 2)


def test_pnd_examples():
    w = werner_like(0.8, bell_phi_plus())
    assert pnd_S(w, 0.03) == pytest.approx(0.87)
    assert pnd_D(w, 0.1) == pytest.approx(0.89)
    two_coh = product_state(coherent_state(0.5, 20), coherent_state(0.3j, 20))
    assert pnd_S(two_coh, 0) == pytest.approx(0, abs=1e-12)
    assert pnd_D(two_coh, 0) == pytest.approx(0, abs=1e-12)
    conv0 = analytic_freq_converter_pure(1.0, 0.0)
    assert pnd_S(conv0, 0.5) == pytest.approx(0.5)
    assert pnd_D(conv0, 1.0) == pytest.approx(1.0)


def test_mandel_examples():
    assert mandel_Q(fock_state(1)) == pytest.approx(1)
    assert mandel_Q(coherent_state(0.7, 20)) == pytest.approx(0, abs=1e-12)
    assert mandel_Q(fock_state(0)) == 0
    for t in (0.2, 0.9, 2.0):
        assert mandel_Q(analytic_freq_converter_pure(1.0, t), 0) == pytest.approx(np.sin(t) ** 2)


def test_quadrature_examples():
    assert quad_squeezing(coherent_state(0.3 + 0.2j, 20), [0.7]) == pytest.approx(0, abs=1e-12)
    assert quad_squeezing(kerr_state(ALPHA, 0, 20), [0.0]) == pytest.approx(0, abs=1e-12)
    for tau in (0.1, 0.5, 1.0):
        sx, _ = analytic_kerr_witnesses(kerr_cfg(), tau)
        assert abs(quad_variance(kerr_state(ALPHA, tau, 20), [0.0]) - sx) <= 1e-8
    with pytest.raises(ValueError):
        quad_variance(coherent_state(0.1, 10), [0.0, 1.0])


def test_principal_examples():
    assert principal_squeezing(coherent_state(1.1, 30)) == pytest.approx(0, abs=1e-12)
    for tau in (0.3, 1.0, 2.0):
        _, sopt = analytic_kerr_witnesses(kerr_cfg(), tau)
        assert abs(principal_variance(kerr_state(ALPHA, tau, 20)) - sopt) <= 1e-8
    st_ = kerr_state(ALPHA, 1.0, 20)
    sopt = principal_variance(st_)
    for phi in np.linspace(0, np.pi, 64, endpoint=False):
        assert sopt <= quad_variance(st_, [phi]) + 1e-12
    assert abs(min_quadrature_variance(st_)[1] - sopt) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pure_two_qubit_chsh_equals_concurrence(seed):
    rng = np.random.default_rng(seed)
    psi = PureState.normalized(rng.normal(size=4) + 1j * rng.normal(size=4), qubits())
    assert abs(chsh_B(psi) - concurrence(psi)) <= 1e-9


@pytest.mark.parametrize("p", [0, 0.25, 0.5, 0.8, 1])
def test_werner_concurrence_equals_negativity(p):
    w = werner_like(p, bell_phi_plus())
    assert concurrence(w) == pytest.approx(negativity(w), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_hillery_implies_npt(seed, rank):
    rho = QuantumState(random_density(4, np.random.default_rng(seed), rank), qubits())
    if hillery_H(rho) > 0:
        assert negativity(rho) > 0


def test_werner_family_truncated_nonnegative_and_continuous():
    params = WitnessParams(s0=0.03, d0=0.1)
    ps = np.linspace(0, 1, 201)
    for wid in ("C", "N", "B", "H", "Hp", "S", "D", "Q1", "Q2"):
        vals = np.array([evaluate(wid, werner_like(p, bell_phi_plus()), params).truncated for p in ps])
        assert np.all(vals >= 0)
        # B is a square root near its threshold; others are Lipschitz in p
        jump = 0.15 if wid == "B" else 0.02
        assert np.max(np.abs(np.diff(vals))) <= jump


def test_truncated_positive_implies_raw_positive():
    rng = np.random.default_rng(11)
    params = WitnessParams(s0=0.01, d0=0.2)
    for _ in range(30):
        rho = QuantumState(random_density(4, rng), qubits())
        for wid in ("C", "N", "B", "H", "Hp", "S", "D", "Q1", "Q2", "Sx"):
            v = evaluate(wid, rho, params)
            assert v.truncated >= 0
            assert (v.truncated > 0) == (v.raw > 0)


def test_registry():
    assert WITNESS_IDS == ("C", "N", "B", "H", "Hp", "S", "D", "Q1", "Q2", "Sx", "Sopt")
    with pytest.raises(DimensionError):
        evaluate("C", coherent_state(0.1, 10))
    with pytest.raises(ValueError):
        evaluate("X", bell_phi_plus())
    assert evaluate("Sopt", fock_state(1)).id == "Sopt"
