"""Trajectories for the damped Werner, frequency-converter and Kerr models.

Three independent routes are provided: closed-form solutions, fixed-step RK4
integration of the Lindblad master equation, and Monte Carlo wave-function
(quantum jump) ensembles.  hbar = 1 and all Hamiltonians are taken in the
interaction picture; the resonant converter (detuning 0) is assumed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, IntegrationError, TruncationError
from .fock import HilbertLayout, eig_hermitian, mode_operator, qubits
from .states import (
    PureState,
    QuantumState,
    bell_phi_plus,
    coherent_state,
    converter_bell,
    default_dim,
    fock_state,
    kerr_state,
    top_level_population,
    werner_like,
)

MODELS = ("damped-werner", "freq-converter-pure", "freq-converter-mixed", "kerr")
TRACE_TOL = 1e-8
MAX_JUMP_PROB = 0.1


@dataclass(frozen=True)
class ModelConfig:
    model: str
    gammas: tuple[float, ...] = (0.0, 0.0)
    nbars: tuple[float, ...] = (0.0, 0.0)
    kappa: float = 1.0
    p: float = 1.0
    alpha0: complex = 0.0
    phi0: float | None = None
    phi: float = 0.0
    s0: float = 0.0
    d0: float = 0.0
    dim: int | None = None

    def __post_init__(self):
        # alpha0 = |alpha0| exp(i phi0); phi0 defaults to arg(alpha0)
        if self.phi0 is None:
            object.__setattr__(self, "phi0", float(np.angle(self.alpha0)))
        elif abs(self.alpha0) > 0 and abs(np.angle(self.alpha0 * np.exp(-1j * self.phi0))) > 1e-12:
            raise ConfigError("phi0 disagrees with the phase of alpha0")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if any(g < 0 for g in self.gammas) or any(n < 0 for n in self.nbars):
            raise ConfigError("damping rates and thermal photon numbers must be >= 0")
        if self.kappa < 0:
            raise ConfigError("kappa must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p={self.p} outside [0, 1]")
        if self.s0 < 0 or self.d0 < 0:
            raise ConfigError("thresholds S0, D0 must be >= 0")

    @property
    def n_modes(self) -> int:
        return 1 if self.model == "kerr" else 2

    @property
    def layout(self) -> HilbertLayout:
        if self.model == "kerr":
            return HilbertLayout((self.dim or default_dim(self.alpha0),))
        d = self.dim or 2
        return HilbertLayout((d, d))

    @property
    def damped(self) -> bool:
        return any(g > 0 for g in self.gammas[: self.n_modes])

    @property
    def rate_scale(self) -> float:
        return max(max(self.gammas[: self.n_modes], default=0.0), self.kappa, 1e-300)

    def default_dt(self) -> float:
        return 1e-3 / self.rate_scale


@dataclass(frozen=True)
class McwfConfig:
    n_traj: int = 1000
    seed: int = 0
    dt: float = 1e-3
    n_groups: int = 40

    def __post_init__(self):
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")


@dataclass(eq=False)
class Trajectory:
    """States sampled on a uniform grid plus an optional continuous evaluator.

    ``group_states`` (MCWF only) holds per-group ensemble means with shape
    ``(n_groups, n_times, dim, dim)`` for jackknife error estimates.
    """

    times: np.ndarray
    states: list
    path: str
    evaluate: Callable[[float], object] | None = None
    group_states: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")


def uniform_grid(t_max: float, n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise ConfigError("n_samples must be >= 2")
    if t_max <= 0:
        raise ConfigError("t_max must be > 0")
    return np.linspace(0.0, t_max, n_samples)


def _check_grid(grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or grid[0] < 0:
        raise ValueError("grid must be a nonempty 1-D array of times >= 0")
    if len(grid) > 1:
        d = np.diff(grid)
        if np.any(d <= 0) or np.ptp(d) > 1e-9 * max(d[0], 1e-300) + 1e-12:
            raise ValueError("grid must be uniform and strictly increasing")
    return grid


# -- model ingredients ---------------------------------------------------------


def hamiltonian(cfg: ModelConfig, layout: HilbertLayout | None = None) -> np.ndarray:
    layout = layout or cfg.layout
    if cfg.model == "damped-werner":
        return np.zeros((layout.dim, layout.dim), dtype=complex)
    if cfg.model == "kerr":
        a = mode_operator(layout, 0)
        ad = a.conj().T
        return 0.5 * cfg.kappa * (ad @ ad @ a @ a)
    a1, a2 = mode_operator(layout, 0), mode_operator(layout, 1)
    h = cfg.kappa * (a1.conj().T @ a2)
    return h + h.conj().T


def collapse_operators(cfg: ModelConfig, layout: HilbertLayout | None = None) -> list[np.ndarray]:
    layout = layout or cfg.layout
    ops = []
    for k in range(layout.n_modes):
        g, nb = cfg.gammas[k], cfg.nbars[k]
        if g == 0:
            continue
        a = mode_operator(layout, k)
        ops.append(np.sqrt(g * (1.0 + nb)) * a)
        if nb > 0:
            ops.append(np.sqrt(g * nb) * a.conj().T)
    return ops


def _embed_qubit_block(rho4: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    if layout.mode_dims == (2, 2):
        return rho4
    idx = [np.ravel_multi_index((i, j), layout.mode_dims) for i in (0, 1) for j in (0, 1)]
    out = np.zeros((layout.dim, layout.dim), dtype=complex)
    out[np.ix_(idx, idx)] = rho4
    return out


def _embed_qubit_vector(psi4: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    if layout.mode_dims == (2, 2):
        return psi4
    out = np.zeros(layout.dim, dtype=complex)
    for n, (i, j) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        out[np.ravel_multi_index((i, j), layout.mode_dims)] = psi4[n]
    return out


def _werner_ket(cfg: ModelConfig) -> PureState:
    return bell_phi_plus() if cfg.model == "damped-werner" else converter_bell()


def initial_ensemble(cfg: ModelConfig) -> list[tuple[float, PureState]]:
    """Pure-state decomposition of the initial state, as sampled by MCWF."""
    layout = cfg.layout
    if cfg.model == "kerr":
        return [(1.0, coherent_state(cfg.alpha0, layout.mode_dims[0]))]
    if cfg.model == "freq-converter-pure":
        return [(1.0, fock_state((0, 1), layout))]
    out = []
    if cfg.p > 0:
        out.append((cfg.p, PureState(_embed_qubit_vector(_werner_ket(cfg).amplitudes, layout), layout)))
    if cfg.p < 1:
        for ns in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            out.append(((1.0 - cfg.p) / 4.0, fock_state(ns, layout)))
    return out


def initial_state(cfg: ModelConfig) -> QuantumState:
    layout = cfg.layout
    if cfg.model in ("damped-werner", "freq-converter-mixed"):
        return QuantumState(_embed_qubit_block(werner_like(cfg.p, _werner_ket(cfg)).rho, layout), layout)
    (_, psi), = initial_ensemble(cfg)
    return psi.density()


# -- closed forms --------------------------------------------------------------


def analytic_damped_werner(cfg: ModelConfig, t: float) -> QuantumState:
    """Zero-temperature solution for the decaying Werner-like state (|00>+|11>)."""
    if cfg.model != "damped-werner":
        raise ConfigError("analytic_damped_werner needs model=damped-werner")
    if any(n != 0 for n in cfg.nbars[:2]):
        raise ConfigError("closed-form damped solution is only available for nbar = 0")
    g1, g2 = np.exp(-cfg.gammas[0] * t), np.exp(-cfg.gammas[1] * t)
    p = cfg.p
    h = (2 - g1) * (2 - g2) + p * g1 * g2
    h1 = g2 * (2 - (1 + p) * g1)
    h2 = g1 * (2 - (1 + p) * g2)
    c = 2 * p * np.sqrt(g1 * g2)
    rho = np.array(
        [[h, 0, 0, c], [0, h1, 0, 0], [0, 0, h2, 0], [c, 0, 0, (1 + p) * g1 * g2]], dtype=complex
    ) / 4.0
    layout = cfg.layout
    return QuantumState(_embed_qubit_block(rho, layout), layout)


def analytic_freq_converter_pure(kappa: float, t: float) -> PureState:
    """cos(kt)|01> - i sin(kt)|10>."""
    return PureState(np.array([0, np.cos(kappa * t), -1j * np.sin(kappa * t), 0]), qubits())


def analytic_freq_converter_mixed(kappa: float, p: float, t: float) -> QuantumState:
    fm = np.cos(kappa * t) - np.sin(kappa * t)
    fp = np.cos(kappa * t) + np.sin(kappa * t)
    psi = PureState(np.array([0, fm, -1j * fp, 0]) / np.sqrt(2), qubits())
    return werner_like(p, psi)


def kerr_aux(n2: float, tau: float, phi: float, phi0: float):
    tau_kl = lambda k, l: k * n2 * np.sin(l * tau) + 2 * (phi - phi0)
    f_kl = lambda k, l: np.exp(k * n2 * (np.cos(l * tau) - 1))
    return tau_kl, f_kl


def analytic_kerr_witnesses(cfg: ModelConfig, tau: float) -> tuple[float, float]:
    """Closed-form ``(S_{x_phi}, S_opt)`` for the Kerr state at rescaled time tau.

    Here ``x_phi = a exp(-i phi) + h.c.``; with the ``a exp(+i phi)`` convention of
    :func:`~svsr.witnesses.quad_variance` this equals the variance at angle ``-phi``
    on the state ``exp(-i H t)|alpha0>``.
    """
    if cfg.model != "kerr":
        raise ConfigError("analytic_kerr_witnesses needs model=kerr")
    n2 = abs(cfg.alpha0) ** 2
    t, f = kerr_aux(n2, tau, cfg.phi, cfg.phi0)
    s_x = 2 * n2 * (1 + f(1, 2) * np.cos(t(1, 2) + tau) - f(2, 1) * (np.cos(t(2, 1)) + 1))
    tau_p = t(1, 2) - t(2, 1) + tau
    root = np.sqrt(max(0.0, f(2, 2) + f(4, 1) - 2 * f(1, 2) * f(2, 1) * np.cos(tau_p)))
    s_opt = 2 * n2 * (1 - f(2, 1) - root)
    return float(s_x), float(s_opt)


def analytic_available(cfg: ModelConfig) -> bool:
    if cfg.model == "damped-werner":
        return all(n == 0 for n in cfg.nbars[:2]) and cfg.layout.mode_dims == (2, 2)
    return not cfg.damped and (cfg.model == "kerr" or cfg.layout.mode_dims == (2, 2))


def analytic_state(cfg: ModelConfig, t: float):
    if not analytic_available(cfg):
        raise ConfigError(f"no closed-form solution for {cfg.model} with these parameters")
    if cfg.model == "damped-werner":
        return analytic_damped_werner(cfg, t)
    if cfg.model == "freq-converter-pure":
        return analytic_freq_converter_pure(cfg.kappa, t)
    if cfg.model == "freq-converter-mixed":
        return analytic_freq_converter_mixed(cfg.kappa, cfg.p, t)
    # kerr_state carries phases exp(+i n(n-1) tau/2); exp(-iHt) has the opposite sign
    return kerr_state(cfg.alpha0, -cfg.kappa * t, cfg.layout.mode_dims[0])


def analytic_trajectory(cfg: ModelConfig, grid: Sequence[float]) -> Trajectory:
    grid = _check_grid(grid)
    fn = lambda t: analytic_state(cfg, t)
    return Trajectory(grid, [fn(t) for t in grid], "analytic", evaluate=fn)


# -- Lindblad ------------------------------------------------------------------


def liouvillian(h: np.ndarray, c_ops: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator acting on row-major ``vec(rho)``: vec(A rho B) = (A kron B^T) vec(rho)."""
    n = h.shape[0]
    eye = np.eye(n)
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in c_ops:
        cdc = c.conj().T @ c
        out += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    return out


def rk4_propagator(lv: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of d/dt v = L v, written as the equivalent matrix."""
    x = h * lv
    out = np.eye(lv.shape[0], dtype=complex)
    term = out
    for k in range(1, 5):
        term = term @ x / k
        out = out + term
    return out


def _rk4_vec(lv: np.ndarray, v: np.ndarray, h: float, steps: int) -> np.ndarray:
    for _ in range(steps):
        k1 = lv @ v
        k2 = lv @ (v + 0.5 * h * k1)
        k3 = lv @ (v + 0.5 * h * k2)
        k4 = lv @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def _steps(interval: float, dt: float) -> int:
    return max(1, int(np.ceil(interval / dt - 1e-9)))


def _to_state(v: np.ndarray, layout: HilbertLayout, t: float) -> QuantumState:
    n = layout.dim
    rho = v.reshape(n, n)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise IntegrationError(f"trace drifted to {tr!r} at t={t:g}")
    return QuantumState(0.5 * (rho + rho.conj().T), layout)


def lindblad_evolve(
    cfg: ModelConfig, rho0: QuantumState | None = None, grid: Sequence[float] = (0.0,), dt: float | None = None
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation, sampled on ``grid``."""
    grid = _check_grid(grid)
    rho0 = rho0 if rho0 is not None else initial_state(cfg)
    layout = rho0.layout
    dt = dt or cfg.default_dt()
    lv = liouvillian(hamiltonian(cfg, layout), collapse_operators(cfg, layout))
    v = np.array(rho0.rho, dtype=complex).ravel()
    drift = 0.0

    if grid[0] > 0:
        m = _steps(grid[0], dt)
        v = _rk4_vec(lv, v, grid[0] / m, m)
    states = [_to_state(v, layout, grid[0])]
    if len(grid) > 1:
        interval = grid[1] - grid[0]
        m = _steps(interval, dt)
        prop = np.linalg.matrix_power(rk4_propagator(lv, interval / m), m)
        for t in grid[1:]:
            v = prop @ v
            rho = v.reshape(layout.dim, layout.dim)
            drift = max(drift, float(np.max(np.abs(rho - rho.conj().T))))
            states.append(_to_state(v, layout, t))
            v = np.asarray(states[-1].rho).ravel().copy()

    def evaluate(t: float) -> QuantumState:
        i = int(np.clip(np.searchsorted(grid, t, side="right") - 1, 0, len(grid) - 1))
        if t < grid[0]:
            raise ValueError("cannot evaluate before the first grid time")
        span = t - grid[i]
        if span <= 0:
            return states[i]
        m = _steps(span, dt)
        return _to_state(_rk4_vec(lv, np.asarray(states[i].rho).ravel(), span / m, m), layout, t)

    meta = {"dt": dt, "hermiticity_drift": drift}
    if cfg.model == "kerr":
        meta["max_top_population"] = max(top_level_population(s) for s in states)
    return Trajectory(grid, states, "lindblad", evaluate=evaluate, meta=meta)


# -- unitary -------------------------------------------------------------------


def unitary_evolve(cfg: ModelConfig, psi0: PureState | None = None, grid: Sequence[float] = (0.0,)) -> Trajectory:
    """``exp(-i H t)|psi0>`` through the eigen-decomposition of ``H``."""
    if cfg.model == "damped-werner":
        raise ConfigError("unitary evolution applies to the converter and Kerr models")
    if cfg.damped:
        raise ConfigError("unitary evolution requires zero damping")
    grid = _check_grid(grid)
    if psi0 is None:
        ens = initial_ensemble(cfg)
        if len(ens) != 1:
            raise ConfigError("unitary evolution needs a pure initial state")
        psi0 = ens[0][1]
    w, vecs = eig_hermitian(hamiltonian(cfg, psi0.layout))
    coeff = vecs.conj().T @ psi0.amplitudes

    def evaluate(t: float) -> PureState:
        return PureState.normalized(vecs @ (np.exp(-1j * w * t) * coeff), psi0.layout)

    states = [evaluate(t) for t in grid]
    meta = {}
    if cfg.model == "kerr":
        meta["max_top_population"] = max(float(abs(s.amplitudes[-1]) ** 2) for s in states)
    return Trajectory(grid, states, "unitary", evaluate=evaluate, meta=meta)


# -- Monte Carlo wave function -------------------------------------------------


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, trajectory index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def mcwf_evolve(
    cfg: ModelConfig,
    psi0: PureState | Sequence[tuple[float, PureState]] | None,
    grid: Sequence[float],
    mc: McwfConfig,
    batch: int = 256,
) -> Trajectory:
    """First-order quantum-jump unravelling averaged over ``mc.n_traj`` trajectories.

    ``psi0`` may be a pure state or a weighted pure-state ensemble (sampled once
    per trajectory).
    """
    grid = _check_grid(grid)
    if psi0 is None:
        ensemble = initial_ensemble(cfg)
    elif isinstance(psi0, PureState):
        ensemble = [(1.0, psi0)]
    else:
        ensemble = list(psi0)
    weights = np.array([w for w, _ in ensemble], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("ensemble weights must be nonnegative and sum to 1")
    cum_w = np.cumsum(weights)
    kets = np.array([s.amplitudes for _, s in ensemble])
    layout = ensemble[0][1].layout
    n = layout.dim

    h = hamiltonian(cfg, layout)
    c_ops = collapse_operators(cfg, layout)
    n_t = len(grid)
    interval = grid[1] - grid[0] if n_t > 1 else 0.0
    m = _steps(interval, mc.dt) if n_t > 1 else 0
    step = interval / m if m else mc.dt
    lead = _steps(grid[0], mc.dt) if grid[0] > 0 else 0
    lead_step = grid[0] / lead if lead else 0.0
    n_steps = lead + m * (n_t - 1)

    c_stack = np.array(c_ops) if c_ops else np.zeros((0, n, n), dtype=complex)
    cdc = sum((c.conj().T @ c for c in c_ops), np.zeros((n, n), dtype=complex))
    heff = h - 0.5j * cdc

    def no_jump(dt_: float) -> np.ndarray:
        return (np.eye(n) - 1j * dt_ * heff).T  # right-multiplies row vectors

    k_main, k_lead = no_jump(step), no_jump(lead_step)
    n_groups = max(1, min(mc.n_groups, mc.n_traj))
    groups = np.zeros((n_groups, n_t, n, n), dtype=complex)
    jumps = 0

    for start in range(0, mc.n_traj, batch):
        idx = np.arange(start, min(start + batch, mc.n_traj))
        draws = []
        for i in idx:
            rng = trajectory_rng(mc.seed, int(i))
            draws.append((rng.random(), rng.random((n_steps, 2))))
        pick = np.searchsorted(cum_w, np.array([d[0] for d in draws]), side="right")
        pick = np.minimum(pick, len(ensemble) - 1)
        rand = np.stack([d[1] for d in draws], axis=1) if n_steps else np.zeros((0, len(idx), 2))
        psi = kets[pick].copy()
        gid = idx % n_groups

        def record(k: int):
            outer = psi[:, :, None] * psi[:, None, :].conj()
            np.add.at(groups[:, k], gid, outer)

        s = 0
        for k in range(n_t):
            count, kmat, dt_ = (lead, k_lead, lead_step) if k == 0 else (m, k_main, step)
            for _ in range(count):
                psi, nj = _jump_step(psi, kmat, c_stack, dt_, rand[s])
                jumps += nj
                s += 1
            record(k)

    counts = np.bincount(np.arange(mc.n_traj) % n_groups, minlength=n_groups).astype(float)
    total = groups.sum(axis=0) / mc.n_traj
    states = [QuantumState(0.5 * (r + r.conj().T), layout) for r in total]
    group_means = groups / counts[:, None, None, None]
    meta = {"n_traj": mc.n_traj, "seed": mc.seed, "dt": step, "jumps": jumps, "group_counts": counts}
    return Trajectory(grid, states, "mcwf", group_states=group_means, meta=meta)


def _jump_step(psi: np.ndarray, kmat: np.ndarray, c_stack: np.ndarray, dt: float, r: np.ndarray):
    if len(c_stack) == 0:
        new = psi @ kmat
        return new / np.linalg.norm(new, axis=1, keepdims=True), 0
    cpsi = np.einsum("jab,tb->tja", c_stack, psi)
    rates = np.sum(np.abs(cpsi) ** 2, axis=2)
    dp_j = dt * rates
    dp = dp_j.sum(axis=1)
    if np.any(dp > MAX_JUMP_PROB):
        raise IntegrationError(f"jump probability {dp.max():.3f} per step exceeds 0.1; reduce dt")
    jump = r[:, 0] < dp
    new = psi @ kmat
    if np.any(jump):
        ji = np.nonzero(jump)[0]
        cum = np.cumsum(dp_j[ji], axis=1)
        chan = np.argmax(cum > (r[ji, 1] * dp[ji])[:, None], axis=1)
        new[ji] = cpsi[ji, chan]
    return new / np.linalg.norm(new, axis=1, keepdims=True), int(jump.sum())


def jackknife(traj: Trajectory, fn: Callable[[QuantumState], float]) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble value of ``fn`` and its delete-one-group jackknife standard error."""
    values = np.array([fn(s) for s in traj.states])
    if traj.group_states is None:
        return values, np.zeros_like(values)
    gs = traj.group_states
    counts = traj.meta["group_counts"]
    n_g = len(gs)
    if n_g < 2:
        return values, np.full_like(values, np.inf)
    total = np.einsum("g,gtij->tij", counts, gs)
    layout = traj.states[0].layout
    loo = np.empty((n_g, len(values)))
    for g in range(n_g):
        part = (total - counts[g] * gs[g]) / (counts.sum() - counts[g])
        loo[g] = [fn(QuantumState(0.5 * (r + r.conj().T), layout, check=False)) for r in part]
    se = np.sqrt((n_g - 1) / n_g * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    return values, se


def check_truncation(cfg: ModelConfig) -> None:
    """Raise :class:`TruncationError` if the Fock cutoff cannot hold the initial state."""
    if cfg.model == "kerr":
        coherent_state(cfg.alpha0, cfg.layout.mode_dims[0])
    elif cfg.damped and any(n > 0 for n in cfg.nbars[:2]) and cfg.layout.mode_dims == (2, 2):
        raise TruncationError("thermal reservoirs need more than two Fock levels per mode")
