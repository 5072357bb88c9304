"""Scenario execution: witness series, events, comparisons and cross-checks."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import ScenarioConfig
from .dynamics import (
    Trajectory,
    analytic_available,
    analytic_kerr_witnesses,
    analytic_state,
    analytic_trajectory,
    check_truncation,
    jackknife,
    lindblad_evolve,
    mcwf_evolve,
)
from .errors import ConfigError, TruncationError
from .events import EventRecord, closed_form_sv_times, detect_events, samples_from_series
from .states import kerr_state
from .witnesses import evaluate, min_quadrature_variance, principal_variance, quad_variance

LINDBLAD_TOL = 1e-6
EVENT_TOL = 1e-6
KERR_TOL = 1e-8
PRINCIPAL_TOL = 1e-10
N_SIGMA = 4.0
STAT_FLOOR = 1e-9


@dataclass
class PathResult:
    path: str
    trajectory: Trajectory
    raw: dict[str, np.ndarray]
    trunc: dict[str, np.ndarray]
    stderr: dict[str, np.ndarray] = field(default_factory=dict)
    evaluators: dict[str, Callable[[float], float]] = field(default_factory=dict)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _kerr_closed(cfg: ScenarioConfig, wid: str, t: float) -> float:
    sx, sopt = analytic_kerr_witnesses(cfg.model, cfg.model.kappa * t)
    return -(sx if wid == "Sx" else sopt) - cfg.model.s0


def _truncated(wid: str, raw: float) -> float:
    return float(np.sqrt(raw)) if wid == "B" and raw > 0 else max(0.0, raw)


def compute_path(cfg: ScenarioConfig, path: str) -> PathResult:
    m, wp, grid = cfg.model, cfg.witness_params, cfg.grid
    raw, trunc, se, evals = {}, {}, {}, {}

    def state_fn(fn):
        return lambda wid: (lambda t: evaluate(wid, fn(t), wp).raw)

    if path == "analytic":
        if not analytic_available(m):
            raise ConfigError(f"no analytic path for model {m.model} with these parameters")
        traj = analytic_trajectory(m, grid)
        for wid in cfg.witnesses:
            if m.model == "kerr" and wid in ("Sx", "Sopt"):
                evals[wid] = (lambda w: lambda t: _kerr_closed(cfg, w, t))(wid)
            else:
                evals[wid] = state_fn(lambda t: analytic_state(m, t))(wid)
            raw[wid] = np.array([evals[wid](t) for t in grid])
            trunc[wid] = np.array([_truncated(wid, r) for r in raw[wid]])
        return PathResult(path, traj, raw, trunc, se, evals)
    if path == "lindblad":
        traj = lindblad_evolve(m, None, grid, cfg.step)
        for wid in cfg.witnesses:
            evals[wid] = state_fn(traj.evaluate)(wid)
            vals = [evaluate(wid, s, wp) for s in traj.states]
            raw[wid] = np.array([v.raw for v in vals])
            trunc[wid] = np.array([v.truncated for v in vals])
        return PathResult(path, traj, raw, trunc, se, evals)
    if path == "mcwf":
        traj = mcwf_evolve(m, None, grid, cfg.mcwf)
        for wid in cfg.witnesses:
            raw[wid], se[wid] = jackknife(traj, lambda s: evaluate(wid, s, wp).raw)
            trunc[wid] = np.array([_truncated(wid, r) for r in raw[wid]])
        return PathResult(path, traj, raw, trunc, se, evals)
    raise ConfigError(f"unknown path {path!r}")


def compute_all(cfg: ScenarioConfig) -> dict[str, PathResult]:
    check_truncation(cfg.model)
    return {p: compute_path(cfg, p) for p in cfg.paths}


def primary_path(results: dict[str, PathResult]) -> PathResult:
    for p in ("analytic", "lindblad", "mcwf"):
        if p in results:
            return results[p]
    raise ValueError("no results")


def path_events(cfg: ScenarioConfig, res: PathResult) -> list[EventRecord]:
    samples = []
    for wid in cfg.witnesses:
        samples += samples_from_series(wid, cfg.grid, res.raw[wid])
    return detect_events(samples, res.evaluators)


@dataclass
class Deviation:
    path: str
    witness: str
    diff: np.ndarray
    tol: np.ndarray
    label: str

    @property
    def ok(self) -> bool:
        return bool(np.all(self.diff <= self.tol))

    @property
    def worst(self) -> float:
        return float(np.max(self.diff))


def deviations(cfg: ScenarioConfig, results: dict[str, PathResult]) -> list[Deviation]:
    """Numeric paths against the analytic path (or MCWF against Lindblad without one)."""
    out = []
    ref = results.get("analytic") or (results.get("lindblad") if "mcwf" in results else None)
    if ref is None:
        return out
    for p in ("lindblad", "mcwf"):
        if p not in results or p == ref.path:
            continue
        for wid in cfg.witnesses:
            diff = np.abs(results[p].raw[wid] - ref.raw[wid])
            if p == "mcwf":
                tol = N_SIGMA * results[p].stderr[wid] + STAT_FLOOR
                label = f"{N_SIGMA:g} sigma (n_traj={cfg.mcwf.n_traj})"
            else:
                tol = np.full_like(diff, LINDBLAD_TOL)
                label = f"{LINDBLAD_TOL:g}"
            out.append(Deviation(p, wid, diff, tol, label))
    return out


# -- output files ----------------------------------------------------------


def witnesses_csv(cfg: ScenarioConfig, results: dict[str, PathResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = [(p, wid) for p in cfg.paths for wid in cfg.witnesses]
    w.writerow(["t"] + [f"{wid}_{p}_{k}" for p, wid in cols for k in ("raw", "trunc")])
    for i, t in enumerate(cfg.grid):
        row = [_fmt(t)]
        for p, wid in cols:
            row += [_fmt(results[p].raw[wid][i]), _fmt(results[p].trunc[wid][i])]
        w.writerow(row)
    return buf.getvalue()


def events_csv(events: list[EventRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["witness", "kind", "time", "classification", "bracket_lo", "bracket_hi"])
    for e in events:
        w.writerow([e.witness, e.kind, _fmt(e.time), e.classification, _fmt(e.bracket[0]), _fmt(e.bracket[1])])
    return buf.getvalue()


def compare_csv(cfg: ScenarioConfig, devs: list[Deviation]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + list(cfg.witnesses))
    worst = {wid: np.full(cfg.n_samples, np.nan) for wid in cfg.witnesses}
    for d in devs:
        worst[d.witness] = np.fmax(worst[d.witness], d.diff)
    for i, t in enumerate(cfg.grid):
        w.writerow([_fmt(t)] + [_fmt(worst[wid][i]) for wid in cfg.witnesses])
    return buf.getvalue()


def plot_script(cfg: ScenarioConfig) -> str:
    lines = [
        f"# witness trajectories for {cfg.name}",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        "set output 'witnesses.png'",
        "set xlabel 't'",
        "set ylabel 'truncated witness'",
        "set key outside right",
    ]
    plots = []
    col = 2
    for p in cfg.paths:
        for wid in cfg.witnesses:
            style = "lines" if p != "mcwf" else "points pt 7 ps 0.3"
            plots.append(f"'witnesses.csv' every ::1 using 1:{col + 1} with {style} title '{wid} ({p})'")
            col += 2
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def run_scenario(cfg: ScenarioConfig, out: str | Path | None = None) -> tuple[int, list[Deviation]]:
    """Compute all paths and write the four output files; returns (exit status, deviations)."""
    results = compute_all(cfg)
    events = path_events(cfg, primary_path(results))
    devs = deviations(cfg, results)
    target = Path(out if out is not None else cfg.out)
    target.mkdir(parents=True, exist_ok=True)
    (target / "witnesses.csv").write_text(witnesses_csv(cfg, results))
    (target / "events.csv").write_text(events_csv(events))
    (target / "compare.csv").write_text(compare_csv(cfg, devs))
    (target / "plot.gp").write_text(plot_script(cfg))
    return (0 if all(d.ok for d in devs) else 2), devs


# -- verification ----------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    observed: float | None
    tolerance: str
    detail: str = ""


def _event_checks(cfg, res: PathResult) -> list[Check]:
    try:
        table = closed_form_sv_times(cfg.model)
    except ConfigError:
        return []
    events = path_events(cfg, res)
    out = []
    for row in table:
        if row.witness not in cfg.witnesses:
            continue
        for kind, t_ref, note in (("SV", row.t_sv, ""), ("SR", row.t_sr, ""), ("SR", row.t_appear, "first appearance")):
            if t_ref is None or t_ref >= cfg.t_max:
                continue
            cands = [e.time for e in events if e.witness == row.witness and e.kind == kind and e.note == note]
            name = f"{res.path}: {row.witness} {kind}{' (appearance)' if note else ''} time"
            if not cands:
                out.append(Check(name, False, None, f"{EVENT_TOL:g}", f"no event detected near {t_ref:.9g}"))
                continue
            err = min(abs(c - t_ref) for c in cands)
            out.append(Check(name, err <= EVENT_TOL, err, f"{EVENT_TOL:g}", f"closed form {t_ref:.9g}"))
    return out


def _kerr_checks(cfg: ScenarioConfig) -> list[Check]:
    m = cfg.model
    dim = m.layout.mode_dims[0]
    taus = m.kappa * cfg.grid[:: max(1, cfg.n_samples // 50)]
    worst_x = worst_opt = worst_min = 0.0
    for tau in taus:
        st = kerr_state(m.alpha0, -tau, dim)
        sx, sopt = analytic_kerr_witnesses(m, tau)
        worst_x = max(worst_x, abs(sx - quad_variance(st, [-m.phi])))
        pv = principal_variance(st)
        worst_opt = max(worst_opt, abs(sopt - pv))
        worst_min = max(worst_min, abs(min_quadrature_variance(st)[1] - pv))
    return [
        Check("kerr: closed-form S_x vs Fock moments", worst_x <= KERR_TOL, worst_x, f"{KERR_TOL:g}"),
        Check("kerr: closed-form S_opt vs Fock moments", worst_opt <= KERR_TOL, worst_opt, f"{KERR_TOL:g}"),
        Check("kerr: S_opt vs golden-section minimum", worst_min <= PRINCIPAL_TOL, worst_min, f"{PRINCIPAL_TOL:g}"),
    ]


def _lindblad_checks(cfg: ScenarioConfig, res: PathResult) -> list[Check]:
    mins = [float(np.linalg.eigvalsh(s.rho)[0]) for s in res.trajectory.states]
    drift = res.trajectory.meta["hermiticity_drift"]
    out = [
        Check("lindblad: min eigenvalue", min(mins) >= -1e-7, min(mins), ">= -1e-7"),
        Check("lindblad: hermiticity drift per unit time", drift / cfg.t_max <= 1e-10, drift / cfg.t_max, "1e-10"),
    ]
    if "max_top_population" in res.trajectory.meta:
        top = res.trajectory.meta["max_top_population"]
        out.append(Check("lindblad: top Fock level population", top <= 1e-10, top, "1e-10"))
    return out


def verify(cfg: ScenarioConfig) -> list[Check]:
    """Run every applicable cross-check; failures are returned, not raised."""
    checks: list[Check] = []
    try:
        check_truncation(cfg.model)
    except TruncationError as exc:
        return [Check("truncation leakage", False, None, "coherent tail < 1e-20", str(exc))]
    checks.append(Check("truncation leakage", True, None, "coherent tail < 1e-20"))

    paths = ["lindblad"] + (["analytic"] if analytic_available(cfg.model) else [])
    if "mcwf" in cfg.paths:
        paths.append("mcwf")
    results = {}
    for p in paths:
        try:
            results[p] = compute_path(cfg, p)
        except Exception as exc:  # reported, not raised
            checks.append(Check(f"{p}: integration", False, None, "", f"{type(exc).__name__}: {exc}"))
    for d in deviations(cfg, results):
        ref = "analytic" if "analytic" in results else "lindblad"
        checks.append(Check(f"{d.path} vs {ref}: {d.witness}", d.ok, d.worst, d.label))
    if "lindblad" in results:
        checks += _lindblad_checks(cfg, results["lindblad"])
    for p in ("analytic", "lindblad"):
        if p in results:
            checks += _event_checks(cfg, results[p])
    if cfg.model.model == "kerr":
        checks += _kerr_checks(cfg)
    return checks


def format_checks(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  status  {'observed':>12}  tolerance"]
    for c in checks:
        obs = "-" if c.observed is None else f"{c.observed:.3e}"
        line = f"{c.name:<{width}}  {'PASS' if c.ok else 'FAIL':<6}  {obs:>12}  {c.tolerance}"
        if c.detail:
            line += f"  ({c.detail})"
        lines.append(line)
    return "\n".join(lines)
