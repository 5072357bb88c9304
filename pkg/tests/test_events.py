import numpy as np
import pytest

from svsr.dynamics import ModelConfig, analytic_state
from svsr.errors import ConfigError
from svsr.events import (
    EventRecord,
    WitnessSample,
    closed_form_sv_times,
    detect_events,
    samples_from_series,
)
from svsr.witnesses import WitnessParams, evaluate

DAMPED = ModelConfig("damped-werner", gammas=(1.0, 1.0), p=0.8, s0=0.03, d0=0.1)
MIXED = ModelConfig("freq-converter-mixed", kappa=1.0, p=0.8, s0=0.5, d0=1.0)


def model_events(cfg, wids, t_max, n=301):
    grid = np.linspace(0, t_max, n)
    params = WitnessParams(s0=cfg.s0, d0=cfg.d0)
    samples, evals = [], {}
    for wid in wids:
        fn = (lambda w: lambda t: evaluate(w, analytic_state(cfg, t), params).raw)(wid)
        evals[wid] = fn
        samples += samples_from_series(wid, grid, [fn(t) for t in grid])
    return detect_events(samples, evals), grid


def by(events, wid, kind=None):
    return [e for e in events if e.witness == wid and (kind is None or e.kind == kind)]


@pytest.mark.parametrize("with_evaluator", [True, False])
def test_cosine_proper_events(with_evaluator):
    grid = np.linspace(0, 2 * np.pi, 400)
    samples = samples_from_series("X", grid, np.cos(grid))
    events = detect_events(samples, {"X": np.cos} if with_evaluator else None)
    assert [(e.kind, e.classification) for e in events] == [("SV", "proper"), ("SR", "proper")]
    tol = 1e-8 if with_evaluator else 1e-4
    assert events[0].time == pytest.approx(np.pi / 2, abs=tol)
    assert events[1].time == pytest.approx(3 * np.pi / 2, abs=tol)


def test_abs_sine_touching_events():
    fn = lambda t: abs(np.sin(2 * t))
    grid = np.linspace(0.1, 3.5, 300)
    events = detect_events(samples_from_series("C", grid, [fn(t) for t in grid]), {"C": fn})
    assert all(e.classification == "touching" for e in events)
    times = sorted({round(e.time, 6) for e in events})
    assert times == pytest.approx([np.pi / 2, np.pi], abs=1e-6)
    assert [e.kind for e in events] == ["SV", "SR", "SV", "SR"]


def test_closed_form_damped_examples():
    table = {r.witness: r for r in closed_form_sv_times(DAMPED)}
    assert table["C"].t_sv == pytest.approx(np.log(4.5)) and np.log(4.5) == pytest.approx(1.504077, abs=1e-6)
    assert table["B"].t_sv == pytest.approx(np.log(0.8 * np.sqrt(2)))
    assert table["S"].t_sv == pytest.approx(0.5 * np.log(30)) and 0.5 * np.log(30) == pytest.approx(1.700599, abs=1e-6)
    assert table["D"].t_sv == pytest.approx(0.5 * np.log(90)) and 0.5 * np.log(90) == pytest.approx(2.249905, abs=1e-6)


def test_closed_form_converter_examples():
    table = {r.witness: r for r in closed_form_sv_times(MIXED)}
    assert table["B"].t_sv == pytest.approx(np.arccos(0.75) / 2)
    assert table["H"].t_sv == pytest.approx(np.arccos(np.sqrt(0.2) / 0.8) / 2)
    assert table["C"].t_sv == pytest.approx(np.arccos(0.125) / 2)
    assert table["B"].t_sv < table["H"].t_sv < table["C"].t_sv
    assert table["B"].t_sr > table["H"].t_sr > table["C"].t_sr
    assert table["B"].t_sv == pytest.approx(0.361367, abs=1e-6)
    assert table["C"].t_sv == pytest.approx(0.722734, abs=1e-6)


def test_closed_form_never_vanishes_and_errors():
    table = {r.witness: r for r in closed_form_sv_times(ModelConfig("damped-werner", gammas=(1, 1), p=1.0))}
    assert table["C"].t_sv is None  # pure Bell state: concurrence stays positive
    table = {r.witness: r for r in closed_form_sv_times(ModelConfig("freq-converter-mixed", p=0.2))}
    assert table["C"].t_sv is None
    with pytest.raises(ConfigError):
        closed_form_sv_times(ModelConfig("damped-werner", gammas=(1.0, 2.0)))
    with pytest.raises(ConfigError):
        closed_form_sv_times(ModelConfig("kerr"))


def test_damped_detection_matches_closed_forms():
    events, _ = model_events(DAMPED, ["C", "B", "S", "D"], 3.0)
    for row in closed_form_sv_times(DAMPED):
        (sv,) = by(events, row.witness, "SV")
        assert sv.time == pytest.approx(row.t_sv, abs=1e-6)
        assert sv.classification == "proper"


def test_converter_mixed_events():
    events, grid = model_events(MIXED, ["C", "B", "H", "S", "D"], np.pi, 200)
    table = {r.witness: r for r in closed_form_sv_times(MIXED)}
    for wid in ("C", "B", "H"):
        sv, sr = by(events, wid, "SV")[0], by(events, wid, "SR")[0]
        assert sv.time == pytest.approx(table[wid].t_sv, abs=1e-6)
        assert abs(sr.time + sv.time - np.pi / 2) <= 1e-6
        assert sv.classification == sr.classification == "proper"
    for wid in ("S", "D"):
        evs = by(events, wid)
        assert evs and all(e.classification == "proper" for e in evs)
        first = evs[0]
        assert first.kind == "SR" and first.note == "first appearance"
        assert first.time == pytest.approx(table[wid].t_appear, abs=1e-6)
        assert by(events, wid, "SV")[0].time == pytest.approx(table[wid].t_sv, abs=1e-6)
    s_sr = [e for e in by(events, "S", "SR") if not e.note]
    assert s_sr[0].time == pytest.approx(table["S"].t_sr, abs=1e-6)


def test_pure_converter_s_touching():
    cfg = ModelConfig("freq-converter-mixed", kappa=1.0, p=1.0, s0=0.0)
    events, _ = model_events(cfg, ["S", "C"], np.pi, 200)
    assert by(events, "S") and all(e.classification == "touching" for e in by(events, "S"))
    assert all(e.classification == "touching" for e in by(events, "C"))


def test_event_invariants():
    events, grid = model_events(MIXED, ["C", "B", "H", "S", "D"], np.pi, 200)
    span = grid[-1] - grid[0]
    for wid in "CBHSD":
        evs = by(events, wid)
        kinds = [e.kind for e in evs]
        assert all(a != b for a, b in zip(kinds, kinds[1:]))
        for e in evs:
            lo, hi = e.bracket
            assert lo < e.time < hi
            assert hi - lo <= 1e-8 * span


def test_nonuniform_grid_rejected():
    samples = [WitnessSample(t, "C", 1.0, 1.0) for t in (0.0, 0.1, 0.3)]
    with pytest.raises(ValueError):
        detect_events(samples)


def test_record_fields():
    e = EventRecord("C", "SV", 1.0, "proper", (0.9, 1.1))
    assert e.note == ""
