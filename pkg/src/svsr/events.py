"""Sudden vanishing (SV) and sudden reappearance (SR) events on witness series."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dynamics import ModelConfig
from .errors import ConfigError
from .witnesses import golden_min

ZERO_TOL = 1e-9
REL_BRACKET = 1e-10
TOUCH_STEPS = 2

RawFn = Callable[[float], float]


@dataclass(frozen=True)
class WitnessSample:
    time: float
    witness: str
    raw: float
    truncated: float


@dataclass(frozen=True)
class EventRecord:
    witness: str
    kind: str  # "SV" or "SR"
    time: float
    classification: str  # "proper" or "touching"
    bracket: tuple[float, float]
    note: str = ""


def samples_from_series(witness: str, times: Sequence[float], raw: Sequence[float]) -> list[WitnessSample]:
    return [WitnessSample(float(t), witness, float(r), max(0.0, float(r))) for t, r in zip(times, raw)]


def _group(samples: Iterable[WitnessSample]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    series: dict[str, list[WitnessSample]] = {}
    for s in samples:
        series.setdefault(s.witness, []).append(s)
    out = {}
    for wid, ss in series.items():
        ss.sort(key=lambda s: s.time)
        t = np.array([s.time for s in ss])
        if len(t) < 2:
            raise ValueError(f"witness {wid} has fewer than two samples")
        d = np.diff(t)
        if np.any(d <= 0) or np.ptp(d) > 1e-6 * d.mean():
            raise ValueError(f"sample grid for witness {wid} is not uniform")
        out[wid] = (t, np.array([s.raw for s in ss]))
    return out


def _bisect(fn: RawFn, lo: float, hi: float, lo_pos: bool, width: float, zt: float) -> tuple[float, float]:
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if (fn(mid) > zt) == lo_pos:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _crossing(t, r, i, fn, width, zt):
    lo_pos = r[i] > zt
    if fn is not None:
        lo, hi = _bisect(fn, t[i], t[i + 1], lo_pos, width, zt)
        return 0.5 * (lo + hi), (lo, hi)
    # without an evaluator: linear interpolation of raw - zt between samples
    a, b = r[i] - zt, r[i + 1] - zt
    frac = a / (a - b) if a != b else 0.5
    tc = t[i] + min(max(frac, 0.0), 1.0) * (t[i + 1] - t[i])
    return tc, (t[i], t[i + 1])


def _touch_minima(t, r, fn, zt, xtol):
    """Zero touches between samples: local minima of raw reaching the zero tolerance."""
    found = []
    pos = r > zt
    for i in range(1, len(t) - 1):
        if not (pos[i - 1] and pos[i] and pos[i + 1]):
            continue
        if not (r[i] < r[i - 1] and r[i] <= r[i + 1]):
            continue
        x, val = golden_min(fn, t[i - 1], t[i + 1], xtol)
        if val <= zt:
            found.append((x, val, i))
    return found


def detect_events(
    samples: Iterable[WitnessSample],
    evaluators: Mapping[str, RawFn] | None = None,
    zero_tol: float = ZERO_TOL,
    rel_bracket: float = REL_BRACKET,
) -> list[EventRecord]:
    """SV at downward and SR at upward sign changes of the raw witness.

    A witness counts as vanished when ``raw <= zero_tol``.  With an evaluator
    for a witness, crossings are bisected to ``rel_bracket`` of the time span
    and minima between samples are searched for zero touches.  An interval of
    vanishing is touching when it lasts at most two grid steps and raw stays
    above ``-zero_tol``; otherwise it is proper.  A witness that starts at zero
    and later turns on yields an SR noted as a first appearance.
    """
    evaluators = evaluators or {}
    out: list[EventRecord] = []
    for wid, (t, r) in _group(samples).items():
        fn = evaluators.get(wid)
        step = t[1] - t[0]
        span = t[-1] - t[0]
        width = rel_bracket * span
        pos = r > zero_tol
        raw_events = []  # (kind, time, bracket, sample index after the event)
        for i in range(len(t) - 1):
            if pos[i] != pos[i + 1]:
                tc, br = _crossing(t, r, i, fn, width, zero_tol)
                raw_events.append(("SV" if pos[i] else "SR", tc, br, i + 1))
        touches = _touch_minima(t, r, fn, zero_tol, 1e-3 * width) if fn is not None else []

        events: list[EventRecord] = []
        for k, (kind, tc, br, j) in enumerate(raw_events):
            if kind == "SV":
                nxt = raw_events[k + 1] if k + 1 < len(raw_events) else None
                t_end = nxt[1] if nxt else t[-1]
                stop = nxt[3] if nxt else len(t)
                cls = _classify(t_end - tc, r[j:stop], step, zero_tol)
                events.append(EventRecord(wid, "SV", tc, cls, br))
            else:
                prev = raw_events[k - 1] if k > 0 else None
                if prev is None:
                    cls = _classify(tc - t[0], r[:j], step, zero_tol)
                    events.append(EventRecord(wid, "SR", tc, cls, br, "first appearance"))
                else:
                    events.append(EventRecord(wid, "SR", tc, events[-1].classification, br))
        for tm, _, i in touches:
            half = max(width, 1e-12)
            events.append(EventRecord(wid, "SV", tm, "touching", (tm - half, tm + half)))
            events.append(EventRecord(wid, "SR", tm, "touching", (tm - half, tm + half)))
        events.sort(key=lambda e: (e.time, e.kind != "SV"))
        out.extend(events)
    return out


def _classify(duration: float, zero_raw: np.ndarray, step: float, zt: float) -> str:
    short = duration <= TOUCH_STEPS * step * (1 + 1e-9)
    shallow = zero_raw.size == 0 or float(np.min(zero_raw)) > -zt
    return "touching" if short and shallow else "proper"


# -- closed forms --------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormTime:
    witness: str
    t_sv: float | None
    t_sr: float | None = None
    t_appear: float | None = None


def _arccos_time(x: float, kappa: float) -> float | None:
    if not -1.0 <= x <= 1.0:
        return None
    return float(np.arccos(x) / (2 * kappa))


def _log_time(arg: float, rate: float) -> float | None:
    """``ln(arg)/rate`` when the witness starts positive, else ``None``."""
    return float(np.log(arg) / rate) if arg > 1.0 else None


def closed_form_sv_times(cfg: ModelConfig) -> list[ClosedFormTime]:
    """First SV (and SR) times for the damped Werner and mixed converter models.

    ``t_sv = None`` marks a witness that never vanishes (or is never positive).
    """
    p = cfg.p
    if cfg.model == "damped-werner":
        g1, g2 = cfg.gammas[:2]
        if g1 != g2 or g1 <= 0:
            raise ConfigError("closed-form SV times need equal positive damping rates")
        if any(n != 0 for n in cfg.nbars[:2]):
            raise ConfigError("closed-form SV times need nbar = 0")
        g = g1
        c = _log_time((1 + p) / (2 * (1 - p)), g) if p < 1 else None
        b = _log_time(np.sqrt(2) * p, g)
        s = _log_time((1 + p) / (2 * cfg.s0), 2 * g) if cfg.s0 > 0 else None
        d = _log_time((1 + p) / (2 * cfg.d0**2), 2 * g) if cfg.d0 > 0 else None
        return [ClosedFormTime("C", c), ClosedFormTime("B", b), ClosedFormTime("S", s), ClosedFormTime("D", d)]
    if cfg.model == "freq-converter-mixed":
        k = cfg.kappa
        if k <= 0 or p <= 0:
            raise ConfigError("closed-form converter times need kappa > 0 and p > 0")
        out = []
        for wid, x in (("C", (1 - p) / (2 * p)), ("B", np.sqrt(1 - p * p) / p), ("H", np.sqrt(1 - p) / p)):
            tsv = _arccos_time(x, k)
            out.append(ClosedFormTime(wid, tsv, None if tsv is None else np.pi / (2 * k) - tsv))
        # S vanishes where p^2 sin^2(2kt) <= 2 S0 + p - 1
        xs = 2 * cfg.s0 + p - 1
        ts = _arccos_time(np.sqrt(xs / 2) / p, k) if xs >= 0 else None
        if ts is None:
            out.append(ClosedFormTime("S", None))
        else:
            tsv = np.pi / (4 * k) + ts
            out.append(ClosedFormTime("S", tsv, np.pi / k - tsv, np.pi / (2 * k) - tsv))
        # D is on where sin(2kt) < -x: an interval of half-width td around 3 pi/(4k)
        td = _arccos_time((2 * cfg.d0**2 + p - 1) / (4 * cfg.d0 * p), k) if cfg.d0 > 0 else None
        if td is None:
            out.append(ClosedFormTime("D", None))
        else:
            lo, hi = 3 * np.pi / (4 * k) - td, 3 * np.pi / (4 * k) + td
            if hi < np.pi / k:
                out.append(ClosedFormTime("D", hi, lo + np.pi / k, lo))
            else:
                out.append(ClosedFormTime("D", hi - np.pi / k, lo))
        return out
    raise ConfigError(f"no closed-form SV times for model {cfg.model!r}")
