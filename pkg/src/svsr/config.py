"""Flat ``key = value`` scenario files."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .dynamics import MODELS, McwfConfig, ModelConfig
from .errors import ConfigError
from .witnesses import WITNESS_IDS, WitnessParams, witness_modes

PATHS = ("analytic", "lindblad", "mcwf")

_FLOAT_KEYS = ("gamma1", "gamma2", "nbar1", "nbar2", "kappa", "p", "alpha0_re", "alpha0_im",
               "phi0", "phi", "s0", "d0", "t_max", "dt")
_INT_KEYS = ("n_samples", "n_traj", "seed", "dim")
_LIST_KEYS = ("witnesses", "paths")
KEYS = ("model",) + _FLOAT_KEYS + _INT_KEYS + _LIST_KEYS + ("out",)

DEFAULT_WITNESSES = {
    "damped-werner": ("C", "B", "S", "D"),
    "freq-converter-pure": ("C", "B", "H", "S", "D", "Q1", "Q2"),
    "freq-converter-mixed": ("C", "B", "H", "S", "D", "Q1", "Q2"),
    "kerr": ("Sx", "Sopt"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelConfig
    witnesses: tuple[str, ...]
    t_max: float
    n_samples: int
    paths: tuple[str, ...]
    mcwf: McwfConfig
    out: str = "out"
    dt: float | None = None
    name: str = "scenario"

    def __post_init__(self):
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        if self.t_max <= 0:
            raise ConfigError("t_max must be > 0")
        if not self.paths:
            raise ConfigError("at least one path is required")
        for p in self.paths:
            if p not in PATHS:
                raise ConfigError(f"unknown path {p!r}; expected a subset of {PATHS}")
        if len(set(self.paths)) != len(self.paths) or len(set(self.witnesses)) != len(self.witnesses):
            raise ConfigError("duplicate entries in paths or witnesses")
        if not self.witnesses:
            raise ConfigError("at least one witness is required")
        for w in self.witnesses:
            if w not in WITNESS_IDS:
                raise ConfigError(f"unknown witness {w!r}; expected one of {WITNESS_IDS}")
            if witness_modes(w) > self.model.n_modes:
                raise ConfigError(f"witness {w} needs two modes but model {self.model.model} has one")
            if w == "Sopt" and self.model.n_modes != 1:
                raise ConfigError("Sopt is a single-mode witness")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_samples)

    @property
    def step(self) -> float:
        return self.dt or self.model.default_dt()

    @property
    def witness_params(self) -> WitnessParams:
        m = self.model
        # the config phase phi refers to x = a exp(-i phi) + h.c.
        return WitnessParams(s0=m.s0, d0=m.d0, phis=(-m.phi,) * m.n_modes)


def _parse_value(key: str, text: str):
    try:
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _INT_KEYS:
            return int(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None
    if key in _LIST_KEYS:
        return tuple(x.strip() for x in text.split(",") if x.strip())
    return text


def parse_config_text(text: str) -> dict:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, val)
    return values


def build_config(values: dict, name: str = "scenario") -> ScenarioConfig:
    if "model" not in values:
        raise ConfigError("missing required key 'model'")
    model = values["model"]
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; expected one of {MODELS}")
    g = lambda k, d=0.0: values.get(k, d)
    alpha = complex(g("alpha0_re"), g("alpha0_im")) * np.exp(1j * g("phi0"))
    mc = ModelConfig(
        model=model,
        gammas=(g("gamma1"), g("gamma2")),
        nbars=(g("nbar1"), g("nbar2")),
        kappa=g("kappa", 1.0),
        p=g("p", 1.0),
        alpha0=alpha,
        phi0=None,
        phi=g("phi"),
        s0=g("s0"),
        d0=g("d0"),
        dim=values.get("dim"),
    )
    if mc.dim is not None and mc.dim < 2:
        raise ConfigError("dim must be >= 2")
    dt = values.get("dt")
    return ScenarioConfig(
        model=mc,
        witnesses=values.get("witnesses", DEFAULT_WITNESSES[model]),
        t_max=g("t_max", 1.0),
        n_samples=values.get("n_samples", 201),
        paths=values.get("paths", ("analytic", "lindblad")),
        mcwf=McwfConfig(n_traj=values.get("n_traj", 1000), seed=values.get("seed", 0),
                        dt=dt or mc.default_dt()),
        out=values.get("out", "out"),
        dt=dt,
        name=name,
    )


def bundled_configs() -> list[str]:
    root = resources.files("svsr") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def read_config_text(path: str | Path) -> tuple[str, str]:
    """Contents and stem of ``path``; falls back to a bundled config of that name."""
    p = Path(path)
    if p.is_file():
        return p.read_text(), p.stem
    name = p.name if p.name.endswith(".cfg") else p.name + ".cfg"
    bundled = resources.files("svsr") / "configs" / name
    if str(path) == p.name and bundled.is_file():
        return bundled.read_text(), Path(name).stem
    raise ConfigError(f"config file {path} not found (bundled: {', '.join(bundled_configs())})")


def load_config(path: str | Path, **overrides) -> ScenarioConfig:
    text, name = read_config_text(path)
    values = parse_config_text(text)
    for k, v in overrides.items():
        if v is not None:
            values[k] = v
    return build_config(values, name)


