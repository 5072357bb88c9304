"""Command-line entry point: ``svsr run|verify|sv-times <config>``."""
from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, IntegrationError, TruncationError
from .events import closed_form_sv_times
from .runner import format_checks, run_scenario, verify


def _fmt_time(t):
    return "never" if t is None else f"{t:.9f}"


def _cmd_run(cfg, args) -> int:
    status, devs = run_scenario(cfg)
    for d in devs:
        if not d.ok:
            print(f"{d.path} {d.witness}: max deviation {d.worst:.3e} exceeds {d.label}", file=sys.stderr)
    print(f"wrote witnesses.csv, events.csv, compare.csv, plot.gp to {cfg.out}")
    return status


def _cmd_verify(cfg, args) -> int:
    checks = verify(cfg)
    print(format_checks(checks))
    failed = sum(not c.ok for c in checks)
    print(f"{len(checks) - failed} passed, {failed} failed")
    return 0 if failed == 0 else 2


def _cmd_sv_times(cfg, args) -> int:
    rows = closed_form_sv_times(cfg.model)
    print(f"{'witness':<8}{'t_SV':>14}{'t_SR':>14}{'t_appear':>14}")
    for r in rows:
        appear = "-" if r.t_appear is None else f"{r.t_appear:.9f}"
        sr = "-" if r.t_sr is None and r.t_sv is not None else _fmt_time(r.t_sr)
        print(f"{r.witness:<8}{_fmt_time(r.t_sv):>14}{sr:>14}{appear:>14}")
    return 0


COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "sv-times": _cmd_sv_times}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svsr", description="Sudden vanishing and reappearance of witnesses.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "compute witness trajectories and write CSV outputs"),
        ("verify", "run analytic/numeric cross-checks and print a report"),
        ("sv-times", "print closed-form SV/SR times"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="config file, or the name of a bundled config (fig1.cfg ... fig3b.cfg)")
        p.add_argument("--out", help="output directory (overrides 'out')")
        p.add_argument("--seed", type=int, help="MCWF seed (overrides 'seed')")
        p.add_argument("--dt", type=float, help="time step (overrides 'dt')")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, out=args.out, seed=args.seed, dt=args.dt)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, TruncationError, IntegrationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
