"""Command-line entry point: ``yperiod <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import gamma, harness, ysystem, zsystem
from .errors import ConfigError, IoFailure, SeedExhausted, ShapeUnsupported
from .report import Report

TRIAL_COMMANDS = {
    "check-periodicity": ("relations", "periodicity"),
    "check-gamma": ("flatness", "z-relations", "z-sigma", "factorization-k2"),
    "staircase": ("staircase",),
    "delta": ("delta", "transport", "diagonal-ratio"),
    "run-suite": harness.CHECKS,
}

CONFIG_FIELDS = {"r", "k", "shapes", "seed", "bound", "n_window", "format", "out", "trials",
                 "checks", "workers"}


def _add_common(p: argparse.ArgumentParser) -> None:
    # every default is None so an explicit flag can be told apart from a config value
    p.add_argument("--r", type=int, help="rows of the truncated system")
    p.add_argument("--k", type=int, help="columns of the truncated system")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--bound", type=int, help="seed numerators/denominators drawn from 1..bound")
    p.add_argument("--n-window", type=int, dest="n_window", help="last lattice/square column")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--config", help="JSON file with the same fields as the flags")


def _add_trials(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, help="trials per shape")
    p.add_argument("--checks", help="comma-separated subset of: " + ",".join(harness.KNOWN_CHECKS))
    p.add_argument("--workers", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yperiod", description="Exact periodicity verifier")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate-y", help="evolve one truncated Y-system and dump it")
    _add_common(p)
    p = sub.add_parser("simulate-gamma", help="generate one truncated Gamma-state and dump it")
    _add_common(p)
    for name, checks in TRIAL_COMMANDS.items():
        p = sub.add_parser(name, help=f"random trials of: {', '.join(checks)}")
        _add_common(p)
        _add_trials(p)
        if name in ("check-periodicity", "check-gamma"):
            p.add_argument("--input", help="check a saved state instead of sampling trials")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    """Config-file values overridden by explicit flags."""
    merged: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise IoFailure(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        extra = sorted(set(data) - CONFIG_FIELDS)
        if extra:
            raise ConfigError(f"unknown config fields {extra}")
        merged.update(data)
    for key in ("r", "k", "seed", "bound", "n_window", "format", "out", "trials", "checks", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if isinstance(merged.get("checks"), str):
        merged["checks"] = [c for c in merged["checks"].split(",") if c.strip() != ""]
    return merged


def _shape_list(s: dict):
    if "r" in s or "k" in s:
        if "r" not in s or "k" not in s:
            raise ConfigError("--r and --k go together")
        return [(s["r"], s["k"])]
    return s.get("shapes", list(harness.DEFAULT_SHAPES))


def _single_shape(s: dict):
    shapes = _shape_list(s)
    if len(shapes) != 1:
        raise ConfigError("this command needs exactly one shape (--r and --k)")
    return shapes[0]


def _emit(text: str, out) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise IoFailure(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _emit_report(rep: Report, s: dict) -> int:
    fmt = s.get("format", "json")
    if s.get("out"):
        harness.export(rep, fmt, s["out"])
        for line in rep.summary_lines():
            print(line)
    else:
        sys.stdout.write(harness.render(rep, fmt))
    return harness.exit_code(rep)


def _check_saved(command: str, path: str, s: dict) -> int:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        if command == "check-periodicity":
            st = ysystem.YState.from_json(text)
            rep = ysystem.check_relations(st).merge(ysystem.check_periodicity(st))
        else:
            st = gamma.GammaState.from_json(text)
            z = gamma.z_from_gamma(st)
            rep = gamma.check_flatness(st)
            rep.merge(zsystem.z_relation_check(z, check="z-relations-gamma", coverage=True))
            rep.merge(zsystem.z_sigma_hat_check(z, check="z-sigma-gamma"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} is not a valid saved state: {exc}") from exc
    return _emit_report(rep, s)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    s = _settings(args)
    fmt = s.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    seed = s.get("seed", 0)
    bound = s.get("bound", 10)
    if args.command == "simulate-y":
        shape = _single_shape(s)
        st = ysystem.simulate(shape, random.Random(f"{seed}/y"), bound, s.get("n_window"))
        _emit(st.to_json(indent=2) + "\n", s.get("out"))
        return harness.EXIT_OK
    if args.command == "simulate-gamma":
        shape = _single_shape(s)
        st = gamma.generate(shape, s.get("n_window"), random.Random(f"{seed}/gamma"), bound)
        _emit(st.to_json(indent=2) + "\n", s.get("out"))
        return harness.EXIT_OK
    if getattr(args, "input", None):
        return _check_saved(args.command, args.input, s)
    checks = s.get("checks", TRIAL_COMMANDS[args.command])
    cfg = harness.TrialConfig(
        shapes=_shape_list(s),
        trials=s.get("trials", 10),
        seed=seed,
        bound=bound,
        n_window=s.get("n_window"),
        checks=tuple(checks),
        workers=s.get("workers", 1),
    )
    return _emit_report(harness.run_trials(cfg), s)


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ConfigError, IoFailure, ShapeUnsupported) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_CONFIG
    except SeedExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_EXHAUSTED


if __name__ == "__main__":
    sys.exit(main())
