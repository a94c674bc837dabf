"""Trial orchestration for the batch verifier.

Every trial draws from its own generator, seeded by the string
``"{seed}/{r}/{k}/{trial}/{part}"``, so a report depends only on the config
and never on how trials were spread over workers.
"""
from __future__ import annotations

import csv
import io
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping

from . import connection as conn_mod
from . import gamma, scalar, ysystem, zsystem
from .errors import (
    ConfigError,
    DegenerateFactor,
    IoFailure,
    NotApplicable,
    SeedExhausted,
)
from .lattice import Site, SystemShape, as_shape
from .report import Counter, Report

CHECKS = (
    "relations",
    "periodicity",
    "z-relations",
    "z-sigma",
    "flatness",
    "staircase",
    "factorization-k2",
    "delta",
    "transport",
    "diagonal-ratio",
    "infinite-window",
)
# opt-in: corrupts stored values and expects the relation checkers to notice
FAULT_INJECTION = "fault-injection"
KNOWN_CHECKS = CHECKS + (FAULT_INJECTION,)

DEFAULT_SHAPES = ((1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 3))
GAMMA_CHECKS = {"z-relations", "z-sigma", "flatness", "staircase", "factorization-k2", "delta",
                "transport", "diagonal-ratio", FAULT_INJECTION}
CONNECTION_CHECKS = {"staircase", "delta", "transport", "diagonal-ratio"}

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_EXHAUSTED = 0, 1, 2, 3


@dataclass(frozen=True)
class TrialConfig:
    shapes: tuple[tuple[int, int], ...] = DEFAULT_SHAPES
    trials: int = 10
    seed: int = 0
    bound: int = 10
    n_window: int | None = None
    checks: tuple[str, ...] = CHECKS
    workers: int = 1

    def __post_init__(self):
        try:
            shapes = shapes_from(self.shapes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad shape list: {exc}") from None
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "checks", tuple(self.checks))
        unknown = [c for c in self.checks if c not in KNOWN_CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; choose from {list(KNOWN_CHECKS)}")
        for name in ("trials", "bound", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.seed, int) or not -(2**63) <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed!r}")
        if self.n_window is not None and (not isinstance(self.n_window, int) or self.n_window < 2):
            raise ConfigError(f"n_window must be an integer >= 2, got {self.n_window!r}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "TrialConfig":
        allowed = {f for f in cls.__dataclass_fields__}
        extra = set(data) - allowed
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        kw = dict(data)
        if "shapes" in kw:
            kw["shapes"] = tuple(tuple(s) for s in kw["shapes"])
        if "checks" in kw:
            kw["checks"] = tuple(kw["checks"])
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shapes"] = [list(s) for s in self.shapes]
        d["checks"] = list(self.checks)
        return d


def trial_rng(seed: int, shape: SystemShape, trial: int, part: str) -> random.Random:
    return random.Random(f"{seed}/{shape.r}/{shape.k}/{trial}/{part}")


# fault injection


def corrupt(values: dict, rng: random.Random):
    """Pick one stored key and return ``(key, new_value)`` with the value doubled."""
    key = rng.choice(sorted(values))
    return key, values[key] * 2


def fault_y(state: ysystem.YState, rng: random.Random) -> tuple[Site, bool]:
    bad = state.copy()
    key, v = corrupt(bad.values, rng)
    bad.values[key] = v
    return key, ysystem.check_relations(bad).failed > 0


def fault_z(state: zsystem.ZState, rng: random.Random) -> tuple[Site, bool]:
    bad = state.copy()
    key, v = corrupt(bad.values, rng)
    bad.values[key] = v
    try:
        return key, zsystem.z_relation_check(bad).failed > 0
    except DegenerateFactor:
        # the corrupted value hit 1 - 1/z = 0: the relation can no longer hold
        return key, True


def fault_gamma(state: gamma.GammaState, rng: random.Random) -> tuple[tuple, bool]:
    bad = state.copy()
    pool = {("x",) + k: v for k, v in bad.x.items()}
    pool.update({("a",) + k: v for k, v in bad.a.items()})
    key, v = corrupt(pool, rng)
    (bad.x if key[0] == "x" else bad.a)[key[1:]] = v
    return key, gamma.check_flatness(bad).failed > 0


# per-trial work


def _y_part(cfg: TrialConfig, shape: SystemShape, t: int, rep: Report) -> None:
    checks = set(cfg.checks)
    rng = trial_rng(cfg.seed, shape, t, "y")
    st = ysystem.simulate(shape, rng, cfg.bound, cfg.n_window)
    if "relations" in checks:
        rep.merge(ysystem.check_relations(st))
        rep.merge(ysystem.check_relations(ysystem.dual_state(st), check="dual-relations"))
    if "periodicity" in checks:
        rep.merge(ysystem.check_periodicity(st))
        dual = ysystem.check_periodicity(ysystem.dual_state(st))
        for (name, shp), c in dual.counters.items():
            rep.counters.setdefault((f"dual-{name}", shp), Counter()).add(c)
        rep.violations.extend(dual.violations)
    if checks & {"z-relations", "z-sigma"}:
        z = zsystem.y_to_z(st)
        if "z-relations" in checks:
            rep.merge(zsystem.z_relation_check(z))
        if "z-sigma" in checks:
            rep.merge(zsystem.z_sigma_hat_check(z))
    if FAULT_INJECTION in checks:
        frng = trial_rng(cfg.seed, shape, t, "fault-y")
        key, hit = fault_y(st, frng)
        rep.record("fault-y", shape, hit, where=list(key))
        key, hit = fault_z(zsystem.y_to_z(st), frng)
        rep.record("fault-z", shape, hit, where=list(key))


def _gamma_part(cfg: TrialConfig, shape: SystemShape, t: int, rep: Report, meta: dict) -> None:
    checks = set(cfg.checks)
    gshape = shape if shape.r >= shape.k else shape.transposed()
    if gshape != shape:
        rep.notes.append(f"shape {shape} transposed to {gshape} for Gamma checks")
    rng = trial_rng(cfg.seed, gshape, t, "gamma")
    st = gamma.generate(gshape, cfg.n_window, rng, cfg.bound)
    meta["retries"] = st.retries
    z = gamma.z_from_gamma(st)
    if "flatness" in checks:
        rep.merge(gamma.check_flatness(st))
    if "z-relations" in checks:
        rep.merge(zsystem.z_relation_check(z, check="z-relations-gamma", coverage=True))
    if "z-sigma" in checks:
        rep.merge(zsystem.z_sigma_hat_check(z, check="z-sigma-gamma"))
    if "factorization-k2" in checks and gshape.k == 2:
        for sq in conn_mod.sigma_factorization_squares(st):
            rep.merge(conn_mod.check_sigma_factorization_k2(st, sq))
    if checks & CONNECTION_CHECKS:
        conn = conn_mod.Connection(st)
        if "staircase" in checks:
            rep.merge(conn_mod.check_staircases(conn))
        if "delta" in checks:
            rep.merge(conn_mod.check_delta(conn, trial_rng(cfg.seed, gshape, t, "paths")))
        if checks & {"transport", "diagonal-ratio"}:
            for sq in conn_mod.eligible_squares(conn):
                if "transport" in checks:
                    conn_mod.check_transport_commutation(conn, sq, rep=rep)
                if "diagonal-ratio" in checks:
                    conn_mod.check_diagonal_identity(conn, sq, rep=rep)
                    conn_mod.check_ratio_to_z(conn, sq, z, rep=rep)
    if FAULT_INJECTION in checks:
        key, hit = fault_gamma(st, trial_rng(cfg.seed, gshape, t, "fault-gamma"))
        rep.record("fault-gamma", gshape, hit, where=list(key))


def infinite_window_checks(shape: SystemShape, rng: random.Random, bound: int = 10,
                           n_max: int = 6) -> Report:
    """Untruncated system on a diamond: constant solution, generic relations, no twisted shift."""
    rep = Report()
    label = "(inf)"
    window = ysystem.Diamond(n_max, radius=2)
    ones = ysystem.extend_infinite_window(lambda n, i, j: 1, window, shape)
    rep.record("infinite-constant", label, all(v == 1 for v in ones.values.values()),
               where=window.n_max)
    seeds = {}

    def draw(n, i, j):
        return seeds.setdefault((n, i, j), scalar.sample_positive(rng, bound))

    st = ysystem.extend_infinite_window(draw, window, shape)
    rep.merge(ysystem.check_relations(st, check="infinite-relations"))
    try:
        ysystem.check_periodicity(st)
        rep.record("infinite-no-periodicity", label, False, expected="NotApplicable")
    except NotApplicable:
        rep.record("infinite-no-periodicity", label, True)
    k = max(shape.k, 3)
    win = gamma.generate_untruncated(k, half_width=6, n_cols=4, rng=rng, bound=bound)
    rep.merge(gamma.check_untruncated_z(win))
    rep.merge(gamma.check_xpera_identity(win))
    return rep


def run_trial(cfg: TrialConfig, shape, t: int) -> Report:
    """One trial on one shape: every selected check, on freshly sampled data."""
    shape = as_shape(shape)
    rep = Report()
    meta = {"shape": str(shape), "trial": t, "seed": f"{cfg.seed}/{shape.r}/{shape.k}/{t}",
            "retries": 0, "status": "ok"}
    start = time.perf_counter()
    checks = set(cfg.checks)
    _y_part(cfg, shape, t, rep)
    if checks & GAMMA_CHECKS:
        try:
            _gamma_part(cfg, shape, t, rep, meta)
        except SeedExhausted as exc:
            meta["status"] = "seed-exhausted"
            meta["retries"] = gamma.MAX_RETRIES
            rep.notes.append(f"{shape} trial {t}: {exc}")
    if "infinite-window" in checks:
        rep.merge(infinite_window_checks(shape, trial_rng(cfg.seed, shape, t, "infinite"), cfg.bound))
    rep.trials.append(meta)
    rep.timings.append({"shape": str(shape), "trial": t,
                        "seconds": round(time.perf_counter() - start, 6)})
    return rep


def _run_trial_args(args) -> Report:
    return run_trial(*args)


def run_trials(cfg: TrialConfig) -> Report:
    """Run every trial of ``cfg`` and fold the per-trial reports in a fixed order."""
    jobs = [(cfg, shape, t) for shape in cfg.shapes for t in range(cfg.trials)]
    out = Report()
    if not cfg.checks:
        return out
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_trial_args, jobs, chunksize=1))
    else:
        parts = [run_trial(*job) for job in jobs]
    for part in parts:
        out.merge(part)
    return out


def exhausted_trials(report: Report) -> int:
    return sum(1 for m in report.trials if m.get("status") == "seed-exhausted")


def exit_code(report: Report) -> int:
    if report.failed:
        return EXIT_VIOLATION
    if exhausted_trials(report):
        return EXIT_EXHAUSTED
    return EXIT_OK


# export

CSV_HEADER = ("check", "shape", "checked", "passed", "failed")


def to_csv(report: Report) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for (check, shape), c in sorted(report.counters.items()):
        w.writerow([check, shape, c.checked, c.passed, c.failed])
    return buf.getvalue()


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return to_csv(report)
    raise ConfigError(f"unknown export format {fmt!r}")


def export(report: Report, fmt: str, path) -> Path:
    """Write ``report`` as JSON (canonical) or as a CSV of its counters."""
    path = Path(path)
    text = render(report, fmt)
    try:
        path.write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path) -> Report:
    try:
        return Report.from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from exc


def shapes_from(items: Iterable) -> tuple[tuple[int, int], ...]:
    out = []
    for s in items:
        sh = as_shape(s)
        out.append((sh.r, sh.k))
    return tuple(out)


__all__ = [
    "CHECKS", "DEFAULT_SHAPES", "FAULT_INJECTION", "TrialConfig", "run_trial", "run_trials",
    "export", "load_report", "exit_code", "infinite_window_checks", "fault_y", "fault_z",
    "fault_gamma", "trial_rng", "EXIT_OK", "EXIT_VIOLATION", "EXIT_CONFIG", "EXIT_EXHAUSTED",
]
