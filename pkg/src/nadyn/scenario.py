"""JSON scenario configs: validation, check dispatch and report emission.

A config names a carrier, a system, a measure and an ordered list of
checks.  Every length is an exact rational, written as an ``"a/b"``
string or an integer.  Running a config produces a ``report.json`` whose
bytes depend only on the config, plus CSV files for point sets and mass
tables.  Wall-clock timings go to a separate ``timings.json``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .asymptotics import (
    TailWindow,
    aperiodicity_verdict,
    converging_set,
    limit_set_matrix,
    nonwandering_report,
    transitive_points,
)
from .expansive import (
    dynamical_ball_matrix,
    expansive_verdict,
    generator_from_constant,
    is_mu_generator,
    lebesgue_number,
)
from .measure import GridMeasure, make_measure
from .metric_space import FiniteMetricSpace, PointSet, build_space
from .properties import conjugacy_invariance, inverse_invariance, power_invariance, thm510_check
from .shadowing import perturbations, persistence_verdict, shadowing_verdict
from .stability import stability_check, walters_pipeline
from .system import TimeVaryingSystem, make_system
from .zoo import translation, zoo_system

__all__ = [
    "CHECKS",
    "SCHEMA_VERSION",
    "ConfigError",
    "RunReport",
    "Scenario",
    "load_config",
    "parse_config",
    "run_scenario",
    "write_report",
]

SCHEMA_VERSION = 1

SAMPLED = {"shadowing", "persistence", "stability", "walters", "conjugacy-invariance", "thm510"}
EXPECTATIONS = {None, "must-pass", "must-fail"}
TOP_KEYS = {
    "schema_version", "space", "system", "measure", "N", "tau", "eps", "delta",
    "eps_grid", "delta_grid", "trials", "seed", "checks",
}


class ConfigError(ValueError):
    """Invalid config; ``problems`` lists ``(field path, message)`` pairs."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))


# --- parsing helpers ---------------------------------------------------------


class _Collector:
    def __init__(self):
        self.problems: list[tuple[str, str]] = []

    def add(self, path: str, msg: str) -> None:
        self.problems.append((path, msg))

    def length(self, value, path: str, positive: bool = True) -> Fraction | None:
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            self.add(path, "expected an exact rational such as \"2/5\" or an integer")
            return None
        try:
            v = Fraction(value)
        except (ValueError, ZeroDivisionError):
            self.add(path, f"cannot parse {value!r} as a rational")
            return None
        if positive and v <= 0:
            self.add(path, "must be positive")
            return None
        return v

    def grid(self, value, path: str) -> list[Fraction] | None:
        if not isinstance(value, list) or not value:
            self.add(path, "expected a non-empty list of rationals")
            return None
        out = [self.length(v, f"{path}[{i}]") for i, v in enumerate(value)]
        if any(v is None for v in out):
            return None
        return sorted(set(out))

    def integer(self, value, path: str, minimum: int = 0) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int):
            self.add(path, "expected an integer")
            return None
        if value < minimum:
            self.add(path, f"must be >= {minimum}")
            return None
        return value


@dataclass
class CheckSpec:
    name: str
    expect: str | None
    params: dict[str, Any]


@dataclass
class Scenario:
    """A validated config with its carrier, system and measure built."""

    config: dict
    space: FiniteMetricSpace
    system: TimeVaryingSystem
    measure: GridMeasure
    N: int
    tau: Fraction
    eps: Fraction | None
    delta: Fraction | None
    eps_grid: list[Fraction] | None
    delta_grid: list[Fraction] | None
    trials: int
    seed: int | None
    checks: list[CheckSpec] = field(default_factory=list)


def load_config(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError([("<file>", f"{path} does not exist")]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([("<file>", f"invalid JSON: {exc}")]) from None


def _build_space(c: _Collector, spec) -> FiniteMetricSpace | None:
    if not isinstance(spec, dict) or "kind" not in spec:
        c.add("space", "expected an object with a 'kind'")
        return None
    params = {k: v for k, v in spec.items() if k != "kind"}
    try:
        return build_space(spec["kind"], **params)
    except (KeyError, TypeError, ValueError) as exc:
        c.add("space", str(exc))
        return None


def _build_system(c: _Collector, spec, space: FiniteMetricSpace | None):
    if not isinstance(spec, dict):
        c.add("system", "expected an object")
        return None
    if "zoo" in spec:
        params = spec.get("params", {})
        if not isinstance(params, dict):
            c.add("system.params", "expected an object")
            return None
        try:
            F = zoo_system(spec["zoo"], **dict(params))
        except KeyError as exc:
            c.add("system.params", f"missing parameter {exc}")
            return None
        except (TypeError, ValueError) as exc:
            c.add("system", str(exc))
            return None
        if space is not None and not space.same_carrier(F.space):
            c.add("space", f"does not match the carrier of {F.name}")
            return None
        return F
    if "cycle" in spec:
        if space is None:
            c.add("space", "a custom system needs an explicit space")
            return None
        try:
            return make_system(space, spec.get("prefix", []), spec["cycle"], name=spec.get("name", "custom"))
        except (TypeError, ValueError) as exc:
            c.add("system", str(exc))
            return None
    c.add("system", "expected 'zoo' or 'cycle'")
    return None


def _build_measure(c: _Collector, spec, space: FiniteMetricSpace, tau) -> GridMeasure | None:
    spec = {"kind": "uniform"} if spec is None else spec
    if not isinstance(spec, dict):
        c.add("measure", "expected an object")
        return None
    kind = spec.get("kind", "uniform")
    try:
        if kind == "weighted":
            ws = spec.get("weights")
            if not isinstance(ws, list):
                c.add("measure.weights", "expected a list of rationals")
                return None
            parsed = [c.length(w, f"measure.weights[{i}]", positive=False) for i, w in enumerate(ws)]
            if any(w is None for w in parsed):
                return None
            return make_measure(space, "weighted", tau, weights=parsed)
        return make_measure(space, kind, tau, point=spec.get("point"))
    except (TypeError, ValueError, IndexError) as exc:
        c.add("measure", str(exc))
        return None


def _parse_checks(c: _Collector, raw, seed) -> list[CheckSpec]:
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        c.add("checks", "expected a list")
        return []
    out = []
    for i, item in enumerate(raw):
        path = f"checks[{i}]"
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict) or "name" not in item:
            c.add(path, "expected a check name or an object with 'name'")
            continue
        name = item["name"]
        if name not in CHECKS:
            c.add(f"{path}.name", f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
            continue
        expect = item.get("expect")
        if expect not in EXPECTATIONS:
            c.add(f"{path}.expect", "expected 'must-pass', 'must-fail' or null")
            continue
        params = item.get("params", {})
        if not isinstance(params, dict):
            c.add(f"{path}.params", "expected an object")
            continue
        if name in SAMPLED and seed is None and "seed" not in params:
            c.add(f"{path}", f"check {name!r} samples perturbations and needs a seed")
            continue
        out.append(CheckSpec(name, expect, params))
    return out


def parse_config(config: dict) -> Scenario:
    """Validate a config and build its objects; raises ConfigError listing every problem."""
    c = _Collector()
    if not isinstance(config, dict):
        raise ConfigError([("<root>", "expected a JSON object")])
    for key in sorted(set(config) - TOP_KEYS):
        c.add(key, "unknown field")
    version = config.get("schema_version")
    if version != SCHEMA_VERSION:
        c.add("schema_version", f"expected {SCHEMA_VERSION}")
    space = _build_space(c, config["space"]) if "space" in config else None
    F = _build_system(c, config.get("system"), space) if "system" in config else None
    if "system" not in config:
        c.add("system", "required")
    space = F.space if F is not None else space
    N = c.integer(config.get("N", 4), "N", minimum=1)
    tau = c.length(config["tau"], "tau") if "tau" in config else None
    eps = c.length(config["eps"], "eps") if "eps" in config else None
    delta = c.length(config["delta"], "delta") if "delta" in config else None
    eps_grid = c.grid(config["eps_grid"], "eps_grid") if "eps_grid" in config else None
    delta_grid = c.grid(config["delta_grid"], "delta_grid") if "delta_grid" in config else None
    trials = c.integer(config.get("trials", 20), "trials", minimum=1)
    seed = c.integer(config["seed"], "seed") if "seed" in config else None
    mu = _build_measure(c, config.get("measure"), space, tau) if space is not None else None
    checks = _parse_checks(c, config.get("checks"), seed)
    if c.problems:
        raise ConfigError(c.problems)
    return Scenario(
        config=config, space=space, system=F, measure=mu, N=N, tau=mu.tau,
        eps=eps, delta=delta, eps_grid=eps_grid, delta_grid=delta_grid,
        trials=trials, seed=seed, checks=checks,
    )


# --- checks ------------------------------------------------------------------


@dataclass
class CheckResult:
    verdict: bool | None
    result: dict
    params: dict
    sets: dict[str, PointSet] = field(default_factory=dict)
    tables: dict[str, list[list]] = field(default_factory=dict)


class _Params:
    """Check parameters with scenario-level fallbacks; records what was used."""

    def __init__(self, sc: Scenario, raw: dict, check: str, workers: int = 1):
        self.sc, self.raw, self.check, self.workers = sc, raw, check, workers
        self.used: dict[str, Any] = {}

    def _fail(self, key: str, msg: str):
        raise ConfigError([(f"checks[{self.check}].params.{key}", msg)])

    def length(self, key: str, default=None) -> Fraction:
        if key in self.raw:
            c = _Collector()
            v = c.length(self.raw[key], key)
            if v is None:
                self._fail(key, c.problems[0][1])
        else:
            v = getattr(self.sc, key, None) if default is None else default
            if v is None:
                self._fail(key, "required (set it on the check or at the top level)")
        self.used[key] = str(v)
        return v

    def grid(self, key: str, fallback) -> list[Fraction]:
        if key in self.raw:
            c = _Collector()
            v = c.grid(self.raw[key], key)
            if v is None:
                self._fail(key, c.problems[0][1])
        else:
            v = getattr(self.sc, key, None) or list(fallback)
        self.used[key] = [str(x) for x in v]
        return v

    def integer(self, key: str, default: int, minimum: int = 0) -> int:
        v = self.raw.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            self._fail(key, f"expected an integer >= {minimum}")
        self.used[key] = v
        return v

    def choice(self, key: str, default: str, options: set[str]) -> str:
        v = self.raw.get(key, default)
        if v not in options:
            self._fail(key, f"expected one of {sorted(options)}")
        self.used[key] = v
        return v

    def common(self) -> tuple[int, int, int, Fraction]:
        N = self.integer("N", self.sc.N, 1)
        trials = self.integer("trials", self.sc.trials, 1)
        seed = self.integer("seed", self.sc.seed if self.sc.seed is not None else 0)
        tau = self.length("tau", self.sc.tau)
        return N, trials, seed, tau


def _ids(s: PointSet) -> list[int]:
    return [int(v) for v in s.ids]


def _check_expansive(sc: Scenario, p: _Params) -> CheckResult:
    F, mu = sc.system, sc.measure
    N = p.integer("N", sc.N, 1)
    tau = p.length("tau", sc.tau)
    grid = p.grid("delta_grid", sc.space.distance_values)
    rep = expansive_verdict(F, mu, grid, N, tau)
    res = rep.to_dict()
    # a failing radius whose open ball sits inside the dynamical ball shows no expansion at all
    ball_inside = {}
    for d, (x, _) in rep.witnesses.items():
        dyn = dynamical_ball_matrix(F, d, N)[x]
        ball = sc.space.ball_matrix(d, closed=False)[x]
        ball_inside[str(d)] = bool(not (ball & ~dyn).any())
    res["ball_inside_dynamical_ball"] = ball_inside
    rows = [["delta", "max_mass", "point", "ball_size"]]
    rows += [[str(d), str(m), x, len(b)] for d, (m, x, b) in rep.table.items()]
    sets = {}
    if rep.constant is not None:
        sets["witness_ball"] = PointSet.of(sc.space, rep.table[rep.constant][2])
    return CheckResult(rep.verdict, res, p.used, sets=sets, tables={"masses": rows})


def _check_generator(sc: Scenario, p: _Params) -> CheckResult:
    N = p.integer("N", sc.N, 1)
    tau = p.length("tau", sc.tau)
    e = p.length("e", sc.eps)
    mode = p.choice("mode", "exhaustive", {"exhaustive", "sampled"})
    budget = p.integer("budget", 2_000_000, 1)
    samples = p.integer("samples", 1000, 1)
    seed = p.integer("seed", sc.seed if sc.seed is not None else 0)
    cover = generator_from_constant(sc.space, e)
    rep = is_mu_generator(sc.system, cover, sc.measure, N, tau, mode, budget, samples, seed)
    res = rep.to_dict()
    leb = lebesgue_number(cover)
    res["cover_size"] = len(cover)
    res["lebesgue_number"] = None if leb is None else str(leb)
    return CheckResult(rep.is_generator, res, p.used)


def _window(sc: Scenario, p: _Params) -> TailWindow:
    default = TailWindow.for_system(sc.system)
    horizon = p.integer("window_horizon", default.horizon, 1)
    start = p.integer("tail_start", default.tail_start, 0)
    if start > horizon:
        p._fail("tail_start", "must not exceed window_horizon")
    return TailWindow(horizon, start)


def _check_limits(sc: Scenario, p: _Params) -> CheckResult:
    F = sc.system
    w = _window(sc, p)
    om = limit_set_matrix(F, "omega", w)
    al = limit_set_matrix(F, "alpha", w)
    later = w.shifted(w.horizon - w.tail_start + 1)
    stable = bool(
        np.array_equal(om, limit_set_matrix(F, "omega", later))
        and np.array_equal(al, limit_set_matrix(F, "alpha", later))
    )
    rows = [["point", "omega", "alpha"]]
    rows += [[x, " ".join(map(str, np.flatnonzero(om[x]))), " ".join(map(str, np.flatnonzero(al[x])))]
             for x in range(sc.space.size)]
    res = {
        "stabilized": stable,
        "omega_sizes": [int(v) for v in om.sum(axis=1)],
        "alpha_sizes": [int(v) for v in al.sum(axis=1)],
    }
    return CheckResult(stable, res, p.used, tables={"limit_sets": rows})


def _default_resolution_n(space: FiniteMetricSpace) -> int:
    r = space.resolution
    return 1 if r is None else -(-r.denominator // r.numerator)


def _check_converging(sc: Scenario, p: _Params) -> CheckResult:
    tau = p.length("tau", sc.tau)
    n = p.integer("resolution_n", _default_resolution_n(sc.space), 1)
    rep = converging_set(sc.system, n, _window(sc, p))
    m = sc.measure.mass(rep.points)
    res = rep.to_dict()
    res["mass"] = str(m)
    res["null"] = m <= tau
    return CheckResult(
        bool(m <= tau and rep.contained), res, p.used,
        sets={"converging": rep.points, "cell_union": rep.cell_union},
    )


def _check_aperiodicity(sc: Scenario, p: _Params) -> CheckResult:
    k_max = p.integer("k_max", 3, 1)
    horizon = p.integer("horizon", max(sc.N, k_max), k_max)
    tau = p.length("tau", sc.tau)
    rep = aperiodicity_verdict(sc.system, sc.measure, k_max, horizon, tau)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_nonwandering(sc: Scenario, p: _Params) -> CheckResult:
    horizon = p.integer("horizon", sc.N, 1)
    radii = p.grid("radii", [sc.space.resolution])
    rep = nonwandering_report(sc.system, radii, horizon)
    res = rep.to_dict()
    whole = len(rep.points) == sc.space.size
    res["whole_carrier"] = whole
    return CheckResult(whole, res, p.used, sets={"nonwandering": rep.points})


def _check_transitive(sc: Scenario, p: _Params) -> CheckResult:
    pts = transitive_points(sc.system, _window(sc, p))
    m = sc.measure.mass(pts)
    return CheckResult(m > 0, {"points": _ids(pts), "mass": str(m)}, p.used, sets={"transitive": pts})


def _check_shadowing(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps, delta = p.length("eps"), p.length("delta")
    rep = shadowing_verdict(sc.system, sc.measure, eps, delta, None, trials, seed, N, tau=tau, workers=p.workers)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_persistence(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps, delta = p.length("eps"), p.length("delta")
    rep = persistence_verdict(sc.system, sc.measure, eps, delta, trials, seed, N, tau, workers=p.workers)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_stability(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps, delta = p.length("eps"), p.length("delta")
    eps_prime = p.length("eps_prime", eps)
    reports = [
        (s, stability_check(sc.system, sc.measure, G, eps, eps_prime, N, tau))
        for s, G in perturbations(sc.system, delta, trials, seed)
    ]
    verdict = all(r.verdict for _, r in reports)
    rows = [["trial_seed"] + [str(x) for x in range(sc.space.size)]]
    rows += [[s] + [int(v) for v in r.H.sizes()] for s, r in reports]
    res = {
        "verdict": verdict,
        "trials": [{"trial_seed": s, "verdict": r.verdict, "conditions": r.conditions,
                    "witnesses": r.witnesses} for s, r in reports],
    }
    return CheckResult(verdict, res, p.used, tables={"H_sizes": rows})


def _check_walters(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps = p.length("eps")
    grid = p.grid("delta_grid", sc.space.distance_values)
    e_grid = p.grid("e_grid", sc.space.distance_values)
    rep = walters_pipeline(sc.system, sc.measure, eps, grid, trials, seed, N, tau, e_grid,
                           workers=p.workers)
    tables = {}
    if rep.stability:
        rows = [["trial_seed"] + [str(x) for x in range(sc.space.size)]]
        rows += [[s] + [int(v) for v in r.H.sizes()] for s, r in rep.stability]
        tables["H_sizes"] = rows
    return CheckResult(rep.verdict, rep.to_dict(), p.used, tables=tables)


def _isometry(sc: Scenario, p: _Params):
    coords = sc.space.coords
    if coords is None or sc.space.name.split("(")[0] not in {"torus2d", "circle"}:
        p._fail("shift", "conjugacy-invariance needs a grid carrier")
    dims = coords.shape[1]
    shift = p.raw.get("shift", [1] * dims)
    if not isinstance(shift, list) or len(shift) != dims or not all(isinstance(v, int) for v in shift):
        p._fail("shift", f"expected a list of {dims} integers")
    p.used["shift"] = shift
    q = int(coords.max()) + 1
    return translation(sc.space, q, shift)


def _check_conjugacy(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps, delta = p.length("eps"), p.length("delta")
    eps_prime = p.length("eps_prime", eps)
    h = _isometry(sc, p)
    grid = p.grid("delta_grid", sc.space.distance_values)
    rep = conjugacy_invariance(sc.system, sc.measure, h, eps, delta, trials, seed, N, tau, eps_prime, grid)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_inverse(sc: Scenario, p: _Params) -> CheckResult:
    N = p.integer("N", sc.N, 1)
    tau = p.length("tau", sc.tau)
    grid = p.grid("delta_grid", sc.space.distance_values)
    rep = inverse_invariance(sc.system, sc.measure, grid, N, tau)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_power(sc: Scenario, p: _Params) -> CheckResult:
    N = p.integer("N", sc.N, 1)
    tau = p.length("tau", sc.tau)
    k = p.integer("k", 2, 1)
    grid = p.grid("delta_grid", sc.space.distance_values)
    if "e" in p.raw:
        e = p.length("e")
    else:
        exp = expansive_verdict(sc.system, sc.measure, grid, N, tau)
        e = p.length("e", exp.constant if exp.constant is not None else sc.space.resolution)
    rep = power_invariance(sc.system, sc.measure, e, k, N, tau, grid)
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


def _check_thm510(sc: Scenario, p: _Params) -> CheckResult:
    N, trials, seed, tau = p.common()
    eps, delta = p.length("eps"), p.length("delta")
    radii = p.grid("radii", [sc.space.resolution])
    rep = thm510_check(sc.system, sc.measure, eps, delta, trials, seed, N, tau, radii, _window(sc, p))
    return CheckResult(rep.verdict, rep.to_dict(), p.used)


CHECKS: dict[str, Callable[[Scenario, _Params], CheckResult]] = {
    "expansive": _check_expansive,
    "generator": _check_generator,
    "limits": _check_limits,
    "converging": _check_converging,
    "aperiodicity": _check_aperiodicity,
    "nonwandering": _check_nonwandering,
    "transitive": _check_transitive,
    "shadowing": _check_shadowing,
    "persistence": _check_persistence,
    "stability": _check_stability,
    "walters": _check_walters,
    "conjugacy-invariance": _check_conjugacy,
    "inverse-invariance": _check_inverse,
    "power-invariance": _check_power,
    "thm510": _check_thm510,
}


# --- running and writing -----------------------------------------------------


@dataclass
class RunReport:
    report: dict
    timings: dict[str, float]
    files: dict[str, str]

    @property
    def failed_must(self) -> list[str]:
        return self.report["must_failures"]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed_must else 0

    def report_json(self) -> str:
        return json.dumps(self.report, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (set, frozenset, tuple)):
        return list(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _mask_csv(s: PointSet) -> str:
    lines = ["point,member"] + [f"{x},{int(m)}" for x, m in enumerate(s.mask)]
    return "\n".join(lines) + "\n"


def _table_csv(rows: list[list]) -> str:
    return "\n".join(",".join(str(v) for v in r) for r in rows) + "\n"


def _echo(sc: Scenario) -> dict:
    F = sc.system
    return {
        "config": sc.config,
        "resolved": {
            "space": sc.space.name,
            "size": sc.space.size,
            "system": F.name,
            "prefix_length": F.period_start,
            "period": F.period,
            "N": sc.N,
            "tau": str(sc.tau),
            "trials": sc.trials,
            "seed": sc.seed,
            "eps": None if sc.eps is None else str(sc.eps),
            "delta": None if sc.delta is None else str(sc.delta),
        },
    }


def run_scenario(config: dict, workers: int = 1) -> RunReport:
    """Validate and run every check in order; nothing is written to disk."""
    sc = parse_config(config)
    checks, timings, files = [], {}, {}
    must_failures = []
    for i, spec in enumerate(sc.checks):
        tag = f"{i:02d}_{spec.name}"
        params = _Params(sc, spec.params, str(i), workers)
        start = time.perf_counter()
        out = CHECKS[spec.name](sc, params)
        timings[tag] = time.perf_counter() - start
        passed = None
        if spec.expect == "must-pass":
            passed = out.verdict is True
        elif spec.expect == "must-fail":
            passed = out.verdict is False
        if passed is False:
            must_failures.append(tag)
        for name, s in out.sets.items():
            files[f"sets/{tag}_{name}.csv"] = _mask_csv(s)
        for name, rows in out.tables.items():
            files[f"tables/{tag}_{name}.csv"] = _table_csv(rows)
        checks.append({
            "id": tag,
            "name": spec.name,
            "expect": spec.expect,
            "expectation_met": passed,
            "verdict": out.verdict,
            "params": out.params,
            "result": out.result,
        })
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "echo": _echo(sc),
        "checks": checks,
        "must_failures": must_failures,
    }
    return RunReport(report, timings, files)


def write_report(run: RunReport, out: str | Path) -> Path:
    """Write report.json, timings.json and the CSV files under ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(run.report_json())
    (out / "timings.json").write_text(json.dumps(run.timings, sort_keys=True, indent=2) + "\n")
    for rel, text in run.files.items():
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return out / "report.json"
