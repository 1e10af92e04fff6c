"""Pseudo-orbits, shadowing search, perturbations, shadowing and persistence.

Verdicts over "every pseudo-orbit" or "every nearby system" are
falsification runs: they test seeded samples and report
``verdict=True`` only when no counterexample turned up.  Every sample
seed is derived from the master seed and the trial counter, so results do
not depend on evaluation order or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .measure import GridMeasure
from .metric_space import LengthLike, PointSet, as_length
from .system import MapTable, TimeVaryingSystem, system_distance

__all__ = [
    "PersistenceReport",
    "PseudoOrbit",
    "PseudoOrbitCheck",
    "ShadowResult",
    "ShadowingReport",
    "full_mass_set",
    "is_pseudo_orbit",
    "orbit_as_pseudo",
    "perturb_system",
    "perturbations",
    "persistence_verdict",
    "random_pseudo_orbit",
    "shadowing_point",
    "shadowing_verdict",
    "trial_seed",
    "tracking_distances",
]


def trial_seed(master: int, counter: int) -> int:
    """Deterministic per-trial seed."""
    return int(np.random.SeedSequence([int(master), int(counter)]).generate_state(1)[0])


@dataclass(frozen=True)
class PseudoOrbit:
    """Points ``x_n`` for ``lo <= n <= hi`` (with ``lo <= 0 <= hi``)."""

    entries: tuple[int, ...]
    lo: int
    delta: Fraction | None = None

    @classmethod
    def from_mapping(cls, seq: Mapping[int, int], delta: LengthLike | None = None) -> "PseudoOrbit":
        if not seq:
            raise ValueError("empty sequence")
        keys = sorted(seq)
        lo, hi = keys[0], keys[-1]
        if keys != list(range(lo, hi + 1)):
            missing = sorted(set(range(lo, hi + 1)) - set(keys))[0]
            raise ValueError(f"index {missing} is missing from the sequence")
        if not lo <= 0 <= hi:
            raise ValueError("the index range must contain 0")
        return cls(tuple(int(seq[k]) for k in keys), lo, None if delta is None else as_length(delta))

    @property
    def hi(self) -> int:
        return self.lo + len(self.entries) - 1

    def __getitem__(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(n)
        return self.entries[n - self.lo]

    def as_dict(self) -> dict[int, int]:
        return {self.lo + i: x for i, x in enumerate(self.entries)}

    @property
    def x0(self) -> int:
        return self[0]


def _as_pseudo(seq) -> PseudoOrbit:
    return seq if isinstance(seq, PseudoOrbit) else PseudoOrbit.from_mapping(seq)


def orbit_as_pseudo(F: TimeVaryingSystem, x: int, N: int, delta=None) -> PseudoOrbit:
    """The true orbit ``F_n(x)``, ``|n| <= N``."""
    O = F.orbit_matrix(N)
    return PseudoOrbit(tuple(int(v) for v in O[:, x]), -N, None if delta is None else as_length(delta))


@dataclass(frozen=True)
class PseudoOrbitCheck:
    ok: bool
    index: int | None = None
    clause: str | None = None
    distance: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_pseudo_orbit(F: TimeVaryingSystem, seq, delta: LengthLike) -> PseudoOrbitCheck:
    """Check both step clauses; report the first violation.

    forward:  d(f_{n+1}(x_n), x_{n+1}) < delta   for 0 <= n < hi
    backward: d(f_{-n}^-1(x_{n+1}), x_n) < delta for lo <= n <= -1
    """
    p = _as_pseudo(seq)
    space = F.space
    t = space.open_threshold(as_length(delta))
    for n in range(0, p.hi):
        d = space.num[F.forward_array(n + 1)[p[n]], p[n + 1]]
        if d > t:
            return PseudoOrbitCheck(False, n, "forward", space.length(d))
    for n in range(-1, p.lo - 1, -1):
        d = space.num[F.backward_array(-n)[p[n + 1]], p[n]]
        if d > t:
            return PseudoOrbitCheck(False, n, "backward", space.length(d))
    return PseudoOrbitCheck(True)


@dataclass(frozen=True)
class ShadowResult:
    point: int | None
    sup: Fraction
    best_point: int

    @property
    def found(self) -> bool:
        return self.point is not None


def tracking_distances(F: TimeVaryingSystem, p: PseudoOrbit) -> np.ndarray:
    """Numerators of ``sup_n d(F_n(y), x_n)`` for every candidate ``y``."""
    N = max(-p.lo, p.hi)
    O = F.orbit_matrix(N)
    num = F.space.num
    out = np.zeros(F.space.size, dtype=np.int64)
    for n in range(p.lo, p.hi + 1):
        np.maximum(out, num[O[n + N], p[n]], out=out)
    return out


def shadowing_point(F: TimeVaryingSystem, seq, eps: LengthLike) -> ShadowResult:
    """Smallest-id ``y`` with ``d(F_n(y), x_n) < eps`` on the whole index range.

    Candidates are filtered index by index (0, 1, -1, 2, ...) and the scan
    stops as soon as none is left; the best achievable sup is then
    computed over the full carrier.
    """
    p = _as_pseudo(seq)
    space = F.space
    t = space.open_threshold(as_length(eps))
    N = max(-p.lo, p.hi)
    O = F.orbit_matrix(N)
    order = [0]
    for n in range(1, N + 1):
        if n <= p.hi:
            order.append(n)
        if -n >= p.lo:
            order.append(-n)
    cand = np.arange(space.size)
    for n in order:
        cand = cand[space.num[O[n + N, cand], p[n]] <= t]
        if cand.size == 0:
            break
    if cand.size:
        y = int(cand[0])
        return ShadowResult(y, space.length(tracking_distances(F, p)[y]), y)
    sups = tracking_distances(F, p)
    best = int(np.argmin(sups))
    return ShadowResult(None, space.length(sups[best]), best)


def _swap_permutation(
    space, table: MapTable, delta: Fraction, rng: np.random.Generator
) -> np.ndarray:
    """Random disjoint transpositions ``(a b)`` moving both ``table`` and its inverse by < delta.

    Composing ``sigma o f``: forward displacement is ``d(a, b)`` and the
    inverse displacement is ``d(f^-1 a, f^-1 b)``; both are kept below delta
    in the bounded metric.
    """
    size = space.size
    t = space.open_threshold(min(delta, Fraction(1)))
    num = np.minimum(space.num, space.den)
    close = num <= t
    inv = table.backward
    close &= num[np.ix_(inv, inv)] <= t
    a, b = np.nonzero(np.triu(close, k=1))
    sigma = np.arange(size)
    if a.size == 0:
        return sigma
    used = np.zeros(size, dtype=bool)
    for i in rng.permutation(a.size):
        u, v = a[i], b[i]
        if used[u] or used[v] or rng.random() < 0.5:
            continue
        used[u] = used[v] = True
        sigma[u], sigma[v] = v, u
    return sigma


def perturb_system(F: TimeVaryingSystem, delta: LengthLike, seed: int) -> TimeVaryingSystem:
    """A seeded system ``G`` with ``p(F, G) < delta``.

    Each schedule entry ``f`` becomes ``sigma o f`` with ``sigma`` a random
    product of admissible swaps; the bound is re-checked exactly.
    """
    delta = as_length(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    space = F.space
    out = []
    for t in F.tables:
        sigma = _swap_permutation(space, t, delta, rng)
        out.append(MapTable(space, sigma[t.forward]))
    P = F.period_start
    G = TimeVaryingSystem(space, out[:P], out[P:], F.max_horizon, name=f"perturb({F.name},{seed})")
    cmp = system_distance(F, G)
    if cmp.p >= delta:
        raise AssertionError(f"perturbation broke the bound: p = {cmp.p} >= {delta}")
    return G


def full_mass_set(mu: GridMeasure, B: PointSet | None = None, tau: LengthLike | None = None) -> PointSet:
    """``B`` (default: the whole carrier), checked to have a null complement."""
    tau = mu.tau if tau is None else as_length(tau)
    if B is None:
        return mu.space.full()
    excluded = mu.mass(B.complement())
    if excluded > tau:
        raise ValueError(f"the excluded set has mass {excluded} > tau = {tau}")
    return B


def random_pseudo_orbit(
    F: TimeVaryingSystem, x0: int, delta: LengthLike, N: int, rng: np.random.Generator
) -> PseudoOrbit:
    """Random delta-pseudo-orbit: each step lands anywhere in the open delta-ball of the true step."""
    space = F.space
    U = space.ball_matrix(as_length(delta), closed=False)
    xs = {0: int(x0)}
    for n in range(0, N):
        choices = np.flatnonzero(U[F.forward_array(n + 1)[xs[n]]])
        xs[n + 1] = int(rng.choice(choices))
    for n in range(-1, -N - 1, -1):
        choices = np.flatnonzero(U[F.backward_array(-n)[xs[n + 1]]])
        xs[n] = int(rng.choice(choices))
    return PseudoOrbit.from_mapping(xs, delta)


def _orbit_tracking(F: TimeVaryingSystem, G: TimeVaryingSystem, xs: np.ndarray, N: int) -> np.ndarray:
    """``D[i, y] = max_{|n|<=N} d(F_n(y), G_n(xs[i]))`` as numerators."""
    OF = F.orbit_matrix(N)
    OG = G.orbit_matrix(N)
    num = F.space.num
    D = np.zeros((xs.size, F.space.size), dtype=np.int64)
    for n in range(2 * N + 1):
        np.maximum(D, num[np.ix_(OG[n, xs], OF[n])], out=D)
    return D


@dataclass
class PersistenceReport:
    verdict: bool
    eps: Fraction
    delta: Fraction
    trials: int
    seed: int
    horizon: int
    B: PointSet
    # (trial seed, x, best achievable sup)
    failures: list[tuple[int, int, Fraction]] = field(default_factory=list)
    trial_seeds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "eps": str(self.eps),
            "delta": str(self.delta),
            "trials": self.trials,
            "seed": self.seed,
            "trial_seeds": self.trial_seeds,
            "horizon": self.horizon,
            "B_size": len(self.B),
            "failures": [
                {"trial_seed": s, "x": x, "best_sup": str(d)} for s, x, d in self.failures
            ],
        }


def _map(fn, items, workers: int):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _orbit_failures(F, G, xs, N, t) -> list[tuple[int, Fraction]]:
    D = _orbit_tracking(F, G, xs, N)
    best = D.min(axis=1)
    return [(int(xs[i]), F.space.length(best[i])) for i in np.flatnonzero(best > t)]


def perturbations(F: TimeVaryingSystem, delta, trials: int, seed: int) -> list[tuple[int, TimeVaryingSystem]]:
    """The seeded systems shared by every sampled verdict."""
    seeds = [trial_seed(seed, k) for k in range(trials)]
    return [(s, perturb_system(F, delta, s)) for s in seeds]


def persistence_verdict(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    eps: LengthLike,
    delta: LengthLike,
    trials: int = 20,
    seed: int = 0,
    N: int = 4,
    tau: LengthLike | None = None,
    B: PointSet | None = None,
    workers: int = 1,
    systems: list[tuple[int, TimeVaryingSystem]] | None = None,
) -> PersistenceReport:
    """For each seeded ``G`` near ``F`` and ``x`` in ``B``, search an ``F``-orbit eps-tracking ``G_n(x)``.

    ``systems`` replaces the seeded perturbations with explicit
    ``(seed, G)`` pairs, e.g. perturbations of a conjugate mapped back.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps, delta = as_length(eps), as_length(delta)
    B = full_mass_set(mu, B, tau)
    xs = np.asarray(B.ids)
    t = F.space.open_threshold(eps)
    if systems is None:
        systems = perturbations(F, delta, trials, seed)
    else:
        for s, G in systems:
            if system_distance(F, G).p >= delta:
                raise ValueError(f"system with seed {s} is not delta-close to F")

    def run(item):
        s, G = item
        return [(s, x, d) for x, d in _orbit_failures(F, G, xs, N, t)]

    failures = [f for chunk in _map(run, systems, workers) for f in chunk]
    return PersistenceReport(
        verdict=not failures,
        eps=eps,
        delta=delta,
        trials=len(systems),
        seed=seed,
        horizon=N,
        B=B,
        failures=failures,
        trial_seeds=[s for s, _ in systems],
    )


@dataclass
class ShadowingReport:
    verdict: bool
    eps: Fraction
    delta: Fraction
    trials: int
    seed: int
    horizon: int
    B: PointSet
    pseudo_orbits_tested: int
    # ("random", index, entries, best sup) or ("system", trial seed, x, best sup)
    failures: list[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = []
        for f in self.failures:
            if f[0] == "random":
                out.append({"kind": "random", "index": f[1], "entries": f[2], "best_sup": str(f[3])})
            else:
                out.append({"kind": "system", "trial_seed": f[1], "x": f[2], "best_sup": str(f[3])})
        return {
            "verdict": self.verdict,
            "eps": str(self.eps),
            "delta": str(self.delta),
            "trials": self.trials,
            "seed": self.seed,
            "horizon": self.horizon,
            "B_size": len(self.B),
            "pseudo_orbits_tested": self.pseudo_orbits_tested,
            "failures": out,
        }


def shadowing_verdict(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    eps: LengthLike,
    delta: LengthLike,
    B: PointSet | None = None,
    trials: int = 20,
    seed: int = 0,
    N: int = 4,
    pseudo_orbits: int | None = None,
    tau: LengthLike | None = None,
    workers: int = 1,
) -> ShadowingReport:
    """Search eps-shadowers for sampled delta-pseudo-orbits through ``B``.

    Two families are tested: ``pseudo_orbits`` random pseudo-orbits
    (default ``trials * |B|``) and the orbits ``G_n(x)``, ``x`` in ``B``, of
    the same seeded perturbations ``persistence_verdict`` uses.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps, delta = as_length(eps), as_length(delta)
    B = full_mass_set(mu, B, tau)
    xs = np.asarray(B.ids)
    count = trials * xs.size if pseudo_orbits is None else pseudo_orbits
    t = F.space.open_threshold(eps)

    def run_random(k: int):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1 << 20, k]))
        x0 = int(xs[k % xs.size])
        p = random_pseudo_orbit(F, x0, delta, N, rng)
        sups = tracking_distances(F, p)
        best = int(sups.min())
        if best > t:
            return [("random", k, list(p.entries), F.space.length(best))]
        return []

    systems = perturbations(F, delta, trials, seed)

    def run_system(item):
        s, G = item
        return [("system", s, x, d) for x, d in _orbit_failures(F, G, xs, N, t)]

    failures = [f for chunk in _map(run_random, range(count), workers) for f in chunk]
    failures += [f for chunk in _map(run_system, systems, workers) for f in chunk]
    return ShadowingReport(
        verdict=not failures,
        eps=eps,
        delta=delta,
        trials=trials,
        seed=seed,
        horizon=N,
        B=B,
        pseudo_orbits_tested=count + trials * xs.size,
        failures=failures,
    )
