"""The set-valued tracking map and the expansive + persistent => stable pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expansive import ExpansivenessReport, expansive_verdict
from .measure import GridMeasure
from .metric_space import LengthLike, PointSet, as_length
from .shadowing import PersistenceReport, perturbations, persistence_verdict
from .system import TimeVaryingSystem

__all__ = [
    "PipelineReport",
    "SetValuedMap",
    "StabilityReport",
    "choose_eps_prime",
    "refinement_sequence",
    "stability_check",
    "stability_map",
    "walters_pipeline",
]


@dataclass
class SetValuedMap:
    """``H(x)`` for every carrier point, as rows of a boolean matrix."""

    matrix: np.ndarray
    eps_prime: Fraction
    horizon: int
    space: object = field(repr=False, default=None)

    def __call__(self, x: int) -> PointSet:
        return PointSet(self.space, self.matrix[x])

    def domain(self) -> PointSet:
        return PointSet(self.space, self.matrix.any(axis=1))

    def sizes(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def _tracking_sets(F: TimeVaryingSystem, G: TimeVaryingSystem, eps_prime: Fraction, lo: int, hi: int) -> np.ndarray:
    space = F.space
    t = space.closed_threshold(eps_prime)
    N = max(-lo, hi)
    OF = F.orbit_matrix(N)
    OG = G.orbit_matrix(N)
    out = np.ones((space.size, space.size), dtype=bool)
    for n in range(lo, hi + 1):
        # [x, y]: d(F_n(y), G_n(x)) <= eps'
        out &= space.num[np.ix_(OG[n + N], OF[n + N])] <= t
    return out


def stability_map(F: TimeVaryingSystem, G: TimeVaryingSystem, eps_prime: LengthLike, N: int) -> SetValuedMap:
    """``H(x) = {y : d(F_n(y), G_n(x)) <= eps' for all |n| <= N}``."""
    if not F.space.same_carrier(G.space):
        raise ValueError("systems live on different carriers")
    eps_prime = as_length(eps_prime)
    if eps_prime <= 0:
        raise ValueError("eps_prime must be positive")
    return SetValuedMap(_tracking_sets(F, G, eps_prime, -N, N), eps_prime, N, F.space)


def refinement_sequence(
    F: TimeVaryingSystem, G: TimeVaryingSystem, eps_prime: LengthLike, x: int, m_max: int
) -> list[PointSet]:
    """``[H_0(x), ..., H_{m_max}(x)]`` where ``H_m`` only constrains ``|n| <= m``."""
    eps_prime = as_length(eps_prime)
    x = F.space.check_point(x)
    space = F.space
    t = space.closed_threshold(eps_prime)
    OF = F.orbit_matrix(m_max)
    OG = G.orbit_matrix(m_max)
    mask = np.ones(space.size, dtype=bool)
    out = []
    for m in range(m_max + 1):
        for n in (m, -m):
            mask = mask & (space.num[OG[n + m_max, x], OF[n + m_max]] <= t)
        out.append(PointSet(space, mask))
    return out


@dataclass
class StabilityReport:
    verdict: bool
    eps: Fraction
    eps_prime: Fraction
    horizon: int
    tau: Fraction
    conditions: dict[str, bool]
    witnesses: dict[str, object]
    H: SetValuedMap

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "eps": str(self.eps),
            "eps_prime": str(self.eps_prime),
            "horizon": self.horizon,
            "tau": str(self.tau),
            "conditions": self.conditions,
            "witnesses": self.witnesses,
            "H_sizes": [int(v) for v in self.H.sizes()],
        }


def stability_check(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    G: TimeVaryingSystem,
    eps: LengthLike,
    eps_prime: LengthLike,
    N: int,
    tau: LengthLike | None = None,
) -> StabilityReport:
    """Build ``H`` for ``G`` and test the four stability conditions.

    (i)   the complement of Dom(H) is null
    (ii)  every H(x) is null
    (iii) H(x) lies in the open eps-ball around x
    (iv)  F_n(H(x)) lies in the closed eps-ball around G_n(x), |n| <= N
    """
    eps, eps_prime = as_length(eps), as_length(eps_prime)
    if eps_prime > eps:
        raise ValueError("need eps_prime <= eps")
    tau = mu.tau if tau is None else as_length(tau)
    space = F.space
    H = stability_map(F, G, eps_prime, N)
    M = H.matrix
    witnesses: dict[str, object] = {}

    dom = M.any(axis=1)
    outside = mu.mass_of_mask(~dom)
    cond_i = outside <= tau
    if not cond_i:
        witnesses["i"] = {"outside_domain": [int(v) for v in np.flatnonzero(~dom)], "mass": str(outside)}

    masses = mu.masses_of_rows(M)
    worst = int(np.argmax(masses))
    cond_ii = Fraction(int(masses[worst]), mu.den) <= tau
    if not cond_ii:
        witnesses["ii"] = {"x": worst, "H": [int(v) for v in np.flatnonzero(M[worst])],
                           "mass": str(Fraction(int(masses[worst]), mu.den))}

    far = M & ~space.ball_matrix(eps, closed=False)
    cond_iii = not far.any()
    if not cond_iii:
        x, y = np.argwhere(far)[0]
        witnesses["iii"] = {"x": int(x), "y": int(y)}

    t = space.closed_threshold(eps)
    OF, OG = F.orbit_matrix(N), G.orbit_matrix(N)
    cond_iv = True
    for n in range(-N, N + 1):
        bad = M & (space.num[np.ix_(OG[n + N], OF[n + N])] > t)
        if bad.any():
            x, y = np.argwhere(bad)[0]
            witnesses["iv"] = {"n": n, "x": int(x), "y": int(y)}
            cond_iv = False
            break

    conditions = {"i": bool(cond_i), "ii": bool(cond_ii), "iii": bool(cond_iii), "iv": bool(cond_iv)}
    return StabilityReport(all(conditions.values()), eps, eps_prime, N, tau, conditions, witnesses, H)


def choose_eps_prime(space, e: Fraction, eps: Fraction) -> tuple[Fraction, bool]:
    """Largest carrier distance strictly below ``min(e/2, eps)``.

    When no positive distance qualifies, half the bound is returned: every
    positive radius below the carrier resolution gives the same balls.
    The flag tells which case applied.
    """
    bound = min(e / 2, eps)
    below = [d for d in space.distance_values if d < bound]
    if below:
        return below[-1], False
    return bound / 2, True


@dataclass
class PipelineReport:
    verdict: bool | None
    reason: str
    expansive: ExpansivenessReport | None = None
    e: Fraction | None = None
    eps_prime: Fraction | None = None
    eps_prime_subresolution: bool = False
    delta: Fraction | None = None
    persistence: dict[Fraction, PersistenceReport] = field(default_factory=dict)
    stability: list[tuple[int, "StabilityReport"]] = field(default_factory=list)
    max_H_size: int | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "e": None if self.e is None else str(self.e),
            "eps_prime": None if self.eps_prime is None else str(self.eps_prime),
            "eps_prime_subresolution": self.eps_prime_subresolution,
            "delta": None if self.delta is None else str(self.delta),
            "max_H_size": self.max_H_size,
            "expansive": None if self.expansive is None else self.expansive.to_dict(),
            "persistence": [
                {"delta": str(d), "verdict": r.verdict, "failures": len(r.failures)}
                for d, r in self.persistence.items()
            ],
            "stability": [
                {"trial_seed": s, "verdict": r.verdict, "conditions": r.conditions,
                 "witnesses": r.witnesses, "H_sizes": [int(v) for v in r.H.sizes()]}
                for s, r in self.stability
            ],
        }


def walters_pipeline(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    eps: LengthLike,
    delta_grid=None,
    trials: int = 20,
    seed: int = 0,
    N: int = 4,
    tau: LengthLike | None = None,
    e_grid=None,
    nonatomic_bound: LengthLike | None = None,
    workers: int = 1,
) -> PipelineReport:
    """Expansive constant, then persistence, then stability on seeded perturbations.

    Aborts (``verdict=None``) when the measure has an atom above the bound
    or no expansive constant exists in ``e_grid``.
    """
    eps = as_length(eps)
    tau = mu.tau if tau is None else as_length(tau)
    bound = tau if nonatomic_bound is None else as_length(nonatomic_bound)
    if not mu.nonatomic(bound):
        return PipelineReport(None, f"measure has an atom of mass {mu.max_atom()} > {bound}")
    exp = expansive_verdict(F, mu, e_grid, N, tau)
    if not exp.verdict:
        return PipelineReport(None, "no expansive constant on the scanned grid", expansive=exp)
    e = exp.constant
    eps_prime, sub = choose_eps_prime(F.space, e, eps)
    grid = sorted(as_length(d) for d in (delta_grid if delta_grid is not None else F.space.distance_values))
    grid = [d for d in grid if 0 < d < 1]
    if not grid:
        raise ValueError("delta grid has no value in (0, 1)")
    persistence: dict[Fraction, PersistenceReport] = {}
    delta = None
    for d in reversed(grid):
        rep = persistence_verdict(F, mu, eps_prime, d, trials, seed, N, tau, workers=workers)
        persistence[d] = rep
        if rep.verdict:
            delta = d
            break
    report = PipelineReport(
        None, "", expansive=exp, e=e, eps_prime=eps_prime,
        eps_prime_subresolution=sub, persistence=persistence,
    )
    if delta is None:
        report.reason = "no delta on the grid passed persistence"
        return report
    report.delta = delta
    for s, G in perturbations(F, delta, trials, seed):
        report.stability.append((s, stability_check(F, mu, G, eps, eps_prime, N, tau)))
    report.max_H_size = max(int(r.H.sizes().max()) for _, r in report.stability)
    report.verdict = all(r.verdict for _, r in report.stability)
    report.reason = "all stability checks passed" if report.verdict else "a stability check failed"
    return report
