"""Limit sets, converging semiorbits, periodic points and recurrence.

Limits over ``n -> infinity`` are read off a finite tail window
``m0 <= |n| <= N``: on a finite carrier the accumulation points of an
orbit are the points it keeps visiting, and for eventually periodic
schedules the tail visit-set stops changing once the window is long enough.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measure import GridMeasure
from .metric_space import LengthLike, PointSet, as_length
from .system import TimeVaryingSystem, power

__all__ = [
    "AperiodicityReport",
    "ConvergingSetReport",
    "NonwanderingReport",
    "SubResolutionWarning",
    "TailWindow",
    "aperiodicity_verdict",
    "converging_set",
    "limit_set",
    "limit_set_matrix",
    "nonwandering_report",
    "nonwandering_set",
    "periodic_points",
    "periodic_within_power",
    "semiorbit_cell",
    "tail_stabilized",
    "transitive_points",
]


class SubResolutionWarning(UserWarning):
    """A radius is below the smallest positive distance of the carrier."""


@dataclass(frozen=True)
class TailWindow:
    horizon: int
    tail_start: int = 0

    def __post_init__(self):
        if not 0 <= self.tail_start <= self.horizon:
            raise ValueError("need 0 <= tail_start <= horizon")

    def shifted(self, by: int) -> "TailWindow":
        return TailWindow(self.horizon + by, self.tail_start + by)

    @classmethod
    def for_system(cls, F: TimeVaryingSystem, length: int | None = None) -> "TailWindow":
        """A window starting after the prefix and spanning ``length`` steps.

        The default length is ``period * |X|``, enough for every cycle of
        the cycle-composite permutation to close up.
        """
        start = F.period_start + 1
        if length is None:
            length = F.period * F.space.size
        return cls(start + length - 1, start)


def _tail_rows(F: TimeVaryingSystem, direction: str, window: TailWindow) -> np.ndarray:
    N, m0 = window.horizon, window.tail_start
    O = F.orbit_matrix(N)
    if direction == "omega":
        return O[N + m0 : 2 * N + 1]
    if direction == "alpha":
        return O[0 : N - m0 + 1]
    raise ValueError(f"unknown direction {direction!r}")


def limit_set_matrix(F: TimeVaryingSystem, direction: str, window: TailWindow) -> np.ndarray:
    """Row ``x`` is the tail visit-set of x in the given direction."""
    rows = _tail_rows(F, direction, window)
    size = F.space.size
    out = np.zeros((size, size), dtype=bool)
    cols = np.arange(size)
    for row in rows:
        out[cols, row] = True
    return out


def limit_set(F: TimeVaryingSystem, x: int, direction: str, window: TailWindow) -> PointSet:
    """omega (forward) or alpha (backward) limit set of ``x`` read off the tail."""
    x = F.space.check_point(x)
    rows = _tail_rows(F, direction, window)
    mask = np.zeros(F.space.size, dtype=bool)
    mask[rows[:, x]] = True
    return PointSet(F.space, mask)


def tail_stabilized(F: TimeVaryingSystem, x: int, direction: str, window: TailWindow) -> bool:
    """True when shifting the window forward twice by its length leaves the set unchanged."""
    span = window.horizon - window.tail_start + 1
    base = limit_set(F, x, direction, window)
    return all(
        limit_set(F, x, direction, window.shifted(k * span)) == base for k in (1, 2)
    )


def semiorbit_cell(
    F: TimeVaryingSystem, x: int, y: int, n: int, m: int, N: int
) -> PointSet:
    """Points whose backward tail stays near ``x`` and forward tail near ``y``.

    The closeness is ``1/n`` over ``m <= i <= N``.
    """
    if not 1 <= m <= N or n < 1:
        raise ValueError("need n >= 1 and 1 <= m <= N")
    space = F.space
    x, y = space.check_point(x), space.check_point(y)
    r = Fraction(1, n)
    _warn_subresolution(space, r)
    t = space.closed_threshold(r)
    O = F.orbit_matrix(N)
    ok = np.ones(space.size, dtype=bool)
    for i in range(m, N + 1):
        ok &= space.num[O[N - i], x] <= t
        ok &= space.num[O[N + i], y] <= t
    return PointSet(space, ok)


def _warn_subresolution(space, r: Fraction) -> bool:
    res = space.resolution
    if res is not None and r < res:
        warnings.warn(
            f"radius {r} is below the carrier resolution {res}; balls are singletons",
            SubResolutionWarning,
            stacklevel=3,
        )
        return True
    return False


@dataclass
class ConvergingSetReport:
    points: PointSet
    cell_union: PointSet
    contained: bool
    resolution_n: int
    window: TailWindow
    stabilized: bool

    def to_dict(self) -> dict:
        return {
            "points": list(self.points.ids),
            "cell_union_size": len(self.cell_union),
            "contained": self.contained,
            "resolution_n": self.resolution_n,
            "horizon": self.window.horizon,
            "tail_start": self.window.tail_start,
            "stabilized": self.stabilized,
        }


def converging_set(
    F: TimeVaryingSystem, resolution_n: int, window: TailWindow
) -> ConvergingSetReport:
    """Points whose alpha and omega limit sets are both single points.

    Also returns the union of all semiorbit cells ``A(x, y, n, m0)`` over
    the whole carrier (the carrier is its own dense sequence) and whether
    the converging set lies inside it.
    """
    space = F.space
    if window.tail_start < 1:
        window = TailWindow(max(window.horizon, 1), 1)
    om = limit_set_matrix(F, "omega", window)
    al = limit_set_matrix(F, "alpha", window)
    points = (om.sum(axis=1) == 1) & (al.sum(axis=1) == 1)

    # x and y enter the cell condition independently, so the union factorizes
    r = Fraction(1, resolution_n)
    _warn_subresolution(space, r)
    t = space.closed_threshold(r)
    N, m0 = window.horizon, window.tail_start
    O = F.orbit_matrix(N)
    back_ok = np.ones((space.size, space.size), dtype=bool)  # [z, x]
    fwd_ok = np.ones((space.size, space.size), dtype=bool)  # [z, y]
    for i in range(m0, N + 1):
        back_ok &= space.num[O[N - i]] <= t
        fwd_ok &= space.num[O[N + i]] <= t
    union = back_ok.any(axis=1) & fwd_ok.any(axis=1)

    stabilized = bool(
        np.array_equal(om, limit_set_matrix(F, "omega", window.shifted(N - m0 + 1)))
        and np.array_equal(al, limit_set_matrix(F, "alpha", window.shifted(N - m0 + 1)))
    )
    return ConvergingSetReport(
        points=PointSet(space, points),
        cell_union=PointSet(space, union),
        contained=bool(not (points & ~union).any()),
        resolution_n=resolution_n,
        window=window,
        stabilized=stabilized,
    )


def periodic_points(F: TimeVaryingSystem, k: int, horizon: int) -> PointSet:
    """Points with ``F_{ik+j}(p) = F_j(p)`` for ``|i| <= horizon // k``, ``0 <= j < k``."""
    if not 1 <= k <= horizon:
        raise ValueError("need 1 <= k <= horizon")
    reach = (horizon // k) * k + k - 1
    O = F.orbit_matrix(reach)
    ok = np.ones(F.space.size, dtype=bool)
    imax = horizon // k
    for j in range(k):
        base = O[reach + j]
        for i in range(-imax, imax + 1):
            ok &= O[reach + i * k + j] == base
    return PointSet(F.space, ok)


@dataclass
class AperiodicityReport:
    verdict: bool
    masses: dict[int, Fraction]
    sizes: dict[int, int]
    horizon: int
    tau: Fraction

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "horizon": self.horizon,
            "tau": str(self.tau),
            "per_k": [
                {"k": k, "size": self.sizes[k], "mass": str(m)} for k, m in self.masses.items()
            ],
        }


def aperiodicity_verdict(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    k_max: int,
    horizon: int,
    tau: LengthLike | None = None,
) -> AperiodicityReport:
    """Yes iff every set of k-periodic points, ``k <= k_max``, is null."""
    if k_max > horizon:
        raise ValueError("k_max must not exceed the horizon")
    tau = mu.tau if tau is None else as_length(tau)
    masses, sizes = {}, {}
    for k in range(1, k_max + 1):
        per = periodic_points(F, k, horizon)
        masses[k] = mu.mass(per)
        sizes[k] = len(per)
    return AperiodicityReport(
        verdict=all(m <= tau for m in masses.values()),
        masses=masses,
        sizes=sizes,
        horizon=horizon,
        tau=tau,
    )


@dataclass
class NonwanderingReport:
    points: PointSet
    # wandering point -> (radius, start index n) with no return found
    certificates: dict[int, tuple[Fraction, int]] = field(default_factory=dict)
    horizon: int = 0
    horizon_sensitive: bool = False

    def to_dict(self) -> dict:
        return {
            "points": list(self.points.ids),
            "horizon": self.horizon,
            "horizon_sensitive": self.horizon_sensitive,
            "certificates": {
                str(x): {"radius": str(r), "n": n} for x, (r, n) in sorted(self.certificates.items())
            },
        }


def _returns(F: TimeVaryingSystem, U: np.ndarray, horizon: int) -> np.ndarray:
    """``ret[m, x]``: some window starting at m (length <= horizon+1) brings U_x back to U_x."""
    size = F.space.size
    ms = 2 * horizon + 1
    ret = np.zeros((ms, size), dtype=bool)
    for m in range(ms):
        fw = np.arange(size)
        bw = np.arange(size)
        for r in range(horizon + 1):
            fw = F.forward_array(m + r)[fw]
            bw = F.backward_array(m + r)[bw]
            # W(U) meets U  <=>  some y in U with W(y) in U
            ret[m] |= (U & U[:, fw]).any(axis=1)
            ret[m] |= (U & U[:, bw]).any(axis=1)
    return ret


def _nonwandering(F: TimeVaryingSystem, radii, horizon: int):
    space = F.space
    radii = [as_length(r) for r in radii]
    if not radii:
        raise ValueError("radii must be non-empty")
    F.check_horizon(3 * horizon)
    good = np.ones(space.size, dtype=bool)
    certs: dict[int, tuple[Fraction, int]] = {}
    for rho in sorted(radii, reverse=True):
        U = space.ball_matrix(rho, closed=False)
        ret = _returns(F, U, horizon)
        for n in range(horizon + 1):
            ok_n = ret[n : n + horizon + 1].any(axis=0)
            for x in np.flatnonzero(good & ~ok_n):
                certs.setdefault(int(x), (rho, n))
            good &= ok_n
    return good, certs


def nonwandering_report(F: TimeVaryingSystem, radii, horizon: int) -> NonwanderingReport:
    """Non-wandering points with certificates for the wandering ones.

    For every radius and every start ``n <= horizon`` a point needs some
    window ``F_[m, m+r]`` or ``F^-1_[m, m+r]`` with ``n <= m <= n + horizon``
    and ``0 <= r <= horizon`` that brings the open ball back to itself.
    The report is flagged horizon-sensitive when doubling the horizon
    changes the set.
    """
    good, certs = _nonwandering(F, radii, horizon)
    again, _ = _nonwandering(F, radii, 2 * horizon)
    return NonwanderingReport(
        points=PointSet(F.space, good),
        certificates=certs,
        horizon=horizon,
        horizon_sensitive=not np.array_equal(good, again),
    )


def nonwandering_set(F: TimeVaryingSystem, radii, horizon: int) -> PointSet:
    good, _ = _nonwandering(F, radii, horizon)
    return PointSet(F.space, good)


def transitive_points(F: TimeVaryingSystem, window: TailWindow) -> PointSet:
    """Points whose omega-limit set is the whole carrier."""
    om = limit_set_matrix(F, "omega", window)
    return PointSet(F.space, om.all(axis=1))


def periodic_within_power(F: TimeVaryingSystem, k: int, horizon: int, resolution_n: int) -> bool:
    """Check that k-periodic points of F converge under ``F^k``."""
    per = periodic_points(F, k, horizon)
    G = power(F, k)
    rep = converging_set(G, resolution_n, TailWindow(max(1, horizon // k), 1))
    return per <= rep.points
