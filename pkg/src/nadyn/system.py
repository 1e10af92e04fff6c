"""Time-varying bijective map schedules and their composition machinery.

A schedule is eventually periodic: ``f_1..f_P`` (the prefix) followed by
the cycle ``c_1..c_L`` repeated forever.  ``f_0`` is always the identity.

Negative times follow the two-sided convention

    F_n  = f_n o ... o f_1         (n >= 0)
    F_-n = f_n^-1 o ... o f_1^-1   (n >= 0)

so that ``(F^-1)_n == F_-n``.  For schedules whose maps commute (every
constant schedule) ``F_-n`` is also the inverse permutation of ``F_n``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .metric_space import FiniteMetricSpace, LengthLike, PointSet, as_length

__all__ = [
    "DEFAULT_MAX_HORIZON",
    "HorizonError",
    "InvarianceError",
    "MapTable",
    "NotBijectiveError",
    "SystemComparison",
    "TimeVaryingSystem",
    "conjugate",
    "equicontinuity_modulus",
    "evaluate",
    "invert",
    "load_permutation_csv",
    "make_system",
    "power",
    "restrict",
    "system_distance",
    "window",
]

DEFAULT_MAX_HORIZON = 4096


class NotBijectiveError(ValueError):
    pass


class HorizonError(ValueError):
    pass


class InvarianceError(ValueError):
    pass


def _as_permutation(forward, size: int) -> np.ndarray:
    fwd = np.asarray(forward, dtype=np.int64)
    if fwd.shape != (size,):
        raise NotBijectiveError(f"map table has {fwd.size} entries for a carrier of size {size}")
    if size and (fwd.min() < 0 or fwd.max() >= size):
        bad = int(np.flatnonzero((fwd < 0) | (fwd >= size))[0])
        raise NotBijectiveError(f"point {bad} is sent outside the carrier (to {int(fwd[bad])})")
    first_seen: dict[int, int] = {}
    counts = np.bincount(fwd, minlength=size)
    if (counts != 1).any():
        for x, y in enumerate(fwd.tolist()):
            if y in first_seen:
                raise NotBijectiveError(f"points {first_seen[y]} and {x} both map to {y}")
            first_seen[y] = x
    return fwd


class MapTable:
    """A bijection of a finite carrier, stored with its inverse."""

    __slots__ = ("space", "forward", "backward")

    def __init__(self, space: FiniteMetricSpace, forward, backward=None):
        fwd = _as_permutation(forward, space.size)
        if backward is None:
            bwd = np.empty_like(fwd)
            bwd[fwd] = np.arange(fwd.size)
        else:
            bwd = _as_permutation(backward, space.size)
            if not np.array_equal(bwd[fwd], np.arange(fwd.size)):
                raise NotBijectiveError("backward table is not the inverse of forward")
        fwd.setflags(write=False)
        bwd.setflags(write=False)
        self.space = space
        self.forward = fwd
        self.backward = bwd

    @classmethod
    def identity(cls, space: FiniteMetricSpace) -> "MapTable":
        return cls(space, np.arange(space.size))

    @classmethod
    def from_function(cls, space: FiniteMetricSpace, fn) -> "MapTable":
        return cls(space, [fn(x) for x in range(space.size)])

    def __call__(self, x):
        return self.forward[x]

    def inverse(self) -> "MapTable":
        return MapTable(self.space, self.backward, self.forward)

    def then(self, other: "MapTable") -> "MapTable":
        """``other o self``: apply ``self`` first."""
        return MapTable(self.space, other.forward[self.forward])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.forward, np.arange(self.forward.size)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapTable):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)

    def __hash__(self) -> int:
        return hash(self.forward.tobytes())

    def __repr__(self) -> str:
        return f"MapTable(size={self.forward.size})"


class TimeVaryingSystem:
    """Eventually periodic schedule of map tables on one carrier."""

    def __init__(
        self,
        space: FiniteMetricSpace,
        prefix: Sequence[MapTable],
        cycle: Sequence[MapTable],
        max_horizon: int = DEFAULT_MAX_HORIZON,
        name: str = "custom",
    ):
        self.space = space
        self.prefix = tuple(prefix)
        self.cycle = tuple(cycle)
        self.max_horizon = int(max_horizon)
        self.name = name
        self._orbits: dict[int, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"TimeVaryingSystem({self.name!r}, prefix={len(self.prefix)}, cycle={len(self.cycle)})"

    @property
    def period_start(self) -> int:
        """Number of prefix entries; the schedule is periodic for n > period_start."""
        return len(self.prefix)

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def tables(self) -> tuple[MapTable, ...]:
        return self.prefix + self.cycle

    def table(self, n: int) -> MapTable:
        """The schedule entry ``f_n`` for ``n >= 0``."""
        if n < 0:
            raise ValueError("schedule entries are indexed by n >= 0")
        if n == 0:
            return MapTable.identity(self.space)
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.cycle[(n - len(self.prefix) - 1) % len(self.cycle)]

    def forward_array(self, n: int) -> np.ndarray:
        if n == 0:
            return np.arange(self.space.size)
        return self.table(n).forward

    def backward_array(self, n: int) -> np.ndarray:
        if n == 0:
            return np.arange(self.space.size)
        return self.table(n).backward

    def check_horizon(self, n: int) -> None:
        if abs(n) > self.max_horizon:
            raise HorizonError(f"|n| = {abs(n)} exceeds the horizon bound {self.max_horizon}")

    def orbit_matrix(self, horizon: int) -> np.ndarray:
        """Array ``O`` of shape ``(2N+1, |X|)`` with ``O[n + N] = F_n``."""
        horizon = int(horizon)
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        self.check_horizon(horizon)
        cached = self._orbits.get(horizon)
        if cached is not None:
            return cached
        size = self.space.size
        out = np.empty((2 * horizon + 1, size), dtype=np.int64)
        out[horizon] = np.arange(size)
        for n in range(1, horizon + 1):
            out[horizon + n] = self.forward_array(n)[out[horizon + n - 1]]
            out[horizon - n] = self.backward_array(n)[out[horizon - n + 1]]
        out.setflags(write=False)
        self._orbits[horizon] = out
        return out

    def time_map(self, n: int) -> np.ndarray:
        """``F_n`` as a permutation array."""
        return self.orbit_matrix(abs(n))[abs(n) + n]

    def window_map(self, i: int, j: int, direction: str = "fwd") -> np.ndarray:
        """``F_[i,j]`` (or its inverse-window) as a permutation array."""
        if i < 0:
            raise ValueError("window start i must be >= 0")
        self.check_horizon(j)
        out = np.arange(self.space.size)
        if i > j:
            return out
        step = self.forward_array if direction == "fwd" else self.backward_array
        if direction not in ("fwd", "inv"):
            raise ValueError(f"unknown window direction {direction!r}")
        for m in range(i, j + 1):
            out = step(m)[out]
        return out

    def same_schedule(self, other: "TimeVaryingSystem") -> bool:
        """Table-wise equality of the two schedules over prefix + one full joint cycle."""
        if self.space.size != other.space.size:
            return False
        span = max(self.period_start, other.period_start) + math.lcm(self.period, other.period)
        return all(
            np.array_equal(self.forward_array(n), other.forward_array(n)) for n in range(1, span + 1)
        )


def make_system(
    space: FiniteMetricSpace,
    prefix: Sequence,
    cycle: Sequence,
    max_horizon: int = DEFAULT_MAX_HORIZON,
    name: str = "custom",
) -> TimeVaryingSystem:
    """Validate tables (MapTables or raw permutation arrays) and build a schedule."""
    if len(cycle) == 0:
        raise ValueError("the cycle of a schedule must be non-empty")

    def coerce(t) -> MapTable:
        if isinstance(t, MapTable):
            if t.space.size != space.size:
                raise NotBijectiveError("map table lives on a different carrier")
            return t if t.space is space else MapTable(space, t.forward, t.backward)
        return MapTable(space, t)

    return TimeVaryingSystem(
        space, [coerce(t) for t in prefix], [coerce(t) for t in cycle], max_horizon, name
    )


def evaluate(F: TimeVaryingSystem, n: int, x):
    """``F_n(x)``; ``x`` may be a point id or an array of ids."""
    F.check_horizon(n)
    if np.ndim(x) == 0:
        F.space.check_point(x)
        return int(F.time_map(n)[x])
    return F.time_map(n)[np.asarray(x)]


def window(F: TimeVaryingSystem, i: int, j: int, x, direction: str = "fwd"):
    """``F_[i,j](x)`` (``direction='fwd'``) or ``F^-1_[i,j](x)`` (``'inv'``)."""
    arr = F.window_map(i, j, direction)
    if np.ndim(x) == 0:
        F.space.check_point(x)
        return int(arr[x])
    return arr[np.asarray(x)]


def invert(F: TimeVaryingSystem) -> TimeVaryingSystem:
    return TimeVaryingSystem(
        F.space,
        [t.inverse() for t in F.prefix],
        [t.inverse() for t in F.cycle],
        F.max_horizon,
        name=f"inv({F.name})",
    )


def power(F: TimeVaryingSystem, k: int) -> TimeVaryingSystem:
    """``F^k`` with entries ``g_n = F_[(n-1)k+1, nk]``."""
    if k < 1:
        raise ValueError("power k must be >= 1")
    if k == 1:
        return TimeVaryingSystem(F.space, F.prefix, F.cycle, F.max_horizon, name=F.name)
    P, L = F.period_start, F.period
    # g_n only touches prefix entries while (n-1)k + 1 <= P
    new_prefix_len = -(-P // k)
    new_period = L // math.gcd(L, k)
    entries = []
    for n in range(1, new_prefix_len + new_period + 1):
        lo, hi = (n - 1) * k + 1, n * k
        perm = np.arange(F.space.size)
        for m in range(lo, hi + 1):
            perm = F.forward_array(m)[perm]
        entries.append(MapTable(F.space, perm))
    return TimeVaryingSystem(
        F.space,
        entries[:new_prefix_len],
        entries[new_prefix_len:],
        max(1, F.max_horizon // k),
        name=f"{F.name}^{k}",
    )


def restrict(F: TimeVaryingSystem, Y: PointSet) -> TimeVaryingSystem:
    """Restriction of ``F`` to an invariant set, on the induced subspace."""
    ids = np.asarray(Y.ids)
    if ids.size == 0:
        raise InvarianceError("cannot restrict to the empty set")
    for n, t in enumerate(F.tables, start=1):
        image = t.forward[ids]
        escaped = ~Y.mask[image]
        if escaped.any():
            x = int(ids[np.flatnonzero(escaped)[0]])
            raise InvarianceError(
                f"point {x} leaves the set under f_{n} (sent to {int(t.forward[x])})"
            )
    sub = F.space.induced(Y)
    relabel = np.full(F.space.size, -1, dtype=np.int64)
    relabel[ids] = np.arange(ids.size)

    def shrink(t: MapTable) -> MapTable:
        return MapTable(sub, relabel[t.forward[ids]])

    return TimeVaryingSystem(
        sub,
        [shrink(t) for t in F.prefix],
        [shrink(t) for t in F.cycle],
        F.max_horizon,
        name=f"{F.name}|Y",
    )


def conjugate(
    F: TimeVaryingSystem, h, domain: FiniteMetricSpace | None = None
) -> TimeVaryingSystem:
    """System with entries ``h^-1 o f_n o h``.

    ``h`` maps ``domain`` (default: F's carrier) bijectively onto F's carrier.
    """
    domain = F.space if domain is None else domain
    if domain.size != F.space.size:
        raise NotBijectiveError("conjugacy needs carriers of equal size")
    fwd = h.forward if isinstance(h, MapTable) else h
    hm = MapTable(domain, fwd)

    def conj(t: MapTable) -> MapTable:
        return MapTable(domain, hm.backward[t.forward[hm.forward]])

    return TimeVaryingSystem(
        domain,
        [conj(t) for t in F.prefix],
        [conj(t) for t in F.cycle],
        F.max_horizon,
        name=f"conj({F.name})",
    )


@dataclass(frozen=True)
class SystemComparison:
    eta_sup_forward: Fraction
    eta_sup_backward: Fraction
    p: Fraction
    horizon: int


def _eta(space: FiniteMetricSpace, a: np.ndarray, b: np.ndarray) -> Fraction:
    raw = space.length(space.num[a, b].max())
    return min(raw, Fraction(1))


def exact_span(F: TimeVaryingSystem, G: TimeVaryingSystem) -> int:
    """Index span after which both schedules have repeated jointly."""
    return max(F.period_start, G.period_start) + math.lcm(F.period, G.period)


def system_distance(
    F: TimeVaryingSystem, G: TimeVaryingSystem, horizon_n: int | None = None
) -> SystemComparison:
    """The bounded uniform distance between two schedules and their inverses."""
    if not F.space.same_carrier(G.space):
        raise ValueError("systems live on different carriers")
    need = exact_span(F, G)
    if horizon_n is None:
        horizon_n = need
    elif horizon_n < need:
        raise ValueError(f"horizon {horizon_n} does not cover prefix + joint cycle ({need})")
    fwd = bwd = Fraction(0)
    for n in range(1, horizon_n + 1):
        fwd = max(fwd, _eta(F.space, F.forward_array(n), G.forward_array(n)))
        bwd = max(bwd, _eta(F.space, F.backward_array(n), G.backward_array(n)))
    return SystemComparison(fwd, bwd, max(fwd, bwd), horizon_n)


def equicontinuity_modulus(
    F: TimeVaryingSystem, eps: LengthLike, horizon: int
) -> Fraction | None:
    """Largest ``delta <= eps`` with ``d(x,y) < delta => d(W x, W y) < eps``.

    ``W`` ranges over every window ``F_[m,n]`` and ``F^-1_[m,n]`` with
    ``0 <= m <= n <= horizon``.  The answer is the smallest distance of a
    pair that some window spreads to ``>= eps``, capped at ``eps``.  None
    would mean only ``delta = 0`` works, which a finite carrier never forces.
    """
    eps = as_length(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    space = F.space
    t = space.open_threshold(eps)
    bad = space.num > t
    size = space.size
    for m in range(horizon + 1):
        fw = np.arange(size)
        bw = np.arange(size)
        for n in range(m, horizon + 1):
            fw = F.forward_array(n)[fw]
            bw = F.backward_array(n)[bw]
            bad |= space.num[np.ix_(fw, fw)] > t
            bad |= space.num[np.ix_(bw, bw)] > t
    if not bad.any():
        return eps
    smallest = space.length(space.num[bad].min())
    if smallest <= 0:
        return None
    return min(eps, smallest)


def load_permutation_csv(path: str | Path, space: FiniteMetricSpace) -> MapTable:
    """Read ``point,image`` rows into a map table."""
    fwd = np.full(space.size, -1, dtype=np.int64)
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip() in ("point", "") or rec[0].startswith("#"):
                continue
            fwd[int(rec[0])] = int(rec[1])
    if (fwd < 0).any():
        raise NotBijectiveError(f"{path}: point {int(np.flatnonzero(fwd < 0)[0])} has no image")
    return MapTable(space, fwd)
