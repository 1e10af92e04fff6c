"""Finite metric spaces with exact rational distances.

Every distance is stored as an integer numerator over one shared
denominator, so all radius comparisons reduce to integer comparisons
against a threshold (see :meth:`FiniteMetricSpace.closed_threshold`).
Sets of points are boolean masks over dense integer ids.
"""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

Length = Fraction
LengthLike = Union[Fraction, int, str, float]

__all__ = [
    "FiniteMetricSpace",
    "Length",
    "MetricAxiomError",
    "PointSet",
    "as_length",
    "ball",
    "build_space",
    "circle",
    "custom_space",
    "distance",
    "load_distance_csv",
    "torus2d",
]


class MetricAxiomError(ValueError):
    """A distance table is not a metric."""


def as_length(value: LengthLike) -> Fraction:
    """Coerce ``value`` to an exact rational length.

    Floats go through their shortest repr, so ``0.2`` becomes ``1/5``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"length must be finite, got {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


def _circ(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    gap = np.abs(a - b) % q
    return np.minimum(gap, q - gap)


class FiniteMetricSpace:
    """A finite point set ``0..size-1`` with an exact metric.

    Parameters
    ----------
    numerators : (n, n) integer array
        Distances scaled by ``denominator``.
    denominator : int
        Common denominator of all distances.
    name : str
        Label echoed in reports.
    coords : optional (n, k) integer array
        Grid coordinates for display; ids remain the canonical handle.
    parent_ids : optional sequence of ids
        For subspaces, the id of each point in the parent carrier.
    """

    def __init__(
        self,
        numerators: np.ndarray,
        denominator: int,
        name: str = "custom",
        coords: np.ndarray | None = None,
        parent_ids: Sequence[int] | None = None,
        check: bool = True,
    ):
        num = np.array(numerators, dtype=np.int64)
        if num.ndim != 2 or num.shape[0] != num.shape[1] or num.shape[0] == 0:
            raise MetricAxiomError("distance table must be a non-empty square matrix")
        if denominator <= 0:
            raise MetricAxiomError("denominator must be positive")
        if check:
            _check_metric(num)
        num.setflags(write=False)
        self.num = num
        self.den = int(denominator)
        self.name = name
        self.coords = None if coords is None else np.asarray(coords)
        self.parent_ids = None if parent_ids is None else tuple(int(i) for i in parent_ids)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({self.name!r}, size={self.size})"

    def __len__(self) -> int:
        return self.size

    @property
    def size(self) -> int:
        return self.num.shape[0]

    @property
    def points(self) -> range:
        return range(self.size)

    def check_point(self, x: int) -> int:
        if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)):
            raise TypeError(f"point ids are integers, got {x!r}")
        if not 0 <= x < self.size:
            raise KeyError(f"unknown point id {x} in {self.name} (size {self.size})")
        return int(x)

    # Thresholds: d <= r  <=>  num <= closed_threshold(r); d < r  <=>  num <= open_threshold(r)
    def closed_threshold(self, radius: LengthLike) -> int:
        r = as_length(radius)
        return math.floor(r * self.den)

    def open_threshold(self, radius: LengthLike) -> int:
        r = as_length(radius)
        return math.ceil(r * self.den) - 1

    def length(self, numerator: int) -> Fraction:
        return Fraction(int(numerator), self.den)

    @cached_property
    def diameter(self) -> Fraction:
        return self.length(self.num.max())

    @cached_property
    def distance_values(self) -> tuple[Fraction, ...]:
        """Sorted distinct positive distances occurring in the space."""
        vals = np.unique(self.num)
        return tuple(self.length(v) for v in vals if v > 0)

    @cached_property
    def resolution(self) -> Fraction | None:
        """Smallest positive distance, or None for a one-point space."""
        vals = self.distance_values
        return vals[0] if vals else None

    def ball_matrix(self, radius: LengthLike, closed: bool = True) -> np.ndarray:
        """Row ``x`` is the mask of the ball around ``x``."""
        t = self.closed_threshold(radius) if closed else self.open_threshold(radius)
        return self.num <= t

    def empty(self) -> "PointSet":
        return PointSet(self, np.zeros(self.size, dtype=bool))

    def full(self) -> "PointSet":
        return PointSet(self, np.ones(self.size, dtype=bool))

    def subset(self, ids: Iterable[int]) -> "PointSet":
        mask = np.zeros(self.size, dtype=bool)
        for i in ids:
            mask[self.check_point(i)] = True
        return PointSet(self, mask)

    def point_label(self, x: int):
        """Grid coordinates of ``x`` when available, otherwise the id."""
        if self.coords is None:
            return int(x)
        return tuple(int(c) for c in self.coords[x])

    def point_at(self, *coords: int) -> int:
        """Id of the point with the given grid coordinates."""
        if self.coords is None:
            raise ValueError(f"{self.name} has no grid coordinates")
        target = np.asarray(coords)
        hits = np.flatnonzero((self.coords == target).all(axis=1))
        if hits.size == 0:
            raise KeyError(f"no point with coordinates {coords} in {self.name}")
        return int(hits[0])

    def induced(self, members: "PointSet", name: str | None = None) -> "FiniteMetricSpace":
        """Subspace on ``members`` with the induced metric."""
        ids = members.ids
        if not ids:
            raise ValueError("cannot induce a metric on an empty set")
        idx = np.asarray(ids)
        coords = None if self.coords is None else self.coords[idx]
        return FiniteMetricSpace(
            self.num[np.ix_(idx, idx)],
            self.den,
            name=name or f"{self.name}|{len(ids)}",
            coords=coords,
            parent_ids=ids,
            check=False,
        )

    def same_carrier(self, other: "FiniteMetricSpace") -> bool:
        if self is other:
            return True
        return (
            self.size == other.size
            and self.num.shape == other.num.shape
            and np.array_equal(self.num * other.den, other.num * self.den)
        )


def _check_metric(num: np.ndarray) -> None:
    n = num.shape[0]
    if (num < 0).any():
        a, b = np.argwhere(num < 0)[0]
        raise MetricAxiomError(f"negative distance between {a} and {b}")
    if (np.diag(num) != 0).any():
        a = int(np.flatnonzero(np.diag(num) != 0)[0])
        raise MetricAxiomError(f"d({a},{a}) is not zero")
    if not np.array_equal(num, num.T):
        a, b = np.argwhere(num != num.T)[0]
        raise MetricAxiomError(f"asymmetric distance between {a} and {b}")
    off = num + np.eye(n, dtype=np.int64)
    if (off == 0).any():
        a, b = np.argwhere(off == 0)[0]
        raise MetricAxiomError(f"distinct points {a} and {b} at distance zero")
    for b in range(n):
        # d(a,c) <= d(a,b) + d(b,c) for every a, c
        viol = num > num[:, b][:, None] + num[b, :][None, :]
        if viol.any():
            a, c = np.argwhere(viol)[0]
            raise MetricAxiomError(
                f"triangle inequality fails for triple ({a}, {b}, {c}): "
                f"d({a},{c}) > d({a},{b}) + d({b},{c})"
            )


def torus2d(q: int) -> FiniteMetricSpace:
    """The q x q discrete torus with the normalized cyclic max metric."""
    if q < 2:
        raise ValueError("torus2d needs q >= 2")
    a, b = np.divmod(np.arange(q * q), q)
    num = np.maximum(_circ(a[:, None], a[None, :], q), _circ(b[:, None], b[None, :], q))
    return FiniteMetricSpace(num, q, name=f"torus2d({q})", coords=np.stack([a, b], axis=1), check=False)


def circle(q: int) -> FiniteMetricSpace:
    """q equally spaced points on a circle of circumference 1."""
    if q < 2:
        raise ValueError("circle needs q >= 2")
    i = np.arange(q)
    num = _circ(i[:, None], i[None, :], q)
    return FiniteMetricSpace(num, q, name=f"circle({q})", coords=i[:, None], check=False)


def custom_space(table, name: str = "custom") -> FiniteMetricSpace:
    """Build a space from a square table of lengths (Fractions, ints, strings)."""
    rows = [[as_length(v) for v in row] for row in table]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise MetricAxiomError("distance table must be a non-empty square matrix")
    den = math.lcm(*(v.denominator for r in rows for v in r))
    num = np.array([[int(v * den) for v in r] for r in rows], dtype=np.int64)
    return FiniteMetricSpace(num, den, name=name)


def load_distance_csv(path: str | Path, name: str | None = None) -> FiniteMetricSpace:
    """Read ``row,col,distance`` triples; unlisted pairs are filled by symmetry."""
    entries: dict[tuple[int, int], Fraction] = {}
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            if rec[0].strip() == "row":
                continue
            i, j, d = int(rec[0]), int(rec[1]), as_length(rec[2].strip())
            entries[(i, j)] = d
    n = 1 + max(max(i, j) for i, j in entries)
    table = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), d in entries.items():
        table[i][j] = d
        if (j, i) not in entries:
            table[j][i] = d
    return custom_space(table, name=name or Path(path).stem)


def build_space(kind: str, **params) -> FiniteMetricSpace:
    """Factory used by scenario configs: ``torus2d``, ``circle`` or ``custom``."""
    if kind == "torus2d":
        return torus2d(int(params["q"]))
    if kind == "circle":
        return circle(int(params["q"]))
    if kind == "custom":
        if "csv" in params:
            return load_distance_csv(params["csv"], name=params.get("name"))
        return custom_space(params["table"], name=params.get("name", "custom"))
    raise ValueError(f"unknown space kind {kind!r}")


def distance(space: FiniteMetricSpace, a: int, b: int, mode: str = "raw") -> Fraction:
    """Exact distance; ``mode='bounded'`` gives ``min(d, 1)``."""
    a, b = space.check_point(a), space.check_point(b)
    d = space.length(space.num[a, b])
    if mode == "raw":
        return d
    if mode == "bounded":
        return min(d, Fraction(1))
    raise ValueError(f"unknown distance mode {mode!r}")


def ball(space: FiniteMetricSpace, center: int, radius: LengthLike, closed: bool = False) -> "PointSet":
    """Open (default) or closed ball around ``center``."""
    center = space.check_point(center)
    r = as_length(radius)
    if r < 0:
        raise ValueError("radius must be non-negative")
    t = space.closed_threshold(r) if closed else space.open_threshold(r)
    return PointSet(space, space.num[center] <= t)


class PointSet:
    """An immutable subset of a finite carrier, stored as a boolean mask."""

    __slots__ = ("space", "mask", "_hash")

    def __init__(self, space: FiniteMetricSpace, mask: np.ndarray):
        m = np.array(mask, dtype=bool)
        if m.shape != (space.size,):
            raise ValueError(f"mask of shape {m.shape} does not match carrier of size {space.size}")
        m.setflags(write=False)
        self.space = space
        self.mask = m
        self._hash = None

    @classmethod
    def of(cls, space: FiniteMetricSpace, ids: Iterable[int]) -> "PointSet":
        return space.subset(ids)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.mask))

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __bool__(self) -> bool:
        return bool(self.mask.any())

    def __contains__(self, x) -> bool:
        return 0 <= x < self.space.size and bool(self.mask[x])

    def _other(self, other: "PointSet") -> np.ndarray:
        if not isinstance(other, PointSet):
            return NotImplemented
        if other.space.size != self.space.size:
            raise ValueError("point sets live on different carriers")
        return other.mask

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return other.space.size == self.space.size and np.array_equal(self.mask, other.mask)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.space.size, self.mask.tobytes()))
        return self._hash

    def __or__(self, other: "PointSet") -> "PointSet":
        return PointSet(self.space, self.mask | self._other(other))

    def __and__(self, other: "PointSet") -> "PointSet":
        return PointSet(self.space, self.mask & self._other(other))

    def __sub__(self, other: "PointSet") -> "PointSet":
        return PointSet(self.space, self.mask & ~self._other(other))

    def __le__(self, other: "PointSet") -> bool:
        return not (self.mask & ~self._other(other)).any()

    def __ge__(self, other: "PointSet") -> bool:
        return other <= self

    def issubset(self, other: "PointSet") -> bool:
        return self <= other

    def complement(self) -> "PointSet":
        return PointSet(self.space, ~self.mask)

    def labels(self) -> list:
        return [self.space.point_label(i) for i in self.ids]

    def __repr__(self) -> str:
        ids = self.ids
        shown = ", ".join(map(str, ids[:12])) + (", ..." if len(ids) > 12 else "")
        return f"PointSet({{{shown}}}, size={len(ids)}/{self.space.size})"
