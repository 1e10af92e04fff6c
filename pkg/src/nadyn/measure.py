"""Discrete measures on finite carriers with an explicit null threshold."""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .metric_space import FiniteMetricSpace, LengthLike, PointSet, as_length
from .system import MapTable

__all__ = [
    "GridMeasure",
    "load_weight_csv",
    "make_measure",
    "mass",
    "measure_predicate",
    "pushforward",
    "restrict_measure",
]


class GridMeasure:
    """Exact rational point masses ``num[x] / den``.

    ``tau`` is the negligibility threshold: a set counts as null when its
    mass is at most ``tau``.
    """

    def __init__(self, space: FiniteMetricSpace, numerators, denominator: int, tau: LengthLike):
        num = np.array(numerators, dtype=np.int64)
        if num.shape != (space.size,):
            raise ValueError(f"{num.size} weights for a carrier of size {space.size}")
        if (num < 0).any():
            raise ValueError(f"negative weight at point {int(np.flatnonzero(num < 0)[0])}")
        if denominator <= 0:
            raise ValueError("denominator must be positive")
        tau = as_length(tau)
        if tau < 0:
            raise ValueError("tau must be non-negative")
        num.setflags(write=False)
        self.space = space
        self.num = num
        self.den = int(denominator)
        self.tau = tau

    def __repr__(self) -> str:
        return f"GridMeasure(total={self.total}, tau={self.tau}, carrier={self.space.name})"

    @property
    def total(self) -> Fraction:
        return Fraction(int(self.num.sum()), self.den)

    def weight(self, x: int) -> Fraction:
        return Fraction(int(self.num[self.space.check_point(x)]), self.den)

    def weights(self) -> list[Fraction]:
        return [Fraction(int(v), self.den) for v in self.num]

    def mass_of_mask(self, mask: np.ndarray) -> Fraction:
        return Fraction(int(self.num[mask].sum()), self.den)

    def mass(self, S: PointSet) -> Fraction:
        if S.space.size != self.space.size:
            raise ValueError("set and measure live on different carriers")
        return self.mass_of_mask(S.mask)

    def masses_of_rows(self, masks: np.ndarray) -> np.ndarray:
        """Integer numerators of the mass of every row of a boolean matrix."""
        return masks.astype(np.int64) @ self.num

    def tau_numerator(self) -> int:
        """Largest integer numerator whose mass is still null."""
        return math.floor(self.tau * self.den)

    def negligible(self, S: PointSet) -> bool:
        return self.mass(S) <= self.tau

    def max_atom(self) -> Fraction:
        return Fraction(int(self.num.max()), self.den)

    def nonatomic(self, bound: LengthLike) -> bool:
        return self.max_atom() <= as_length(bound)

    def with_tau(self, tau: LengthLike) -> "GridMeasure":
        return GridMeasure(self.space, self.num, self.den, tau)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridMeasure):
            return NotImplemented
        return (
            self.space.size == other.space.size
            and self.tau == other.tau
            and np.array_equal(self.num * other.den, other.num * self.den)
        )


def make_measure(
    space: FiniteMetricSpace,
    kind: str = "uniform",
    tau: LengthLike | None = None,
    point: int | None = None,
    weights=None,
) -> GridMeasure:
    """``uniform``, ``dirac`` (at ``point``) or ``weighted`` (``weights`` per id).

    ``tau`` defaults to ``1/|X|``.
    """
    if tau is None:
        tau = Fraction(1, space.size)
    if kind == "uniform":
        return GridMeasure(space, np.ones(space.size, dtype=np.int64), space.size, tau)
    if kind == "dirac":
        if point is None:
            raise ValueError("dirac measure needs a point")
        num = np.zeros(space.size, dtype=np.int64)
        num[space.check_point(point)] = 1
        return GridMeasure(space, num, 1, tau)
    if kind == "weighted":
        if weights is None:
            raise ValueError("weighted measure needs weights")
        ws = [as_length(w) for w in weights]
        if len(ws) != space.size:
            raise ValueError(f"{len(ws)} weights for a carrier of size {space.size}")
        for i, w in enumerate(ws):
            if w < 0:
                raise ValueError(f"negative weight at point {i}")
        if not any(ws):
            raise ValueError("all weights are zero")
        den = math.lcm(*(w.denominator for w in ws))
        return GridMeasure(space, [int(w * den) for w in ws], den, tau)
    raise ValueError(f"unknown measure kind {kind!r}")


def load_weight_csv(path: str | Path, space: FiniteMetricSpace, tau: LengthLike | None = None) -> GridMeasure:
    """Read ``point,weight`` rows; unlisted points get weight zero."""
    ws = [Fraction(0)] * space.size
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip() in ("point", "") or rec[0].startswith("#"):
                continue
            ws[space.check_point(int(rec[0]))] = as_length(rec[1].strip())
    return make_measure(space, "weighted", tau=tau, weights=ws)


def mass(mu: GridMeasure, S: PointSet) -> Fraction:
    return mu.mass(S)


def measure_predicate(mu: GridMeasure, query: str, arg) -> bool:
    """``query='negligible'`` with a PointSet, or ``'nonatomic'`` with a bound."""
    if query == "negligible":
        return mu.negligible(arg)
    if query == "nonatomic":
        return mu.nonatomic(arg)
    raise ValueError(f"unknown measure query {query!r}")


def pushforward(mu: GridMeasure, h) -> GridMeasure:
    """The measure ``A -> mu(h(A))`` for a bijection ``h``.

    For bijections this is the point weight ``mu({h(y)})`` at ``y``.
    """
    fwd = h.forward if isinstance(h, MapTable) else MapTable(mu.space, h).forward
    if fwd.size != mu.space.size:
        raise ValueError("map and measure live on carriers of different size")
    return GridMeasure(mu.space, mu.num[fwd], mu.den, mu.tau)


def restrict_measure(mu: GridMeasure, sub: FiniteMetricSpace) -> GridMeasure:
    """Restriction of ``mu`` to a subspace built by ``FiniteMetricSpace.induced``."""
    if sub.parent_ids is None:
        raise ValueError("subspace does not record its parent ids")
    return GridMeasure(sub, mu.num[np.asarray(sub.parent_ids)], mu.den, mu.tau)
