"""Dynamical balls, expansive constants and measure generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from .measure import GridMeasure
from .metric_space import FiniteMetricSpace, LengthLike, PointSet, as_length
from .system import TimeVaryingSystem

__all__ = [
    "BudgetExceeded",
    "ExpansivenessReport",
    "GeneratorVerdict",
    "OpenCover",
    "default_delta_grid",
    "dynamical_ball",
    "dynamical_ball_matrix",
    "expansive_verdict",
    "generator_from_constant",
    "is_mu_generator",
    "lebesgue_number",
    "time_order",
]


class BudgetExceeded(RuntimeError):
    pass


def time_order(N: int) -> list[int]:
    """0, 1, -1, 2, -2, ..., N, -N."""
    out = [0]
    for n in range(1, N + 1):
        out += [n, -n]
    return out


def default_delta_grid(space: FiniteMetricSpace) -> list[Fraction]:
    """Every positive distance value of the carrier, ascending."""
    return list(space.distance_values)


def dynamical_ball(F: TimeVaryingSystem, x: int, delta: LengthLike, N: int) -> PointSet:
    """Points whose orbit stays within ``delta`` of x's orbit for ``|n| <= N``."""
    space = F.space
    x = space.check_point(x)
    delta = as_length(delta)
    if delta < 0 or N < 0:
        raise ValueError("delta and N must be non-negative")
    t = space.closed_threshold(delta)
    O = F.orbit_matrix(N)
    cand = np.flatnonzero(space.num[x] <= t)
    for n in time_order(N)[1:]:
        if cand.size == 1:
            break
        row = O[n + N]
        cand = cand[space.num[row[x], row[cand]] <= t]
    mask = np.zeros(space.size, dtype=bool)
    mask[cand] = True
    return PointSet(space, mask)


def dynamical_ball_matrix(F: TimeVaryingSystem, delta: LengthLike, N: int) -> np.ndarray:
    """Row ``x`` is the mask of the dynamical ball of ``x``."""
    space = F.space
    t = space.closed_threshold(delta)
    O = F.orbit_matrix(N)
    out = space.num <= t
    for row in O:
        out &= space.num[np.ix_(row, row)] <= t
    return out


@dataclass
class ExpansivenessReport:
    verdict: bool
    constant: Fraction | None
    horizon: int
    tau: Fraction
    nonatomic: bool
    # per delta: (max mass, argmax point, ids of that ball)
    table: dict[Fraction, tuple[Fraction, int, tuple[int, ...]]] = field(default_factory=dict)

    @property
    def witnesses(self) -> dict[Fraction, tuple[int, tuple[int, ...]]]:
        """Blocking point and ball for every delta that fails."""
        return {d: (x, ball) for d, (m, x, ball) in self.table.items() if m > self.tau}

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "constant": None if self.constant is None else str(self.constant),
            "horizon": self.horizon,
            "tau": str(self.tau),
            "nonatomic": self.nonatomic,
            "table": [
                {"delta": str(d), "max_mass": str(m), "point": x, "ball": list(b)}
                for d, (m, x, b) in self.table.items()
            ],
        }


def expansive_verdict(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    delta_grid=None,
    N: int = 4,
    tau: LengthLike | None = None,
) -> ExpansivenessReport:
    """Largest delta in the grid whose dynamical balls are all null.

    The non-atomicity of ``mu`` (largest atom ``<= tau``) is reported
    separately and does not gate the verdict.
    """
    tau = mu.tau if tau is None else as_length(tau)
    grid = default_delta_grid(F.space) if delta_grid is None else [as_length(d) for d in delta_grid]
    if not grid:
        raise ValueError("delta grid is empty")
    if grid != sorted(grid):
        raise ValueError("delta grid must be sorted ascending")
    table = {}
    constant = None
    for delta in grid:
        balls = dynamical_ball_matrix(F, delta, N)
        masses = mu.masses_of_rows(balls)
        x = int(np.argmax(masses))
        m = Fraction(int(masses[x]), mu.den)
        table[delta] = (m, x, tuple(int(i) for i in np.flatnonzero(balls[x])))
        if m <= tau:
            constant = delta
    return ExpansivenessReport(
        verdict=constant is not None,
        constant=constant,
        horizon=N,
        tau=tau,
        nonatomic=mu.nonatomic(tau),
        table=table,
    )


@dataclass
class OpenCover:
    """Finite cover of the carrier; on a finite carrier every set is closed."""

    space: FiniteMetricSpace
    sets: tuple[PointSet, ...]

    def __post_init__(self):
        self.sets = tuple(self.sets)
        if not self.sets:
            raise ValueError("a cover needs at least one member")
        union = np.zeros(self.space.size, dtype=bool)
        for s in self.sets:
            union |= s.mask
        if not union.all():
            raise ValueError(f"point {int(np.flatnonzero(~union)[0])} is not covered")

    def __len__(self) -> int:
        return len(self.sets)

    def matrix(self) -> np.ndarray:
        return np.stack([s.mask for s in self.sets])

    def closures(self) -> tuple[PointSet, ...]:
        return self.sets

    @property
    def lebesgue_number(self) -> Fraction | None:
        return lebesgue_number(self)


def lebesgue_number(cover: OpenCover) -> Fraction | None:
    """Largest L such that every set of diameter < L lies in one member.

    Sets of diameter below a threshold are the cliques of the graph joining
    points closer than it, so only maximal cliques are checked.  Returns
    None when the whole carrier sits inside one member (no bound).
    """
    space = cover.space
    M = cover.matrix()
    if M.all(axis=1).any():
        return None
    values = space.distance_values
    for i, d in enumerate(values):
        # diameter < L for L in (values[i-1], d] means pairwise distance <= values[i-1]
        g = nx.Graph()
        g.add_nodes_from(range(space.size))
        prev = values[i - 1] if i > 0 else Fraction(0)
        t = space.closed_threshold(prev)
        a, b = np.nonzero(np.triu(space.num <= t, k=1))
        g.add_edges_from(zip(a.tolist(), b.tolist()))
        for clique in nx.find_cliques(g):
            if not M[:, clique].all(axis=1).any():
                return prev
    return values[-1] if values else None


def generator_from_constant(space: FiniteMetricSpace, e: LengthLike) -> OpenCover:
    """Cover by the open ``e``-balls around every point."""
    e = as_length(e)
    if e <= 0:
        raise ValueError("e must be positive")
    B = space.ball_matrix(e, closed=False)
    return OpenCover(space, tuple(PointSet(space, row) for row in B))


@dataclass
class GeneratorVerdict:
    is_generator: bool
    mode: str
    horizon: int
    tau: Fraction
    explored: int
    witness: dict[int, int] | None = None
    witness_mass: Fraction | None = None
    trials: int | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.is_generator,
            "mode": self.mode,
            "horizon": self.horizon,
            "tau": str(self.tau),
            "explored": self.explored,
            "witness": None if self.witness is None else {str(k): v for k, v in sorted(self.witness.items())},
            "witness_mass": None if self.witness_mass is None else str(self.witness_mass),
            "trials": self.trials,
        }


def _image_matrices(F: TimeVaryingSystem, cover: OpenCover, N: int) -> dict[int, np.ndarray]:
    """``img[n][j]`` is the mask of ``F_n(A_j)``."""
    M = cover.matrix()
    O = F.orbit_matrix(N)
    out = {}
    for n in range(-N, N + 1):
        inv = np.empty(F.space.size, dtype=np.int64)
        inv[O[n + N]] = np.arange(F.space.size)
        out[n] = M[:, inv]
    return out


def is_mu_generator(
    F: TimeVaryingSystem,
    cover: OpenCover,
    mu: GridMeasure,
    N: int,
    tau: LengthLike | None = None,
    mode: str = "exhaustive",
    budget: int = 2_000_000,
    trials: int = 1000,
    seed: int = 0,
) -> GeneratorVerdict:
    """Is every intersection ``F_n(A_n)``, ``|n| <= N``, null?

    Exhaustive mode walks the sequences breadth first, dropping any partial
    intersection that is already null and merging equal ones; ``budget``
    caps the number of partial intersections expanded.  Sampled mode draws
    ``trials`` seeded random sequences.
    """
    tau = mu.tau if tau is None else as_length(tau)
    t = int(np.floor(tau * mu.den))
    img = _image_matrices(F, cover, N)
    order = time_order(N)
    k = len(cover)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            seq = rng.integers(0, k, size=len(order))
            mask = np.ones(F.space.size, dtype=bool)
            for n, j in zip(order, seq):
                mask &= img[n][j]
            m = int(mu.num[mask].sum())
            if m > t:
                return GeneratorVerdict(
                    False, mode, N, tau, trials,
                    witness={n: int(j) for n, j in zip(order, seq)},
                    witness_mass=Fraction(m, mu.den), trials=trials,
                )
        return GeneratorVerdict(True, mode, N, tau, trials, trials=trials)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")

    frontier: dict[bytes, tuple[np.ndarray, tuple[int, ...]]] = {
        np.ones(F.space.size, dtype=bool).tobytes(): (np.ones(F.space.size, dtype=bool), ())
    }
    explored = 0
    for n in order:
        nxt: dict[bytes, tuple[np.ndarray, tuple[int, ...]]] = {}
        for mask, seq in frontier.values():
            explored += 1
            if explored > budget:
                raise BudgetExceeded(
                    f"exhaustive search exceeded {budget} nodes; use mode='sampled'"
                )
            cand = mask[None, :] & img[n]
            masses = cand.astype(np.int64) @ mu.num
            for j in np.flatnonzero(masses > t):
                key = cand[j].tobytes()
                if key not in nxt:
                    nxt[key] = (cand[j], seq + (int(j),))
        frontier = nxt
        if not frontier:
            return GeneratorVerdict(True, mode, N, tau, explored)
    mask, seq = next(iter(frontier.values()))
    return GeneratorVerdict(
        False, mode, N, tau, explored,
        witness=dict(zip(order, seq)),
        witness_mass=Fraction(int(mu.num[mask].sum()), mu.den),
    )
