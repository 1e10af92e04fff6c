"""Seeded random scenario parameters for the implication sweeps."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from nadyn.measure import GridMeasure, make_measure
from nadyn.metric_space import circle, torus2d
from nadyn.system import TimeVaryingSystem
from nadyn.zoo import zoo_system

from oracles import random_commuting_system, random_permutation_system

ZOO_CHOICES = [
    ("cat", {"q": 5}), ("cat", {"q": 4}), ("cat", {"q": 3}),
    ("rotation", {"q": 5}), ("rotation", {"q": 6}), ("rotation", {"q": 8}),
    ("rotation", {"q": 7, "step": 2}),
    ("affine", {"q": 5}), ("affine", {"q": 7}),
    ("cat_iso", {"q": 5, "depth": 6}), ("alternate", {"q": 5}), ("identity", {"q": 6}),
]


@dataclass
class Config:
    F: TimeVaryingSystem
    mu: GridMeasure
    eps: Fraction
    delta: Fraction
    N: int
    trials: int
    seed: int

    def describe(self) -> str:
        return f"{self.F.name} eps={self.eps} delta={self.delta} N={self.N} seed={self.seed}"


def random_configs(count: int, master: int = 2024, trials: int = 4) -> list[Config]:
    rng = random.Random(master)
    out = []
    for _ in range(count):
        pick = rng.random()
        if pick < 0.6:
            name, params = rng.choice(ZOO_CHOICES)
            F = zoo_system(name, **dict(params))
        else:
            space = rng.choice([circle(rng.randint(4, 9)), torus2d(rng.randint(3, 4))])
            make = random_permutation_system if pick < 0.8 else random_commuting_system
            F = make(rng, space)
        values = list(F.space.distance_values)
        eps = rng.choice(values)
        delta = rng.choice(values + [values[0] * 2, Fraction(1, 2)])
        mu = make_measure(F.space)
        out.append(Config(F, mu, eps, delta, rng.randint(2, 4), trials, rng.randint(0, 10**6)))
    return out
