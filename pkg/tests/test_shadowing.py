import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nadyn.measure import make_measure
from nadyn.metric_space import PointSet, circle, torus2d
from nadyn.shadowing import (
    PseudoOrbit,
    full_mass_set,
    is_pseudo_orbit,
    orbit_as_pseudo,
    perturb_system,
    perturbations,
    persistence_verdict,
    random_pseudo_orbit,
    shadowing_point,
    shadowing_verdict,
)
from nadyn.system import conjugate, system_distance
from nadyn.zoo import translation, zoo_system

import oracles


def naive_pseudo_violation(F, xs, delta):
    """First violated (index, clause) walking the two clauses in order."""
    S = F.space
    hi, lo = max(xs), min(xs)
    for n in range(0, hi):
        if oracles.d(S, int(F.table(n + 1).forward[xs[n]]), xs[n + 1]) >= delta:
            return n, "forward"
    for n in range(-1, lo - 1, -1):
        if oracles.d(S, int(F.table(-n).backward[xs[n + 1]]), xs[n]) >= delta:
            return n, "backward"
    return None


# pseudo-orbits


def test_true_orbit_is_pseudo_orbit(cat5):
    for x in (0, 7, 24):
        p = orbit_as_pseudo(cat5, x, 4)
        assert is_pseudo_orbit(cat5, p, "1/100")
        assert p.x0 == x and p.lo == -4 and p.hi == 4


def test_perturbed_orbit_is_pseudo_orbit(cat5):
    G = perturb_system(cat5, "2/5", 3)
    p = system_distance(cat5, G).p
    assert 0 < p < Fraction(2, 5)
    for x in cat5.space.points:
        xs = {n: oracles.F_n(G, n, x) for n in range(-4, 5)}
        assert is_pseudo_orbit(cat5, xs, "2/5")


def test_swapped_entry_is_flagged(cat5):
    S = cat5.space
    xs = orbit_as_pseudo(cat5, S.point_at(1, 0), 4).as_dict()
    far = next(y for y in S.points if oracles.d(S, y, xs[2]) == Fraction(2, 5))
    xs[2] = far
    check = is_pseudo_orbit(cat5, xs, "1/5")
    assert not check
    assert (check.index, check.clause) == (1, "forward")
    assert check.distance == Fraction(2, 5)
    assert (check.index, check.clause) == naive_pseudo_violation(cat5, xs, Fraction(1, 5))
    xs = orbit_as_pseudo(cat5, S.point_at(1, 0), 4).as_dict()
    xs[-3] = far if far != xs[-3] else xs[0]
    back = is_pseudo_orbit(cat5, xs, "1/5")
    assert back.clause == "backward" and back.index in (-3, -4)


def test_index_gaps_rejected(cat5):
    with pytest.raises(ValueError, match="index 1 is missing"):
        is_pseudo_orbit(cat5, {0: 0, 2: 0}, "1/5")
    with pytest.raises(ValueError, match="contain 0"):
        PseudoOrbit.from_mapping({1: 0, 2: 0})


@given(seed=st.integers(0, 10**6))
def test_pseudo_orbit_check_matches_naive(seed):
    rng = random.Random(seed)
    S = rng.choice([circle(5), circle(8), torus2d(3), torus2d(4)])
    F = oracles.random_permutation_system(rng, S)
    lo, hi = -rng.randint(0, 3), rng.randint(0, 3)
    xs = {n: rng.randrange(S.size) for n in range(lo, hi + 1)}
    delta = rng.choice(list(S.distance_values))
    check = is_pseudo_orbit(F, xs, delta)
    want = naive_pseudo_violation(F, xs, delta)
    assert (None if check.ok else (check.index, check.clause)) == want


@given(seed=st.integers(0, 10**6))
def test_generated_pseudo_orbits_are_valid(seed):
    rng = random.Random(seed)
    S = rng.choice([circle(6), torus2d(3), torus2d(5)])
    F = oracles.random_permutation_system(rng, S)
    delta = rng.choice(list(S.distance_values))
    p = random_pseudo_orbit(F, rng.randrange(S.size), delta, 4, np.random.default_rng(seed))
    assert is_pseudo_orbit(F, p, p.delta)


# shadowers


def test_shadowing_point_examples(cat5):
    x = 13
    res = shadowing_point(cat5, orbit_as_pseudo(cat5, x, 4), "1/100")
    assert res.found and res.point == x and res.sup == 0
    G = perturb_system(cat5, "1/5", 1)
    assert shadowing_point(cat5, orbit_as_pseudo(G, 3, 4), "2/5").found


def test_rotation_drift_has_no_shadower():
    R = zoo_system("rotation", q=5)
    S = R.space
    # one extra unit step per time: the pseudo-orbit runs away from every true orbit
    xs = {n: (2 * n) % 5 for n in range(-4, 5)}
    assert is_pseudo_orbit(R, xs, "2/5")
    res = shadowing_point(R, xs, "2/5")
    assert not res.found and res.point is None
    assert res.sup == oracles.shadower(R, xs, Fraction(2, 5))[1] == S.diameter


@given(seed=st.integers(0, 10**6))
def test_shadowing_point_matches_exhaustive_scan(seed):
    rng = random.Random(seed)
    S = rng.choice(oracles.small_carriers())
    F = oracles.random_permutation_system(rng, S)
    N = rng.randint(0, 3)
    xs = {n: rng.randrange(S.size) for n in range(-N, N + 1)}
    eps = rng.choice(list(S.distance_values) or [Fraction(1)])
    found, best = oracles.shadower(F, xs, eps)
    res = shadowing_point(F, xs, eps)
    assert res.point == found
    assert res.sup == best if found is None else res.sup < eps


# perturbations


def test_perturb_system_examples(cat5):
    assert perturb_system(cat5, "1/5", 4).same_schedule(cat5)
    G = perturb_system(cat5, "3/10", 7)
    assert system_distance(cat5, G).p < Fraction(3, 10)
    assert G.same_schedule(perturb_system(cat5, "3/10", 7))
    with pytest.raises(ValueError):
        perturb_system(cat5, 0, 1)


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6))
def test_perturbations_stay_close(seed):
    rng = random.Random(seed)
    S = rng.choice([circle(6), circle(8), torus2d(4)])
    F = oracles.random_permutation_system(rng, S)
    delta = rng.choice(list(S.distance_values)[1:] or [S.diameter])
    G = perturb_system(F, delta, seed)
    span = range(1, F.period_start + F.period + 1)
    fwd = max(oracles.d(S, int(F.table(n).forward[x]), int(G.table(n).forward[x])) for n in span for x in S.points)
    bwd = max(oracles.d(S, int(F.table(n).backward[x]), int(G.table(n).backward[x])) for n in span for x in S.points)
    assert min(max(fwd, bwd), 1) < delta


# verdicts


def test_full_mass_set(uniform25):
    S = uniform25.space
    assert full_mass_set(uniform25) == S.full()
    B = S.full() - PointSet.of(S, [0])
    assert full_mass_set(uniform25, B) == B
    with pytest.raises(ValueError, match="mass 2/25"):
        full_mass_set(uniform25, S.full() - PointSet.of(S, [0, 1]))


def test_shadowing_examples(cat5, uniform25):
    big = shadowing_verdict(cat5, uniform25, cat5.space.diameter + Fraction(1, 5), "2/5", trials=3, seed=1)
    assert big.verdict
    rep = shadowing_verdict(cat5, uniform25, "2/5", "1/5", trials=20, seed=0)
    assert rep.verdict and rep.pseudo_orbits_tested == 2 * 20 * 25
    R = zoo_system("rotation", q=8)
    mu = make_measure(R.space)
    bad = shadowing_verdict(R, mu, "1/8", "1/4", trials=5, seed=0)
    assert not bad.verdict and bad.failures
    kind, *_ = bad.failures[0]
    assert kind in ("random", "system")


def test_persistence_examples(cat5, uniform25):
    rep = persistence_verdict(cat5, uniform25, "2/5", "1/5", trials=20, seed=0)
    assert rep.verdict and rep.trials == 20 and not rep.failures
    assert persistence_verdict(cat5, uniform25, "1/100", "1/5", trials=3).verdict
    bad = persistence_verdict(cat5, uniform25, "1/10", "2/5", trials=4, seed=2)
    assert not bad.verdict
    for s, x, best in bad.failures:
        G = dict(perturbations(cat5, "2/5", 4, 2))[s]
        xs = {n: oracles.F_n(G, n, x) for n in range(-4, 5)}
        assert oracles.shadower(cat5, xs, Fraction(1, 10)) == (None, best)


def test_persistence_rejects_far_systems(cat5, uniform25):
    far = [(0, zoo_system("cat", q=5)), (1, conjugate(cat5, translation(cat5.space, 5, [1, 0])))]
    with pytest.raises(ValueError, match="seed 1"):
        persistence_verdict(cat5, uniform25, "2/5", "1/5", systems=far)


def test_shadowing_implies_persistence_on_shared_trials():
    rng = random.Random(8)
    for _ in range(25):
        S = rng.choice([circle(5), circle(7), torus2d(3)])
        F = oracles.random_permutation_system(rng, S)
        mu = make_measure(S)
        vals = list(S.distance_values)
        eps, delta = rng.choice(vals), rng.choice(vals)
        sh = shadowing_verdict(F, mu, eps, delta, trials=3, seed=5, N=3)
        pe = persistence_verdict(F, mu, eps, delta, trials=3, seed=5, N=3)
        if sh.verdict:
            assert pe.verdict


@pytest.mark.parametrize("fn", [shadowing_verdict, persistence_verdict])
def test_workers_do_not_change_results(fn, cat5, uniform25):
    a = fn(cat5, uniform25, "1/5", "2/5", trials=6, seed=9, workers=1)
    b = fn(cat5, uniform25, "1/5", "2/5", trials=6, seed=9, workers=4)
    assert a.to_dict() == b.to_dict()
