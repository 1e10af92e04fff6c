import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nadyn.metric_space import PointSet, circle, custom_space, torus2d
from nadyn.system import (
    HorizonError,
    InvarianceError,
    MapTable,
    NotBijectiveError,
    TimeVaryingSystem,
    conjugate,
    equicontinuity_modulus,
    evaluate,
    invert,
    load_permutation_csv,
    make_system,
    power,
    restrict,
    system_distance,
    window,
)
from nadyn.zoo import cat_table, translation, zoo_names, zoo_system

import oracles


def pt(S, a, b):
    return S.point_at(a, b)


def test_cat_table_is_a_permutation(cat5):
    C = cat5.cycle[0]
    assert sorted(C.forward.tolist()) == list(range(25))
    S = cat5.space
    for a in range(5):
        for b in range(5):
            assert C(pt(S, a, b)) == pt(S, (2 * a + b) % 5, (a + b) % 5)


def test_make_system_rejects_bad_tables():
    S = circle(3)
    with pytest.raises(ValueError, match="non-empty"):
        make_system(S, [], [])
    with pytest.raises(NotBijectiveError, match="both map to 1"):
        make_system(S, [], [[1, 1, 0]])
    with pytest.raises(NotBijectiveError):
        make_system(S, [], [[0, 1, 5]])


def test_evaluate_examples(cat5):
    S = cat5.space
    for x in S.points:
        assert evaluate(cat5, 0, x) == x
    assert evaluate(cat5, 2, pt(S, 1, 0)) == pt(S, 0, 3)
    assert evaluate(cat5, -1, pt(S, 2, 1)) == pt(S, 1, 0)


def test_horizon_guard():
    F = zoo_system("rotation", q=5)
    F = TimeVaryingSystem(F.space, F.prefix, F.cycle, max_horizon=10)
    evaluate(F, 10, 0)
    with pytest.raises(HorizonError):
        evaluate(F, 11, 0)
    with pytest.raises(HorizonError):
        evaluate(F, -11, 0)


def test_window_examples(cat5):
    S = cat5.space
    x = pt(S, 1, 0)
    assert window(cat5, 5, 2, x) == x
    assert window(cat5, 2, 3, x) == pt(S, 0, 3)
    for n in range(6):
        assert window(cat5, 1, n, x) == evaluate(cat5, n, x)
    # inverse window composes f_j^-1 o ... o f_i^-1
    assert window(cat5, 2, 3, pt(S, 0, 3), "inv") == x


def test_invert_examples(cat5):
    assert invert(invert(cat5)).same_schedule(cat5)
    I = zoo_system("identity", q=4)
    assert invert(I).same_schedule(I)
    assert np.array_equal(invert(cat5).cycle[0].forward, cat5.cycle[0].backward)


def test_power_examples(cat5):
    assert power(cat5, 1).same_schedule(cat5)
    C = cat5.cycle[0]
    assert power(cat5, 2).cycle[0] == C.then(C)
    A2 = power(zoo_system("alternate", q=5), 2)
    for n in range(-6, 7):
        assert np.array_equal(A2.time_map(n), np.arange(25))


def test_restrict_examples(cat5):
    S = cat5.space
    full = restrict(cat5, S.full())
    assert full.space.size == 25
    for n in range(-3, 4):
        assert np.array_equal(full.time_map(n), cat5.time_map(n))
    fixed = restrict(cat5, PointSet.of(S, [pt(S, 0, 0)]))
    assert fixed.space.size == 1
    with pytest.raises(InvarianceError, match=f"{pt(S, 1, 0)}"):
        restrict(cat5, PointSet.of(S, [pt(S, 1, 0)]))


def test_restrict_invariant_cycle(cat5):
    # the orbit of (1,0) under C is invariant
    S = cat5.space
    orbit = {int(evaluate(cat5, n, pt(S, 1, 0))) for n in range(12)}
    R = restrict(cat5, PointSet.of(S, orbit))
    assert R.space.size == len(orbit)
    ids = sorted(orbit)
    for i, x in enumerate(ids):
        assert ids[R.cycle[0].forward[i]] == evaluate(cat5, 1, x)


def test_conjugate_examples(cat5):
    S = cat5.space
    same = conjugate(cat5, MapTable.identity(S))
    assert same.same_schedule(cat5)
    h = translation(S, 5, [1, 1])
    Fc = conjugate(cat5, h)
    for n in range(-4, 5):
        for x in S.points:
            assert evaluate(Fc, n, x) == h.backward[evaluate(cat5, n, h(x))]
    assert conjugate(Fc, h.inverse()).same_schedule(cat5)
    with pytest.raises(NotBijectiveError):
        conjugate(cat5, np.zeros(25, dtype=int))


def test_system_distance_examples(cat5):
    assert system_distance(cat5, cat5).p == 0
    I, R = zoo_system("identity", q=5), zoo_system("rotation", q=5)
    cmp = system_distance(I, R)
    assert cmp.p == Fraction(1, 5)
    assert cmp.eta_sup_forward == cmp.eta_sup_backward == Fraction(1, 5)
    with pytest.raises(ValueError):
        system_distance(I, cat5)


def test_eta_asymmetry_on_custom_space():
    # 4 points on a segment with steps of 1/4
    T = custom_space([[Fraction(abs(i - j), 4) for j in range(4)] for i in range(4)])
    f, g = [0, 1, 3, 2], [0, 2, 3, 1]
    F = make_system(T, [], [f])
    G = make_system(T, [], [g])
    cmp = system_distance(F, G)
    fi, gi = np.argsort(f), np.argsort(g)
    fwd = max(oracles.d(T, f[x], g[x]) for x in range(4))
    bwd = max(oracles.d(T, int(fi[x]), int(gi[x])) for x in range(4))
    assert (cmp.eta_sup_forward, cmp.eta_sup_backward) == (fwd, bwd) == (Fraction(1, 4), Fraction(1, 2))
    assert cmp.p == Fraction(1, 2)


def test_bounded_metric_caps_eta():
    T = custom_space([[0, 3], [3, 0]])
    F = make_system(T, [], [[0, 1]])
    G = make_system(T, [], [[1, 0]])
    assert system_distance(F, G).p == 1


def test_system_distance_horizon_must_cover_span():
    F = zoo_system("cat_iso", q=3, depth=4)
    with pytest.raises(ValueError, match="does not cover"):
        system_distance(F, zoo_system("cat", q=3), horizon_n=2)


def naive_modulus(F, eps, horizon):
    S = F.space
    bad_pairs = []
    for m in range(horizon + 1):
        for n in range(m, horizon + 1):
            for direction in ("fwd", "inv"):
                for x in S.points:
                    for y in S.points:
                        wx, wy = window(F, m, n, x, direction), window(F, m, n, y, direction)
                        if oracles.d(S, wx, wy) >= eps:
                            bad_pairs.append(oracles.d(S, x, y))
    cap = min(bad_pairs) if bad_pairs else eps
    return min(eps, cap)


@pytest.mark.parametrize(
    "name,params,eps,expected",
    [
        ("cat", {"q": 5}, Fraction(1, 5), Fraction(1, 5)),
        ("cat", {"q": 5}, Fraction(2, 5), Fraction(1, 5)),
        ("cat", {"q": 5}, Fraction(3, 5), Fraction(3, 5)),
        ("cat", {"q": 7}, Fraction(3, 7), Fraction(1, 7)),
        ("rotation", {"q": 8}, Fraction(3, 8), Fraction(3, 8)),
        ("identity", {"q": 5}, Fraction(1, 5), Fraction(1, 5)),
    ],
)
def test_equicontinuity_modulus(name, params, eps, expected):
    F = zoo_system(name, **params)
    got = equicontinuity_modulus(F, eps, 4)
    assert got == expected
    assert got == naive_modulus(F, eps, 4)


def test_modulus_matches_naive_on_small_systems():
    rng = random.Random(5)
    for space in [circle(5), circle(6), torus2d(3)]:
        F = oracles.random_permutation_system(rng, space)
        for eps in space.distance_values:
            assert equicontinuity_modulus(F, eps, 3) == naive_modulus(F, eps, 3)


def test_permutation_csv(tmp_path):
    S = circle(3)
    p = tmp_path / "perm.csv"
    p.write_text("point,image\n0,2\n1,0\n2,1\n")
    assert load_permutation_csv(p, S).forward.tolist() == [2, 0, 1]
    p.write_text("point,image\n0,2\n1,2\n2,1\n")
    with pytest.raises(NotBijectiveError):
        load_permutation_csv(p, S)


def _spaces():
    return st.sampled_from([circle(4), circle(5), circle(7), torus2d(2), torus2d(3)])


@given(space=_spaces(), seed=st.integers(0, 10**6))
def test_composition_against_naive_walk(space, seed):
    F = oracles.random_permutation_system(random.Random(seed), space)
    for n in range(-6, 7):
        tm = F.time_map(n)
        for x in space.points:
            assert tm[x] == oracles.F_n(F, n, x)
    for m in range(6):
        assert np.array_equal(F.time_map(m + 1), F.table(m + 1).forward[F.time_map(m)])
    inv = invert(F)
    for n in range(-6, 7):
        assert np.array_equal(inv.time_map(n), F.time_map(-n))


@given(space=_spaces(), seed=st.integers(0, 10**6), k=st.integers(1, 4))
def test_power_forward_times(space, seed, k):
    F = oracles.random_permutation_system(random.Random(seed), space)
    G = power(F, k)
    for n in range(0, 5):
        assert np.array_equal(G.time_map(n), F.time_map(n * k))


@given(space=_spaces(), seed=st.integers(0, 10**6), k=st.integers(1, 3))
def test_commuting_schedules_inverse_coherence(space, seed, k):
    F = oracles.random_commuting_system(random.Random(seed), space)
    for n in range(0, 7):
        assert np.array_equal(F.time_map(-n)[F.time_map(n)], np.arange(space.size))
    G = power(F, k)
    for n in range(-3, 4):
        assert np.array_equal(G.time_map(n), F.time_map(n * k))


@given(space=_spaces(), seed=st.integers(0, 10**6))
def test_conjugacy_equivariance(space, seed):
    rng = random.Random(seed)
    F = oracles.random_permutation_system(rng, space)
    perm = list(range(space.size))
    rng.shuffle(perm)
    h = MapTable(space, perm)
    Fc = conjugate(F, h)
    for n in range(-4, 5):
        assert np.array_equal(Fc.time_map(n), h.backward[F.time_map(n)[h.forward]])


@given(space=_spaces(), seed=st.integers(0, 10**6))
def test_system_distance_pseudometric(space, seed):
    rng = random.Random(seed)
    F, G, H = (oracles.random_permutation_system(rng, space) for _ in range(3))
    fg, gf = system_distance(F, G).p, system_distance(G, F).p
    assert fg == gf
    assert system_distance(F, H).p <= fg + system_distance(G, H).p
    assert 0 <= fg <= 1
    assert system_distance(F, F).p == 0


def test_commuting_zoo_inverse_coherence():
    for name in zoo_names():
        F = zoo_system(name, q=5)
        for n in range(9):
            assert np.array_equal(F.time_map(-n)[F.time_map(n)], np.arange(F.space.size)), (name, n)


def test_noncommuting_schedule_literal_negative_times():
    # negative times apply f_1^-1 first, so F_-n need not invert F_n
    S = circle(3)
    F = make_system(S, [], [[1, 0, 2], [0, 2, 1]])
    f1, f2 = F.table(1), F.table(2)
    assert np.array_equal(F.time_map(-2), f2.backward[f1.backward])
    assert not np.array_equal(F.time_map(-2)[F.time_map(2)], np.arange(3))
