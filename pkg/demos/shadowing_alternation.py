"""Shadowing of a system that alternates a reflection with its inverse.

Its square is the identity. Both fail or both pass together; at a
radius below the grid spacing every pseudo-orbit is a true orbit, so
both pass trivially.

Run: python3 demos/shadowing_alternation.py
"""

from nadyn import make_measure, power, shadowing_verdict, zoo_system
from nadyn.shadowing import persistence_verdict

F = zoo_system("alternate", q=5)
F2 = power(F, 2)
mu = make_measure(F.space)

for eps, delta in [("1/5", "1/5"), ("1/5", "2/5"), ("2/5", "2/5")]:
    a = shadowing_verdict(F, mu, eps, delta, trials=20, seed=0, N=4)
    b = shadowing_verdict(F2, mu, eps, delta, trials=20, seed=0, N=2)
    p = persistence_verdict(F, mu, eps, delta, trials=20, seed=0, N=4)
    print(f"eps={eps} delta={delta}: F shadows {a.verdict}, F^2 shadows {b.verdict}, F persistent {p.verdict}")
    if a.failures:
        kind, *rest = a.failures[0]
        print(f"  first witness ({kind}): best tracking distance {rest[-1]}")
