"""A rotation is an isometry: nothing separates, so no radius works.

Run: python3 demos/rotation_isometry.py
"""

from nadyn import ball, dynamical_ball, equicontinuity_modulus, expansive_verdict, make_measure, zoo_system

for q in (5, 8):
    F = zoo_system("rotation", q=q)
    S = F.space
    mu = make_measure(S)
    print(f"rotation on {S.name}")
    for eps in S.distance_values:
        delta = equicontinuity_modulus(F, eps, 4)
        inside = all(ball(S, x, delta) <= dynamical_ball(F, x, eps, 4) for x in S.points)
        print(f"  eps={eps}: modulus {delta}, open balls inside dynamical balls: {inside}")
    rep = expansive_verdict(F, mu, None, 4)
    print(f"  expansive: {rep.verdict}; worst masses {[str(m) for m, _, _ in rep.table.values()]}\n")
