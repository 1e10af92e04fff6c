"""The cat map on a 5x5 torus grid: dynamical balls shrink to points.

Run: python3 demos/cat_map_expansive.py
"""

from nadyn import dynamical_ball, expansive_verdict, make_measure, zoo_system
from nadyn.metric_space import ball

F = zoo_system("cat", q=5)
S = F.space
mu = make_measure(S)
x = S.point_at(1, 2)

print(f"carrier {S.name}: {S.size} points, diameter {S.diameter}")
print(f"closed 1/5-ball around {tuple(int(c) for c in S.coords[x])}: {len(ball(S, x, '1/5', closed=True))} points")
for N in range(4):
    size = len(dynamical_ball(F, x, "1/5", N))
    print(f"  dynamical ball at horizon {N}: {size} point(s)")

rep = expansive_verdict(F, mu, None, 4)
print(f"\nlargest delta with every dynamical ball null: {rep.constant}")
for delta, (m, pt, _) in rep.table.items():
    status = "null" if m <= rep.tau else "heavy"
    print(f"  delta={delta}: worst mass {m} at point {pt} ({status})")

dirac = make_measure(S, "dirac", point=S.point_at(0, 0))
print(f"\nsame map, point mass at the fixed point: verdict {expansive_verdict(F, dirac, None, 4).verdict}")
