"""Expansive plus persistent gives stable: the full pipeline on two cat maps.

Run: python3 demos/stability_pipeline.py
"""

from nadyn import make_measure, perturb_system, system_distance, walters_pipeline, zoo_system
from nadyn.stability import refinement_sequence

for q in (5, 7):
    F = zoo_system("cat", q=q)
    rep = walters_pipeline(F, make_measure(F.space), "2/5", trials=20, seed=0)
    print(f"cat({q}): verdict {rep.verdict} ({rep.reason})")
    print(f"  expansive constant e = {rep.e}, tracking radius eps' = {rep.eps_prime}, delta = {rep.delta}")
    print(f"  largest H(x) over 20 perturbations: {rep.max_H_size}")

F = zoo_system("cat", q=5)
G = perturb_system(F, "2/5", 3)
print(f"\none perturbation: p(F, G) = {system_distance(F, G).p}")
chain = refinement_sequence(F, G, "1/5", 7, 4)
print("H_m(7) sizes as more times constrain the tracker:", [len(s) for s in chain])
