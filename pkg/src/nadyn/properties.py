"""Invariance properties checked by comparing verdicts of related systems.

Each function runs the owning module's verdict on a base system and on a
derived one (inverse, power, conjugate) and reports whether they agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .asymptotics import TailWindow, nonwandering_report, transitive_points
from .expansive import expansive_verdict
from .measure import GridMeasure, pushforward
from .metric_space import LengthLike, as_length
from .shadowing import perturbations, persistence_verdict
from .stability import stability_check
from .system import MapTable, TimeVaryingSystem, conjugate, equicontinuity_modulus, invert, power, system_distance

__all__ = [
    "InvarianceReport",
    "conjugacy_invariance",
    "inverse_invariance",
    "power_invariance",
    "thm510_check",
]


@dataclass
class InvarianceReport:
    verdict: bool
    pairs: dict[str, tuple] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "pairs": {k: [_plain(v) for v in pair] for k, pair in self.pairs.items()},
            "details": self.details,
        }


def _plain(v):
    return str(v) if isinstance(v, Fraction) else v


def inverse_invariance(
    F: TimeVaryingSystem, mu: GridMeasure, delta_grid=None, N: int = 4, tau: LengthLike | None = None
) -> InvarianceReport:
    """Expansiveness of F and of its inverse system agree (verdict and constant)."""
    a = expansive_verdict(F, mu, delta_grid, N, tau)
    b = expansive_verdict(invert(F), mu, delta_grid, N, tau)
    pairs = {"verdict": (a.verdict, b.verdict), "constant": (a.constant, b.constant)}
    return InvarianceReport(all(x == y for x, y in pairs.values()), pairs)


def power_invariance(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    e: LengthLike,
    k: int,
    N: int,
    tau: LengthLike | None = None,
    delta_grid=None,
) -> InvarianceReport:
    """Compare expansiveness of F and of ``F^k`` at horizon ``N // k``.

    Three comparisons: the overall verdicts on the grid agree; F expansive
    at ``e`` makes ``F^k`` expansive at the matched radius ``delta`` (the
    equicontinuity modulus of F at ``e``); and ``F^k`` expansive at
    ``delta`` makes F expansive at ``delta``.
    """
    e = as_length(e)
    if k < 1 or N // k < 1:
        raise ValueError("need k >= 1 and N // k >= 1")
    delta = equicontinuity_modulus(F, e, N)
    if delta is None:
        raise ValueError("no positive modulus at this eps")
    G = power(F, k)
    overall = (
        expansive_verdict(F, mu, delta_grid, N, tau).verdict,
        expansive_verdict(G, mu, delta_grid, N // k, tau).verdict,
    )
    at_e = expansive_verdict(F, mu, [e], N, tau).verdict
    powered = expansive_verdict(G, mu, [delta], N // k, tau).verdict
    back = expansive_verdict(F, mu, [delta], N, tau).verdict
    forward_ok = (not at_e) or powered
    converse_ok = (not powered) or back
    return InvarianceReport(
        overall[0] == overall[1] and forward_ok and converse_ok,
        {"verdict": overall},
        {"e": str(e), "delta": str(delta), "k": k, "horizon": N, "power_horizon": N // k,
         "base_at_e": at_e, "power_at_delta": powered, "base_at_delta": back,
         "forward_holds": forward_ok, "converse_holds": converse_ok},
    )


def conjugacy_invariance(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    h: MapTable,
    eps: LengthLike,
    delta: LengthLike,
    trials: int = 20,
    seed: int = 0,
    N: int = 4,
    tau: LengthLike | None = None,
    eps_prime: LengthLike | None = None,
    delta_grid=None,
) -> InvarianceReport:
    """Compare verdicts of F and ``h^-1 o F o h`` under the pushforward measure.

    Persistence and stability of the conjugate use the base perturbations
    conjugated by ``h``, so both sides see corresponding trials.
    """
    eps, delta = as_length(eps), as_length(delta)
    eps_prime = eps if eps_prime is None else as_length(eps_prime)
    Fc = conjugate(F, h)
    muc = pushforward(mu, h)
    ea = expansive_verdict(F, mu, delta_grid, N, tau)
    eb = expansive_verdict(Fc, muc, delta_grid, N, tau)
    base = perturbations(F, delta, trials, seed)
    mapped = [(s, conjugate(G, h)) for s, G in base]
    pa = persistence_verdict(F, mu, eps, delta, trials, seed, N, tau)
    pb = persistence_verdict(Fc, muc, eps, delta, trials, seed, N, tau, systems=mapped)
    sa = [stability_check(F, mu, G, eps, eps_prime, N, tau) for _, G in base]
    sb = [stability_check(Fc, muc, G, eps, eps_prime, N, tau) for _, G in mapped]
    pairs = {
        "expansive_verdict": (ea.verdict, eb.verdict),
        "expansive_constant": (ea.constant, eb.constant),
        "persistence": (pa.verdict, pb.verdict),
        "stability": (all(r.verdict for r in sa), all(r.verdict for r in sb)),
        "stability_conditions": ([r.conditions for r in sa], [r.conditions for r in sb]),
    }
    return InvarianceReport(
        all(x == y for x, y in pairs.values()),
        pairs,
        {"eps": str(eps), "eps_prime": str(eps_prime), "delta": str(delta),
         "trials": trials, "seed": seed, "horizon": N},
    )


def thm510_check(
    F: TimeVaryingSystem,
    mu: GridMeasure,
    eps: LengthLike,
    delta: LengthLike,
    trials: int = 20,
    seed: int = 0,
    N: int = 4,
    tau: LengthLike | None = None,
    radii=None,
    window: TailWindow | None = None,
    G: TimeVaryingSystem | None = None,
) -> InvarianceReport:
    """Persistent F plus a nearby G with transitive points of positive mass forces Ω(F) = X.

    ``G`` defaults to F itself (``p = 0``).  The verdict is the truth of the
    implication on this run; the pieces are reported separately.
    """
    eps, delta = as_length(eps), as_length(delta)
    G = F if G is None else G
    p = system_distance(F, G).p
    if p >= delta:
        raise ValueError(f"G is not delta-close: p = {p}")
    window = TailWindow.for_system(G) if window is None else window
    radii = [F.space.resolution] if radii is None else radii
    pers = persistence_verdict(F, mu, eps, delta, trials, seed, N, tau)
    trans = mu.mass(transitive_points(G, window))
    nw = nonwandering_report(F, radii, N)
    whole = len(nw.points) == F.space.size
    premise = pers.verdict and trans > 0
    return InvarianceReport(
        (not premise) or whole,
        {},
        {"persistence": pers.verdict, "transitive_mass": str(trans), "p": str(p),
         "nonwandering_is_whole": whole, "nonwandering_size": len(nw.points),
         "premise": premise, "horizon_sensitive": nw.horizon_sensitive},
    )
