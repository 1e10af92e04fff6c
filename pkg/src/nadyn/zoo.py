"""Named example systems used by tests, scenarios and demos.

=========  ===========  =====================================================
name       carrier      schedule
=========  ===========  =====================================================
identity   circle(q)    every f_n is the identity
cat        torus2d(q)   constant (x, y) -> (2x + y, x + y) mod q
rotation   circle(q)    constant x -> x + step mod q
affine     circle(q)    f_n(x) = ((n mod (q-1)) + 1) * x mod q, q prime
cat_iso    torus2d(q)   point reflection at n = 1, 3, 6, 10, ... <= depth,
                        cat map elsewhere; cat map forever after depth
alternate  torus2d(q)   cat map at odd n, its inverse at even n
=========  ===========  =====================================================

The ``cat_iso`` isometry is the reflection ``p -> -p``.  It commutes with
the cat map, so every zoo schedule has commuting entries.
"""

from __future__ import annotations

import numpy as np

from .metric_space import FiniteMetricSpace, circle, torus2d
from .system import MapTable, TimeVaryingSystem

__all__ = ["ZOO", "cat_table", "is_prime", "translation", "zoo_names", "zoo_system"]


def is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, int(q**0.5) + 1))


def cat_table(space: FiniteMetricSpace, q: int) -> MapTable:
    a, b = space.coords[:, 0], space.coords[:, 1]
    return MapTable(space, ((2 * a + b) % q) * q + (a + b) % q)


def translation(space: FiniteMetricSpace, q: int, shift) -> MapTable:
    """Grid translation; an isometry of both grid carriers."""
    shift = np.atleast_1d(shift)
    c = (space.coords + shift[None, :]) % q
    if c.shape[1] == 1:
        return MapTable(space, c[:, 0])
    return MapTable(space, c[:, 0] * q + c[:, 1])


def _reflection(space: FiniteMetricSpace, q: int) -> MapTable:
    c = (-space.coords) % q
    return MapTable(space, c[:, 0] * q + c[:, 1])


def _identity(q: int) -> TimeVaryingSystem:
    """Identity maps on circle(q)."""
    space = circle(q)
    return TimeVaryingSystem(space, [], [MapTable.identity(space)], name=f"identity({q})")


def _cat(q: int) -> TimeVaryingSystem:
    """Constant cat map on torus2d(q)."""
    space = torus2d(q)
    return TimeVaryingSystem(space, [], [cat_table(space, q)], name=f"cat({q})")


def _rotation(q: int, step: int = 1) -> TimeVaryingSystem:
    """Constant rotation by ``step`` on circle(q)."""
    space = circle(q)
    return TimeVaryingSystem(space, [], [translation(space, q, step)], name=f"rotation({q},{step})")


def _affine(q: int) -> TimeVaryingSystem:
    """Multiplications by (n mod (q-1)) + 1 on circle(q), q an odd prime."""
    if not is_prime(q) or q < 3:
        raise ValueError("affine needs an odd prime q")
    space = circle(q)
    x = np.arange(q)
    cycle = [MapTable(space, (((n % (q - 1)) + 1) * x) % q) for n in range(1, q)]
    return TimeVaryingSystem(space, [], cycle, name=f"affine({q})")


def _cat_iso(q: int, depth: int = 10) -> TimeVaryingSystem:
    """Cat map with point reflections at triangular times up to ``depth``."""
    space = torus2d(q)
    cat = cat_table(space, q)
    iso = _reflection(space, q)
    triangular = set()
    k = 1
    while k * (k + 1) // 2 <= depth:
        triangular.add(k * (k + 1) // 2)
        k += 1
    prefix = [iso if n in triangular else cat for n in range(1, depth + 1)]
    return TimeVaryingSystem(space, prefix, [cat], name=f"cat_iso({q},{depth})")


def _alternate(q: int) -> TimeVaryingSystem:
    """Cat map and its inverse in turn on torus2d(q)."""
    space = torus2d(q)
    cat = cat_table(space, q)
    return TimeVaryingSystem(space, [], [cat, cat.inverse()], name=f"alternate({q})")


ZOO = {
    "identity": _identity,
    "cat": _cat,
    "rotation": _rotation,
    "affine": _affine,
    "cat_iso": _cat_iso,
    "alternate": _alternate,
}


def zoo_names() -> list[str]:
    return sorted(ZOO)


def zoo_system(name: str, **params) -> TimeVaryingSystem:
    """Build a named system, e.g. ``zoo_system('cat', q=5)``."""
    try:
        factory = ZOO[name]
    except KeyError:
        raise ValueError(f"unknown zoo system {name!r}; known: {', '.join(zoo_names())}") from None
    q = int(params.pop("q"))
    if q < 2:
        raise ValueError("zoo systems need q >= 2")
    return factory(q, **{k: int(v) for k, v in params.items()})
