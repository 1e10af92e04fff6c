"""Non-autonomous dynamics on finite metric spaces with discrete measures.

Exact rational metrics, eventually periodic schedules of bijections, and
finite-horizon checks of expansiveness, shadowing, persistence and
stability of measures.
"""

from .asymptotics import (
    TailWindow,
    aperiodicity_verdict,
    converging_set,
    limit_set,
    nonwandering_report,
    nonwandering_set,
    periodic_points,
    semiorbit_cell,
    transitive_points,
)
from .expansive import (
    OpenCover,
    dynamical_ball,
    expansive_verdict,
    generator_from_constant,
    is_mu_generator,
    lebesgue_number,
)
from .measure import GridMeasure, make_measure, mass, measure_predicate, pushforward
from .metric_space import FiniteMetricSpace, PointSet, as_length, ball, build_space, circle, distance, torus2d
from .shadowing import (
    PseudoOrbit,
    is_pseudo_orbit,
    perturb_system,
    persistence_verdict,
    shadowing_point,
    shadowing_verdict,
)
from .stability import refinement_sequence, stability_check, stability_map, walters_pipeline
from .system import (
    MapTable,
    TimeVaryingSystem,
    conjugate,
    equicontinuity_modulus,
    evaluate,
    invert,
    make_system,
    power,
    restrict,
    system_distance,
    window,
)
from .zoo import zoo_system

__version__ = "0.1.0"
