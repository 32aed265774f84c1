"""Numerical laboratory for saddle-node unfoldings of circle maps."""
__version__ = "0.1.0"

from .circle import CircleInterval, circle_dist, wrap
from .families import MapFamily, ParameterRangeError, verify_hypotheses
from .measures import EmpiricalMeasure, histogram_measure, w1_circle, w1_to_dirac
from .normal_form import NormalFormField, flow, hitting_time, transition_map
from .orbits import NoiseKernel, OrbitRecord, iterate_orbit, lyapunov_exponent, random_orbit
from .ulam import build_ulam, averaged_ulam, invariant_density

__all__ = [
    "CircleInterval", "circle_dist", "wrap", "MapFamily", "ParameterRangeError",
    "verify_hypotheses", "EmpiricalMeasure", "histogram_measure", "w1_circle", "w1_to_dirac",
    "NormalFormField", "flow", "hitting_time", "transition_map", "NoiseKernel", "OrbitRecord",
    "iterate_orbit", "lyapunov_exponent", "random_orbit", "build_ulam", "averaged_ulam",
    "invariant_density",
]
