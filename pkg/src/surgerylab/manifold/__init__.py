"""Riemannian metrics, cutoffs, graph discretizations and curvature bookkeeping."""
from .cutoff import DomainError, bump, cutoff_phi, cutoff_psi
from .radial import (RadialMetric, SphereCheck, geodesic_sphere_check,
                     metric_c2_deviation, mollify_ball_metric)
from .metrics import (ConformalSphere, RevolutionMetric, RoundSphere,
                      metric_from_description, radial_ball, warped_cylinder)
from .sampled import (DisconnectedGraphError, ResolutionError, RingLayout,
                      SampledManifold, fibonacci_sphere, geodesic_distance,
                      graded_nodes, injectivity_radius_proxy, min_distance_between,
                      sample_manifold, sample_rings, sample_sphere)
from .curvature import ScalarCurvatureLedger, scale_scalar_curvature

__all__ = [
    "DomainError", "bump", "cutoff_phi", "cutoff_psi",
    "RadialMetric", "SphereCheck", "geodesic_sphere_check", "metric_c2_deviation",
    "mollify_ball_metric",
    "ConformalSphere", "RevolutionMetric", "RoundSphere", "metric_from_description",
    "radial_ball", "warped_cylinder",
    "DisconnectedGraphError", "ResolutionError", "RingLayout", "SampledManifold",
    "fibonacci_sphere", "geodesic_distance", "graded_nodes", "injectivity_radius_proxy",
    "min_distance_between", "sample_manifold", "sample_rings", "sample_sphere",
    "ScalarCurvatureLedger", "scale_scalar_curvature",
]
