"""Tail limits of scaled random structures away from a removed cone.

Samplers for heavy-tailed generators, cone-aware transforms, computable
metrics between point measures, closed-form limit oracles, and a Monte
Carlo harness that checks the scaled tail probabilities against them.
"""

from .errors import (AtomCapError, ConfigError, DimensionMismatchError,
                     DomainError, HrvError, NumericFailureError,
                     UnsupportedPairingError)
from .harness import (EstimateRecord, ExperimentSpec, convergence_sweep,
                      estimate, portmanteau_bracket, smalljump_sup_sweep,
                      write_csv)
from .measures import (M0Result, PointMeasure, bounded_lipschitz, empirical,
                       load_point_measure, m0_distance, prohorov, restrict,
                       save_point_measure)
from .oracles import (Family, IidRect, JumpSet, LimitMeasureId, OrderedRect,
                      SumTail, TestSet, homogeneity_check, mu_iid_rect,
                      mu_levy_jumpset, mu_poisson_ordered, mu_sum_tail,
                      nu_alpha_tail, oracle_value, spacing_factor,
                      spacing_probability_mc)
from .samplers import (LevyConfig, LevyPathSample, ScalingFunction, TailModel,
                       compensator, pareto_quantile, rng_for,
                       sample_compound_poisson, sample_iid_vector,
                       sample_levy_path, sample_pareto, sample_poisson_points)
from .spaces import (ConeSpec, FiniteVector, StepFunction, TruncatedSequence,
                     at_most_j_positive, axes_cone, d_euclidean, d_inf,
                     d_inf_prime, d_p, d_sk_step, dist_to_cone,
                     half_plane_floor, kth_largest_jump, origin_cone,
                     seq_at_most_j_positive, step_at_most_j_jumps)
from .transforms import (PolarPair, ScalarAction, apply_scaling, cumsum,
                         gpolar, gpolar_inv, polar, polar_inv, proj, t_m)

__version__ = "0.1.0"

__all__ = [
    "AtomCapError", "ConfigError", "DimensionMismatchError", "DomainError",
    "HrvError", "NumericFailureError", "UnsupportedPairingError",
    "EstimateRecord", "ExperimentSpec", "convergence_sweep", "estimate",
    "portmanteau_bracket", "smalljump_sup_sweep", "write_csv",
    "M0Result", "PointMeasure", "bounded_lipschitz", "empirical",
    "load_point_measure", "m0_distance", "prohorov", "restrict",
    "save_point_measure",
    "Family", "IidRect", "JumpSet", "LimitMeasureId", "OrderedRect",
    "SumTail", "TestSet", "homogeneity_check", "mu_iid_rect",
    "mu_levy_jumpset", "mu_poisson_ordered", "mu_sum_tail", "nu_alpha_tail",
    "oracle_value", "spacing_factor", "spacing_probability_mc",
    "LevyConfig", "LevyPathSample", "ScalingFunction", "TailModel",
    "compensator", "pareto_quantile", "rng_for", "sample_compound_poisson",
    "sample_iid_vector", "sample_levy_path", "sample_pareto",
    "sample_poisson_points",
    "ConeSpec", "FiniteVector", "StepFunction", "TruncatedSequence",
    "at_most_j_positive", "axes_cone", "d_euclidean", "d_inf", "d_inf_prime",
    "d_p", "d_sk_step", "dist_to_cone", "half_plane_floor",
    "kth_largest_jump", "origin_cone", "seq_at_most_j_positive",
    "step_at_most_j_jumps",
    "PolarPair", "ScalarAction", "apply_scaling", "cumsum", "gpolar",
    "gpolar_inv", "polar", "polar_inv", "proj", "t_m",
    "__version__",
]
