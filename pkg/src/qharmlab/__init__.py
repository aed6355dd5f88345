"""Numerical laboratory for q-harmonic functions of fractional Schrodinger operators.

The package estimates and verifies, at desk scale, the kernel identities,
coupling constructions, gradient bounds and spectral facts surrounding the
operator ``L = -(-Laplace)^(alpha/2) + q`` on bounded domains for stability
index alpha in (0, 1]: closed-form Green/Poisson kernels, subordinated
Brownian path sampling with reflection coupling, Feynman-Kac gauge and
q-harmonic evaluation, a collocation eigensolver, and executable inequality
harnesses with CSV/JSON/figure reports.
"""

__version__ = "0.1.0"

from .params import BallSpec, ReflectionFrame, StableParams
from .domains import BallDomain, BallUnionDomain, BoxDomain, IntervalDomain, WholeSpace
from .potentials import (
    BoundaryData,
    PotentialSpec,
    constant_data,
    constant_potential,
    counterexample_potential,
    holder_cusp_potential,
    indicator_data,
    interval_far_side_data,
    parabolic_cap_potential,
    smooth_bump_potential,
    zero_potential,
)
from .sampling import McEstimate

__all__ = [
    "__version__",
    "StableParams", "BallSpec", "ReflectionFrame",
    "IntervalDomain", "BallDomain", "BoxDomain", "BallUnionDomain", "WholeSpace",
    "PotentialSpec", "BoundaryData", "McEstimate",
    "zero_potential", "constant_potential", "counterexample_potential",
    "smooth_bump_potential", "parabolic_cap_potential", "holder_cusp_potential",
    "constant_data", "indicator_data", "interval_far_side_data",
]
