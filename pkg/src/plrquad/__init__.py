"""Scrambled polynomial lattice rules and infinite-dimensional quadrature.

Base 2 throughout.  The main entry points are

- :func:`cbc_construct` for generating vectors,
- :func:`generate_points` and :func:`scramble` for point sets,
- :func:`plan_fixed` / :func:`plan_multilevel` with :class:`FixedAlgorithm`
  and :class:`MultilevelAlgorithm` for integrands of infinitely many variables,
- :func:`sweep` and :func:`fit_slope` for empirical convergence rates.
"""

from .cbc import MeritReport, Search, cbc_construct, scrambled_wce_squared, wce_squared
from .errors import (
    ConfigurationError,
    DimensionError,
    InsufficientReplicatesError,
    InvalidArgumentError,
    InvalidDepthError,
    InvalidModulusError,
    OutOfRegimeError,
    PlanError,
    PLRError,
    TooLargeError,
    UnsupportedWeightsError,
)
from .gfpoly import Poly, find_irreducible, is_irreducible, laurent_digits, poly_add, poly_mulmod
from .harness import ConvergenceRecord, fit_slope, read_records, rmse, sweep, write_records
from .infdim import (
    FixedAlgorithm,
    FixedPlan,
    MultilevelAlgorithm,
    MultilevelPlan,
    cost_fixed,
    cost_variable,
    fixed_estimate,
    level_integrand,
    ml_estimate,
    plan_fixed,
    plan_multilevel,
    truncate,
)
from .polylattice import GeneratingVector, PointSet, generate_points, net_strength
from .scramble import ScrambledPointSet, ScrambleSpec, quadrature, scramble
from .wspace import (
    ExplicitWeights,
    KernelSpace,
    PowerWeights,
    ProductIntegrand,
    exact_integral,
    integrand_eval,
    kernel_eval,
    norm_in_K,
    product_kernel_eval,
    theorem1_condition,
    truncated_integral,
)

__version__ = "0.1.0"
