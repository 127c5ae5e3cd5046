"""Bessel heat semigroup on the half-line, parabolic Riesz transforms and
numerical checks of their boundedness.

Submodules: ``specfun`` (Gamma, erf, Bessel functions), ``kernels`` (heat and
Riesz kernels), ``hankel`` (spectral operators), ``pv_singular``
(principal-value evaluation), ``solvers`` (heat-equation solvers),
``analysis`` (norms, weights, kernel-bound sampling, region sweeps) and
``cli``.
"""

from ._backend import BACKEND
from .analysis import WeightSpec, cz_verify, opnorm_sweep
from .bumps import Bump, bump_suite
from .hankel import Field, RadialGrid, TimeGrid, op_L, op_R_spectral, op_Rtilde_spectral
from .kernels import heat_kernel_bessel, kernel_K, kernel_Ktilde
from .pv_singular import pv_R, pv_Rtilde
from .solvers import CauchyProblem, solve_cauchy, solve_wholespace
from .specfun import BesselOrder, bessel_i_scaled, bessel_j

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BesselOrder",
    "Bump",
    "CauchyProblem",
    "Field",
    "RadialGrid",
    "TimeGrid",
    "WeightSpec",
    "bessel_i_scaled",
    "bessel_j",
    "bump_suite",
    "cz_verify",
    "heat_kernel_bessel",
    "kernel_K",
    "kernel_Ktilde",
    "op_L",
    "op_R_spectral",
    "op_Rtilde_spectral",
    "opnorm_sweep",
    "pv_R",
    "pv_Rtilde",
    "solve_cauchy",
    "solve_wholespace",
]
