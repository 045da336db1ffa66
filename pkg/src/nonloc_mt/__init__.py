"""Nonlocal functionals I_{delta,p}, J_delta and numerical checks of the
inequalities and counterexamples built on them.

Typical use::

    from nonloc_mt import Interval, Linear, NonlocalParams, i_delta
    i_delta(Linear((1.0,)), Interval(0, 1), NonlocalParams(1, 2.0, 0.1)).value  # 0.81
"""
from .errors import (BudgetViolated, DiagonalSingularity, HighVariance, LevelSetResolutionFailure,
                     NoConvergence, NonlocError, OutsideDomain, QuadratureMismatch, SingularPoint)
from .fields import (Affine, Constant, Estimate, GridSample, Indicator, Linear, LogLog, Moser,
                     RadialProfile, Reflected, ScalarField, Scaled, Truncated, eval_field, mean,
                     superlevel_measure, superlevel_measures)
from .functional import (NonlocalParams, PowerTail, RescaledIndicator, bbm_functional, i_delta,
                         i_delta_exact_1d, i_delta_mc, i_delta_radial, sphere_constant,
                         sphere_constant_closed, sphere_constant_quadrature)
from .geometry import Ball, Box, Interval, SamplerConfig, measure

__version__ = "0.1.0"

__all__ = [
    "Affine", "Ball", "Box", "BudgetViolated", "Constant", "DiagonalSingularity", "Estimate",
    "GridSample", "HighVariance", "Indicator", "Interval", "LevelSetResolutionFailure", "Linear",
    "LogLog", "Moser", "NoConvergence", "NonlocError", "NonlocalParams", "OutsideDomain",
    "PowerTail", "QuadratureMismatch", "RadialProfile", "Reflected", "RescaledIndicator",
    "SamplerConfig", "ScalarField", "Scaled", "SingularPoint", "Truncated", "bbm_functional",
    "eval_field", "i_delta", "i_delta_exact_1d", "i_delta_mc", "i_delta_radial", "mean", "measure",
    "sphere_constant", "sphere_constant_closed", "sphere_constant_quadrature",
    "superlevel_measure", "superlevel_measures",
]
