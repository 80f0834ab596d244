"""Gaussian thermostats as W-flows of Weyl connections.

A numerical laboratory for thermostatted dynamics on chart-based manifolds:
Weyl connection coefficients and sectional curvatures, isokinetic and
isoenergetic flows, linearized (Jacobi) dynamics with Lyapunov spectra, and
the thermostatted Lorentz gas with circular scatterers.
"""

__version__ = "0.1.0"

from . import billiards, fields, flows, geometry, metrics, presets, tangent  # noqa: F401
from .errors import WeylflowError  # noqa: F401
from .scenario import (  # noqa: F401
    WeylScenario,
    constant_curvature_scenario,
    flat_torus_scenario,
    product_scenario,
)
