"""Exact verification of twisted periodicity for the truncated Y-system.

Modules: ``scalar`` (rationals), ``lattice`` (indices), ``ysystem``,
``zsystem``, ``gamma`` (edge variables), ``connection`` (transport) and
``harness`` / ``cli`` (batch runs).
"""
from .errors import YPeriodError
from .lattice import PlanePoint, Site, SystemShape

__version__ = "0.1.0"

__all__ = ["PlanePoint", "Site", "SystemShape", "YPeriodError", "__version__"]
