"""Steady-state phonon cooling of a laser-driven quantum dot in a phonon cavity.

Dressed-state master equation with and without the fast-term (beyond-secular)
corrections, a reduced six-variable steady-state solver, brute-force
Liouvillian oracles, and detuning sweeps of <n> and g2(0).
"""

from .model import DressedParams, ModelParams, dress, thermal_occupation
from .reduced import ReducedGenerator, SteadyState, assemble, solve_adaptive, solve_steady
from .statistics import PhononStats, observables

__all__ = [
    "DressedParams",
    "ModelParams",
    "PhononStats",
    "ReducedGenerator",
    "SteadyState",
    "assemble",
    "dress",
    "observables",
    "solve_adaptive",
    "solve_steady",
    "thermal_occupation",
]

__version__ = "0.1.0"
