"""Phonon-number statistics from a truncated Fock distribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:
    from .reduced import SteadyState

#: Below this mean occupation g2(0) is reported as undefined.
G2_UNDEFINED_BELOW = 1e-12
NORMALIZATION_TOL = 1e-8


@dataclass(frozen=True)
class PhononStats:
    mean_n: float
    g2: Optional[float]
    tail_mass: float
    distribution: np.ndarray

    @property
    def g2_defined(self) -> bool:
        return self.g2 is not None


def moments(distribution) -> tuple[float, float]:
    """Return ``(sum n P_n, sum n (n-1) P_n)`` over the retained levels."""
    p = np.asarray(distribution, dtype=float)
    n = np.arange(p.size, dtype=float)
    return float(n @ p), float((n * (n - 1.0)) @ p)


def phonon_stats(distribution, check_normalized: bool = True) -> PhononStats:
    p = np.real_if_close(np.asarray(distribution)).astype(float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-D array")
    total = float(p.sum())
    if check_normalized and abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"distribution not normalized: sum = {total!r}")
    mean_n, factorial2 = moments(p)
    g2 = factorial2 / mean_n**2 if mean_n >= G2_UNDEFINED_BELOW else None
    return PhononStats(mean_n=mean_n, g2=g2, tail_mass=float(p[-1]), distribution=p)


def observables(ss: "SteadyState") -> PhononStats:
    """Mean phonon number and g2(0) of a solved steady state."""
    return phonon_stats(ss.populations)


def thermal_distribution(nbar: float, n_max: int) -> np.ndarray:
    """Geometric law ``nbar^n / (1 + nbar)^(n+1)`` for ``n = 0..n_max`` (not renormalized)."""
    n = np.arange(n_max + 1)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))
