"""Physical parameters and the dressed-state transformation.

All rates and frequencies are dimensionless, measured in units of a single
reference rate chosen by the caller (``unit_scale`` in a run config). The
only place physical constants enter is :func:`thermal_occupation`.

Dressed basis of the laser-driven dot, in the frame rotating at the laser
frequency::

    |+> = sin(theta)|g> + cos(theta)|e>
    |-> = cos(theta)|g> - sin(theta)|e>

with ``tan(2 theta) = 2 Omega / Delta``. The dot-phonon coupling
``g |e><e| (b + b^dag)`` splits into a resonant exchange
``-g sin(2 theta)/2 (b^dag R- + R+ b)`` that oscillates at
``omega_ph - 2 Omega_bar`` and fast terms at ``omega_ph`` and
``omega_ph + 2 Omega_bar``. Second-order averaging of the fast terms leaves a
level shift ``-delta_bar R_z`` and a dispersive term ``beta b^dag b R_z``;
the secular treatment drops both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

#: 2 Omega_bar must exceed this multiple of gamma for the dissipator secular
#: approximation to be trusted.
SECULAR_RATIO = 10.0
#: g must stay below Omega_bar / PERTURBATIVE_RATIO for the fast-term
#: averaging to be trusted.
PERTURBATIVE_RATIO = 2.0


@dataclass(frozen=True)
class ModelParams:
    """Raw inputs of the driven dot + phonon mode model.

    ``delta`` is the dot-laser detuning ``omega_qd - omega_L``.
    """

    omega_ph: float
    delta: float
    rabi: float
    g: float
    gamma: float
    gamma_c: float
    kappa: float
    nbar: float

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.omega_ph <= 0:
            raise ValueError("omega_ph must be positive")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        for name in ("rabi", "g", "gamma", "gamma_c", "nbar"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DressedParams:
    theta: float
    omega_bar: float
    delta_bar: float
    beta: float
    gamma_plus: float
    gamma_minus: float
    gamma_0: float
    effective_detuning: float
    secular: bool
    coupling: float
    warnings: tuple[str, ...] = field(default=())

    @property
    def coherence_decay(self) -> float:
        """Decay rate of the dressed coherence rho_{+-} from the dot dissipators."""
        return self.gamma_plus + self.gamma_minus + 4.0 * self.gamma_0


def thermal_occupation(omega_ph: float, temperature: float, hbar_over_kB: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(hbar omega / k_B T) - 1)``.

    ``hbar_over_kB`` converts ``omega_ph * 1/temperature`` into the
    dimensionless exponent; pass ``7.638232577e-12`` (K s) for omega in rad/s
    and T in kelvin. ``T = 0`` returns 0.
    """
    if omega_ph <= 0:
        raise ValueError("omega_ph must be positive")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    x = hbar_over_kB * omega_ph / temperature
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def mixing_angle(delta: float, rabi: float) -> float:
    # atan2 continues arctan(2 Omega / Delta)/2 onto (pi/4, pi/2) for Delta < 0
    if rabi == 0 and delta == 0:
        raise ValueError("mixing angle undefined for rabi = 0 and delta = 0")
    return 0.5 * math.atan2(2.0 * rabi, delta)


def dress(params: ModelParams, secular: bool) -> DressedParams:
    """Dressed-state quantities for ``params``.

    With ``secular=True`` the fast-term corrections ``delta_bar`` and ``beta``
    are zero; every other field is identical between the two regimes.
    Regime-validity problems are reported in ``warnings`` and never raised.
    """
    theta = mixing_angle(params.delta, params.rabi)
    omega_bar = math.sqrt(params.rabi**2 + (params.delta / 2.0) ** 2)
    s2 = math.sin(2.0 * theta)
    c2 = math.cos(2.0 * theta)
    c, s = math.cos(theta), math.sin(theta)
    gamma, gamma_c = params.gamma, params.gamma_c

    gamma_plus = gamma * c**4 + 0.25 * gamma_c * s2**2
    gamma_minus = gamma * s**4 + 0.25 * gamma_c * s2**2
    gamma_0 = 0.25 * (gamma * s2**2 + gamma_c * c2**2)

    if secular:
        delta_bar = 0.0
        beta = 0.0
    else:
        g2 = params.g**2
        sideband = 4.0 * (params.omega_ph + 2.0 * omega_bar)
        delta_bar = 0.5 * g2 * (c2 / params.omega_ph - s2**2 / sideband)
        beta = g2 * s2**2 / sideband

    notes = []
    if 2.0 * omega_bar <= SECULAR_RATIO * gamma:
        notes.append(
            f"dissipator secular approximation strained: 2*omega_bar={2 * omega_bar:.6g} "
            f"<= {SECULAR_RATIO:g}*gamma"
        )
    if params.g >= omega_bar / PERTURBATIVE_RATIO:
        notes.append(
            f"fast-term perturbation strained: g={params.g:.6g} >= omega_bar/{PERTURBATIVE_RATIO:g}"
        )

    return DressedParams(
        theta=theta,
        omega_bar=omega_bar,
        delta_bar=delta_bar,
        beta=beta,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        gamma_0=gamma_0,
        effective_detuning=params.omega_ph - 2.0 * omega_bar,
        secular=secular,
        coupling=0.5 * params.g * s2,
        warnings=tuple(notes),
    )
