"""Closed-form reduced dynamics of the two-level system.

Each map sends the state at an element's last reset to the state after an
accumulated decoherence exponent g and an accumulated control pulse area I.
These are not step-by-step propagators: g and I are the total effects since
the reset, and the maps are evaluated directly at those totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .kernels import Regime
from .state import Component, DensityMatrix

# Thermal off-diagonal variants. "consistent" keeps the zero-control limit
# rho12 -> rho12 * e^-g exact (identity map at g = I = 0). "folded" reproduces
# the variant where Im{rho12(0)} enters the real part through cos(2I), which
# contradicts that limit (rho12 -> Re+Im at g = I = 0); kept for comparison.
THERMAL_CONSISTENT = "consistent"
THERMAL_FOLDED = "folded"


@dataclass(frozen=True)
class EvolutionInput:
    """State at the element's last reset plus accumulated (g, I) since then."""

    rho0: DensityMatrix
    g: float
    pulse_area: float

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g!r}")
        if not math.isfinite(self.pulse_area):
            raise ValueError(f"pulse_area must be finite, got {self.pulse_area!r}")


def evolve_adiabatic(rho0: DensityMatrix, g: float, pulse_area: float) -> DensityMatrix:
    """Dephasing-regime map: off-diagonals damped by e^-g, control rotates populations."""
    c = math.cos(pulse_area)
    s = math.sin(pulse_area)
    cs = c * s
    eg = math.exp(-g)
    r11, r12, r21, r22 = rho0.rho11, rho0.rho12, rho0.rho21, rho0.rho22
    return DensityMatrix(
        rho11=r11 * c * c + r22 * s * s - 1j * (r12 - r21) * eg * cs,
        rho12=r12 * eg * c * c + r21 * eg * s * s + 1j * (r22 - r11) * cs,
        rho21=r21 * eg * c * c + r12 * eg * s * s - 1j * (r22 - r11) * cs,
        rho22=r22 * c * c + r11 * s * s + 1j * (r12 - r21) * eg * cs,
    )


def evolve_thermal(
    rho0: DensityMatrix,
    g: float,
    pulse_area: float,
    variant: str = THERMAL_CONSISTENT,
    hermitize: bool = False,
) -> DensityMatrix:
    """Dissipation-regime map; all elements relax, control enters via cos/sin(2I)."""
    c2 = math.cos(2.0 * pulse_area)
    s2 = math.sin(2.0 * pulse_area)
    eg = math.exp(-g)
    e2g = math.exp(-2.0 * g)
    r11, r12, r21, r22 = rho0.rho11, rho0.rho12, rho0.rho21, rho0.rho22
    d = r11 - r22
    n11 = 0.5 * (1.0 + d * e2g * c2 - 1j * (r12 - r21) * eg * s2)
    n22 = 0.5 * (1.0 - d * e2g * c2 + 1j * (r12 - r21) * eg * s2)
    if variant == THERMAL_CONSISTENT:
        n12 = complex(r12.real, r12.imag * c2) * eg - 0.5j * d * e2g * s2
        n21 = complex(r21.real, r21.imag * c2) * eg + 0.5j * d * e2g * s2
    elif variant == THERMAL_FOLDED:
        n12 = (r12.real + r12.imag * c2) * eg - 0.5j * d * e2g * s2
        n21 = (r21.real + r21.imag * c2) * eg + 0.5j * d * e2g * s2
    else:
        raise ValueError(f"unknown thermal variant {variant!r}")
    out = DensityMatrix(n11, n12, n21, n22)
    return out.hermitized() if hermitize else out


def zero_control_adiabatic(rho0: DensityMatrix, g: float) -> DensityMatrix:
    """Pure dephasing: diagonals untouched, off-diagonals damped by e^-g.

    Defined as the full map at I = 0 so the two agree bit for bit.
    """
    return evolve_adiabatic(rho0, g, 0.0)


def zero_control_thermal(rho0: DensityMatrix, g: float) -> DensityMatrix:
    """Free relaxation toward the maximally mixed diagonal."""
    e2g = math.exp(-2.0 * g)
    eg = math.exp(-g)
    d = rho0.rho11 - rho0.rho22
    return DensityMatrix(
        rho11=0.5 * (1.0 + e2g * d),
        rho12=rho0.rho12 * eg,
        rho21=rho0.rho21 * eg,
        rho22=0.5 * (1.0 - e2g * d),
    )


def evolve(
    rho0: DensityMatrix,
    g: float,
    pulse_area: float,
    regime: Regime,
    variant: str = THERMAL_CONSISTENT,
    hermitize: bool = False,
) -> DensityMatrix:
    if regime is Regime.ADIABATIC:
        return evolve_adiabatic(rho0, g, pulse_area)
    return evolve_thermal(rho0, g, pulse_area, variant=variant, hermitize=hermitize)


def zero_control(rho0: DensityMatrix, g: float, regime: Regime) -> DensityMatrix:
    if regime is Regime.ADIABATIC:
        return zero_control_adiabatic(rho0, g)
    return zero_control_thermal(rho0, g)


def component_response(
    idx: Component,
    rho0: DensityMatrix,
    g: float,
    regime: Regime,
    variant: str = THERMAL_CONSISTENT,
) -> Callable[[float], float]:
    """Scalar response I -> component(evolve(rho0, g, I), idx).

    This is the single source of truth the pulse solver inverts; it evaluates
    the full map rather than re-deriving per-component formulas.
    """
    idx = Component(idx)

    def response(pulse_area: float) -> float:
        return evolve(rho0, g, pulse_area, regime, variant=variant).component(idx)

    return response
