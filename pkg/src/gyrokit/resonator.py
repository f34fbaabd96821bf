"""Initial ring-resonator sizing from quasi-static microstrip formulas.

The slotted ring resonates when its electrical length plus the phase
inserted by the loading device adds up to an integer multiple of 2*pi:

    beta * l + phi_dev = 2 m pi,       l = (2*pi - alpha_gap) * r_mean

with beta = 2*pi / lambda_g and lambda_g = c / (f * sqrt(eps_e)).  The gap
plays two separate roles: ``alpha_fet`` is the geometric gap angle removed
from the ring circumference, ``fet_phase`` the electrical phase the loading
device inserts (default 0).  The effective permittivity comes from the
wide-trace microstrip closed form, valid for W/H >= 1; no dispersion model
is applied, which is all an initial sizing needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasiblePhaseError, InputError, OutsideValidityError

__all__ = [
    "C_LIGHT",
    "Substrate",
    "RingGeometry",
    "effective_permittivity",
    "microstrip_z0",
    "ring_geometry_for",
    "resonance_frequency",
]

C_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class Substrate:
    """Dielectric substrate: relative permittivity and height in meters."""

    eps_r: float
    height: float

    def __post_init__(self):
        if not (self.eps_r >= 1.0 and math.isfinite(self.eps_r)):
            raise InputError("eps_r must be finite and >= 1")
        if not (self.height > 0.0 and math.isfinite(self.height)):
            raise InputError("substrate height must be finite and > 0")


@dataclass(frozen=True)
class RingGeometry:
    """Physical ring dimensions: mean radius, trace width (m), gap angle (rad)."""

    r_mean: float
    trace_width: float
    alpha_fet: float = 0.0
    m: int = 1

    def __post_init__(self):
        if not (self.r_mean > 0.0 and math.isfinite(self.r_mean)):
            raise InputError("r_mean must be finite and > 0")
        if not (self.trace_width > 0.0 and math.isfinite(self.trace_width)):
            raise InputError("trace_width must be finite and > 0")
        if not (0.0 <= self.alpha_fet < 2.0 * math.pi):
            raise InputError("alpha_fet must lie in [0, 2*pi)")
        if self.m < 1:
            raise InputError("mode index m must be >= 1")

    @property
    def length(self) -> float:
        """Physical length of the slotted line, (2*pi - alpha_fet) * r_mean."""
        return (2.0 * math.pi - self.alpha_fet) * self.r_mean


def _ratio(sub: Substrate, trace_width: float) -> float:
    if not (trace_width > 0.0 and math.isfinite(trace_width)):
        raise InputError("trace_width must be finite and > 0")
    w_h = trace_width / sub.height
    if w_h < 1.0:
        raise OutsideValidityError(
            f"outside validity range: W/H = {w_h:.4g} < 1 (wide-trace formula)"
        )
    return w_h


def effective_permittivity(sub: Substrate, trace_width: float) -> float:
    """Quasi-static effective permittivity of a microstrip, W/H >= 1.

        eps_e = (eps_r + 1)/2 + (eps_r - 1)/2 * (1 + 12 H/W)^(-1/2)

    Always lies between 1 and eps_r.
    """
    w_h = _ratio(sub, trace_width)
    return (sub.eps_r + 1.0) / 2.0 + (sub.eps_r - 1.0) / 2.0 / math.sqrt(1.0 + 12.0 / w_h)


def microstrip_z0(sub: Substrate, trace_width: float) -> float:
    """Characteristic impedance of a wide microstrip (W/H >= 1), ohms.

        Z0 = 120 pi / (sqrt(eps_e) [W/H + 1.393 + (2/3) ln(W/H + 1.444)])
    """
    w_h = _ratio(sub, trace_width)
    eps_e = effective_permittivity(sub, trace_width)
    return 120.0 * math.pi / (
        math.sqrt(eps_e) * (w_h + 1.393 + (2.0 / 3.0) * math.log(w_h + 1.444))
    )


def ring_geometry_for(
    f_target: float,
    sub: Substrate,
    trace_width: float,
    alpha_fet: float = 0.0,
    fet_phase: float = 0.0,
    m: int = 1,
) -> RingGeometry:
    """Size a ring so its resonance lands on ``f_target`` (Hz).

    Solves beta * l + fet_phase = 2 m pi for the line length, then converts
    to mean radius via the gap angle.  Raises InfeasiblePhaseError when the
    phase budget leaves no positive length.
    """
    if not (f_target > 0.0 and math.isfinite(f_target)):
        raise InputError("f_target must be finite and > 0")
    eps_e = effective_permittivity(sub, trace_width)
    lambda_g = C_LIGHT / (f_target * math.sqrt(eps_e))
    beta = 2.0 * math.pi / lambda_g
    phase_budget = 2.0 * m * math.pi - fet_phase
    if phase_budget <= 0.0:
        raise InfeasiblePhaseError(
            f"infeasible phase budget: 2*{m}*pi - fet_phase = {phase_budget:.4g} <= 0"
        )
    length = phase_budget / beta
    return RingGeometry(
        r_mean=length / (2.0 * math.pi - alpha_fet),
        trace_width=trace_width,
        alpha_fet=alpha_fet,
        m=m,
    )


def resonance_frequency(
    g: RingGeometry,
    sub: Substrate,
    trace_width: float | None = None,
    fet_phase: float = 0.0,
) -> float:
    """Resonance frequency of a given ring, Hz.  Inverse of ring_geometry_for.

    ``trace_width`` defaults to the geometry's own trace width.
    """
    width = g.trace_width if trace_width is None else trace_width
    eps_e = effective_permittivity(sub, width)
    phase_budget = 2.0 * g.m * math.pi - fet_phase
    if phase_budget <= 0.0:
        raise InfeasiblePhaseError(
            f"infeasible phase budget: 2*{g.m}*pi - fet_phase = {phase_budget:.4g} <= 0"
        )
    # beta(f) * l = phase_budget with beta = 2 pi f sqrt(eps_e) / c
    return phase_budget * C_LIGHT / (2.0 * math.pi * math.sqrt(eps_e) * g.length)
