"""Jones-matrix polarimetry in linear and circular bases.

Linear-basis blocks use the entry convention t_ab = (received a-polarized
field) / (incident b-polarized field).  The circular basis is (RHCP, LHCP)
with E_R = (E_x - i E_y) / sqrt(2), so a gyrotropic response is diagonal
and a pure rotation by phi maps to diag(exp(-i phi), exp(+i phi)).

Rotation angles are reported as half the phase of t_ll / t_rr, wrapped to
(-pi/2, pi/2]; rotation is therefore defined modulo pi, and sweeps also
carry a continuity-unwrapped trace because the interesting responses sit
right at the +-pi/2 branch cut.  An alternative magnitude-ratio reading,
atan(|t_ll| / |t_rr|) / 2, is available behind ``mode="magnitude"`` for
comparison; the phase reading is the default because it recovers the exact
signed angle of a pure rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ._util import frozen_array
from .errors import (
    InputError,
    NoResonanceError,
    PolarizationUndefinedError,
    RotationUndefinedError,
)

if TYPE_CHECKING:
    from .smatrix import FloquetSweep

__all__ = [
    "CIRCULAR_BASIS",
    "JonesMatrix",
    "CircularJones",
    "PolarimetrySweep",
    "lin_to_circ",
    "circ_to_lin",
    "ellipticity",
    "rotation_angle",
    "analyze_sweep",
    "find_resonance",
    "resonance_copol",
    "copol_transmission",
]

#: Basis-change matrix: rows project (E_x, E_y) onto (RHCP, LHCP).
#: lin_to_circ(J) equals CIRCULAR_BASIS @ J @ CIRCULAR_BASIS^-1 exactly.
CIRCULAR_BASIS = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / math.sqrt(2.0)


def _finite(name, *values):
    for v in values:
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise InputError(f"{name} entries must be finite")


@dataclass(frozen=True)
class JonesMatrix:
    """2x2 complex transmission or reflection block in the (x, y) basis."""

    txx: complex
    txy: complex
    tyx: complex
    tyy: complex

    def __post_init__(self):
        for f in ("txx", "txy", "tyx", "tyy"):
            object.__setattr__(self, f, complex(getattr(self, f)))
        _finite("Jones matrix", self.txx, self.txy, self.tyx, self.tyy)

    @classmethod
    def from_array(cls, a) -> "JonesMatrix":
        a = np.asarray(a, dtype=complex)
        if a.shape != (2, 2):
            raise InputError(f"Jones matrix must be 2x2, got {a.shape}")
        return cls(txx=a[0, 0], txy=a[0, 1], tyx=a[1, 0], tyy=a[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.txx, self.txy], [self.tyx, self.tyy]], dtype=complex)


@dataclass(frozen=True)
class CircularJones:
    """2x2 complex block in the (RHCP, LHCP) basis; t_pq maps incident q to received p."""

    t_rr: complex
    t_rl: complex
    t_lr: complex
    t_ll: complex

    def __post_init__(self):
        for f in ("t_rr", "t_rl", "t_lr", "t_ll"):
            object.__setattr__(self, f, complex(getattr(self, f)))
        _finite("circular Jones matrix", self.t_rr, self.t_rl, self.t_lr, self.t_ll)

    def as_array(self) -> np.ndarray:
        return np.array([[self.t_rr, self.t_rl], [self.t_lr, self.t_ll]], dtype=complex)


def lin_to_circ(j: JonesMatrix) -> CircularJones:
    """Convert a linear-basis Jones block to the circular basis.

    Evaluates the closed form

        t_rr = (txx + tyy + i(txy - tyx)) / 2
        t_rl = (txx - tyy - i(txy + tyx)) / 2
        t_lr = (txx - tyy + i(txy + tyx)) / 2
        t_ll = (txx + tyy - i(txy - tyx)) / 2

    which is exactly conjugation by CIRCULAR_BASIS.
    """
    return CircularJones(
        t_rr=0.5 * (j.txx + j.tyy + 1j * (j.txy - j.tyx)),
        t_rl=0.5 * (j.txx - j.tyy - 1j * (j.txy + j.tyx)),
        t_lr=0.5 * (j.txx - j.tyy + 1j * (j.txy + j.tyx)),
        t_ll=0.5 * (j.txx + j.tyy - 1j * (j.txy - j.tyx)),
    )


def circ_to_lin(c: CircularJones) -> JonesMatrix:
    """Inverse of lin_to_circ."""
    return JonesMatrix(
        txx=0.5 * (c.t_rr + c.t_rl + c.t_lr + c.t_ll),
        txy=0.5j * (c.t_rl + c.t_ll - c.t_rr - c.t_lr),
        tyx=0.5j * (c.t_rr + c.t_rl - c.t_lr - c.t_ll),
        tyy=0.5 * (c.t_rr - c.t_rl - c.t_lr + c.t_ll),
    )


def _lin_to_circ_batch(j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Co-circular entries (t_rr, t_ll) of a stack of (x, y) Jones blocks."""
    txx, txy = j[..., 0, 0], j[..., 0, 1]
    tyx, tyy = j[..., 1, 0], j[..., 1, 1]
    t_rr = 0.5 * (txx + tyy + 1j * (txy - tyx))
    t_ll = 0.5 * (txx + tyy - 1j * (txy - tyx))
    return t_rr, t_ll


def ellipticity(c: CircularJones) -> float:
    """Polarization-state measure in [-1, 1].

    +1 is pure RHCP, -1 pure LHCP, 0 linear.  Raises
    PolarizationUndefinedError when both co-circular magnitudes vanish.
    """
    num = abs(c.t_rr) - abs(c.t_ll)
    den = abs(c.t_rr) + abs(c.t_ll)
    if den == 0.0:
        raise PolarizationUndefinedError(
            "polarization undefined: both co-circular magnitudes are zero"
        )
    return num / den


def rotation_angle(c: CircularJones, mode: str = "phase") -> float:
    """Polarization rotation angle of a circular-basis block, in radians.

    ``mode="phase"`` (default) returns arg(t_ll / t_rr) / 2, the signed
    rotation; ``mode="magnitude"`` returns atan(|t_ll| / |t_rr|) / 2.  Both
    lie in (-pi/2, pi/2].  Raises RotationUndefinedError when t_rr = 0.
    """
    if c.t_rr == 0:
        raise RotationUndefinedError("rotation undefined: co-rotating response is zero")
    if mode == "phase":
        return 0.5 * float(np.angle(c.t_ll / c.t_rr))
    if mode == "magnitude":
        return 0.5 * math.atan(abs(c.t_ll) / abs(c.t_rr))
    raise InputError(f"unknown rotation mode {mode!r}")


@dataclass(frozen=True)
class PolarimetrySweep:
    """Per-frequency rotation/ellipticity spectra plus the raw Jones blocks.

    Angles are radians; transmission quantities (theta_f, delta_f) come from
    the chosen propagation direction, reflection quantities (theta_k,
    delta_k) from the incidence port.  ``transmission`` and ``reflection``
    hold the (x, y)-ordered complex blocks, shape (n, 2, 2).  Frequencies
    where an angle is undefined carry NaN and a reason string in
    ``gap_reasons``; everything else at that frequency stays valid.
    """

    frequencies: np.ndarray
    theta_f: np.ndarray
    theta_f_unwrapped: np.ndarray
    delta_f: np.ndarray
    theta_k: np.ndarray
    theta_k_unwrapped: np.ndarray
    delta_k: np.ndarray
    transmission: np.ndarray
    reflection: np.ndarray
    gap_reasons: tuple
    direction: int = 1

    def __post_init__(self):
        n = self.frequencies.size
        for name in ("theta_f", "theta_f_unwrapped", "delta_f",
                     "theta_k", "theta_k_unwrapped", "delta_k"):
            if getattr(self, name).shape != (n,):
                raise InputError(f"{name} must have shape ({n},)")
        for name in ("transmission", "reflection"):
            if getattr(self, name).shape != (n, 2, 2):
                raise InputError(f"{name} must have shape ({n}, 2, 2)")
        if len(self.gap_reasons) != n:
            raise InputError("gap_reasons length must match frequencies")
        for d in (self.delta_f, self.delta_k):
            ok = d[np.isfinite(d)]
            if ok.size and (np.min(ok) < -1.0 - 1e-12 or np.max(ok) > 1.0 + 1e-12):
                raise InputError("ellipticity outside [-1, 1]")
        for name in ("frequencies", "theta_f", "theta_f_unwrapped", "delta_f",
                     "theta_k", "theta_k_unwrapped", "delta_k"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), float))
        for name in ("transmission", "reflection"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), complex))

    def __len__(self) -> int:
        return self.frequencies.size

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r is not None for r in self.gap_reasons])


def _unwrap_gapped(theta: np.ndarray, period: float) -> np.ndarray:
    out = theta.copy()
    valid = np.isfinite(theta)
    if np.count_nonzero(valid) >= 2:
        out[valid] = np.unwrap(theta[valid], period=period)
    return out


def _angles_from_blocks(blocks: np.ndarray):
    """Vectorized rotation angle and ellipticity with NaN-flagged gaps."""
    t_rr, t_ll = _lin_to_circ_batch(blocks)
    rot_gap = t_rr == 0
    den = np.abs(t_rr) + np.abs(t_ll)
    pol_gap = den == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = 0.5 * np.angle(np.where(rot_gap, 1.0, t_ll / np.where(rot_gap, 1.0, t_rr)))
        delta = (np.abs(t_rr) - np.abs(t_ll)) / np.where(pol_gap, 1.0, den)
    theta = np.where(rot_gap, np.nan, theta)
    delta = np.where(pol_gap, np.nan, delta)
    return theta, delta, rot_gap, pol_gap


def analyze_sweep(sweep: "FloquetSweep", direction: int = 1) -> PolarimetrySweep:
    """Compute rotation and ellipticity spectra for one propagation direction.

    ``direction=1`` means incidence at port 1: transmission quantities come
    from the port-1-to-port-2 block and reflection quantities from the
    port-1 reflection block.  ``direction=2`` is the mirror case.
    Degenerate frequencies (zero co-rotating response, or zero co-circular
    magnitudes) become NaN gaps with a recorded reason instead of aborting.
    """
    from .smatrix import direction_blocks

    if len(sweep) < 1:
        raise InputError("sweep must contain at least one frequency")
    t_blocks, r_blocks = direction_blocks(sweep.matrices, direction)

    theta_f, delta_f, t_rot_gap, t_pol_gap = _angles_from_blocks(t_blocks)
    theta_k, delta_k, r_rot_gap, r_pol_gap = _angles_from_blocks(r_blocks)

    reasons = []
    for i in range(len(sweep)):
        parts = []
        if t_rot_gap[i]:
            parts.append("transmission rotation undefined")
        if t_pol_gap[i]:
            parts.append("transmission polarization undefined")
        if r_rot_gap[i]:
            parts.append("reflection rotation undefined")
        if r_pol_gap[i]:
            parts.append("reflection polarization undefined")
        reasons.append("; ".join(parts) if parts else None)

    return PolarimetrySweep(
        frequencies=sweep.frequencies.copy(),
        theta_f=theta_f,
        theta_f_unwrapped=_unwrap_gapped(theta_f, np.pi),
        delta_f=delta_f,
        theta_k=theta_k,
        theta_k_unwrapped=_unwrap_gapped(theta_k, np.pi),
        delta_k=delta_k,
        transmission=t_blocks,
        reflection=r_blocks,
        gap_reasons=tuple(reasons),
        direction=direction,
    )


def copol_transmission(p: PolarimetrySweep) -> np.ndarray:
    """Mean co-polarized transmission magnitude, (|txx| + |tyy|) / 2."""
    return 0.5 * (np.abs(p.transmission[:, 0, 0]) + np.abs(p.transmission[:, 1, 1]))


def _parabola_vertex(x: np.ndarray, y: np.ndarray) -> float | None:
    # Fit y = a u^2 + b u + c around the center sample for conditioning.
    u = x - x[1]
    a, b, _ = np.polyfit(u, y, 2)
    if not np.isfinite(a) or a <= 0:
        return None
    v = x[1] - b / (2.0 * a)
    return float(min(max(v, x[0]), x[2]))


def find_resonance(p: PolarimetrySweep) -> float:
    """Locate the co-polarized transmission dip, in Hz.

    Takes the sample of minimum mean co-pol magnitude and refines it by
    parabolic interpolation of the dB curve through the bracketing samples.
    Raises NoResonanceError when the minimum sits on the sweep edge (no
    interior dip), InputError for sweeps shorter than 3 points.
    """
    if len(p) < 3:
        raise InputError("resonance search needs at least 3 frequency points")
    mag = copol_transmission(p)
    i = int(np.argmin(mag))
    if i == 0 or i == len(p) - 1:
        raise NoResonanceError("no resonance found: co-polarized magnitude has no interior minimum")
    window = mag[i - 1 : i + 2]
    if np.any(window == 0.0):
        # exact null: the dB curve is singular, the sample itself is the dip
        return float(p.frequencies[i])
    db = 20.0 * np.log10(window)
    vertex = _parabola_vertex(p.frequencies[i - 1 : i + 2], db)
    return float(p.frequencies[i]) if vertex is None else vertex


def resonance_copol(p: PolarimetrySweep, f_res: float) -> float:
    """Co-polarized transmission magnitude interpolated at the resonance.

    Evaluates the dB parabola through the dip sample and its neighbors at
    ``f_res``, which varies smoothly as the dip slides between grid points
    (single-sample readout would wiggle with the grid alignment).
    """
    mag = copol_transmission(p)
    i = int(np.argmin(mag))
    if i == 0 or i == len(p) - 1:
        return float(mag[i])
    window = mag[i - 1 : i + 2]
    if np.any(window == 0.0):
        return 0.0
    u = p.frequencies[i - 1 : i + 2] - p.frequencies[i]
    coeffs = np.polyfit(u, 20.0 * np.log10(window), 2)
    db = float(np.polyval(coeffs, f_res - p.frequencies[i]))
    return float(10.0 ** (db / 20.0))
