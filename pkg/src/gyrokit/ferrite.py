"""Gyromagnetic precession physics that the metasurface imitates.

Gaussian-CGS units throughout: bias fields in oersted, magnetization in
gauss, gyromagnetic ratio in rad/s/Oe (default 2*pi*2.8 MHz/Oe).  The sign
convention fixes gamma > 0 with torque gamma (M x H); under a +z bias the
transverse magnetization then rotates clockwise when viewed from +z
(m_x ~ cos, m_y ~ -sin at the natural frequency gamma*H0).

The damped equation of motion is implicit in dM/dt; it is converted once
to the algebraically equivalent explicit form

    dM/dt = gamma/(1+a^2) (M x H) - gamma a / ((1+a^2)|M|) M x (M x H)

and integrated with fixed-step RK4.  |M| is conserved exactly by the
equation, so norm drift is the step-size error signal; trajectories are
not renormalized, and drift beyond 1% aborts with StepSizeError.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._util import frozen_array
from .errors import (
    InputError,
    OnResonanceError,
    StepSizeError,
    TrajectoryTooShortError,
    UnmagnetizedError,
)

__all__ = [
    "GAMMA_DEFAULT",
    "FerriteParams",
    "PolderTensor",
    "MagnetizationState",
    "Trajectory",
    "larmor_frequency",
    "polder_tensor",
    "llg_rhs",
    "integrate_llg",
    "precession_frequency",
]

#: Electron gyromagnetic ratio, rad/s/Oe (2.8 MHz/Oe).
GAMMA_DEFAULT = 2.0 * np.pi * 2.8e6


@dataclass(frozen=True)
class FerriteParams:
    """Gyromagnetic material state.

    h0: internal dc bias field, Oe.  m0_4pi: saturation magnetization as
    4*pi*M0, G.  alpha: dimensionless damping.  gamma: rad/s/Oe.
    """

    h0: float
    m0_4pi: float = 0.0
    alpha: float = 0.0
    gamma: float = GAMMA_DEFAULT

    def __post_init__(self):
        if not (self.h0 >= 0 and np.isfinite(self.h0)):
            raise InputError("h0 must be finite and >= 0")
        if not (self.m0_4pi >= 0 and np.isfinite(self.m0_4pi)):
            raise InputError("m0_4pi must be finite and >= 0")
        if not (self.alpha >= 0 and np.isfinite(self.alpha)):
            raise InputError("alpha must be finite and >= 0")
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise InputError("gamma must be finite and > 0")


def larmor_frequency(p: FerriteParams) -> float:
    """Natural precession frequency gamma * h0, rad/s."""
    return p.gamma * p.h0


def magnetization_frequency(p: FerriteParams) -> float:
    """Magnetization frequency scale gamma * 4 pi M0, rad/s."""
    return p.gamma * p.m0_4pi


@dataclass(frozen=True)
class PolderTensor:
    """Relative permeability tensor of a z-biased gyromagnetic medium.

    Layout [[mu, -j k, 0], [j k, mu, 0], [0, 0, 1]] in units of mu_0.
    With real mu and k (the lossless form built here) the tensor is
    Hermitian by construction.
    """

    mu: float
    k: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.k)):
            raise InputError("tensor components must be finite")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.mu, -1j * self.k, 0.0],
                [1j * self.k, self.mu, 0.0],
                [0.0, 0.0, 1.0],
            ],
            dtype=complex,
        )


def polder_tensor(p: FerriteParams, omega: float, guard_rel: float = 1e-6) -> PolderTensor:
    """Lossless permeability tensor components at angular frequency omega.

        mu = 1 + w0 wm / (w0^2 - w^2),   k = w wm / (w0^2 - w^2)

    with w0 = gamma h0 and wm = gamma 4 pi M0.  The undamped form diverges
    at |omega| = w0, so evaluation inside the relative guard band
    ``guard_rel`` raises OnResonanceError.  With wm = 0 the medium is
    nonmagnetic and the identity tensor is returned for any omega.
    """
    w0 = larmor_frequency(p)
    wm = magnetization_frequency(p)
    if wm == 0.0:
        return PolderTensor(mu=1.0, k=0.0)
    if abs(abs(omega) - w0) <= guard_rel * w0:
        raise OnResonanceError(
            f"on-resonance singularity: |omega|={abs(omega):g} rad/s is within "
            f"{guard_rel:g} of omega0={w0:g} rad/s (undamped tensor diverges)"
        )
    den = w0 * w0 - omega * omega
    return PolderTensor(mu=1.0 + w0 * wm / den, k=omega * wm / den)


def llg_rhs(m, h, p: FerriteParams) -> np.ndarray:
    """Time derivative of the magnetization, G/s.

    ``m`` is the magnetization (G), ``h`` the total field (Oe).  The result
    is orthogonal to m for any damping.  Raises UnmagnetizedError for
    |m| = 0.
    """
    m = np.asarray(m, dtype=float)
    h = np.asarray(h, dtype=float)
    norm = float(np.linalg.norm(m))
    if norm == 0.0:
        raise UnmagnetizedError("unmagnetized state: |m| = 0 has no precession axis")
    c1 = p.gamma / (1.0 + p.alpha**2)
    u = np.cross(m, h)
    if p.alpha == 0.0:
        return c1 * u
    c2 = p.gamma * p.alpha / ((1.0 + p.alpha**2) * norm)
    return c1 * u - c2 * np.cross(m, u)


@dataclass(frozen=True)
class MagnetizationState:
    """Magnetization vector (G) at time t (s)."""

    m: np.ndarray
    t: float

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3,) or np.linalg.norm(m) == 0.0:
            raise InputError("state needs a nonzero 3-vector magnetization")
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step magnetization history: times (n,) s, m (n, 3) G."""

    times: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        m = np.asarray(self.m, dtype=float)
        if m.shape != (t.size, 3):
            raise InputError(f"m must have shape ({t.size}, 3), got {m.shape}")
        object.__setattr__(self, "times", frozen_array(t, float))
        object.__setattr__(self, "m", frozen_array(m, float))

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, i: int) -> MagnetizationState:
        return MagnetizationState(m=self.m[i], t=float(self.times[i]))


def integrate_llg(
    m_init,
    h_of_t,
    p: FerriteParams,
    dt: float,
    t_end: float,
) -> Trajectory:
    """Integrate the precession equation with fixed-step RK4.

    ``h_of_t`` is either a constant 3-vector field (Oe) or a callable
    t -> 3-vector; a callable is pre-sampled on the half-step grid so the
    inner loop never re-enters Python.  Records every step including the
    initial state.  Raises StepSizeError (naming dt) if |m| drifts more
    than 1% from its initial value.
    """
    m0 = np.asarray(m_init, dtype=float)
    if m0.shape != (3,):
        raise InputError(f"m_init must be a 3-vector, got shape {m0.shape}")
    if np.linalg.norm(m0) == 0.0:
        raise UnmagnetizedError("unmagnetized state: |m_init| = 0")
    if not (dt > 0.0 and np.isfinite(dt)):
        raise InputError("dt must be finite and > 0")
    if t_end < dt:
        raise InputError("t_end must be at least one step long")

    n_steps = max(1, int(round(t_end / dt)))
    if callable(h_of_t):
        t_half = 0.5 * dt * np.arange(2 * n_steps + 1)
        h_samples = np.empty((t_half.size, 3), dtype=float)
        for i, t in enumerate(t_half):
            h_samples[i] = np.asarray(h_of_t(float(t)), dtype=float)
        if not np.all(np.isfinite(h_samples)):
            raise InputError("field function returned non-finite values")
        traj, bad = _kernels.rk4_sampled(m0, h_samples, p.gamma, p.alpha, dt, n_steps)
    else:
        h = np.asarray(h_of_t, dtype=float)
        if h.shape != (3,):
            raise InputError(f"static field must be a 3-vector, got shape {h.shape}")
        traj, bad = _kernels.rk4_static(m0, h, p.gamma, p.alpha, dt, n_steps)

    if bad >= 0:
        raise StepSizeError(dt, bad)
    times = dt * np.arange(n_steps + 1)
    return Trajectory(times=times, m=traj)


def precession_frequency(traj: Trajectory) -> float:
    """Angular frequency from the mean zero-crossing spacing of m_x, rad/s.

    Crossing times are linearly interpolated; consecutive crossings are
    half a period apart.  Raises TrajectoryTooShortError with fewer than
    three crossings.
    """
    mx = traj.m[:, 0]
    t = traj.times
    crossings = []
    if mx[0] == 0.0 and mx.size > 1 and mx[1] != 0.0:
        crossings.append(float(t[0]))
    idx = np.nonzero(mx[:-1] * mx[1:] < 0.0)[0]
    for i in idx:
        frac = mx[i] / (mx[i] - mx[i + 1])
        crossings.append(float(t[i] + frac * (t[i + 1] - t[i])))
    if len(crossings) < 3:
        raise TrajectoryTooShortError(
            f"trajectory too short: {len(crossings)} zero crossings of m_x, need at least 3"
        )
    crossings = np.sort(np.asarray(crossings))
    mean_spacing = (crossings[-1] - crossings[0]) / (crossings.size - 1)
    return float(np.pi / mean_spacing)
