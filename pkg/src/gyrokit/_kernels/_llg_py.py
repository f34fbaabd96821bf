"""Pure-Python RK4 kernel for magnetization precession.

Scalar-float arithmetic, deliberately structured exactly like the Cython
twin in _llg_cy.pyx so both backends produce matching trajectories.  The
torque is the explicit form

    dm/dt = c1 (m x h) - (c2 / |m|) m x (m x h),
    c1 = gamma / (1 + alpha^2),  c2 = gamma alpha / (1 + alpha^2),

which is algebraically equivalent to the implicit damped-precession
equation.  Integration stops early (returning the offending step index)
when |m| drifts more than 1% from its initial value.
"""

from math import sqrt

import numpy as np

# |m| drift beyond this fraction marks the step size unstable
DRIFT_LIMIT = 0.01


def _rhs(mx, my, mz, hx, hy, hz, c1, c2):
    ux = my * hz - mz * hy
    uy = mz * hx - mx * hz
    uz = mx * hy - my * hx
    if c2 == 0.0:
        return c1 * ux, c1 * uy, c1 * uz
    s = c2 / sqrt(mx * mx + my * my + mz * mz)
    vx = my * uz - mz * uy
    vy = mz * ux - mx * uz
    vz = mx * uy - my * ux
    return c1 * ux - s * vx, c1 * uy - s * vy, c1 * uz - s * vz


def _integrate(m0, h_at, gamma, alpha, dt, n_steps):
    c1 = gamma / (1.0 + alpha * alpha)
    c2 = gamma * alpha / (1.0 + alpha * alpha)
    half = 0.5 * dt
    sixth = dt / 6.0

    out = np.empty((n_steps + 1, 3), dtype=np.float64)
    mx, my, mz = float(m0[0]), float(m0[1]), float(m0[2])
    out[0, 0], out[0, 1], out[0, 2] = mx, my, mz

    n0sq = mx * mx + my * my + mz * mz
    lo = n0sq * (1.0 - DRIFT_LIMIT) ** 2
    hi = n0sq * (1.0 + DRIFT_LIMIT) ** 2

    bad = -1
    for k in range(n_steps):
        h0 = h_at(2 * k)
        h1 = h_at(2 * k + 1)
        h2 = h_at(2 * k + 2)

        ax, ay, az = _rhs(mx, my, mz, h0[0], h0[1], h0[2], c1, c2)
        bx, by, bz = _rhs(mx + half * ax, my + half * ay, mz + half * az,
                          h1[0], h1[1], h1[2], c1, c2)
        cx, cy, cz = _rhs(mx + half * bx, my + half * by, mz + half * bz,
                          h1[0], h1[1], h1[2], c1, c2)
        dx, dy, dz = _rhs(mx + dt * cx, my + dt * cy, mz + dt * cz,
                          h2[0], h2[1], h2[2], c1, c2)

        mx += sixth * (ax + 2.0 * (bx + cx) + dx)
        my += sixth * (ay + 2.0 * (by + cy) + dy)
        mz += sixth * (az + 2.0 * (bz + cz) + dz)

        out[k + 1, 0], out[k + 1, 1], out[k + 1, 2] = mx, my, mz
        nsq = mx * mx + my * my + mz * mz
        if nsq < lo or nsq > hi or nsq != nsq:
            bad = k + 1
            break

    return out, bad


def rk4_static(m0, h, gamma, alpha, dt, n_steps):
    """RK4 trajectory under a constant field.

    Returns (trajectory, bad_step): trajectory has shape (n_steps + 1, 3)
    including the initial state; bad_step is -1 when stable, else the step
    at which |m| left the 1% drift band (rows past it are unfilled).
    """
    hx, hy, hz = float(h[0]), float(h[1]), float(h[2])
    hvec = (hx, hy, hz)
    return _integrate(m0, lambda _k: hvec, gamma, alpha, dt, n_steps)


def rk4_sampled(m0, h_half, gamma, alpha, dt, n_steps):
    """RK4 trajectory with the field pre-sampled on the half-step grid.

    ``h_half`` has shape (2 * n_steps + 1, 3): sample 2k is the field at
    t = k dt, odd samples sit at midpoints.  Same return as rk4_static.
    """
    h = np.ascontiguousarray(h_half, dtype=np.float64)
    if h.shape != (2 * n_steps + 1, 3):
        raise ValueError(f"h_half must have shape ({2 * n_steps + 1}, 3), got {h.shape}")
    return _integrate(m0, lambda k: h[k], gamma, alpha, dt, n_steps)
