# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernel for magnetization precession.

Twin of _llg_py.py: same torque form, same operation order, same drift
check, so trajectories from both backends agree to rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

DEF DRIFT_LIMIT = 0.01


cdef inline void _rhs(double mx, double my, double mz,
                      double hx, double hy, double hz,
                      double c1, double c2, double* r) noexcept nogil:
    cdef double ux = my * hz - mz * hy
    cdef double uy = mz * hx - mx * hz
    cdef double uz = mx * hy - my * hx
    cdef double s, vx, vy, vz
    if c2 == 0.0:
        r[0] = c1 * ux
        r[1] = c1 * uy
        r[2] = c1 * uz
        return
    s = c2 / sqrt(mx * mx + my * my + mz * mz)
    vx = my * uz - mz * uy
    vy = mz * ux - mx * uz
    vz = mx * uy - my * ux
    r[0] = c1 * ux - s * vx
    r[1] = c1 * uy - s * vy
    r[2] = c1 * uz - s * vz


cdef Py_ssize_t _integrate(double mx, double my, double mz,
                           const double* h, Py_ssize_t h_stride,
                           double gamma, double alpha, double dt,
                           Py_ssize_t n_steps, double[:, ::1] out) noexcept nogil:
    cdef double c1 = gamma / (1.0 + alpha * alpha)
    cdef double c2 = gamma * alpha / (1.0 + alpha * alpha)
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef double n0sq = mx * mx + my * my + mz * mz
    cdef double lo = n0sq * (1.0 - DRIFT_LIMIT) * (1.0 - DRIFT_LIMIT)
    cdef double hi = n0sq * (1.0 + DRIFT_LIMIT) * (1.0 + DRIFT_LIMIT)
    cdef double a[3]
    cdef double b[3]
    cdef double c[3]
    cdef double d[3]
    cdef double nsq
    cdef const double *h0
    cdef const double *h1
    cdef const double *h2
    cdef Py_ssize_t k

    out[0, 0] = mx
    out[0, 1] = my
    out[0, 2] = mz

    for k in range(n_steps):
        # h_stride is 0 for a static field, 3 for the half-step sample grid
        h0 = h + 2 * k * h_stride
        h1 = h + (2 * k + 1) * h_stride
        h2 = h + (2 * k + 2) * h_stride

        _rhs(mx, my, mz, h0[0], h0[1], h0[2], c1, c2, a)
        _rhs(mx + half * a[0], my + half * a[1], mz + half * a[2],
             h1[0], h1[1], h1[2], c1, c2, b)
        _rhs(mx + half * b[0], my + half * b[1], mz + half * b[2],
             h1[0], h1[1], h1[2], c1, c2, c)
        _rhs(mx + dt * c[0], my + dt * c[1], mz + dt * c[2],
             h2[0], h2[1], h2[2], c1, c2, d)

        mx += sixth * (a[0] + 2.0 * (b[0] + c[0]) + d[0])
        my += sixth * (a[1] + 2.0 * (b[1] + c[1]) + d[1])
        mz += sixth * (a[2] + 2.0 * (b[2] + c[2]) + d[2])

        out[k + 1, 0] = mx
        out[k + 1, 1] = my
        out[k + 1, 2] = mz
        nsq = mx * mx + my * my + mz * mz
        if nsq < lo or nsq > hi or nsq != nsq:
            return k + 1

    return -1


def rk4_static(m0, h, double gamma, double alpha, double dt, Py_ssize_t n_steps):
    """RK4 trajectory under a constant field; see _llg_py.rk4_static."""
    cdef double[::1] m = np.ascontiguousarray(m0, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    out = np.empty((n_steps + 1, 3), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t bad
    with nogil:
        bad = _integrate(m[0], m[1], m[2], &hv[0], 0, gamma, alpha, dt, n_steps, ov)
    return out, bad


def rk4_sampled(m0, h_half, double gamma, double alpha, double dt, Py_ssize_t n_steps):
    """RK4 trajectory with the field pre-sampled on the half-step grid."""
    cdef double[::1] m = np.ascontiguousarray(m0, dtype=np.float64)
    cdef double[:, ::1] hv = np.ascontiguousarray(h_half, dtype=np.float64)
    if hv.shape[0] != 2 * n_steps + 1 or hv.shape[1] != 3:
        raise ValueError(
            f"h_half must have shape ({2 * n_steps + 1}, 3), got ({hv.shape[0]}, {hv.shape[1]})"
        )
    out = np.empty((n_steps + 1, 3), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t bad
    with nogil:
        bad = _integrate(m[0], m[1], m[2], &hv[0, 0], 3, gamma, alpha, dt, n_steps, ov)
    return out, bad
