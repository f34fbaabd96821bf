"""Behavioral ring surrogate, co-simulation cascade, and design optimization.

The transistor-loaded ring is modeled behaviorally: the ring couples to the
two circularly polarized channels through a shared Lorentzian

    L(f) = 1 / (1 + 2j q (f - f0) / f0)

with co-circular transmissions t_rr = il_bg - g L and
t_ll = il_bg - (1 - u) g L.  The unilaterality u interpolates between a
plain ring (u = 0, both senses resonate, exactly reciprocal S-matrix) and a
fully one-way traveling-wave mode (u = 1, only one sense resonates).  The
resonant power removed from each circular transmission channel reappears in
reflection scaled by refl_bg.  For u > 0 the two propagation directions
share identical co-polarized transmission while their cross-polarized
entries are exactly pi out of phase with different magnitudes (backward
scaled by 1/(1+u)), and the gyrotropic reflection blocks make the full
S-matrix nonreciprocal.  Because the loading device is active, entries may
exceed unity; passivity_report flags that instead of raising.

Optimization is plain dense BFGS with central finite-difference gradients,
an Armijo backtracking line search, and projection onto box bounds, driving
a scalar figure of demerit built from resonance placement, rotation angle
at resonance, and co-polarized leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GradientProbeError,
    GridMismatchError,
    InfeasibleStartError,
    InputError,
    NoResonanceError,
)
from .polarimetry import analyze_sweep, find_resonance, resonance_copol
from .smatrix import FloquetSweep, assemble_floquet, cascade

__all__ = [
    "SurrogateParams",
    "OptimizationGoal",
    "OptimizeResult",
    "SurrogateOptResult",
    "synth_ring_response",
    "expand_twoport",
    "cosim",
    "passivity_report",
    "kpi_cost",
    "finite_diff_gradient",
    "quasi_newton_minimize",
    "optimize_surrogate",
    "default_bounds",
    "format_run_log",
]


@dataclass(frozen=True)
class SurrogateParams:
    """Behavioral parameters of the transistor-loaded ring.

    f0: ring resonance, Hz.  q_loaded: loaded quality factor.  u in [0, 1]:
    unilaterality (0 reciprocal, 1 fully one-way).  g: resonant coupling
    amplitude.  il_bg: background co-polarized transmission in (0, 1].
    refl_bg: reflection scale in [0, 1), with il_bg^2 + refl_bg^2 <= 1.
    """

    f0: float
    q_loaded: float
    u: float
    g: float
    il_bg: float = 0.9
    refl_bg: float = 0.3

    def __post_init__(self):
        if not (self.f0 > 0 and math.isfinite(self.f0)):
            raise InputError("f0 must be finite and > 0")
        if not (self.q_loaded > 0 and math.isfinite(self.q_loaded)):
            raise InputError("q_loaded must be finite and > 0")
        if not (0.0 <= self.u <= 1.0):
            raise InputError("u must lie in [0, 1]")
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise InputError("g must be finite and >= 0")
        if not (0.0 < self.il_bg <= 1.0):
            raise InputError("il_bg must lie in (0, 1]")
        if not (0.0 <= self.refl_bg < 1.0):
            raise InputError("refl_bg must lie in [0, 1)")
        if self.il_bg**2 + self.refl_bg**2 > 1.0 + 1e-12:
            raise InputError("il_bg^2 + refl_bg^2 must not exceed 1")


def _circ_diag_blocks(co_r: np.ndarray, co_l: np.ndarray, cross_scale=1.0):
    """Linear-basis (x, y) Jones stack of diag(co_r, co_l) circular response.

    ``cross_scale`` multiplies the cross-polarized entries (signed, so a
    negative value flips their phase by pi while keeping co-pol intact).
    """
    n = co_r.shape[0]
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = out[:, 1, 1] = 0.5 * (co_r + co_l)
    out[:, 0, 1] = cross_scale * 0.5j * (co_l - co_r)
    out[:, 1, 0] = cross_scale * 0.5j * (co_r - co_l)
    return out


def synth_ring_response(p: SurrogateParams, frequencies) -> FloquetSweep:
    """Synthesize the 4-port Floquet sweep of the ring surrogate.

    u = 0 yields an exactly symmetric (reciprocal) S-matrix at every
    frequency; u > 0 breaks the symmetry through the gyrotropic reflection
    blocks and unequal forward/backward cross-polarized transmission.
    """
    f = np.atleast_1d(np.asarray(frequencies, dtype=float))
    lor = 1.0 / (1.0 + 2.0j * p.q_loaded * (f - p.f0) / p.f0)

    t_rr = p.il_bg - p.g * lor
    t_ll = p.il_bg - (1.0 - p.u) * p.g * lor
    rho_rr = p.refl_bg * p.g * lor
    rho_ll = p.refl_bg * (1.0 - p.u) * p.g * lor

    t21 = _circ_diag_blocks(t_rr, t_ll)
    t12 = _circ_diag_blocks(t_rr, t_ll, cross_scale=-1.0 / (1.0 + p.u))
    refl = _circ_diag_blocks(rho_rr, rho_ll)

    matrices = assemble_floquet(refl, t12, t21, refl)
    return FloquetSweep(
        frequencies=f,
        matrices=matrices,
        metadata=f"surrogate f0={p.f0:g} q={p.q_loaded:g} u={p.u:g} g={p.g:g}",
    )


def expand_twoport(frequencies, s2: np.ndarray, metadata: str = "") -> FloquetSweep:
    """Lift a scalar 2-port sweep to a 4-port block acting alike on TE and TM."""
    s2 = np.asarray(s2, dtype=complex)
    f = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if s2.shape != (f.size, 2, 2):
        raise InputError(f"expected ({f.size}, 2, 2) two-port data, got {s2.shape}")
    out = np.zeros((f.size, 4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[:, 2 * i, 2 * j] = s2[:, i, j]
            out[:, 2 * i + 1, 2 * j + 1] = s2[:, i, j]
    return FloquetSweep(frequencies=f, matrices=out, metadata=metadata)


def cosim(em: FloquetSweep, circuit: FloquetSweep) -> FloquetSweep:
    """Per-frequency cascade of an electromagnetic block with a circuit block.

    Both sweeps must share the frequency grid exactly (no interpolation);
    the first mismatch is reported otherwise.  Singular interface feedback
    propagates as CascadeSingularError tagged with the frequency.
    """
    fa, fb = em.frequencies, circuit.frequencies
    if fa.size != fb.size:
        raise GridMismatchError(
            f"frequency grids differ: {fa.size} vs {fb.size} points"
        )
    same = np.isclose(fa, fb, rtol=1e-12, atol=0.0)
    if not np.all(same):
        i = int(np.argmin(same))
        raise GridMismatchError(
            f"frequency grids differ at index {i}: {fa[i]:.12g} Hz vs {fb[i]:.12g} Hz"
        )
    out = np.empty_like(em.matrices)
    for i, f in enumerate(fa):
        out[i] = cascade(em.matrices[i], circuit.matrices[i], frequency=float(f))
    return FloquetSweep(
        frequencies=fa.copy(),
        matrices=out,
        metadata=f"cosim({em.metadata or 'em'}, {circuit.metadata or 'circuit'})",
    )


@dataclass(frozen=True)
class PassivityReport:
    max_singular_value: float
    frequency: float
    passive: bool


def passivity_report(sweep: FloquetSweep, tol: float = 1e-9) -> PassivityReport:
    """Largest singular value over the sweep; the surrogate may exceed 1 (active)."""
    svals = np.linalg.svd(sweep.matrices, compute_uv=False)
    worst = np.unravel_index(int(np.argmax(svals)), svals.shape)
    smax = float(svals[worst])
    return PassivityReport(
        max_singular_value=smax,
        frequency=float(sweep.frequencies[worst[0]]),
        passive=smax <= 1.0 + tol,
    )


@dataclass(frozen=True)
class OptimizationGoal:
    """Targets and weights for the scalar design cost.

    Weights are nonnegative with at least one positive: resonance placement
    against f_target, rotation angle toward 90 degrees, and co-polarized
    transmission leakage at resonance.  The placement term (relative
    frequency error squared) is orders of magnitude smaller than the rad^2
    rotation term once the resonance is roughly placed, hence its larger
    default weight.  ``bounds`` optionally overrides the per-parameter
    optimization box.
    """

    f_target: float
    w_resonance: float = 25.0
    w_rotation: float = 1.0
    w_copol: float = 1.0
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.f_target > 0 and math.isfinite(self.f_target)):
            raise InputError("f_target must be finite and > 0")
        ws = (self.w_resonance, self.w_rotation, self.w_copol)
        if any(w < 0 or not math.isfinite(w) for w in ws):
            raise InputError("weights must be finite and >= 0")
        if not any(w > 0 for w in ws):
            raise InputError("at least one weight must be positive")
        for name, lohi in self.bounds.items():
            lo, hi = lohi
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InputError(f"bounds for {name!r} must be finite with lo < hi")


def _wrap_rotation_error(x: float) -> float:
    # rotation angles live modulo pi; distance measured on that circle
    return ((x + 0.5 * math.pi) % math.pi) - 0.5 * math.pi


def kpi_cost(sweep: FloquetSweep, goal: OptimizationGoal, direction: int = 1) -> float:
    """Scalar figure of demerit of a sweep against a design goal.

        w_res ((f_res - f_target) / f_target)^2
      + w_rot (theta_f(f_res) - pi/2)^2      (angle difference taken mod pi)
      + w_copol |t_copol(f_res)|^2

    The rotation error is interpolated at the refined resonance between the
    bracketing samples (the mod-pi difference is smooth through resonance
    even though the principal angle jumps branch there), and the co-pol
    magnitude comes from the dip's dB parabola; both therefore vary
    smoothly as the resonance slides across the grid.  Returns +inf when no
    resonance exists or the rotation is undefined there, so infeasible
    regions rank worst without raising.
    """
    pol = analyze_sweep(sweep, direction)
    try:
        f_res = find_resonance(pol)
    except NoResonanceError:
        return math.inf

    f = pol.frequencies
    j = int(np.argmin(np.abs(f - f_res)))
    k0, k1 = (j, j + 1) if f_res >= f[j] else (j - 1, j)
    if k1 >= f.size or k0 < 0:
        k0, k1 = j, j
    th0, th1 = pol.theta_f[k0], pol.theta_f[k1]
    if not (np.isfinite(th0) and np.isfinite(th1)):
        return math.inf
    e0 = _wrap_rotation_error(float(th0) - 0.5 * math.pi)
    e1 = _wrap_rotation_error(float(th1) - 0.5 * math.pi)
    t = 0.0 if k0 == k1 else (f_res - f[k0]) / (f[k1] - f[k0])
    rot_err = (1.0 - t) * e0 + t * e1

    copol = resonance_copol(pol, f_res)
    return (
        goal.w_resonance * ((f_res - goal.f_target) / goal.f_target) ** 2
        + goal.w_rotation * rot_err**2
        + goal.w_copol * copol**2
    )


def finite_diff_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with per-coordinate step h * max(|x_i|, 1).

    Raises GradientProbeError naming the coordinate whose probe returned a
    non-finite value.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        step = h * max(abs(x[i]), 1.0)
        xp = x.copy()
        xp[i] += step
        xm = x.copy()
        xm[i] -= step
        fp, fm = f(xp), f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise GradientProbeError(i)
        g[i] = (fp - fm) / (2.0 * step)
    return g


@dataclass
class OptimizeResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    reason: str
    history: list = field(default_factory=list)  # (iteration, cost, grad_norm, x)


def _project(x: np.ndarray, bounds) -> np.ndarray:
    if bounds is None:
        return x
    return np.clip(x, bounds[:, 0], bounds[:, 1])


def quasi_newton_minimize(
    f,
    x0,
    bounds=None,
    *,
    max_iter: int = 200,
    gtol: float = 1e-8,
    ftol: float = 1e-12,
    fd_step: float = 1e-6,
    grad=None,
) -> OptimizeResult:
    """Dense BFGS with Armijo backtracking and box-bound projection.

    The line search halves the step (c1 = 1e-4) and each trial point is
    projected onto the bounds before evaluation, so iterates never leave
    the box.  Gradients default to central finite differences with relative
    step ``fd_step``.  Termination: max-norm of the gradient below gtol,
    relative cost change below ftol, iteration budget, or a failed line
    search / gradient probe (reported in ``reason``, converged=False).
    Accepted steps strictly decrease the cost, so the result never ranks
    worse than the start.
    """
    x = np.asarray(x0, dtype=float).copy()
    if bounds is not None:
        bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
        if bounds.shape[0] != x.size or np.any(bounds[:, 0] > bounds[:, 1]):
            raise InputError("bounds must be (n, 2) with lo <= hi")
        if np.any(x < bounds[:, 0]) or np.any(x > bounds[:, 1]):
            raise InputError("x0 must lie within bounds")

    fx = float(f(x))
    if not np.isfinite(fx):
        raise InfeasibleStartError("infeasible start: cost is not finite at x0")
    gradient = grad if grad is not None else (lambda z: finite_diff_gradient(f, z, fd_step))

    n = x.size
    eye = np.eye(n)
    h_inv = eye.copy()
    history: list = []
    c1 = 1e-4

    try:
        g = gradient(x)
    except GradientProbeError as exc:
        history.append((0, fx, math.nan, x.copy()))
        return OptimizeResult(x, fx, 0, False, str(exc), history)

    converged = False
    reason = "max_iter reached"
    iterations = 0
    for k in range(max_iter):
        gnorm = float(np.max(np.abs(g)))
        history.append((k, fx, gnorm, x.copy()))
        if gnorm < gtol:
            converged, reason = True, f"gradient norm {gnorm:.3e} below gtol"
            break

        p = -h_inv @ g
        if float(p @ g) >= 0.0:
            h_inv = eye.copy()
            p = -g

        alpha = 1.0
        x_new = None
        f_new = math.inf
        while alpha >= 1e-14:
            trial = _project(x + alpha * p, bounds)
            s = trial - x
            if np.any(s != 0.0):
                f_trial = float(f(trial))
                if np.isfinite(f_trial) and f_trial <= fx + c1 * float(g @ s):
                    x_new, f_new = trial, f_trial
                    break
            alpha *= 0.5
        if x_new is None:
            reason = "line search failed to find a decrease"
            break
        iterations = k + 1

        try:
            g_new = gradient(x_new)
        except GradientProbeError as exc:
            x, fx = x_new, f_new
            reason = str(exc)
            break

        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            rho = 1.0 / sy
            v = eye - rho * np.outer(s, y)
            h_inv = v @ h_inv @ v.T + rho * np.outer(s, s)

        cost_drop = fx - f_new
        x, fx, g = x_new, f_new, g_new
        if cost_drop <= ftol * max(1.0, abs(fx)):
            converged, reason = True, "relative cost change below ftol"
            break

    history.append((iterations, fx, float(np.max(np.abs(g))), x.copy()))
    return OptimizeResult(x, fx, iterations, converged, reason, history)


# Physical box used when the goal does not override a variable's bounds.
_STATIC_BOUNDS = {
    "q_loaded": (5.0, 200.0),
    "u": (0.0, 1.0),
    "g": (0.0, 2.0),
    "il_bg": (0.05, 1.0),
    "refl_bg": (0.0, 0.95),
}

OPTIMIZABLE = ("f0", "q_loaded", "u", "g", "il_bg", "refl_bg")


def default_bounds(frequencies) -> dict:
    """Default per-parameter optimization box; f0 stays inside the sweep."""
    f = np.asarray(frequencies, dtype=float)
    span = f[-1] - f[0]
    out = dict(_STATIC_BOUNDS)
    out["f0"] = (f[0] + 0.05 * span, f[-1] - 0.05 * span)
    return out


def format_run_log(history, names) -> list[str]:
    """Render optimizer history as CSV lines: iteration, cost, gradient norm, parameters."""
    lines = ["iteration,cost,grad_norm," + ",".join(names)]
    for it, cost, gnorm, x in history:
        vals = ",".join(f"{v:.12g}" for v in np.atleast_1d(x))
        lines.append(f"{it},{cost:.12g},{gnorm:.12g},{vals}")
    return lines


@dataclass
class SurrogateOptResult:
    params: SurrogateParams
    cost: float
    iterations: int
    converged: bool
    reason: str
    log_lines: list


def optimize_surrogate(
    start: SurrogateParams,
    goal: OptimizationGoal,
    frequencies,
    variables=("f0", "q_loaded", "u", "g"),
    direction: int = 1,
    forward_model=None,
    max_iter: int = 200,
    gtol: float = 1e-10,
    ftol: float = 1e-14,
    fd_step: float = 1e-6,
) -> SurrogateOptResult:
    """Tune surrogate parameters toward a goal with projected BFGS.

    ``variables`` selects which parameters move; the rest stay at their
    start values.  Optimization runs in box-normalized coordinates (each
    variable mapped to [0, 1]) so the search is well scaled regardless of
    units.  ``forward_model`` may replace synth_ring_response with any
    other FloquetSweep-producing callable of (params, frequencies), which
    is how an external solver plugs into the same loop.
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    forward = forward_model if forward_model is not None else synth_ring_response
    names = list(variables)
    for v in names:
        if v not in OPTIMIZABLE:
            raise InputError(f"unknown optimization variable {v!r}")
    box = default_bounds(freqs)
    box.update(goal.bounds)
    lo = np.array([box[v][0] for v in names])
    hi = np.array([box[v][1] for v in names])
    if np.any(lo >= hi):
        raise InputError("bounds must satisfy lo < hi for every variable")

    start_vals = np.array([getattr(start, v) for v in names])
    if np.any(start_vals < lo) or np.any(start_vals > hi):
        raise InputError("start parameters must lie within the optimization bounds")

    def to_params(x) -> SurrogateParams:
        vals = lo + np.clip(x, 0.0, 1.0) * (hi - lo)
        kw = {v: float(val) for v, val in zip(names, vals)}
        return SurrogateParams(
            f0=kw.get("f0", start.f0),
            q_loaded=kw.get("q_loaded", start.q_loaded),
            u=kw.get("u", start.u),
            g=kw.get("g", start.g),
            il_bg=kw.get("il_bg", start.il_bg),
            refl_bg=kw.get("refl_bg", start.refl_bg),
        )

    def objective(x) -> float:
        try:
            params = to_params(x)
        except InputError:
            return math.inf
        return kpi_cost(forward(params, freqs), goal, direction)

    x0 = (start_vals - lo) / (hi - lo)
    unit_box = np.repeat([[0.0, 1.0]], len(names), axis=0)
    res = quasi_newton_minimize(
        objective, x0, bounds=unit_box,
        max_iter=max_iter, gtol=gtol, ftol=ftol, fd_step=fd_step,
    )

    phys_history = [
        (it, cost, gnorm, lo + np.clip(x, 0.0, 1.0) * (hi - lo))
        for it, cost, gnorm, x in res.history
    ]
    return SurrogateOptResult(
        params=to_params(res.x),
        cost=res.cost,
        iterations=res.iterations,
        converged=res.converged,
        reason=res.reason,
        log_lines=format_run_log(phys_history, names),
    )
