"""Command-line front end binding the design flow together.

Subcommands: analyze (polarimetry CSV from an .s4p), check-reciprocity,
design (ring sizing), synth (surrogate .s4p generation), ferrite (tensor
and precession), cosim (EM + circuit cascade), optimize (BFGS run from a
JSON config).  Exit codes: 0 success, 1 usage, 2 parse/validation,
3 analysis verdict (nonreciprocal input / no resonance), 4 numerical
failure.  GYRO_THREADS caps worker threads for batch inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .cosim import (
    SurrogateParams,
    cosim,
    expand_twoport,
    optimize_surrogate,
    passivity_report,
    synth_ring_response,
)
from .errors import (
    AnalysisError,
    GyroKitError,
    InputError,
    NoResonanceError,
    NumericalError,
)
from .ferrite import (
    GAMMA_DEFAULT,
    FerriteParams,
    integrate_llg,
    larmor_frequency,
    polder_tensor,
    precession_frequency,
)
from .io import (
    Network,
    RunConfig,
    export_polarimetry_csv,
    map_ports_to_floquet,
    parse_touchstone,
    write_touchstone,
)
from .polarimetry import analyze_sweep, copol_transmission, find_resonance
from .resonator import (
    Substrate,
    effective_permittivity,
    microstrip_z0,
    resonance_frequency,
    ring_geometry_for,
)
from .smatrix import FloquetSweep, reciprocity_defect


def worker_count(n_jobs: int) -> int:
    """Thread-pool size for batch inputs, capped by GYRO_THREADS."""
    cap = os.environ.get("GYRO_THREADS", "").strip()
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise InputError(f"GYRO_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(n_jobs, limit))


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for bad input data
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def _ports_from_suffix(path: str) -> int | None:
    m = re.search(r"\.s(\d)p$", path.lower())
    return int(m.group(1)) if m else None


def _read_network(path: str) -> Network:
    return parse_touchstone(_read_text(path), n_ports=_ports_from_suffix(path))


def _sweep_to_network(sweep: FloquetSweep) -> Network:
    return Network(
        frequencies=sweep.frequencies,
        data=sweep.matrices,
        source_format="RI",
        freq_unit="GHZ",
        metadata=sweep.metadata,
    )


def _parse_port_map(text: str) -> dict:
    """Parse e.g. '1=1:TE,2=1:TM,3=2:TE,4=2:TM' into a mapping dict."""
    mapping = {}
    for item in text.split(","):
        m = re.fullmatch(r"\s*(\d)\s*=\s*(\d)\s*:\s*(TE|TM)\s*", item, re.IGNORECASE)
        if not m:
            raise InputError(f"bad --port-map entry {item!r} (expected PORT=FP:TE|TM)")
        mapping[int(m.group(1))] = (int(m.group(2)), m.group(3).upper())
    return mapping


# ---------------------------------------------------------------- commands


def _cmd_analyze(args) -> int:
    net = _read_network(args.input)
    mapping = _parse_port_map(args.port_map) if args.port_map else None
    sweep = map_ports_to_floquet(net, mapping)
    pol = analyze_sweep(sweep, args.direction)
    _write_text(args.output, export_polarimetry_csv(pol))

    try:
        f_res = find_resonance(pol)
    except NoResonanceError as exc:
        print(f"analyze: {exc}", file=sys.stderr)
        return 3
    i = int(np.argmin(np.abs(pol.frequencies - f_res)))
    theta = pol.theta_f[i]
    print(
        f"analyze: resonance {f_res / 1e9:.6g} GHz, "
        f"rotation {theta:.6g} rad ({math.degrees(theta):.4g} deg), "
        f"ellipticity {pol.delta_f[i]:.3g}, "
        f"co-pol {copol_transmission(pol)[i]:.4g}",
        file=sys.stderr,
    )
    return 0


def _check_one(path: str):
    net = _read_network(path)
    defects = np.array([reciprocity_defect(m) for m in net.data])
    worst = int(np.argmax(defects))
    return float(defects[worst]), float(net.frequencies[worst])


def _cmd_check_reciprocity(args) -> int:
    files = args.inputs
    with ThreadPoolExecutor(max_workers=worker_count(len(files))) as pool:
        results = list(pool.map(_check_one, files))
    status = 0
    for path, (defect, freq) in zip(files, results):
        verdict = "reciprocal" if defect <= args.tol else "NONRECIPROCAL"
        print(f"{path}: max |S - S^T| = {defect:.6g} at {freq / 1e9:.6g} GHz -> {verdict}")
        if defect > args.tol:
            status = 3
    return status


def _cmd_design(args) -> int:
    sub = Substrate(eps_r=args.eps_r, height=args.height)
    eps_e = effective_permittivity(sub, args.trace_width)
    z0 = microstrip_z0(sub, args.trace_width)
    geom = ring_geometry_for(
        args.f_target, sub, args.trace_width,
        alpha_fet=args.alpha_fet, fet_phase=args.fet_phase, m=args.mode,
    )
    f_check = resonance_frequency(geom, sub, fet_phase=args.fet_phase)
    lambda_g = 299_792_458.0 / (args.f_target * math.sqrt(eps_e))
    print(f"effective permittivity : {eps_e:.6g}")
    print(f"characteristic Z0      : {z0:.6g} ohm")
    print(f"guided wavelength      : {lambda_g * 1e3:.6g} mm")
    print(f"line length            : {geom.length * 1e3:.6g} mm")
    print(f"mean radius            : {geom.r_mean * 1e3:.6g} mm")
    print(f"resonance round trip   : {f_check / 1e9:.9g} GHz")
    return 0


def _cmd_synth(args) -> int:
    params = SurrogateParams(
        f0=args.f0, q_loaded=args.q, u=args.u, g=args.g,
        il_bg=args.il_bg, refl_bg=args.refl_bg,
    )
    freqs = np.linspace(args.f_start, args.f_stop, args.n_points)
    sweep = synth_ring_response(params, freqs)
    report = passivity_report(sweep)
    if not report.passive:
        print(
            f"synth: active response, max singular value "
            f"{report.max_singular_value:.4g} at {report.frequency / 1e9:.6g} GHz",
            file=sys.stderr,
        )
    _write_text(args.output, write_touchstone(_sweep_to_network(sweep)))
    return 0


def _cmd_ferrite_tensor(args) -> int:
    p = FerriteParams(h0=args.h0, m0_4pi=args.m0, alpha=args.alpha, gamma=args.gamma)
    omega = 2.0 * math.pi * args.freq
    tensor = polder_tensor(p, omega)
    f0 = larmor_frequency(p) / (2.0 * math.pi)
    print(f"larmor frequency : {f0 / 1e9:.6g} GHz")
    print(f"mu               : {tensor.mu:.9g}")
    print(f"k                : {tensor.k:.9g}")
    print("tensor (units of mu_0):")
    for row in tensor.matrix:
        print("  [" + "  ".join(f"{v.real:+.6g}{v.imag:+.6g}j" for v in row) + "]")
    return 0


def _cmd_ferrite_llg(args) -> int:
    p = FerriteParams(h0=args.h0, m0_4pi=args.m0, alpha=args.alpha, gamma=args.gamma)
    f0 = larmor_frequency(p)
    if f0 <= 0:
        raise InputError("llg demo needs h0 > 0 to define a precession period")
    period = 2.0 * math.pi / f0
    dt = args.dt if args.dt is not None else period / 200.0
    t_end = args.t_end if args.t_end is not None else 20.0 * period
    tilt = math.radians(args.tilt_deg)
    m0 = args.ms * np.array([math.sin(tilt), 0.0, math.cos(tilt)])
    traj = integrate_llg(m0, np.array([0.0, 0.0, args.h0]), p, dt, t_end)

    norms = np.linalg.norm(traj.m, axis=1)
    drift = float(np.max(np.abs(norms - norms[0])) / norms[0])
    print(f"steps            : {len(traj) - 1} at dt = {dt:.6g} s")
    print(f"|m| drift        : {drift:.3e}")
    try:
        w = precession_frequency(traj)
        print(f"precession       : {w / (2e9 * math.pi):.6g} GHz "
              f"(larmor {f0 / (2e9 * math.pi):.6g} GHz)")
    except AnalysisError as exc:
        print(f"precession       : {exc}")
    if args.output:
        rows = ["t_s,mx_g,my_g,mz_g"]
        rows += [
            f"{t:.12g},{m[0]:.12g},{m[1]:.12g},{m[2]:.12g}"
            for t, m in zip(traj.times, traj.m)
        ]
        _write_text(args.output, "\n".join(rows) + "\n")
    return 0


def _cmd_cosim(args) -> int:
    em = map_ports_to_floquet(_read_network(args.em))
    circ_net = _read_network(args.circuit)
    if circ_net.n_ports == 2:
        circuit = expand_twoport(circ_net.frequencies, circ_net.data, circ_net.metadata)
    elif circ_net.n_ports == 4:
        circuit = map_ports_to_floquet(circ_net)
    else:
        raise InputError(
            f"circuit must be a 2-port or 4-port network, got {circ_net.n_ports} ports"
        )
    out = cosim(em, circuit)
    _write_text(args.output, write_touchstone(_sweep_to_network(out)))
    return 0


def _cmd_optimize(args) -> int:
    cfg = RunConfig.from_json(_read_text(args.config))
    result = optimize_surrogate(
        cfg.surrogate, cfg.goal, cfg.frequencies,
        variables=cfg.variables, direction=cfg.direction,
        max_iter=cfg.max_iter, gtol=cfg.gtol, ftol=cfg.ftol, fd_step=cfg.fd_step,
    )
    log_text = "\n".join(result.log_lines) + "\n"
    if args.log:
        _write_text(args.log, log_text)
    else:
        sys.stderr.write(log_text)

    sweep = synth_ring_response(result.params, cfg.frequencies)
    pol = analyze_sweep(sweep, cfg.direction)
    kpi: dict = {"cost": result.cost}
    try:
        f_res = find_resonance(pol)
        i = int(np.argmin(np.abs(pol.frequencies - f_res)))
        s = sweep.matrices[i]
        phase_diff = abs(
            _wrap_pi(float(np.angle(s[3, 0]) - np.angle(s[1, 2])))
        )
        kpi.update(
            f_res_hz=f_res,
            theta_f_rad=float(pol.theta_f[i]),
            theta_f_deg=math.degrees(float(pol.theta_f[i])),
            delta_f=float(pol.delta_f[i]),
            copol_at_res=float(copol_transmission(pol)[i]),
            cross_pol_phase_diff_rad=phase_diff,
        )
    except NoResonanceError:
        kpi["f_res_hz"] = None
    pr = passivity_report(sweep)
    report = {
        "converged": result.converged,
        "iterations": result.iterations,
        "reason": result.reason,
        "cost": result.cost,
        "params": {v: getattr(result.params, v) for v in
                   ("f0", "q_loaded", "u", "g", "il_bg", "refl_bg")},
        "kpi": kpi,
        "passive": pr.passive,
        "max_singular_value": pr.max_singular_value,
    }
    _write_text(args.output, json.dumps(report, indent=2) + "\n")
    return 0


def _wrap_pi(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


# ---------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="gyrokit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gyrokit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="polarimetry spectra from a 4-port Touchstone file")
    p.add_argument("input")
    p.add_argument("--port-map", help="port mapping, e.g. 1=1:TE,2=1:TM,3=2:TE,4=2:TM")
    p.add_argument("--direction", type=int, choices=(1, 2), default=1)
    p.add_argument("-o", "--output", help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("check-reciprocity", help="max |S - S^T| verdict per file")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_check_reciprocity)

    p = sub.add_parser("design", help="size a ring for a target resonance")
    p.add_argument("--f-target", type=float, required=True, help="Hz")
    p.add_argument("--eps-r", type=float, required=True)
    p.add_argument("--height", type=float, required=True, help="m")
    p.add_argument("--trace-width", type=float, required=True, help="m")
    p.add_argument("--alpha-fet", type=float, default=0.0, help="gap angle, rad")
    p.add_argument("--fet-phase", type=float, default=0.0, help="device phase, rad")
    p.add_argument("--mode", type=int, default=1)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("synth", help="synthesize a surrogate ring .s4p")
    p.add_argument("--f0", type=float, required=True, help="Hz")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--il-bg", type=float, default=0.9)
    p.add_argument("--refl-bg", type=float, default=0.3)
    p.add_argument("--f-start", type=float, default=4e9, help="Hz")
    p.add_argument("--f-stop", type=float, default=7e9, help="Hz")
    p.add_argument("--n-points", type=int, default=801)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ferrite", help="gyromagnetic reference calculations")
    fsub = p.add_subparsers(dest="ferrite_command", required=True, parser_class=_Parser)

    t = fsub.add_parser("tensor", help="permeability tensor components")
    t.add_argument("--h0", type=float, required=True, help="Oe")
    t.add_argument("--m0", type=float, default=0.0, help="4*pi*M0, G")
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--gamma", type=float, default=GAMMA_DEFAULT, help="rad/s/Oe")
    t.add_argument("--freq", type=float, required=True, help="Hz")
    t.set_defaults(func=_cmd_ferrite_tensor)

    t = fsub.add_parser("llg", help="integrate precession and report the frequency")
    t.add_argument("--h0", type=float, required=True, help="Oe")
    t.add_argument("--m0", type=float, default=0.0, help="4*pi*M0, G")
    t.add_argument("--alpha", type=float, default=0.0)
    t.add_argument("--gamma", type=float, default=GAMMA_DEFAULT, help="rad/s/Oe")
    t.add_argument("--ms", type=float, default=1800.0, help="|M|, G")
    t.add_argument("--tilt-deg", type=float, default=30.0)
    t.add_argument("--dt", type=float, help="s (default: period / 200)")
    t.add_argument("--t-end", type=float, help="s (default: 20 periods)")
    t.add_argument("-o", "--output", help="trajectory CSV path")
    t.set_defaults(func=_cmd_ferrite_llg)

    p = sub.add_parser("cosim", help="cascade an EM .s4p with a circuit .s2p/.s4p")
    p.add_argument("em")
    p.add_argument("circuit")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_cosim)

    p = sub.add_parser("optimize", help="run the design optimizer from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", help="report JSON path (default stdout)")
    p.add_argument("--log", help="iteration log CSV path (default stderr)")
    p.set_defaults(func=_cmd_optimize)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"gyrokit: error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"gyrokit: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"gyrokit: numerical failure: {exc}", file=sys.stderr)
        return 4
    except GyroKitError as exc:
        print(f"gyrokit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
