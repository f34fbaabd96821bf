"""Touchstone v1 ingestion/emission, CSV export, and JSON run configuration.

Only Touchstone v1 is handled: an option line ``# <unit> S <format> R <z0>``
(missing tokens default to GHz S MA R 50), ``!`` comments, and data lines
with the canonical wrapping (one record per line for 1/2-port files,
matrix-row-major wrapped lines for 3/4-port).  Two-port records use the
v1 column order S11 S21 S12 S22.  Values are stored as linear
real/imaginary regardless of the source format, and port data is treated
as consistently normalized; no impedance renormalization is performed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._util import frozen_array
from .cosim import OPTIMIZABLE, OptimizationGoal, SurrogateParams
from .errors import InputError, TouchstoneParseError
from .polarimetry import PolarimetrySweep
from .smatrix import FloquetSweep

__all__ = [
    "Network",
    "parse_touchstone",
    "write_touchstone",
    "map_ports_to_floquet",
    "export_polarimetry_csv",
    "RunConfig",
    "IDENTITY_PORT_MAP",
]

_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_FORMATS = ("RI", "MA", "DB")


@dataclass(frozen=True)
class Network:
    """Frequency-sampled n-port S-parameters (1 to 4 ports)."""

    frequencies: np.ndarray
    data: np.ndarray
    z0: float = 50.0
    source_format: str = "RI"
    freq_unit: str = "GHZ"
    metadata: str = ""

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        d = np.asarray(self.data, dtype=complex)
        if d.ndim != 3 or d.shape[1] != d.shape[2]:
            raise InputError(f"data must be (nf, p, p), got {d.shape}")
        if not 1 <= d.shape[1] <= 4:
            raise InputError(f"{d.shape[1]}-port networks are not supported (1..4)")
        if d.shape[0] != f.size:
            raise InputError("data length must match frequencies")
        if f.size < 1 or np.any(~np.isfinite(f)) or np.any(np.diff(f) <= 0):
            raise InputError("frequencies must be finite and strictly increasing")
        if not np.all(np.isfinite(d)):
            raise InputError("S-parameters must be finite")
        object.__setattr__(self, "frequencies", frozen_array(f, float))
        object.__setattr__(self, "data", frozen_array(d, complex))

    @property
    def n_ports(self) -> int:
        return self.data.shape[1]


def _parse_option_line(line: str, ln: int):
    unit, fmt, z0 = "GHZ", "MA", 50.0
    tokens = line[1:].upper().split()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in _UNIT_SCALE:
            unit = tok
        elif tok == "S":
            pass  # S-parameters are the only (and default) type handled
        elif tok in _FORMATS:
            fmt = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneParseError("option line: R without impedance value", ln)
            try:
                z0 = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneParseError(
                    f"option line: bad impedance {tokens[i + 1]!r}", ln
                ) from None
            i += 1
        elif tok in ("Y", "Z", "H", "G"):
            raise TouchstoneParseError(f"only S-parameters are supported, got {tok}", ln)
        else:
            raise TouchstoneParseError(f"unknown option token {tok!r}", ln)
        i += 1
    return unit, fmt, z0


def _to_complex(a: np.ndarray, b: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return a + 1j * b
    phase = np.exp(1j * np.radians(b))
    if fmt == "MA":
        return a * phase
    return 10.0 ** (a / 20.0) * phase  # DB


def _infer_ports(rows) -> int:
    ln, first = rows[0]
    width = len(first)
    if width == 3:
        return 1
    if width == 7:
        return 3
    if width == 9:
        if len(rows) > 1 and len(rows[1][1]) == 8:
            return 4
        return 2
    raise TouchstoneParseError(f"record starts with {width} values; cannot infer port count", ln)


# (first-line width, continuation-line widths) of one canonical v1 record
_RECORD_SHAPE = {1: (3, ()), 2: (9, ()), 3: (7, (6, 6)), 4: (9, (8, 8, 8))}


def parse_touchstone(text: str, n_ports: int | None = None) -> Network:
    """Parse Touchstone v1 text into a Network.

    The port count is inferred from the line structure unless given (the
    CLI passes the .sNp extension).  Malformed option lines, non-monotone
    frequencies, and ragged records raise TouchstoneParseError with the
    offending line number.
    """
    option = None
    rows: list[tuple[int, list[float]]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if option is not None:
                raise TouchstoneParseError("multiple option lines", ln)
            option = _parse_option_line(line, ln)
            continue
        if option is None:
            raise TouchstoneParseError("data before option line", ln)
        try:
            rows.append((ln, [float(tok) for tok in line.split()]))
        except ValueError:
            raise TouchstoneParseError(f"malformed data line {raw.strip()!r}", ln) from None
    if option is None:
        raise TouchstoneParseError("missing option line")
    if not rows:
        raise TouchstoneParseError("no data records")
    unit, fmt, z0 = option

    p = n_ports if n_ports is not None else _infer_ports(rows)
    if p not in _RECORD_SHAPE:
        raise InputError(f"{p}-port networks are not supported (1..4)")
    head_w, cont_ws = _RECORD_SHAPE[p]
    rows_per_record = 1 + len(cont_ws)
    if len(rows) % rows_per_record:
        raise TouchstoneParseError(
            f"incomplete {p}-port record at end of file", rows[-1][0]
        )

    freqs, records, record_lines = [], [], []
    for r in range(0, len(rows), rows_per_record):
        ln, head = rows[r]
        if len(head) != head_w:
            raise TouchstoneParseError(
                f"expected {head_w} values for a {p}-port record, got {len(head)}", ln
            )
        vals = head[1:]
        for off, w in enumerate(cont_ws, start=1):
            ln_c, cont = rows[r + off]
            if len(cont) != w:
                raise TouchstoneParseError(
                    f"expected {w} values on continuation line, got {len(cont)}", ln_c
                )
            vals.extend(cont)
        freqs.append(head[0])
        records.append(vals)
        record_lines.append(ln)

    f = np.asarray(freqs, dtype=float) * _UNIT_SCALE[unit]
    bad = np.nonzero(np.diff(f) <= 0)[0]
    if bad.size:
        raise TouchstoneParseError(
            "frequencies must be strictly increasing", record_lines[int(bad[0]) + 1]
        )

    raw = np.asarray(records, dtype=float).reshape(len(freqs), p * p, 2)
    values = _to_complex(raw[:, :, 0], raw[:, :, 1], fmt)
    if p == 2:
        # v1 column order S11 S21 S12 S22
        data = np.empty((len(freqs), 2, 2), dtype=complex)
        data[:, 0, 0] = values[:, 0]
        data[:, 1, 0] = values[:, 1]
        data[:, 0, 1] = values[:, 2]
        data[:, 1, 1] = values[:, 3]
    else:
        data = values.reshape(len(freqs), p, p)
    return Network(frequencies=f, data=data, z0=z0, source_format=fmt, freq_unit=unit)


def _entry_columns(v: np.ndarray, fmt: str):
    # Returns (first column, second column, per-column format strings).
    # Angle and dB fields carry 14 digits: at 12, the quantization of a
    # degree- or dB-valued field alone exceeds the 1e-12 round-trip budget.
    if fmt == "RI":
        return v.real, v.imag, ("{:.12g}", "{:.12g}")
    mag = np.abs(v)
    ang = np.degrees(np.angle(v))
    if fmt == "MA":
        return mag, ang, ("{:.12g}", "{:.14g}")
    return 20.0 * np.log10(np.maximum(mag, 1e-300)), ang, ("{:.14g}", "{:.14g}")  # DB


def write_touchstone(
    n: Network, fmt: str | None = None, freq_unit: str | None = None
) -> str:
    """Render a Network as Touchstone v1 text with 12-significant-digit fields."""
    fmt = (fmt or n.source_format).upper()
    if fmt not in _FORMATS:
        raise InputError(f"unsupported format {fmt!r} (RI, MA, or DB)")
    unit = (freq_unit or n.freq_unit).upper()
    if unit not in _UNIT_SCALE:
        raise InputError(f"unsupported frequency unit {unit!r}")
    p = n.n_ports
    if p not in _RECORD_SHAPE:
        raise InputError(f"{p}-port networks are not supported (1..4)")

    lines = []
    if n.metadata:
        lines.append(f"! {n.metadata}")
    lines.append(f"# {unit} S {fmt} R {n.z0:g}")

    if p == 2:
        order = [(0, 0), (1, 0), (0, 1), (1, 1)]
    else:
        order = [(i, j) for i in range(p) for j in range(p)]
    flat = np.stack([n.data[:, i, j] for i, j in order], axis=1)
    a, b, (fmt_a, fmt_b) = _entry_columns(flat, fmt)
    f_disp = n.frequencies / _UNIT_SCALE[unit]

    per_row = p if p >= 3 else p * p
    for k in range(f_disp.size):
        pairs = [
            f"{fmt_a.format(a[k, e])} {fmt_b.format(b[k, e])}" for e in range(p * p)
        ]
        head = " ".join([f"{f_disp[k]:.12g}"] + pairs[:per_row])
        lines.append(head)
        for start in range(per_row, p * p, per_row):
            lines.append(" ".join(pairs[start : start + per_row]))
    return "\n".join(lines) + "\n"


#: Port mapping that already matches the Floquet ordering.
IDENTITY_PORT_MAP = {1: (1, "TE"), 2: (1, "TM"), 3: (2, "TE"), 4: (2, "TM")}


def map_ports_to_floquet(n: Network, mapping: dict | None = None) -> FloquetSweep:
    """Reorder a physical 4-port network onto the Floquet (port, mode) slots.

    ``mapping`` sends each file port (1-based) to a (floquet_port, mode)
    pair with mode "TE" or "TM"; it must be a bijection onto the four
    slots.  The default is the identity ordering.
    """
    if n.n_ports != 4:
        raise InputError(f"Floquet mapping needs a 4-port network, got {n.n_ports} ports")
    mapping = IDENTITY_PORT_MAP if mapping is None else mapping
    slot_of: dict[int, int] = {}
    for port, (fp, mode) in mapping.items():
        if fp not in (1, 2) or str(mode).upper() not in ("TE", "TM"):
            raise InputError(f"invalid mapping target for port {port}: {(fp, mode)!r}")
        slot_of[int(port)] = (fp - 1) * 2 + (0 if str(mode).upper() == "TE" else 1)
    if sorted(slot_of) != [1, 2, 3, 4] or sorted(slot_of.values()) != [0, 1, 2, 3]:
        raise InputError("port mapping must be a bijection of ports 1..4 onto the 4 slots")
    perm = np.empty(4, dtype=int)
    for port, slot in slot_of.items():
        perm[slot] = port - 1
    data = n.data[:, perm][:, :, perm]
    return FloquetSweep(frequencies=n.frequencies.copy(), matrices=data, metadata=n.metadata)


_CSV_COLUMNS = (
    "freq_hz,theta_f_rad,theta_f_unwrapped_rad,delta_f,theta_k_rad,delta_k,"
    "mag_txx,mag_txy,mag_tyx,mag_tyy,phase_txx,phase_txy,phase_tyx,phase_tyy,"
    "mag_rxx,mag_rxy,mag_ryx,mag_ryy,phase_rxx,phase_rxy,phase_ryx,phase_ryy"
)


def _cell(v: float) -> str:
    return "" if not np.isfinite(v) else f"{v:.12g}"


def export_polarimetry_csv(p: PolarimetrySweep) -> str:
    """Render a polarimetry sweep as CSV; flagged gaps become empty fields."""
    lines = [_CSV_COLUMNS]
    t, r = p.transmission, p.reflection
    for i in range(len(p)):
        row = [
            p.frequencies[i],
            p.theta_f[i],
            p.theta_f_unwrapped[i],
            p.delta_f[i],
            p.theta_k[i],
            p.delta_k[i],
        ]
        for block in (t, r):
            row.extend(np.abs(block[i]).ravel())
            row.extend(np.angle(block[i]).ravel())
        lines.append(",".join(_cell(float(v)) for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunConfig:
    """Optimization run description loaded from JSON."""

    surrogate: SurrogateParams
    goal: OptimizationGoal
    f_start: float = 4e9
    f_stop: float = 7e9
    n_points: int = 801
    variables: tuple = ("f0", "q_loaded", "u", "g")
    direction: int = 1
    max_iter: int = 200
    gtol: float = 1e-10
    ftol: float = 1e-14
    fd_step: float = 1e-6

    def __post_init__(self):
        if not (0 < self.f_start < self.f_stop):
            raise InputError("grid must satisfy 0 < f_start < f_stop")
        if self.n_points < 3:
            raise InputError("grid needs at least 3 points")
        if self.direction not in (1, 2):
            raise InputError("direction must be 1 or 2")
        for v in self.variables:
            if v not in OPTIMIZABLE:
                raise InputError(f"unknown optimization variable {v!r}")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_points)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON config: {exc}") from None
        if not isinstance(doc, dict):
            raise InputError("config root must be a JSON object")

        def section(name, default=None):
            v = doc.get(name, {} if default is None else default)
            if not isinstance(v, dict):
                raise InputError(f"config section {name!r} must be an object")
            return v

        grid = section("grid")
        sur = section("surrogate")
        goal = section("goal")
        opt = section("optimizer")
        try:
            surrogate = SurrogateParams(
                f0=float(sur["f0"]),
                q_loaded=float(sur["q_loaded"]),
                u=float(sur.get("u", 0.0)),
                g=float(sur.get("g", 0.0)),
                il_bg=float(sur.get("il_bg", 0.9)),
                refl_bg=float(sur.get("refl_bg", 0.3)),
            )
        except KeyError as exc:
            raise InputError(f"config surrogate section is missing {exc.args[0]!r}") from None
        bounds = doc.get("bounds", {})
        if not isinstance(bounds, dict):
            raise InputError("config section 'bounds' must be an object")
        try:
            goal_obj = OptimizationGoal(
                f_target=float(goal["f_target"]),
                w_resonance=float(goal.get("w_resonance", 25.0)),
                w_rotation=float(goal.get("w_rotation", 1.0)),
                w_copol=float(goal.get("w_copol", 1.0)),
                bounds={str(k): (float(v[0]), float(v[1])) for k, v in bounds.items()},
            )
        except KeyError as exc:
            raise InputError(f"config goal section is missing {exc.args[0]!r}") from None
        return cls(
            surrogate=surrogate,
            goal=goal_obj,
            f_start=float(grid.get("f_start", 4e9)),
            f_stop=float(grid.get("f_stop", 7e9)),
            n_points=int(grid.get("n_points", 801)),
            variables=tuple(doc.get("variables", ("f0", "q_loaded", "u", "g"))),
            direction=int(doc.get("direction", 1)),
            max_iter=int(opt.get("max_iter", 200)),
            gtol=float(opt.get("gtol", 1e-10)),
            ftol=float(opt.get("ftol", 1e-14)),
            fd_step=float(opt.get("fd_step", 1e-6)),
        )
