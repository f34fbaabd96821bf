"""Floquet scattering-matrix data model, reciprocity metric, and cascading.

A metasurface unit cell illuminated at normal incidence scatters the first
TE and TM Floquet modes on each side, giving a 4x4 complex S-matrix per
frequency.  Row/column ordering is fixed throughout the package as

    index 0: port 1, TE (y-polarized)
    index 1: port 1, TM (x-polarized)
    index 2: port 2, TE
    index 3: port 2, TM

so the matrix splits into 2x2 blocks [[r1, t12], [t21, r2]]: reflection at
each port on the diagonal, transmission toward port 1 (upper right) and
toward port 2 (lower left) off the diagonal.

Cascading of two-face S-blocks (any 2N x 2N matrix whose first N ports form
the left face and last N the right face) uses the Redheffer star product,
which solves the interface feedback loop exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import frozen_array as _frozen
from .errors import CascadeSingularError, InputError
from .polarimetry import JonesMatrix

__all__ = [
    "FloquetSMatrix",
    "FloquetSweep",
    "BlockDecomposition",
    "decompose_blocks",
    "reassemble_blocks",
    "direction_blocks",
    "assemble_floquet",
    "reciprocity_defect",
    "cascade",
    "perfect_thru",
]

# TE/TM rows are (y, x); Jones blocks are exposed in (x, y) order.  The swap
# happens exactly once, in decompose_blocks / reassemble_blocks.
_YX_TO_XY = np.array([1, 0])


def _as_matrix(s, size: int | None = None) -> np.ndarray:
    m = np.asarray(getattr(s, "entries", s), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if size is not None and m.shape[0] != size:
        raise InputError(f"expected a {size}x{size} matrix, got {m.shape[0]}x{m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix entries must be finite")
    return m


@dataclass(frozen=True)
class FloquetSMatrix:
    """4x4 complex scattering matrix of a unit cell at one frequency."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(_as_matrix(self.entries, 4), complex))

    def block(self, rows: slice, cols: slice) -> np.ndarray:
        return self.entries[rows, cols]


@dataclass(frozen=True)
class FloquetSweep:
    """Frequency-sampled Floquet S-matrices.

    frequencies are in Hz, strictly increasing, with one 4x4 matrix each.
    ``matrices`` is stored stacked as an (n, 4, 4) complex array.
    """

    frequencies: np.ndarray
    matrices: np.ndarray
    metadata: str = ""

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        m = np.asarray(self.matrices, dtype=complex)
        if f.ndim != 1 or f.size < 1:
            raise InputError("sweep needs at least one frequency")
        if np.any(~np.isfinite(f)) or np.any(np.diff(f) <= 0):
            raise InputError("frequencies must be finite and strictly increasing")
        if m.shape != (f.size, 4, 4):
            raise InputError(f"matrices must have shape ({f.size}, 4, 4), got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InputError("S-matrix entries must be finite")
        object.__setattr__(self, "frequencies", _frozen(f, float))
        object.__setattr__(self, "matrices", _frozen(m, complex))

    def __len__(self) -> int:
        return self.frequencies.size

    def matrix_at(self, i: int) -> FloquetSMatrix:
        return FloquetSMatrix(self.matrices[i])


@dataclass(frozen=True)
class BlockDecomposition:
    """Reflection/transmission Jones blocks of a 4-port Floquet S-matrix.

    All four blocks are in (x, y) Jones order.  ``t12`` carries waves
    incident at port 2 and received at port 1; ``t21`` the reverse.
    """

    r1: JonesMatrix
    r2: JonesMatrix
    t12: JonesMatrix
    t21: JonesMatrix


def _block_to_jones(block_yx: np.ndarray) -> JonesMatrix:
    b = block_yx[np.ix_(_YX_TO_XY, _YX_TO_XY)]
    return JonesMatrix(txx=b[0, 0], txy=b[0, 1], tyx=b[1, 0], tyy=b[1, 1])


def _jones_to_block(j: JonesMatrix) -> np.ndarray:
    return j.as_array()[np.ix_(_YX_TO_XY, _YX_TO_XY)]


def decompose_blocks(s: FloquetSMatrix | np.ndarray) -> BlockDecomposition:
    """Split a 4x4 Floquet S-matrix into (x, y)-ordered Jones blocks."""
    m = _as_matrix(s, 4)
    return BlockDecomposition(
        r1=_block_to_jones(m[0:2, 0:2]),
        t12=_block_to_jones(m[0:2, 2:4]),
        t21=_block_to_jones(m[2:4, 0:2]),
        r2=_block_to_jones(m[2:4, 2:4]),
    )


def reassemble_blocks(d: BlockDecomposition) -> FloquetSMatrix:
    """Inverse of decompose_blocks; exact round trip."""
    m = np.empty((4, 4), dtype=complex)
    m[0:2, 0:2] = _jones_to_block(d.r1)
    m[0:2, 2:4] = _jones_to_block(d.t12)
    m[2:4, 0:2] = _jones_to_block(d.t21)
    m[2:4, 2:4] = _jones_to_block(d.r2)
    return FloquetSMatrix(m)


def direction_blocks(matrices: np.ndarray, direction: int) -> tuple[np.ndarray, np.ndarray]:
    """Transmission and reflection blocks for one incidence direction.

    ``matrices`` is an (n, 4, 4) stack in Floquet ordering; returns the
    (n, 2, 2) transmission and reflection blocks re-indexed to (x, y) Jones
    order.  Direction 1 is incidence at port 1 (transmission toward port 2,
    reflection at port 1); direction 2 the mirror case.
    """
    m = np.asarray(matrices, dtype=complex)
    if m.ndim != 3 or m.shape[1:] != (4, 4):
        raise InputError(f"expected an (n, 4, 4) stack, got {m.shape}")
    if direction == 1:
        t, r = m[:, 2:4, 0:2], m[:, 0:2, 0:2]
    elif direction == 2:
        t, r = m[:, 0:2, 2:4], m[:, 2:4, 2:4]
    else:
        raise InputError(f"direction must be 1 or 2, got {direction!r}")
    return (
        t[:, _YX_TO_XY][:, :, _YX_TO_XY],
        r[:, _YX_TO_XY][:, :, _YX_TO_XY],
    )


def assemble_floquet(
    r1: np.ndarray, t12: np.ndarray, t21: np.ndarray, r2: np.ndarray
) -> np.ndarray:
    """Assemble (n, 4, 4) Floquet matrices from (x, y)-ordered block stacks.

    Vectorized inverse of direction_blocks over a whole sweep: each input is
    an (n, 2, 2) stack in Jones order and lands in the Floquet layout with
    rows/columns back in (TE, TM) = (y, x) order.
    """
    blocks = []
    for name, b in (("r1", r1), ("t12", t12), ("t21", t21), ("r2", r2)):
        b = np.asarray(b, dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (2, 2):
            raise InputError(f"{name} must be an (n, 2, 2) stack, got {b.shape}")
        blocks.append(b[:, _YX_TO_XY][:, :, _YX_TO_XY])
    r1b, t12b, t21b, r2b = blocks
    n = r1b.shape[0]
    out = np.empty((n, 4, 4), dtype=complex)
    out[:, 0:2, 0:2] = r1b
    out[:, 0:2, 2:4] = t12b
    out[:, 2:4, 0:2] = t21b
    out[:, 2:4, 2:4] = r2b
    return out


def reciprocity_defect(s: FloquetSMatrix | np.ndarray) -> float:
    """Largest entry magnitude of S - S^T; zero for a reciprocal network."""
    m = _as_matrix(s)
    return float(np.max(np.abs(m - m.T)))


def perfect_thru(n_modes: int = 2) -> np.ndarray:
    """Matched ideal connection between the two faces: S = [[0, I], [I, 0]]."""
    eye = np.eye(n_modes, dtype=complex)
    zero = np.zeros((n_modes, n_modes), dtype=complex)
    return np.block([[zero, eye], [eye, zero]])


def cascade(
    a: FloquetSMatrix | np.ndarray,
    b: FloquetSMatrix | np.ndarray,
    frequency: float | None = None,
    cond_limit: float = 1e12,
):
    """Redheffer star product of two two-face S-blocks.

    The right face of ``a`` is connected to the left face of ``b``; the
    result maps (a left-face, b right-face) waves.  Both inputs must be
    2N x 2N with the same N.  The interface feedback (I - b11 a22) is solved
    directly; a condition estimate above ``cond_limit`` raises
    CascadeSingularError (carrying that estimate and, when given, the
    frequency for context).

    Returns a FloquetSMatrix when ``a`` is one, otherwise an ndarray.
    """
    ma = _as_matrix(a)
    mb = _as_matrix(b, ma.shape[0])
    if ma.shape[0] % 2:
        raise InputError("two-face blocks must have an even number of ports")
    n = ma.shape[0] // 2
    a11, a12 = ma[:n, :n], ma[:n, n:]
    a21, a22 = ma[n:, :n], ma[n:, n:]
    b11, b12 = mb[:n, :n], mb[:n, n:]
    b21, b22 = mb[n:, :n], mb[n:, n:]

    eye = np.eye(n, dtype=complex)
    f_ab = eye - b11 @ a22
    f_ba = eye - a22 @ b11
    cond = float(np.linalg.cond(f_ab))
    if not np.isfinite(cond) or cond > cond_limit:
        raise CascadeSingularError(cond, frequency)

    x = np.linalg.solve(f_ab, np.concatenate([b11 @ a21, b12], axis=1))
    y = np.linalg.solve(f_ba, np.concatenate([a21, a22 @ b12], axis=1))
    out = np.empty_like(ma)
    out[:n, :n] = a11 + a12 @ x[:, :n]
    out[:n, n:] = a12 @ x[:, n:]
    out[n:, :n] = b21 @ y[:, :n]
    out[n:, n:] = b22 + b21 @ y[:, n:]
    if isinstance(a, FloquetSMatrix):
        return FloquetSMatrix(out)
    return out
