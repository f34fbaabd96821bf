import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import random_complex
from gyrokit.errors import (
    InputError,
    NoResonanceError,
    PolarizationUndefinedError,
    RotationUndefinedError,
)
from gyrokit.polarimetry import (
    CIRCULAR_BASIS,
    CircularJones,
    JonesMatrix,
    analyze_sweep,
    circ_to_lin,
    copol_transmission,
    ellipticity,
    find_resonance,
    lin_to_circ,
    resonance_copol,
    rotation_angle,
)
from gyrokit.smatrix import FloquetSweep, assemble_floquet, decompose_blocks

finite_complex = st.complex_numbers(
    allow_nan=False, allow_infinity=False, max_magnitude=1e8
)


def jones_rotation(phi: float) -> JonesMatrix:
    return JonesMatrix(
        txx=math.cos(phi), txy=-math.sin(phi), tyx=math.sin(phi), tyy=math.cos(phi)
    )


def sweep_from_blocks(freqs, t21, r1=None, t12=None, r2=None) -> FloquetSweep:
    n = len(freqs)
    zero = np.zeros((n, 2, 2), dtype=complex)
    r1 = zero if r1 is None else r1
    r2 = zero if r2 is None else r2
    t12 = zero if t12 is None else t12
    return FloquetSweep(np.asarray(freqs, float), assemble_floquet(r1, t12, t21, r2))


class TestLinToCirc:
    def test_identity(self):
        c = lin_to_circ(JonesMatrix(1, 0, 0, 1))
        assert c.t_rr == 1 and c.t_ll == 1 and c.t_rl == 0 and c.t_lr == 0

    @pytest.mark.parametrize("phi", [-1.3, -0.4, 0.0, 0.2, 0.9, 1.5])
    def test_rotation_diagonalizes(self, phi):
        c = lin_to_circ(jones_rotation(phi))
        assert abs(c.t_rr - np.exp(-1j * phi)) < 1e-15
        assert abs(c.t_ll - np.exp(+1j * phi)) < 1e-15
        assert abs(c.t_rl) < 1e-15 and abs(c.t_lr) < 1e-15

    def test_single_linear_entry_spreads_evenly(self):
        c = lin_to_circ(JonesMatrix(1, 0, 0, 0))
        assert c.t_rr == 0.5 and c.t_rl == 0.5 and c.t_lr == 0.5 and c.t_ll == 0.5

    def test_matches_basis_conjugation_on_100_random(self, rng):
        inv = np.linalg.inv(CIRCULAR_BASIS)
        for _ in range(100):
            j = random_complex(rng, (2, 2))
            expected = CIRCULAR_BASIS @ j @ inv
            got = lin_to_circ(JonesMatrix.from_array(j)).as_array()
            assert np.max(np.abs(got - expected)) < 1e-12

    @given(
        a=finite_complex, b=finite_complex, c=finite_complex, d=finite_complex,
        e=finite_complex, f=finite_complex, g=finite_complex, h=finite_complex,
        alpha=finite_complex, beta=finite_complex,
    )
    @settings(max_examples=60, deadline=None)
    def test_linearity(self, a, b, c, d, e, f, g, h, alpha, beta):
        j1 = np.array([[a, b], [c, d]])
        j2 = np.array([[e, f], [g, h]])
        combo = alpha * j1 + beta * j2
        if not np.all(np.isfinite(np.array([combo.real, combo.imag]))):
            return
        lhs = lin_to_circ(JonesMatrix.from_array(combo)).as_array()
        rhs = (
            alpha * lin_to_circ(JonesMatrix.from_array(j1)).as_array()
            + beta * lin_to_circ(JonesMatrix.from_array(j2)).as_array()
        )
        scale = max(1.0, float(np.max(np.abs(lhs))))
        assert np.max(np.abs(lhs - rhs)) / scale < 1e-12

    def test_circ_to_lin_round_trip(self, rng):
        for _ in range(20):
            j = JonesMatrix.from_array(random_complex(rng, (2, 2)))
            back = circ_to_lin(lin_to_circ(j))
            assert np.max(np.abs(back.as_array() - j.as_array())) < 1e-14


class TestEllipticity:
    def test_pure_rhcp(self):
        assert ellipticity(CircularJones(1, 0, 0, 0)) == 1.0

    def test_pure_lhcp(self):
        assert ellipticity(CircularJones(0, 0, 0, 0.5)) == -1.0

    def test_balanced_is_linear(self):
        assert ellipticity(CircularJones(0.5, 0, 0, 0.5j)) == 0.0

    def test_undefined_raises(self):
        with pytest.raises(PolarizationUndefinedError):
            ellipticity(CircularJones(0, 1, 1, 0))

    @given(a=finite_complex, b=finite_complex)
    @settings(max_examples=60, deadline=None)
    def test_bounded(self, a, b):
        if abs(a) + abs(b) == 0:
            return
        val = ellipticity(CircularJones(a, 0, 0, b))
        assert -1.0 <= val <= 1.0
        if abs(a) == abs(b):
            assert abs(val) < 1e-12


class TestRotationAngle:
    @pytest.mark.parametrize("phi", [-1.5, -0.7, 0.0, 0.4, 1.2, math.pi / 2])
    def test_recovers_rotation(self, phi):
        c = lin_to_circ(jones_rotation(phi))
        assert rotation_angle(c) == pytest.approx(phi, abs=1e-12)

    def test_symmetric_reciprocal_jones_is_zero(self, rng):
        for _ in range(10):
            a, b, c = random_complex(rng, 3)
            j = JonesMatrix(txx=a, txy=b, tyx=b, tyy=a)
            assert rotation_angle(lin_to_circ(j)) == pytest.approx(0.0, abs=1e-12)

    def test_zero_corotating_raises(self):
        with pytest.raises(RotationUndefinedError):
            rotation_angle(CircularJones(0, 0, 0, 1))

    def test_range_is_half_open(self):
        # t_ll / t_rr on the negative real axis maps to +pi/2, not -pi/2
        assert rotation_angle(CircularJones(1, 0, 0, -1)) == pytest.approx(math.pi / 2)

    def test_magnitude_mode(self):
        c = CircularJones(1.0, 0, 0, 1.0j)
        assert rotation_angle(c, mode="magnitude") == pytest.approx(math.atan(1.0) / 2)
        with pytest.raises(InputError):
            rotation_angle(c, mode="bogus")


class TestAnalyzeSweep:
    def test_matches_per_matrix_path(self, rng):
        freqs = np.linspace(4e9, 5e9, 7)
        mats = random_complex(rng, (7, 4, 4))
        sweep = FloquetSweep(freqs, mats)
        for direction in (1, 2):
            pol = analyze_sweep(sweep, direction)
            for i in range(7):
                d = decompose_blocks(mats[i])
                t = d.t21 if direction == 1 else d.t12
                r = d.r1 if direction == 1 else d.r2
                assert pol.theta_f[i] == pytest.approx(
                    rotation_angle(lin_to_circ(t)), abs=1e-12
                )
                assert pol.delta_f[i] == pytest.approx(
                    ellipticity(lin_to_circ(t)), abs=1e-12
                )
                assert pol.theta_k[i] == pytest.approx(
                    rotation_angle(lin_to_circ(r)), abs=1e-12
                )
                assert pol.delta_k[i] == pytest.approx(
                    ellipticity(lin_to_circ(r)), abs=1e-12
                )

    def test_mirror_symmetric_reciprocal_sweep_has_zero_rotation(self, rng):
        # reciprocal and mirror-symmetric: symmetric blocks, t12 = t21^T
        n = 9
        freqs = np.linspace(4e9, 5e9, n)
        t21 = np.empty((n, 2, 2), dtype=complex)
        r = np.empty((n, 2, 2), dtype=complex)
        for i in range(n):
            a, b, c, d, e, f = random_complex(rng, 6)
            t21[i] = [[a, b], [b, c]]
            r[i] = [[d, e], [e, f]]
        t12 = np.transpose(t21, (0, 2, 1))
        sweep = sweep_from_blocks(freqs, t21, r1=r, t12=t12, r2=r)
        from gyrokit.smatrix import reciprocity_defect

        assert max(reciprocity_defect(m) for m in sweep.matrices) < 1e-12
        pol = analyze_sweep(sweep)
        assert np.nanmax(np.abs(pol.theta_f)) < 1e-9

    def test_gap_flagged_not_fatal(self):
        freqs = np.array([1e9, 2e9, 3e9])
        t21 = np.tile(np.eye(2, dtype=complex), (3, 1, 1))
        t21[1] = 0.0  # dead transmission at one frequency only
        pol = analyze_sweep(sweep_from_blocks(freqs, t21))
        assert np.isnan(pol.theta_f[1]) and np.isnan(pol.delta_f[1])
        assert pol.gap_reasons[1] is not None
        assert "undefined" in pol.gap_reasons[1]
        assert np.isfinite(pol.theta_f[0]) and np.isfinite(pol.theta_f[2])
        assert pol.gaps.tolist() == [True, True, True] or pol.gaps[1]

    def test_unwrap_bridges_branch_jump(self):
        # rotation ramps through +pi/2; principal value jumps, unwrapped stays smooth
        freqs = np.linspace(1e9, 2e9, 41)
        phis = np.linspace(0.3, 2.2, 41)
        t21 = np.array([jones_rotation(p).as_array() for p in phis])
        pol = analyze_sweep(sweep_from_blocks(freqs, t21))
        principal_jumps = np.max(np.abs(np.diff(pol.theta_f)))
        unwrapped_jumps = np.max(np.abs(np.diff(pol.theta_f_unwrapped)))
        assert principal_jumps > 1.0
        assert unwrapped_jumps < 0.1
        assert_allclose(pol.theta_f_unwrapped, phis, atol=1e-9)


class TestFindResonance:
    def _dip_sweep(self, f0, n=801, depth=0.8, q=30.0):
        freqs = np.linspace(4e9, 7e9, n)
        lor = 1.0 / (1.0 + 2j * q * (freqs - f0) / f0)
        t = np.zeros((n, 2, 2), dtype=complex)
        t[:, 0, 0] = t[:, 1, 1] = 0.9 - depth * lor
        return sweep_from_blocks(freqs, t)

    def test_locates_dip_within_grid_step(self):
        pol = analyze_sweep(self._dip_sweep(5.69e9))
        step = 3e9 / 800
        assert abs(find_resonance(pol) - 5.69e9) <= step

    def test_refinement_beats_grid(self):
        pol = analyze_sweep(self._dip_sweep(5.69e9))
        step = 3e9 / 800
        mag = copol_transmission(pol)
        grid_best = pol.frequencies[int(np.argmin(mag))]
        assert abs(find_resonance(pol) - 5.69e9) < abs(grid_best - 5.69e9)
        assert abs(find_resonance(pol) - 5.69e9) < 0.2 * step

    def test_flat_sweep_raises(self):
        freqs = np.linspace(4e9, 5e9, 11)
        t = np.tile(0.5 * np.eye(2, dtype=complex), (11, 1, 1))
        with pytest.raises(NoResonanceError):
            find_resonance(analyze_sweep(sweep_from_blocks(freqs, t)))

    def test_monotone_sweep_raises(self):
        freqs = np.linspace(4e9, 5e9, 11)
        t = np.zeros((11, 2, 2), dtype=complex)
        t[:, 0, 0] = t[:, 1, 1] = np.linspace(0.2, 0.9, 11)
        with pytest.raises(NoResonanceError):
            find_resonance(analyze_sweep(sweep_from_blocks(freqs, t)))

    def test_too_short_raises(self):
        freqs = np.array([1e9, 2e9])
        t = np.tile(np.eye(2, dtype=complex), (2, 1, 1))
        with pytest.raises(InputError):
            find_resonance(analyze_sweep(sweep_from_blocks(freqs, t)))

    def test_exact_null_returns_sample(self):
        sweep = self._dip_sweep(5.69e9)
        pol = analyze_sweep(sweep)
        mag = copol_transmission(pol)
        i = int(np.argmin(mag))
        t = pol.transmission.copy()
        t[i] = 0.0
        mutated = sweep_from_blocks(pol.frequencies, t)
        pol2 = analyze_sweep(mutated)
        assert find_resonance(pol2) == pol.frequencies[i]
        assert resonance_copol(pol2, float(pol.frequencies[i])) == 0.0

    def test_resonance_copol_interpolates_dip(self):
        pol = analyze_sweep(self._dip_sweep(5.69e9))
        f_res = find_resonance(pol)
        interp = resonance_copol(pol, f_res)
        grid_min = float(np.min(copol_transmission(pol)))
        assert 0.0 < interp <= grid_min
