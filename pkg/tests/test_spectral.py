import math

import numpy as np
import pytest

from nsverify.errors import (
    ConfigurationError,
    GridMismatchError,
    UnsupportedOrderError,
)
from nsverify.spectral import (
    RealVectorField,
    SpectralVectorField,
    build_grid,
    hermitian_error,
    l2_inner,
    l2_norm,
    l2_norm_sq,
    leray_project,
    solenoidal_error,
    spectral_derivative,
    transform_forward,
    transform_inverse,
    zero_field,
)

from conftest import random_band_limited


class TestBuildGrid:
    def test_frequency_spacing_unit_box(self):
        g = build_grid(8, 2.0 * math.pi)
        assert g.dxi == pytest.approx(1.0)
        assert set(g.wavenumbers.astype(int)) == set(range(-4, 4))

    def test_wide_box(self):
        g = build_grid(64, 16.0 * math.pi)
        assert g.dxi == pytest.approx(1.0 / 8.0)
        assert np.max(np.abs(g.xi1d)) == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [7, 6, 9, 0])
    def test_bad_sizes(self, n):
        with pytest.raises(ConfigurationError):
            build_grid(n, 2.0 * math.pi)

    def test_bad_box(self):
        with pytest.raises(ConfigurationError):
            build_grid(16, 0.0)


class TestTransforms:
    def test_zero_field(self, grid16):
        w = transform_forward(
            RealVectorField(grid16, np.zeros((3, 16, 16, 16)))
        )
        assert np.all(w.coeffs == 0)

    def test_single_mode_two_entries(self, grid16):
        x = grid16.axes()[0]
        samples = np.zeros((3, 16, 16, 16))
        samples[0] = np.sin(x) * np.ones((1, 16, 16))
        w = transform_forward(RealVectorField(grid16, samples))
        nz = np.argwhere(np.abs(w.coeffs) > 1e-12)
        assert len(nz) == 2
        mags = [abs(w.coeffs[tuple(i)]) for i in nz]
        assert mags[0] == pytest.approx(mags[1], rel=1e-14)
        # entries sit at k = +-e1 of the first component
        assert {tuple(i) for i in nz} == {(0, 1, 0, 0), (0, 15, 0, 0)}

    def test_round_trip(self, grid16):
        f = random_band_limited(grid16, 3)
        w = transform_forward(f)
        back = transform_inverse(w)
        scale = np.abs(f.samples).max()
        assert np.abs(back.samples - f.samples).max() < 1e-12 * scale

    def test_parseval(self, grid16):
        for seed in range(5):
            f = random_band_limited(grid16, seed)
            w = transform_forward(f)
            phys = (f.samples**2).sum() * grid16.cell_volume
            assert phys == pytest.approx(l2_norm_sq(w), rel=1e-12)

    def test_nyquist_forced_zero(self, grid16):
        rng = np.random.default_rng(0)
        w = transform_forward(
            RealVectorField(grid16, rng.standard_normal((3, 16, 16, 16)))
        )
        assert np.all(w.coeffs[:, 8, :, :] == 0)
        assert np.all(w.coeffs[:, :, :, 8] == 0)

    def test_hermitian_symmetry(self, grid16):
        w = transform_forward(random_band_limited(grid16, 5))
        assert hermitian_error(w) < 1e-13 * np.abs(w.coeffs).max()


class TestDerivative:
    def test_order_zero_identity(self, grid16):
        w = transform_forward(random_band_limited(grid16, 1))
        d = spectral_derivative(w, (0, 0, 0))
        assert np.array_equal(d.coeffs, w.coeffs)
        d0 = spectral_derivative(w, 0)
        assert np.array_equal(d0.coeffs, w.coeffs)

    def test_sin_to_cos(self, grid16):
        x = grid16.axes()[0]
        samples = np.zeros((3, 16, 16, 16))
        samples[0] = np.sin(x) * np.ones((1, 16, 16))
        w = transform_forward(RealVectorField(grid16, samples))
        d = transform_inverse(spectral_derivative(w, (1, 0, 0)))
        expected = np.cos(x) * np.ones((1, 16, 16))
        assert np.abs(d.samples[0] - expected).max() < 1e-13

    def test_norm_scaling_aligned_mode(self, grid16):
        # single mode at |xi| = 2 on the x axis; second x-derivative scales
        # the norm by |xi|^2
        x = grid16.axes()[0]
        samples = np.zeros((3, 16, 16, 16))
        samples[1] = np.cos(2.0 * x) * np.ones((1, 16, 16))
        w = transform_forward(RealVectorField(grid16, samples))
        d = spectral_derivative(w, (2, 0, 0))
        assert l2_norm(d) == pytest.approx(4.0 * l2_norm(w), rel=1e-13)

    def test_order_cap(self, grid16):
        w = zero_field(grid16)
        with pytest.raises(UnsupportedOrderError):
            spectral_derivative(w, (2, 1, 1))
        with pytest.raises(UnsupportedOrderError):
            spectral_derivative(w, 2)

    def test_hermitian_preserved(self, grid16):
        w = transform_forward(random_band_limited(grid16, 9))
        d = spectral_derivative(w, (1, 1, 1))
        assert hermitian_error(d) < 1e-13 * max(np.abs(d.coeffs).max(), 1e-30)


class TestLerayProjection:
    def test_gradient_annihilated(self, grid16):
        x = grid16.axes()[0]
        # grad(cos x) = (-sin x, 0, 0)
        samples = np.zeros((3, 16, 16, 16))
        samples[0] = -np.sin(x) * np.ones((1, 16, 16))
        w = transform_forward(RealVectorField(grid16, samples))
        p = leray_project(w)
        assert np.abs(p.coeffs).max() < 1e-14

    def test_planar_vortex_unchanged(self, grid16):
        x, y, _ = grid16.axes()
        samples = np.zeros((3, 16, 16, 16))
        samples[0] = (np.sin(x) * np.cos(y)) * np.ones((1, 1, 16))
        samples[1] = (-np.cos(x) * np.sin(y)) * np.ones((1, 1, 16))
        w = transform_forward(RealVectorField(grid16, samples))
        p = leray_project(w)
        assert np.abs(p.coeffs - w.coeffs).max() < 1e-12 * np.abs(w.coeffs).max()

    def test_divergence_and_idempotence(self, grid16):
        w = transform_forward(random_band_limited(grid16, 13))
        p = leray_project(w)
        grad_norm = l2_norm(spectral_derivative(w, (1, 0, 0)))
        div_norm = math.sqrt(
            float((np.abs(1j * (grid16.xi[0] * p.coeffs[0]
                                + grid16.xi[1] * p.coeffs[1]
                                + grid16.xi[2] * p.coeffs[2])) ** 2).sum())
        )
        assert div_norm <= 1e-10 * grad_norm
        p2 = leray_project(p)
        assert np.abs(p2.coeffs - p.coeffs).max() < 1e-12 * np.abs(p.coeffs).max()

    def test_per_mode_solenoidal_invariant(self, grid16):
        p = leray_project(transform_forward(random_band_limited(grid16, 17)))
        assert solenoidal_error(p) <= 1e-10

    def test_self_adjoint(self, grid16):
        a = transform_forward(random_band_limited(grid16, 19))
        b = transform_forward(random_band_limited(grid16, 23))
        lhs = l2_inner(leray_project(a), b)
        rhs = l2_inner(a, leray_project(b))
        assert abs(lhs - rhs) <= 1e-12 * l2_norm(a) * l2_norm(b)

    def test_commutes_with_derivative(self, grid16):
        w = transform_forward(random_band_limited(grid16, 29))
        beta = (1, 1, 0)
        a = spectral_derivative(leray_project(w), beta)
        b = leray_project(spectral_derivative(w, beta))
        assert np.abs(a.coeffs - b.coeffs).max() <= 1e-12 * np.abs(a.coeffs).max()


class TestInnerProduct:
    def test_modulated_vortex_energy(self, grid16):
        # (sin x cos y cos z, -cos x sin y cos z, 0): each component
        # integrates to pi^3 over the unit box
        x, y, z = grid16.axes()
        samples = np.zeros((3, 16, 16, 16))
        samples[0] = np.sin(x) * np.cos(y) * np.cos(z)
        samples[1] = -np.cos(x) * np.sin(y) * np.cos(z)
        w = transform_forward(RealVectorField(grid16, samples))
        assert l2_norm_sq(w) == pytest.approx(2.0 * math.pi**3, rel=1e-13)

    def test_orthogonal_modes(self, grid16):
        x = grid16.axes()[0]
        y = grid16.axes()[1]
        a = np.zeros((3, 16, 16, 16))
        b = np.zeros((3, 16, 16, 16))
        a[0] = np.sin(x) * np.ones((1, 16, 16))
        b[0] = np.sin(2 * y) * np.ones((16, 1, 16))
        wa = transform_forward(RealVectorField(grid16, a))
        wb = transform_forward(RealVectorField(grid16, b))
        assert abs(l2_inner(wa, wb)) < 1e-14 * l2_norm(wa) * l2_norm(wb)

    def test_positivity(self, grid16):
        w = transform_forward(random_band_limited(grid16, 31))
        assert l2_inner(w, w) > 0
        assert l2_inner(zero_field(grid16), zero_field(grid16)) == 0.0

    def test_grid_mismatch(self, grid16):
        other = build_grid(16, 4.0 * math.pi)
        with pytest.raises(GridMismatchError):
            l2_inner(zero_field(grid16), zero_field(other))

    def test_symmetry(self, grid16):
        a = transform_forward(random_band_limited(grid16, 37))
        b = transform_forward(random_band_limited(grid16, 41))
        assert l2_inner(a, b) == pytest.approx(l2_inner(b, a), rel=1e-14)
