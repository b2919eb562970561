"""Periodic-box spectral representation of 3-vector fields.

Conventions used everywhere in the package:

* collocation points ``x_j = j * l_box / n`` per axis, arrays indexed
  ``[component, ix, iy, iz]``;
* signed integer wavenumbers ``k in {-n/2, ..., n/2 - 1}`` per axis mapped to
  continuous frequencies ``xi = k * dxi`` with ``dxi = 2*pi/l_box``;
* unitary normalization: ``coeffs = fftn(samples) * l_box**1.5 / n**3`` so the
  discrete Parseval identity ``sum |coeffs|^2 == sum |samples|^2 * (l_box/n)^3``
  holds without extra constants;
* the Nyquist planes ``k = -n/2`` are forced to zero so that derivatives of
  real fields stay real and Hermitian symmetry is exact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

from .errors import ConfigurationError, GridMismatchError, UnsupportedOrderError

_WORKERS = int(os.environ.get("NSVERIFY_FFT_WORKERS", "0")) or (os.cpu_count() or 1)


def fft_workers() -> int:
    """Number of FFT worker threads (``NSVERIFY_FFT_WORKERS`` overrides)."""
    return _WORKERS


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid with cached frequency arrays."""

    n: int
    l_box: float
    dxi: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dxi", 2.0 * np.pi / self.l_box)
        k1d = np.fft.fftfreq(self.n, d=1.0 / self.n)  # integer wavenumbers
        xi1d = k1d * self.dxi
        object.__setattr__(self, "_k1d", k1d)
        object.__setattr__(self, "_xi1d", xi1d)
        xi = (
            xi1d[:, None, None],
            xi1d[None, :, None],
            xi1d[None, None, :],
        )
        object.__setattr__(self, "_xi", xi)
        xi_sq = xi[0] ** 2 + xi[1] ** 2 + xi[2] ** 2
        object.__setattr__(self, "_xi_sq", xi_sq)
        object.__setattr__(self, "_xi_mag", np.sqrt(xi_sq))
        kmax = (self.n - 1) // 3  # products of masked fields are alias-free
        absk = np.abs(k1d)
        keep1d = absk <= kmax
        mask = keep1d[:, None, None] & keep1d[None, :, None] & keep1d[None, None, :]
        object.__setattr__(self, "_dealias_mask", mask)
        nyq = absk == self.n // 2
        not_nyq = ~(nyq[:, None, None] | nyq[None, :, None] | nyq[None, None, :])
        object.__setattr__(self, "_not_nyquist", not_nyq)
        object.__setattr__(self, "dealias_kmax", kmax)
        inv = np.zeros_like(xi_sq)
        nz = xi_sq > 0
        inv[nz] = 1.0 / xi_sq[nz]
        object.__setattr__(self, "_inv_xi_sq", inv)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Signed integer wavenumbers per axis."""
        return self._k1d

    @property
    def xi1d(self) -> np.ndarray:
        return self._xi1d

    @property
    def xi(self) -> tuple:
        """Broadcastable continuous frequency arrays (xi_x, xi_y, xi_z)."""
        return self._xi

    @property
    def xi_sq(self) -> np.ndarray:
        return self._xi_sq

    @property
    def xi_mag(self) -> np.ndarray:
        return self._xi_mag

    @property
    def dealias_mask(self) -> np.ndarray:
        return self._dealias_mask

    @property
    def inv_xi_sq(self) -> np.ndarray:
        """1/|xi|^2 with the zero mode mapped to 0."""
        return self._inv_xi_sq

    @property
    def not_nyquist(self) -> np.ndarray:
        return self._not_nyquist

    @property
    def cell_volume(self) -> float:
        return (self.l_box / self.n) ** 3

    @property
    def volume(self) -> float:
        return self.l_box**3

    @property
    def xi_nyquist(self) -> float:
        return self.dxi * self.n / 2.0

    def axes(self) -> tuple:
        """Collocation coordinates per axis."""
        x = np.arange(self.n) * (self.l_box / self.n)
        return (x[:, None, None], x[None, :, None], x[None, None, :])

    def __eq__(self, other):
        return (
            isinstance(other, Grid) and self.n == other.n and self.l_box == other.l_box
        )

    def __hash__(self):
        return hash((self.n, self.l_box))


def build_grid(n: int, l_box: float) -> Grid:
    """Validate parameters and construct a :class:`Grid`.

    ``n`` must be even and at least 8; ``l_box`` positive.
    """
    if not isinstance(n, (int, np.integer)):
        raise ConfigurationError(f"grid size must be an integer, got {n!r}")
    if n < 8 or n % 2 != 0:
        raise ConfigurationError(f"grid size must be even and >= 8, got {n}")
    if not l_box > 0:
        raise ConfigurationError(f"box length must be positive, got {l_box}")
    return Grid(int(n), float(l_box))


@dataclass
class SpectralVectorField:
    """Three-component vector field stored as Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray  # (3, n, n, n) complex128
    solenoidal_flag: bool = False

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeffs.copy(), self.solenoidal_flag)

    def __post_init__(self):
        expected = (3, self.grid.n, self.grid.n, self.grid.n)
        if self.coeffs.shape != expected:
            raise ConfigurationError(
                f"coefficient array has shape {self.coeffs.shape}, expected {expected}"
            )


@dataclass
class RealVectorField:
    """Three-component vector field sampled at collocation points."""

    grid: Grid
    samples: np.ndarray  # (3, n, n, n) float64

    def __post_init__(self):
        expected = (3, self.grid.n, self.grid.n, self.grid.n)
        if self.samples.shape != expected:
            raise ConfigurationError(
                f"sample array has shape {self.samples.shape}, expected {expected}"
            )


# -- low-level transform helpers (real fields, Hermitian half-spectrum) -----


def _mirror_half_to_full(half: np.ndarray, n: int) -> np.ndarray:
    """Expand an rfftn half-spectrum (..., n, n, n//2+1) to the full cube.

    The conjugate tail uses ``F(-k) = conj(F(k))``; the index map
    ``i -> (-i) mod n`` keeps row 0 fixed and reverses rows 1..n-1, done here
    with strided slices instead of fancy indexing.
    """
    full = np.empty(half.shape[:-1] + (n,), dtype=complex)
    full[..., : n // 2 + 1] = half
    src = half[..., n // 2 - 1 : 0 : -1]
    np.conjugate(src[..., :0:-1, :0:-1, :], out=full[..., 1:, 1:, n // 2 + 1 :])
    np.conjugate(src[..., 0, :0:-1, :], out=full[..., 0, 1:, n // 2 + 1 :])
    np.conjugate(src[..., :0:-1, 0, :], out=full[..., 1:, 0, n // 2 + 1 :])
    np.conjugate(src[..., 0, 0, :], out=full[..., 0, 0, n // 2 + 1 :])
    return full


def phys_to_spec(samples: np.ndarray, grid: Grid) -> np.ndarray:
    """Real samples (..., n, n, n) to unitary full-cube coefficients."""
    n = grid.n
    half = _fft.rfftn(samples, axes=(-3, -2, -1), workers=_WORKERS)
    full = _mirror_half_to_full(half, n)
    full *= grid.l_box**1.5 / n**3
    full *= grid.not_nyquist
    return full


def spec_to_phys(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Unitary full-cube coefficients of a real field back to samples."""
    n = grid.n
    half = coeffs[..., : n // 2 + 1] * (n**3 / grid.l_box**1.5)
    return _fft.irfftn(half, s=(n, n, n), axes=(-3, -2, -1), workers=_WORKERS)


def transform_forward(f: RealVectorField) -> SpectralVectorField:
    """Forward transform; Nyquist planes are zeroed."""
    return SpectralVectorField(f.grid, phys_to_spec(f.samples, f.grid))


def transform_inverse(w: SpectralVectorField) -> RealVectorField:
    """Inverse transform to collocation samples (real part by construction)."""
    return RealVectorField(w.grid, spec_to_phys(w.coeffs, w.grid))


# -- operators ---------------------------------------------------------------


def spectral_derivative(w: SpectralVectorField, beta) -> SpectralVectorField:
    """Partial derivative ``d^b1_x d^b2_y d^b3_z`` as a Fourier multiplier.

    ``beta`` is a multi-index of three nonnegative integers with total order
    at most 3. Each coefficient is multiplied by ``(i*xi)**beta``; the Nyquist
    planes stay zero, so differentiating a real field yields a real field.
    """
    beta = _as_multi_index(beta)
    if sum(beta) > 3:
        raise UnsupportedOrderError(f"derivative order {sum(beta)} exceeds 3")
    g = w.grid
    mult = np.ones_like(g.xi_sq, dtype=complex)
    for axis, b in enumerate(beta):
        if b:
            mult = mult * (1j * g.xi[axis]) ** b
    return SpectralVectorField(g, w.coeffs * mult, w.solenoidal_flag)


def _as_multi_index(beta) -> tuple:
    if isinstance(beta, (int, np.integer)):
        if beta == 0:
            return (0, 0, 0)
        raise UnsupportedOrderError(
            "scalar multi-index only supported for order 0; pass a 3-tuple"
        )
    beta = tuple(int(b) for b in beta)
    if len(beta) != 3 or any(b < 0 for b in beta):
        raise UnsupportedOrderError(f"invalid multi-index {beta}")
    return beta


def leray_project(w: SpectralVectorField) -> SpectralVectorField:
    """Project onto divergence-free fields: ``I - xi xi^T / |xi|^2`` per mode.

    The zero mode is left unchanged. Idempotent and self-adjoint with respect
    to :func:`l2_inner`.
    """
    g = w.grid
    div = (
        g.xi[0] * w.coeffs[0] + g.xi[1] * w.coeffs[1] + g.xi[2] * w.coeffs[2]
    )
    div *= g.inv_xi_sq
    out = np.empty_like(w.coeffs)
    for c in range(3):
        np.multiply(g.xi[c], div, out=out[c])
        np.subtract(w.coeffs[c], out[c], out=out[c])
    return SpectralVectorField(g, out, solenoidal_flag=True)


def l2_inner(a: SpectralVectorField, b: SpectralVectorField) -> float:
    """L2 pairing ``int a . b dx`` via the Parseval sum (real part)."""
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")
    return float(np.vdot(a.coeffs, b.coeffs).real)


def l2_norm_sq(a: SpectralVectorField) -> float:
    return float(np.vdot(a.coeffs, a.coeffs).real)


def l2_norm(a: SpectralVectorField) -> float:
    return float(np.sqrt(l2_norm_sq(a)))


def divergence_coeffs(w: SpectralVectorField) -> np.ndarray:
    """Coefficients of div w (scalar field), i.e. ``i xi . w_hat``."""
    g = w.grid
    return 1j * (
        g.xi[0] * w.coeffs[0] + g.xi[1] * w.coeffs[1] + g.xi[2] * w.coeffs[2]
    )


def solenoidal_error(w: SpectralVectorField) -> float:
    """Worst per-mode ratio ``|xi . w_hat| / ||w_hat(xi)||`` over active modes."""
    g = w.grid
    dot = np.abs(
        g.xi[0] * w.coeffs[0] + g.xi[1] * w.coeffs[1] + g.xi[2] * w.coeffs[2]
    )
    mag = np.sqrt(np.abs(w.coeffs[0]) ** 2 + np.abs(w.coeffs[1]) ** 2 + np.abs(w.coeffs[2]) ** 2)
    scale = mag.max()
    if scale == 0.0:
        return 0.0
    active = mag > 1e-13 * scale
    if not active.any():
        return 0.0
    return float((dot[active] / mag[active]).max())


def hermitian_error(w: SpectralVectorField) -> float:
    """Max deviation from ``coeff(-k) == conj(coeff(k))``."""
    c = w.coeffs
    rev = c[:, ::-1, ::-1, ::-1]
    rev = np.roll(rev, (1, 1, 1), axis=(1, 2, 3))
    return float(np.abs(rev - np.conj(c)).max())


def apply_dealias(w: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(
        w.grid, w.coeffs * w.grid.dealias_mask, w.solenoidal_flag
    )


def zero_field(grid: Grid) -> SpectralVectorField:
    return SpectralVectorField(
        grid, np.zeros((3, grid.n, grid.n, grid.n), dtype=complex), True
    )


def spectral_tail_fraction(w: SpectralVectorField) -> float:
    """Energy fraction in the radial band above two thirds of Nyquist."""
    g = w.grid
    abs2 = (
        np.abs(w.coeffs[0]) ** 2 + np.abs(w.coeffs[1]) ** 2 + np.abs(w.coeffs[2]) ** 2
    )
    total = abs2.sum()
    if total == 0.0:
        return 0.0
    tail = abs2[g.xi_mag > (2.0 / 3.0) * g.xi_nyquist].sum()
    return float(tail / total)
