"""Pseudospectral time integration of incompressible Navier-Stokes.

Unit viscosity, periodic box, pressure eliminated by projection:

    du_hat/dt = -|xi|^2 u_hat - P[F[(u . grad) u]]

The quadratic term is formed in physical space and truncated with the 2/3
cube mask, which makes every retained product mode an exact Galerkin
convolution. Time stepping is classical RK4 on the integrating-factor
transform ``v = exp(|xi|^2 t) u_hat``: the viscous factor is treated exactly,
so the linear problem is integrated without error regardless of step size.

The public tendency uses the convective product. The inner loop of
:func:`simulate` evaluates the same projected tendency through the rotational
product ``P[F[u x curl u]]``, which costs six fewer transforms; on the
dealiased grid the two agree to rounding because their difference is an exact
gradient.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    RescaleError,
    ResolutionError,
    ResolutionWarning,
    StepSizeError,
)
from .similarity import SimilarityFrame, frame, t_of_tau
from .spectral import (
    Grid,
    SpectralVectorField,
    l2_norm,
    leray_project,
    phys_to_spec,
    spec_to_phys,
    spectral_tail_fraction,
)

__all__ = [
    "SimState",
    "TrajectoryConfig",
    "Snapshot",
    "convective_term",
    "nse_rhs",
    "step",
    "simulate",
    "simulate_collect",
    "rescale_data",
    "pressure_recover",
    "TestField",
    "make_test_field",
    "weak_residual",
]


@dataclass
class SimState:
    t: float
    u_hat: SpectralVectorField


@dataclass
class Snapshot:
    """One emitted sample: frame, field, and per-run diagnostics."""

    frame: SimilarityFrame
    u_hat: SpectralVectorField
    tail_fraction: float
    nonlinear_orthogonality: float  # worst |<P[(u.grad)u], u>| ratio so far
    energy: float


@dataclass
class TrajectoryConfig:
    n: int
    l_box: float
    t_horizon: float = 1.0
    dt_max: float = 0.02
    cfl: float = 0.4
    sample_taus: Sequence[float] = ()
    delta: float = 0.05
    alpha: float = 0.1
    nonlinear: bool = True
    resolution_policy: str = "error"  # "error" | "warn" | "ignore"
    resolution_threshold: float = 1e-8

    def __post_init__(self):
        taus = np.asarray(self.sample_taus, dtype=float)
        if taus.size < 1:
            raise ConfigurationError("sample_taus must contain at least one value")
        if np.any(np.diff(taus) <= 0):
            raise ConfigurationError("sample_taus must be strictly increasing")
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        if not 0.0 < self.alpha < 0.125:
            raise ConfigurationError("alpha must lie in (0, 1/8)")
        if not self.t_horizon > 0:
            raise ConfigurationError("horizon must be positive")
        if taus[0] < -math.log(self.t_horizon) - 1e-12:
            raise ConfigurationError("first sample tau precedes t = 0")
        if not self.dt_max > 0:
            raise ConfigurationError("dt_max must be positive")
        if not self.cfl > 0:
            raise ConfigurationError("cfl must be positive")
        if self.resolution_policy not in ("error", "warn", "ignore"):
            raise ConfigurationError(
                f"unknown resolution policy {self.resolution_policy!r}"
            )
        self.sample_taus = taus


# -- tendencies ---------------------------------------------------------------


def convective_term(u_hat: SpectralVectorField) -> SpectralVectorField:
    """Dealiased coefficients of ``(u . grad) u`` (no projection applied)."""
    g = u_hat.grid
    u = spec_to_phys(u_hat.coeffs, g)
    out = np.empty_like(u)
    for k in range(3):
        acc = u[0] * spec_to_phys(1j * g.xi[0] * u_hat.coeffs[k], g)
        acc += u[1] * spec_to_phys(1j * g.xi[1] * u_hat.coeffs[k], g)
        acc += u[2] * spec_to_phys(1j * g.xi[2] * u_hat.coeffs[k], g)
        out[k] = acc
    coeffs = phys_to_spec(out, g)
    coeffs *= g.dealias_mask
    return SpectralVectorField(g, coeffs, False)


def _rotational_tendency(u_hat: SpectralVectorField) -> np.ndarray:
    """Projected nonlinear tendency ``-P[(u.grad)u]`` via ``P[F[u x curl u]]``."""
    g = u_hat.grid
    c = u_hat.coeffs
    vort = np.empty_like(c)
    vort[0] = 1j * (g.xi[1] * c[2] - g.xi[2] * c[1])
    vort[1] = 1j * (g.xi[2] * c[0] - g.xi[0] * c[2])
    vort[2] = 1j * (g.xi[0] * c[1] - g.xi[1] * c[0])
    u = spec_to_phys(c, g)
    om = spec_to_phys(vort, g)
    cross = np.empty_like(u)
    cross[0] = u[1] * om[2] - u[2] * om[1]
    cross[1] = u[2] * om[0] - u[0] * om[2]
    cross[2] = u[0] * om[1] - u[1] * om[0]
    coeffs = phys_to_spec(cross, g)
    coeffs *= g.dealias_mask
    return leray_project(SpectralVectorField(g, coeffs, False)).coeffs


def _nonlinear_tendency(
    u_hat: SpectralVectorField, form: str = "rotational"
) -> np.ndarray:
    if form == "rotational":
        return _rotational_tendency(u_hat)
    if form == "convective":
        return -leray_project(convective_term(u_hat)).coeffs
    raise ConfigurationError(f"unknown advection form {form!r}")


def nse_rhs(
    u_hat: SpectralVectorField, nonlinear: bool = True, form: str = "convective"
) -> SpectralVectorField:
    """Full tendency ``-P[F[(u.grad)u]] - |xi|^2 u_hat``.

    The projected quadratic term is orthogonal to the field, so it moves no
    energy; with ``nonlinear=False`` only the viscous part remains.
    """
    g = u_hat.grid
    out = -g.xi_sq * u_hat.coeffs
    if nonlinear:
        out = out + _nonlinear_tendency(u_hat, form)
    return SpectralVectorField(g, out, True)


# -- stepping ------------------------------------------------------------------


def _amplitude_bound(u_hat: SpectralVectorField) -> float:
    """Cheap upper bound on ``max_x |u(x)|`` from coefficient magnitudes."""
    g = u_hat.grid
    sums = np.abs(u_hat.coeffs).sum(axis=(1, 2, 3))
    return float(np.sqrt((sums**2).sum()) / g.l_box**1.5)


def _cfl_cap(u_hat: SpectralVectorField, cfg: TrajectoryConfig) -> float:
    dx = u_hat.grid.l_box / u_hat.grid.n
    bound = _amplitude_bound(u_hat)
    if bound <= 0.0:
        return cfg.dt_max
    return min(cfg.dt_max, cfg.cfl * dx / bound)


def _viscous_factors(grid: Grid, dt: float):
    half = np.exp(grid.xi_sq * (-dt / 2.0))
    return half, half * half


def _ifrk4(
    u_hat: SpectralVectorField,
    dt: float,
    cfg: TrajectoryConfig,
    factors=None,
) -> tuple[SpectralVectorField, float]:
    """One integrating-factor RK4 step; returns the new field and the
    energy-orthogonality ratio of the first-stage projected quadratic term."""
    g = u_hat.grid
    half, full = factors if factors is not None else _viscous_factors(g, dt)
    c = u_hat.coeffs
    if not cfg.nonlinear:
        return SpectralVectorField(g, c * full, True), 0.0

    def nonlin(coeffs):
        return _nonlinear_tendency(SpectralVectorField(g, coeffs, True))

    a = nonlin(c)
    pairing = abs(float(np.vdot(a, c).real))
    denom = float(np.sqrt(np.vdot(a, a).real * np.vdot(c, c).real))
    orth = pairing / denom if denom > 0 else 0.0

    stage = a * (dt / 2.0)
    stage += c
    stage *= half
    b = nonlin(stage)
    hc = half * c
    stage = b * (dt / 2.0)
    stage += hc
    cc = nonlin(stage)
    fc = half * hc
    stage = half * cc
    stage *= dt
    stage += fc
    d = nonlin(stage)
    acc = b + cc
    acc *= 2.0
    acc *= half
    a *= full
    acc += a
    acc += d
    acc *= dt / 6.0
    acc += fc
    return SpectralVectorField(g, acc, True), orth


def step(state: SimState, dt: float, cfg: TrajectoryConfig) -> SimState:
    """Advance one step of size ``dt``; validates the step against ``dt_max``
    and the advective CFL bound before moving."""
    if not dt > 0:
        raise StepSizeError(f"step size must be positive, got {dt}")
    if dt > cfg.dt_max * (1.0 + 1e-12):
        raise StepSizeError(f"step size {dt} exceeds dt_max {cfg.dt_max}")
    cap = _cfl_cap(state.u_hat, cfg)
    if dt > cap * (1.0 + 1e-12):
        raise StepSizeError(f"step size {dt} violates the CFL cap {cap:.3e}")
    new, _ = _ifrk4(state.u_hat, dt, cfg)
    return SimState(state.t + dt, new)


def _prepare_initial(u0: SpectralVectorField, cfg: TrajectoryConfig) -> SpectralVectorField:
    g = u0.grid
    if g.n != cfg.n or abs(g.l_box - cfg.l_box) > 1e-12 * cfg.l_box:
        raise ConfigurationError("initial field grid does not match the config")
    coeffs = u0.coeffs * g.dealias_mask
    norm = float(np.sqrt(np.vdot(coeffs, coeffs).real))
    if norm > 0.0:
        # entry contract: data is rescaled so ||u0|| = delta; the zero field
        # stays zero and yields the all-zero trajectory
        coeffs = coeffs * (cfg.delta / norm)
    return SpectralVectorField(g, coeffs, True)


def initial_from_snapshot(path) -> tuple[SpectralVectorField, float]:
    """Load initial data from a snapshot file; returns the projected spectral
    field and the stored time stamp."""
    from .snapshot_io import read_snapshot
    from .spectral import transform_forward

    fld, t = read_snapshot(path)
    u_hat = leray_project(transform_forward(fld))
    return u_hat, t


def simulate(
    u0: SpectralVectorField,
    cfg: TrajectoryConfig,
    on_snapshot: Callable[[Snapshot], None] | None = None,
) -> Iterator[Snapshot]:
    """Integrate from ``t = 0`` and yield a snapshot at every sample tau.

    The initial data is rescaled to ``||u0|| = delta`` on entry. Step sizes
    are truncated so every sample time is hit exactly (no interpolation).
    Emitted fields are fresh copies safe to hold across iterations; energy
    monotonicity and the spectral-tail guard are enforced sample by sample.
    """
    ugrid = u0.grid
    u = _prepare_initial(u0, cfg)
    t = 0.0
    worst_orth = 0.0
    prev_energy = math.inf
    for tau in cfg.sample_taus:
        t_target = t_of_tau(tau, cfg.t_horizon)
        if t_target < t - 1e-13:
            raise ConfigurationError("sample time precedes current state")
        span = t_target - t
        if span > 1e-15:
            cap = _cfl_cap(u, cfg)
            nsteps = max(1, math.ceil(span / cap))
            dt = span / nsteps
            factors = _viscous_factors(ugrid, dt)
            for _ in range(nsteps):
                u, orth = _ifrk4(u, dt, cfg, factors)
                worst_orth = max(worst_orth, orth)
            t = t_target
        energy = float(np.vdot(u.coeffs, u.coeffs).real)
        if energy > prev_energy * (1.0 + 1e-12):
            raise RuntimeError(
                f"energy increased between samples ({prev_energy} -> {energy})"
            )
        prev_energy = energy
        tail = spectral_tail_fraction(u)
        if tail > cfg.resolution_threshold:
            msg = (
                f"spectral tail fraction {tail:.3e} above "
                f"{cfg.resolution_threshold:.1e} at tau = {tau:.4f}"
            )
            if cfg.resolution_policy == "error":
                raise ResolutionError(msg)
            if cfg.resolution_policy == "warn":
                warnings.warn(msg, ResolutionWarning)
        snap = Snapshot(
            frame=frame(t, cfg.t_horizon),
            u_hat=SpectralVectorField(ugrid, u.coeffs.copy(), True),
            tail_fraction=tail,
            nonlinear_orthogonality=worst_orth,
            energy=energy,
        )
        if on_snapshot is not None:
            on_snapshot(snap)
        yield snap


def simulate_collect(u0, cfg) -> list[Snapshot]:
    """Materialized :func:`simulate`; only sensible for short runs."""
    return list(simulate(u0, cfg))


# -- symmetry and diagnostics --------------------------------------------------


def rescale_data(
    u0: SpectralVectorField, lam: int, active_tol: float = 1e-9
) -> SpectralVectorField:
    """Dilation ``u(x) -> lam * u(lam x)`` on the fixed box.

    Integer ``lam`` keeps periodicity: the coefficient at wavenumber ``k``
    moves to ``lam * k`` with amplitude multiplied by ``lam`` (so the fixed-box
    L2 norm is multiplied by ``lam``). Raises if an active frequency would
    leave the representable range; modes below ``active_tol`` of the peak
    magnitude count as inactive and are dropped, which lets evolved fields
    (whose dealiased spectrum is populated at rounding level) be dilated.
    """
    if not isinstance(lam, (int, np.integer)) or lam < 1:
        raise RescaleError(f"dilation factor must be a positive integer, got {lam}")
    g = u0.grid
    if lam == 1:
        return SpectralVectorField(g, u0.coeffs.copy(), u0.solenoidal_flag)
    k1d = g.wavenumbers.astype(int)
    target_k = lam * k1d
    valid = np.abs(target_k) < g.n // 2
    mags = np.abs(u0.coeffs).sum(axis=0)
    threshold = active_tol * mags.max()
    bad = ~valid
    escaped = max(
        mags[bad, :, :].max(initial=0.0),
        mags[:, bad, :].max(initial=0.0),
        mags[:, :, bad].max(initial=0.0),
    )
    if escaped > threshold:
        raise RescaleError(
            f"dilation by {lam} pushes active frequencies outside the grid"
        )
    src = np.nonzero(valid)[0]
    tgt = target_k[valid] % g.n
    out = np.zeros_like(u0.coeffs)
    out[np.ix_(range(3), tgt, tgt, tgt)] = lam * u0.coeffs[np.ix_(range(3), src, src, src)]
    return SpectralVectorField(g, out, u0.solenoidal_flag)


def pressure_recover(u_hat: SpectralVectorField) -> np.ndarray:
    """Zero-mean pressure coefficients solving ``-lap p = div div (u ox u)``.

    Returned with the same unitary normalization as vector coefficients. The
    gradient of this pressure restores the non-solenoidal part of the
    advection term: ``(u.grad)u - P[(u.grad)u] + grad p = 0``.
    """
    g = u_hat.grid
    G = convective_term(u_hat).coeffs
    divG = 1j * (g.xi[0] * G[0] + g.xi[1] * G[1] + g.xi[2] * G[2])
    p = np.zeros_like(divG)
    nz = g.xi_sq > 0
    p[nz] = divG[nz] / g.xi_sq[nz]
    return p


# -- weak form -----------------------------------------------------------------


@dataclass
class TestField:
    """Space-time test field ``phi(x, t) = theta(t) * v(x)`` with a smooth
    compactly supported envelope ``theta = sin^2(pi (t-t0)/(t1-t0))``."""

    spatial: SpectralVectorField
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise DomainError("test-field support must have positive length")

    def envelope(self, t: float) -> float:
        if t <= self.t_start or t >= self.t_end:
            return 0.0
        z = (t - self.t_start) / (self.t_end - self.t_start)
        return math.sin(math.pi * z) ** 2

    def envelope_rate(self, t: float) -> float:
        if t <= self.t_start or t >= self.t_end:
            return 0.0
        width = self.t_end - self.t_start
        z = (t - self.t_start) / width
        return math.pi / width * math.sin(2.0 * math.pi * z)


def make_test_field(
    grid: Grid, seed: int, t_start: float, t_end: float, xi_cutoff: float | None = None
) -> TestField:
    """Random band-limited solenoidal test field with a smooth time envelope."""
    from .fields import FieldSpec, generate

    cutoff = xi_cutoff
    if cutoff is None:
        cutoff = 0.9 * min(
            grid.dealias_kmax * grid.dxi, (2.0 / 3.0) * grid.xi_nyquist
        )
    spec = FieldSpec(
        "random_solenoidal",
        seed=seed,
        spectrum_slope=1.0,
        l2_norm_target=1.0,
        xi_cutoff=cutoff,
    )
    return TestField(generate(spec, grid), t_start, t_end)


def weak_residual(snapshots: Sequence[Snapshot], testfield: TestField) -> float:
    """Space-time weak-form residual against one solenoidal test field.

    Quadrature (composite Simpson in tau) of

        int int { -u . dphi/dt + grad u . grad phi + ((u.grad)u) . phi } dx dt

    normalized by the quadrature of the three terms' magnitudes. The advection
    pairing is computed by parts as ``-sum_jk <u_j u_k, d_j phi_k>``, which is
    exact for dealiased fields.
    """
    if len(snapshots) < 3:
        raise DomainError("weak-form quadrature needs at least three snapshots")
    g = snapshots[0].u_hat.grid
    v = testfield.spatial
    if v.grid != g:
        raise DomainError("test field lives on a different grid")
    from .spectral import solenoidal_error

    if solenoidal_error(v) > 1e-10:
        raise DomainError("test field is not solenoidal")
    t_first = snapshots[0].frame.t
    t_last = snapshots[-1].frame.t
    if testfield.t_start < t_first - 1e-12 or testfield.t_end > t_last + 1e-12:
        raise DomainError("test-field support exceeds the sampled time window")

    taus = np.array([s.frame.tau for s in snapshots])
    dtaus = np.diff(taus)
    if dtaus.size >= 2 and np.max(np.abs(dtaus - dtaus[0])) > 1e-9 * abs(dtaus[0]):
        raise DomainError("weak-form quadrature requires uniform tau sampling")

    vg = spec_to_phys(v.coeffs, g)  # physical test field
    grad_v = np.empty((3, 3) + vg.shape[1:])
    for j in range(3):
        for k in range(3):
            grad_v[j, k] = spec_to_phys(1j * g.xi[j] * v.coeffs[k], g)
    norm_v = l2_norm(v)
    grad_norm_v = float(np.sqrt((grad_v**2).sum() * g.cell_volume))

    cell = g.cell_volume
    values = np.empty(len(snapshots))
    scales = np.empty(len(snapshots))
    for i, snap in enumerate(snapshots):
        u_hat = snap.u_hat
        t = snap.frame.t
        theta = testfield.envelope(t)
        theta_dot = testfield.envelope_rate(t)
        u_v = float(np.vdot(v.coeffs, u_hat.coeffs).real)
        gradu_gradv = float(np.vdot(g.xi_sq * v.coeffs, u_hat.coeffs).real)
        u = spec_to_phys(u_hat.coeffs, g)
        adv = 0.0
        uu_sq = 0.0
        for j in range(3):
            for k in range(3):
                prod = u[j] * u[k]
                adv -= float((prod * grad_v[j, k]).sum() * cell)
                uu_sq += float((prod**2).sum() * cell)
        norm_u = math.sqrt(max(float(np.vdot(u_hat.coeffs, u_hat.coeffs).real), 0.0))
        grad_norm_u = math.sqrt(
            max(float(np.vdot(g.xi_sq * u_hat.coeffs, u_hat.coeffs).real), 0.0)
        )
        jac = snap.frame.t_horizon - t  # dt/dtau
        values[i] = jac * (-theta_dot * u_v + theta * (gradu_gradv + adv))
        scales[i] = jac * (
            abs(theta_dot) * norm_u * norm_v
            + theta * grad_norm_u * grad_norm_v
            + theta * math.sqrt(uu_sq) * grad_norm_v
        )
    residual = _simpson(values, taus)
    scale = _simpson(scales, taus)
    if scale == 0.0:
        return 0.0
    return float(residual / scale)


def _simpson(vals: np.ndarray, taus: np.ndarray) -> float:
    """Composite Simpson on a uniform grid (trapezoid for a trailing odd cell)."""
    n = len(vals)
    h = taus[1] - taus[0]
    total = 0.0
    last = n - 1 if (n - 1) % 2 == 0 else n - 2
    for i in range(0, last - 1, 2):
        total += h / 3.0 * (vals[i] + 4.0 * vals[i + 1] + vals[i + 2])
    if last != n - 1:
        total += h / 2.0 * (vals[-2] + vals[-1])
    return float(total)
