"""Pseudo-spectral solver for u_tt = Lap u + P(y, u) on a periodic 2D box.

Linear propagation is exact per Fourier mode (unitary in the wave energy),
so the only time-discretization error comes from the nonlinear kick, applied
by Strang splitting with 2/3-rule dealiasing of the powers.  The forced
variant with zero data realizes the forward fundamental solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from .spectral import Grid1D, GridND, plateau_window

__all__ = [
    "BlowupError",
    "CharFrame",
    "NonlinearitySpec",
    "cubic_nonlinearity",
    "SolverConfig",
    "SpaceTimeField",
    "WaveState",
    "duhamel_apply",
    "energy",
    "grid2d",
    "linear_propagate",
    "solve",
    "step_semilinear",
    "z_cutoff",
]


class BlowupError(RuntimeError):
    """Nonlinear term overflowed; the local smallness assumption failed."""


def grid2d(points: int, extent: float, start: float | None = None) -> GridND:
    g = Grid1D(points, extent, start)
    return GridND((g, g))


@dataclass(frozen=True)
class CharFrame:
    """Three characteristic plane directions and the (t,x) -> y chart.

    y_j = t - x . omega_j, so each {y_j = 0} is a forward light-cone tangent
    plane of the standard wave operator.
    """

    omegas: tuple

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.shape != (3, 2):
            raise ValueError("need three 2D direction vectors")
        norms = np.hypot(om[:, 0], om[:, 1])
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("directions must be unit vectors (characteristic planes)")
        for i in range(3):
            for j in range(i + 1, 3):
                if np.hypot(*(om[i] - om[j])) < 1e-12:
                    raise ValueError("directions must be pairwise distinct")
        if abs(np.linalg.det(self.map)) < 1e-12:
            raise ValueError("coordinate map is singular")
        object.__setattr__(self, "omegas", tuple(tuple(row) for row in om))

    @property
    def map(self) -> np.ndarray:
        """Rows send (t, x1, x2) to (y1, y2, y3)."""
        om = np.asarray(self.omegas, dtype=float)
        return np.column_stack([np.ones(3), -om])

    @property
    def normals(self) -> np.ndarray:
        """Space-time conormals of the three planes, one per row."""
        return self.map.copy()

    def char_coords(self, t, x1, x2) -> list[np.ndarray]:
        """Evaluate y_j = t - x . omega_j with broadcasting."""
        om = np.asarray(self.omegas, dtype=float)
        return [np.asarray(t - x1 * om[j, 0] - x2 * om[j, 1]) for j in range(3)]

    def spacetime_coords(self, y: np.ndarray) -> np.ndarray:
        """Inverse chart: y (..., 3) back to (t, x1, x2)."""
        inv = np.linalg.inv(self.map)
        return np.asarray(y) @ inv.T


def z_cutoff(t, x1, x2):
    """Space-time gate: product of plateau bumps in t and |x|.

    Equal to 1 on {|t| < 0.4, |x| < 0.4} and 0 once |t| >= 0.9 or
    |x| >= 0.9; in particular it vanishes for t < -1 with margin.
    """
    r = np.hypot(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    gate_t = plateau_window(np.abs(np.asarray(t, dtype=float)), 0.4, 0.9)
    return gate_t * plateau_window(r, 0.4, 0.9)


@dataclass(frozen=True)
class NonlinearitySpec:
    """P(y, u) = cutoff(y) * sum_j coeffs[j] * u^j.

    Coefficients are reals or callables of (t, X1, X2); cutoff is a smooth
    compactly supported space-time bump (None disables the gate, which is
    only appropriate for manufactured-solution checks).
    """

    degree: int
    coeffs: tuple
    cutoff: Callable | None = None

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 3:
            raise ValueError("degree must be an integer >= 3")
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("need degree + 1 coefficients")
        for a in self.coeffs:
            if not callable(a) and not np.isfinite(a):
                raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def __call__(self, t, x1, x2, u):
        acc = np.zeros_like(u)
        for a in reversed(self.coeffs):
            aval = a(t, x1, x2) if callable(a) else a
            acc = acc * u + aval
        if self.cutoff is not None:
            acc = acc * self.cutoff(t, x1, x2)
        return acc


def cubic_nonlinearity(a3=1.0, cutoff=z_cutoff) -> NonlinearitySpec:
    return NonlinearitySpec(degree=3, coeffs=(0.0, 0.0, 0.0, a3), cutoff=cutoff)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping window and discretization controls.

    The run must start before the gate can open (t0 < -1) and end after the
    interaction time t = 0.  dt is nudged so an integer number of steps lands
    exactly on t1; solve() checks the step bound dt <= safety * h / pi.
    """

    dt: float
    t0: float
    t1: float
    dealias: float = 2.0 / 3.0
    record_stride: int = 1
    safety: float = 1.0

    def __post_init__(self):
        if not (self.t0 < -1.0 < 0.0 < self.t1):
            raise ValueError("need t0 < -1 < 0 < t1")
        if not 0.0 < self.dt <= (self.t1 - self.t0):
            raise ValueError("dt must be positive and at most the run length")
        if not 0.0 < self.dealias <= 1.0:
            raise ValueError("dealias fraction must be in (0, 1]")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if not 0.0 < self.safety <= 1.0:
            raise ValueError("safety must be in (0, 1]")


@dataclass(frozen=True)
class WaveState:
    """Physical-space snapshot (u, u_t) at one time."""

    grid: GridND
    t: float
    u: np.ndarray
    ut: np.ndarray


@dataclass
class SpaceTimeField:
    """Equally spaced recorded slices of a run, with tracked energy."""

    grid: GridND
    times: np.ndarray
    u: np.ndarray
    ut: np.ndarray
    energies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        steps = np.diff(self.times)
        if steps.size and not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("recorded slices must be equally spaced")

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 + 1e-9 * abs(t):
            raise ValueError(f"time {t} was not recorded")
        return i

    def state_at(self, t: float) -> WaveState:
        i = self.index_of(t)
        return WaveState(self.grid, float(self.times[i]), self.u[i], self.ut[i])


@lru_cache(maxsize=32)
def _wavenumbers(grid: GridND):
    gx, gy = grid.axes
    kx = 2.0 * np.pi * np.fft.fftfreq(gx.points, d=gx.spacing)
    ky = 2.0 * np.pi * np.fft.rfftfreq(gy.points, d=gy.spacing)
    return kx[:, None], ky[None, :]


@lru_cache(maxsize=64)
def _propagator(grid: GridND, dt: float):
    kx, ky = _wavenumbers(grid)
    k = np.hypot(kx, ky)
    cos = np.cos(k * dt)
    sinc = dt * np.sinc(k * dt / np.pi)  # sin(k dt)/k with the k=0 limit dt
    ksin = k * np.sin(k * dt)
    return cos, sinc, ksin


@lru_cache(maxsize=32)
def _dealias_mask(grid: GridND, fraction: float):
    kx, ky = _wavenumbers(grid)
    gx, gy = grid.axes
    return (np.abs(kx) <= fraction * gx.nyquist) & (np.abs(ky) <= fraction * gy.nyquist)


@lru_cache(maxsize=32)
def _meshes(grid: GridND):
    x1, x2 = grid.nodes()
    return x1[:, None], x2[None, :]


def _check_grid(grid: GridND, *fields):
    if grid.ndim != 2:
        raise ValueError("solver grids are 2D")
    for f in fields:
        if f.shape != grid.shape:
            raise ValueError("field shape does not match grid")


def _linear_spec(uh, vh, grid, dt):
    cos, sinc, ksin = _propagator(grid, float(dt))
    return cos * uh + sinc * vh, -ksin * uh + cos * vh


def linear_propagate(u, ut, grid: GridND, dt: float):
    """Exact free evolution over dt; unconditionally stable for any dt."""
    _check_grid(grid, u, ut)
    uh, vh = sfft.rfft2(u), sfft.rfft2(ut)
    uh, vh = _linear_spec(uh, vh, grid, dt)
    return sfft.irfft2(uh, s=grid.shape), sfft.irfft2(vh, s=grid.shape)


def _kick_spec(uh, vh, grid, t_mid, dt, P, fraction):
    mask = _dealias_mask(grid, fraction)
    ud = sfft.irfft2(uh * mask, s=grid.shape)
    x1, x2 = _meshes(grid)
    with np.errstate(over="ignore", invalid="ignore"):
        p = P(t_mid, x1, x2, ud)
    if not np.all(np.isfinite(p)):
        raise BlowupError(f"nonlinear term overflowed at t = {t_mid:.6g}")
    return vh + dt * (mask * sfft.rfft2(p))


def step_semilinear(state: WaveState, dt: float, P: NonlinearitySpec | None,
                    dealias: float = 2.0 / 3.0) -> WaveState:
    """One Strang step: half linear, nonlinear kick at midpoint, half linear."""
    _check_grid(state.grid, state.u, state.ut)
    uh, vh = sfft.rfft2(state.u), sfft.rfft2(state.ut)
    uh, vh = _linear_spec(uh, vh, state.grid, 0.5 * dt)
    if P is not None:
        vh = _kick_spec(uh, vh, state.grid, state.t + 0.5 * dt, dt, P, dealias)
    uh, vh = _linear_spec(uh, vh, state.grid, 0.5 * dt)
    return WaveState(
        state.grid,
        state.t + dt,
        sfft.irfft2(uh, s=state.grid.shape),
        sfft.irfft2(vh, s=state.grid.shape),
    )


def energy(u, ut, grid: GridND) -> float:
    """Wave energy integral of (u_t^2 + |grad u|^2), spectral gradient."""
    _check_grid(grid, u, ut)
    uh = sfft.rfft2(u)
    kx, ky = _wavenumbers(grid)
    ux = sfft.irfft2(1j * kx * uh, s=grid.shape)
    uy = sfft.irfft2(1j * ky * uh, s=grid.shape)
    return float(grid.cell_volume * np.sum(ut**2 + ux**2 + uy**2))


def _run(u0, ut0, grid, config, kick):
    """Shared stepping loop; kick(uh, vh, t_mid, dt) or None for free flow."""
    _check_grid(grid, u0, ut0)
    h = min(g.spacing for g in grid.axes)
    n_steps = max(1, int(round((config.t1 - config.t0) / config.dt)))
    stride = min(int(config.record_stride), n_steps)
    n_steps = stride * max(1, round(n_steps / stride))  # records land on t1
    dt = (config.t1 - config.t0) / n_steps
    if dt > config.safety * h / np.pi + 1e-12:
        raise ValueError(
            f"dt = {dt:.3e} exceeds the step bound {config.safety * h / np.pi:.3e}"
        )
    uh, vh = sfft.rfft2(np.asarray(u0, dtype=float)), sfft.rfft2(np.asarray(ut0, dtype=float))

    times, us, uts, ens = [], [], [], []

    def record(t):
        u = sfft.irfft2(uh, s=grid.shape)
        ut = sfft.irfft2(vh, s=grid.shape)
        times.append(t)
        us.append(u)
        uts.append(ut)
        ens.append(energy(u, ut, grid))

    record(config.t0)
    for i in range(n_steps):
        t = config.t0 + i * dt
        uh, vh = _linear_spec(uh, vh, grid, 0.5 * dt)
        if kick is not None:
            vh = kick(uh, vh, t + 0.5 * dt, dt)
        uh, vh = _linear_spec(uh, vh, grid, 0.5 * dt)
        if (i + 1) % stride == 0:
            record(config.t0 + (i + 1) * dt)
    return SpaceTimeField(
        grid=grid,
        times=np.asarray(times),
        u=np.asarray(us),
        ut=np.asarray(uts),
        energies=np.asarray(ens),
        metadata={"dt": dt, "t0": config.t0, "t1": config.t1,
                  "dealias": config.dealias, "record_stride": stride},
    )


def solve(u0, ut0, grid: GridND, config: SolverConfig,
          P: NonlinearitySpec | None = None) -> SpaceTimeField:
    """Integrate u_tt = Lap u + P(y, u) from (u0, ut0) at t0 up to t1."""
    if P is None:
        out = _run(u0, ut0, grid, config, None)
    else:
        def kick(uh, vh, t_mid, dt):
            return _kick_spec(uh, vh, grid, t_mid, dt, P, config.dealias)

        out = _run(u0, ut0, grid, config, kick)
        out.metadata["degree"] = P.degree
        out.metadata["coeffs"] = tuple(
            a if not callable(a) else "callable" for a in P.coeffs
        )
    return out


def duhamel_apply(forcing: Callable, grid: GridND, config: SolverConfig) -> SpaceTimeField:
    """Forward solution operator: zero data driven by forcing(t, X1, X2).

    Realizes u(t) = int sin(|k|(t-s))/|k| F^(s) ds per mode through the same
    splitting loop as solve, so both sides of a cross-check share one
    discretization.
    """
    x1, x2 = _meshes(grid)
    mask = _dealias_mask(grid, config.dealias)

    def kick(uh, vh, t_mid, dt):
        f = np.asarray(forcing(t_mid, x1, x2), dtype=float)
        if f.shape != grid.shape:
            raise ValueError("forcing shape does not match grid")
        return vh + dt * (mask * sfft.rfft2(f))

    zero = np.zeros(grid.shape)
    return _run(zero, zero, grid, config, kick)
