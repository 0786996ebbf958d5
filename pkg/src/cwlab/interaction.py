"""Three-wave interaction experiments on the gated semilinear wave model.

Builds superposed plane-wave data, isolates the nonlinear response by
solver differencing, locates the emitted light circle, estimates the
transversal decay order across it, and recovers the cubic coupling from
cone amplitudes.  All probes carry the band and window they were computed
with so reported numbers stay reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
from math import gcd

import numpy as np
from scipy import ndimage

from .profiles import SymbolSpec, synthesize_profile
from .solver import (
    BlowupError,
    CharFrame,
    NonlinearitySpec,
    SolverConfig,
    SpaceTimeField,
    WaveState,
    cubic_nonlinearity,
    energy,
    grid2d,
    solve,
    z_cutoff,
)
from .spectral import DecayFit, Grid1D, GridND, decay_exponent, plateau_window, windowed_slice

_EPS = np.finfo(float).eps

# Directions must lie on rational lattice lines so that plane translates
# stay exact on the periodic box; 90/225/315 degrees is the symmetric
# lattice-compatible choice (one axis wave, two diagonals).
DEFAULT_FRAME = CharFrame(
    (
        (0.0, 1.0),
        (-np.sqrt(0.5), -np.sqrt(0.5)),
        (np.sqrt(0.5), -np.sqrt(0.5)),
    )
)


def _ang_dist(a, b):
    """Absolute angular distance on the circle."""
    return np.abs(np.mod(np.asarray(a) - b + np.pi, 2.0 * np.pi) - np.pi)


def _omega_angle(omega) -> float:
    return float(np.arctan2(omega[1], omega[0]))


@dataclass(frozen=True)
class ConeProbe:
    """Radial probe location on the light circle |x| = t_probe.

    exclusion is the minimum angular distance the probe keeps from each
    plane tangency angle; inside that distance the incoming fronts
    themselves touch the circle and contaminate any cone measurement.
    arc is the angular half-width of the probe's statistics window on the
    circle: amplitudes and band energies are local to the probe, not
    aggregated around the whole circle, where the gate-sized response
    layers riding each front would swamp them.
    """

    t_probe: float
    angle: float
    exclusion: float = np.deg2rad(20.0)
    arc: float = np.deg2rad(15.0)

    def __post_init__(self):
        if not self.t_probe > 0:
            raise ValueError("t_probe must be positive")
        if not 0.0 <= self.exclusion < np.pi:
            raise ValueError("exclusion must be an angle in [0, pi)")
        if not 0.0 < self.arc <= np.pi:
            raise ValueError("arc must be an angle in (0, pi]")

    @property
    def direction(self) -> np.ndarray:
        """Radial unit vector of the probe point."""
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @property
    def point(self) -> np.ndarray:
        return self.t_probe * self.direction

    def trace_distance(self, frame: CharFrame) -> float:
        """Angular distance to the nearest plane tangency on the circle."""
        return min(float(_ang_dist(self.angle, _omega_angle(w))) for w in frame.omegas)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one interaction run needs: data, coupling, integrator, probes."""

    m: float
    eps: float
    frame: CharFrame
    P: NonlinearitySpec | None
    solver: SolverConfig
    grid: GridND
    probes: tuple = ()

    def __post_init__(self):
        if not self.m < -2.5:
            raise ValueError("profile order must satisfy m < -5/2")
        if not self.eps > 0:
            raise ValueError("data amplitude must be positive")
        object.__setattr__(self, "probes", tuple(self.probes))
        for probe in self.probes:
            if probe.t_probe > self.solver.t1 + 1e-9:
                raise ValueError("probe time lies beyond the integration window")
            if probe.trace_distance(self.frame) < probe.exclusion - 1e-12:
                raise ValueError(
                    "probe angle is closer than its exclusion to a plane tangency"
                )


def _integer_direction(omega) -> tuple[int, int]:
    """Smallest integer lattice vector parallel to a unit direction."""
    w = np.asarray(omega, dtype=float)
    for r in range(1, 65):
        v = w * np.sqrt(r)
        n = np.rint(v)
        if np.max(np.abs(v - n)) < 1e-9 and (n[0] != 0 or n[1] != 0):
            p, q = int(n[0]), int(n[1])
            g = gcd(abs(p), abs(q))
            return p // g, q // g
    raise ValueError(f"direction {tuple(w)} is not parallel to a lattice vector")


def _square_axis(grid: GridND) -> Grid1D:
    if grid.ndim != 2 or grid.axes[0] != grid.axes[1]:
        raise ValueError("interaction experiments run on square 2D grids")
    return grid.axes[0]


def _profile_modes(profile):
    n = profile.grid.points
    coef = np.fft.fft(profile.values) / n
    coef[n // 2] = 0.0
    return coef, profile.grid.freqs()


def _trig_line(coef, eta, start, s):
    ph = np.exp(1j * np.outer(np.asarray(s, dtype=float) - start, eta))
    return np.real(ph @ coef)


# Data profiles keep their symbol-law tail but lose the modes below this
# smooth floor (zero below the first number, untouched above the second).
# The bulk would otherwise dominate the interaction: the off-resonance
# response it drives sits orders of magnitude above the circle wave in
# every measurement band, while the circle wave itself is generated by the
# profiles' singular (high-frequency) content and survives the trim.
# Raising the floor further would deepen the two-wave null (the pair
# detuning grows with the floor squared) but starves the resonant channel
# of its small-frequency factors and visibly distorts the cone law.
PROFILE_TRIM = (2.0, 4.0)

# Fixed physical bandwidth of the data profiles.  Tying the cutoff to the
# grid instead would hand each resolution a different continuum problem, so
# a doubling study would compare different experiments.  48 keeps the cubed
# data's alias images (at 2*nyquist - 3*48) above the retained band on a
# 512-point box of extent 13.5, while leaving self-similar headroom above
# the decay-fit band, which must end below about 0.75 * cutoff before the
# finite data bandwidth steepens the apparent law.
DATA_CUTOFF = 48.0

# Default decay-fit band for probing across the circle.  The gate-sized
# smooth annulus riding on the circle dominates the slice spectrum up to
# eta around 14-16 and would bias the fit shallow; the top stays under
# 0.75 * DATA_CUTOFF.  The incoming-front control is read in the same band
# so the order gap subtracts any bias the band choice shares.
CONE_BAND = (16.0, 36.0)


@lru_cache(maxsize=16)
def _unit_waves(frame: CharFrame, m: float, grid: GridND, t0: float, trim, cutoff_cap):
    """Unit-amplitude translates (u, ut) of each plane wave at t0.

    Each profile lives on its own 1D grid whose extent is the period of
    x . omega on the box, so the wave is exactly periodic; field values
    come from the trigonometric interpolant evaluated at the (integer-
    indexed) distinct values of t0 - x . omega, which keeps translates
    exact to roundoff.
    """
    g = _square_axis(grid)
    n1, n2 = grid.shape
    pieces = []
    for omega in frame.omegas:
        p, q = _integer_direction(omega)
        rnorm = float(np.hypot(p, q))
        gprof = Grid1D(g.points, g.extent / rnorm)
        cut = gprof.nyquist / 2.0 if cutoff_cap is None else min(gprof.nyquist / 2.0, cutoff_cap)
        prof = synthesize_profile(SymbolSpec(m), gprof, cutoff=cut)
        coef, eta = _profile_modes(prof)
        if trim is not None:
            coef = coef * (1.0 - plateau_window(eta, trim[0], trim[1]))
        kmesh = np.add.outer(p * np.arange(n1), q * np.arange(n2))
        base = g.start * (omega[0] + omega[1])
        kk = np.arange(kmesh.min(), kmesh.max() + 1)
        s_line = t0 - base - kk * (g.spacing / rnorm)
        u_line = _trig_line(coef, eta, gprof.start, s_line)
        ut_line = _trig_line(1j * eta * coef, eta, gprof.start, s_line)
        idx = kmesh - kmesh.min()
        pieces.append((u_line[idx], ut_line[idx]))
    return tuple(pieces)


def make_three_wave_data(
    frame, m, eps, grid, t0, cutoff=z_cutoff, trim=PROFILE_TRIM, cutoff_cap=DATA_CUTOFF
):
    """Superpose three plane-wave profiles with per-wave amplitudes at t0.

    Returns (u, ut) with u = sum_j eps_j f_j(t0 - x . omega_j): an exact
    free-wave snapshot.  The source gate must be closed on the whole t0
    slice; otherwise the data would already overlap the interaction region
    and the run is rejected.  trim=None keeps the profiles' low modes,
    cutoff_cap=None lets the bandwidth grow with the grid.
    """
    eps = tuple(float(e) for e in np.broadcast_to(eps, (3,)))
    if cutoff is not None:
        x1, x2 = grid.meshes()
        if np.any(np.asarray(cutoff(t0, x1, x2)) > 0.0):
            raise ValueError("source gate is open at t0; move t0 earlier")
    waves = _unit_waves(frame, float(m), grid, float(t0), trim, cutoff_cap)
    u = np.zeros(grid.shape)
    ut = np.zeros(grid.shape)
    for e, (uw, utw) in zip(eps, waves):
        if e != 0.0:
            u += e * uw
            ut += e * utw
    return u, ut


def _data_for(config: ExperimentConfig, eps):
    cutoff = config.P.cutoff if config.P is not None else z_cutoff
    return make_three_wave_data(
        config.frame, config.m, eps, config.grid, config.solver.t0, cutoff=cutoff
    )


def _difference_field(a: SpaceTimeField, b: SpaceTimeField, metadata) -> SpaceTimeField:
    du = a.u - b.u
    dut = a.ut - b.ut
    en = np.array([energy(du[i], dut[i], a.grid) for i in range(len(a.times))])
    return SpaceTimeField(a.grid, a.times.copy(), du, dut, en, metadata=dict(metadata))


def nonlinear_response(config: ExperimentConfig, eps=None) -> SpaceTimeField:
    """solve(P) - solve(P=0) on identical data and integrator settings.

    The difference removes the free waves exactly (same discretization on
    both sides), leaving the source-driven part of the field.
    """
    eps = (config.eps,) * 3 if eps is None else tuple(np.broadcast_to(eps, (3,)))
    u0, ut0 = _data_for(config, eps)
    nl = solve(u0, ut0, config.grid, config.solver, P=config.P)
    lin = solve(u0, ut0, config.grid, config.solver, P=None)
    meta = {"frame": config.frame, "eps": eps, "kind": "nonlinear_response"}
    return _difference_field(nl, lin, meta)


def linear_field(config: ExperimentConfig, eps=None) -> SpaceTimeField:
    """Free evolution of the same data (the control field for front probes)."""
    eps = (config.eps,) * 3 if eps is None else tuple(np.broadcast_to(eps, (3,)))
    u0, ut0 = _data_for(config, eps)
    out = solve(u0, ut0, config.grid, config.solver, P=None)
    out.metadata.update({"frame": config.frame, "eps": eps, "kind": "linear"})
    return out


def polarization_isolate(config: ExperimentConfig) -> SpaceTimeField:
    """Inclusion-exclusion over data subsets, keeping only triple products.

    sum over nonempty S of (-1)^(3-|S|) u_S: every contribution built from
    one or two of the waves enters through subsets whose signs sum to zero
    (1 - 2 + 1), so single- and pairwise-interaction terms cancel at
    leading order and the genuinely three-wave part stands out.  Linear
    parts cancel exactly, so no separate linear subtraction is needed.
    """
    acc_u = None
    acc_ut = None
    times = None
    for size in (1, 2, 3):
        sign = (-1) ** (3 - size)
        for subset in combinations(range(3), size):
            eps = tuple(config.eps if j in subset else 0.0 for j in range(3))
            u0, ut0 = _data_for(config, eps)
            sol = solve(u0, ut0, config.grid, config.solver, P=config.P)
            if acc_u is None:
                acc_u = sign * sol.u
                acc_ut = sign * sol.ut
                times = sol.times
            else:
                acc_u += sign * sol.u
                acc_ut += sign * sol.ut
    en = np.array([energy(acc_u[i], acc_ut[i], config.grid) for i in range(len(times))])
    meta = {"frame": config.frame, "eps": (config.eps,) * 3, "kind": "polarization"}
    return SpaceTimeField(config.grid, times.copy(), acc_u, acc_ut, en, metadata=meta)


@dataclass(frozen=True)
class ConeCircle:
    """Light circle at one probe time, with plane tangency angles marked."""

    radius: float
    trace_angles: tuple

    def parameterize(self, n: int = 360):
        angles = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        points = self.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        return angles, points

    def clear_angles(self, n: int, exclusion: float) -> np.ndarray:
        """Sample angles keeping the given distance from every tangency."""
        angles, _ = self.parameterize(n)
        keep = np.ones(n, dtype=bool)
        for a in self.trace_angles:
            keep &= _ang_dist(angles, a) >= exclusion
        return angles[keep]


def locate_cone(frame: CharFrame, t_probe: float) -> ConeCircle:
    """Unit-speed light circle emitted from the triple crossing at the origin.

    Each incoming plane is tangent to the circle at the angle of its
    direction vector; those arcs are where front and circle measurements
    overlap and probes should stay away from.
    """
    if not t_probe > 0:
        raise ValueError("t_probe must be positive")
    return ConeCircle(
        float(t_probe), tuple(_omega_angle(w) for w in frame.omegas)
    )


def _nearest_state(fld: SpaceTimeField, t: float) -> WaveState:
    i = int(np.argmin(np.abs(fld.times - t)))
    gap = abs(float(fld.times[i]) - t)
    tol = 0.5 * float(fld.times[1] - fld.times[0]) if len(fld.times) > 1 else 1e-6
    if gap > tol + 1e-12:
        raise ValueError(f"no recorded slice near t={t}")
    return WaveState(fld.grid, float(fld.times[i]), fld.u[i], fld.ut[i])


def default_band(grid: GridND) -> tuple[float, float]:
    """Fit band for decay-rate estimates: CONE_BAND, top clipped to half
    the grid nyquist so refined grids fit over identical frequencies."""
    hi = min(CONE_BAND[1], _square_axis(grid).nyquist / 2.0)
    if hi <= CONE_BAND[0]:
        raise ValueError("grid too coarse for the default fit band; pass one explicitly")
    return CONE_BAND[0], hi


def amplitude_band(grid: GridND) -> tuple[float, float]:
    """Statistics band for tube amplitude and energy: (8, nyquist/4).

    Unlike the fit band this one scales with the grid, so amplitude and
    null-energy readings integrate everything the grid resolves above the
    smooth bulk rather than a fixed window.  Decay fits keep default_band:
    comparing slopes across refinements needs a frequency range common to
    both grids.
    """
    lo = 8.0
    hi = _square_axis(grid).nyquist / 4.0
    if hi <= lo:
        raise ValueError("grid too coarse for the amplitude band; pass one explicitly")
    return lo, hi


def band_pass(values, grid: GridND, band) -> np.ndarray:
    """Smooth radial frequency band-pass of a 2D field."""
    lo, hi = band
    if not 0 < lo < hi:
        raise ValueError(f"invalid band {band}")
    k1, k2 = grid.freq_meshes()
    rho = np.hypot(k1, k2)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    mask = plateau_window(rho - mid, 0.75 * half, half)
    return np.real(np.fft.ifft2(np.fft.fft2(np.asarray(values, dtype=float)) * mask))


def high_pass(values, grid: GridND, lo_in: float, lo_out: float) -> np.ndarray:
    """Remove the low-frequency bulk below lo_in, flat above lo_out.

    Slice windows have oscillating spectral tails; the field's O(1) bulk
    leaking through them would bury a power law several decades down.
    Removing the bulk first leaves the slope band untouched (the mask is
    identically 1 there) and makes windowed slope fits clean.
    """
    if not 0 < lo_in < lo_out:
        raise ValueError("need 0 < lo_in < lo_out")
    k1, k2 = grid.freq_meshes()
    rho = np.hypot(k1, k2)
    mask = 1.0 - plateau_window(rho, lo_in, lo_out)
    return np.real(np.fft.ifft2(np.fft.fft2(np.asarray(values, dtype=float)) * mask))


def _tube_mask(grid: GridND, radius, width, exclusion, trace_angles, center_angle, arc):
    x1, x2 = grid.meshes()
    r = np.hypot(x1, x2)
    theta = np.arctan2(x2, x1)
    mask = np.abs(r - radius) <= 0.5 * width
    mask &= _ang_dist(theta, center_angle) <= arc
    for a in trace_angles:
        mask &= _ang_dist(theta, a) >= exclusion
    return mask


def _tube_values(state: WaveState, probe: ConeProbe, frame: CharFrame, band):
    grid = state.grid
    h = _square_axis(grid).spacing
    bp = band_pass(state.u, grid, band)
    mask = _tube_mask(
        grid,
        state.t,
        8.0 * h,
        probe.exclusion,
        [_omega_angle(w) for w in frame.omegas],
        probe.angle,
        probe.arc,
    )
    if not np.any(mask):
        raise ValueError("probe tube contains no grid points")
    return bp, mask


def _frame_of(fld: SpaceTimeField, frame):
    frame = frame if frame is not None else fld.metadata.get("frame")
    if frame is None:
        raise ValueError("no frame given and none recorded with the field")
    return frame


def crossing_angle(frame: CharFrame, i: int, j: int) -> float:
    """Direction along which the crossing point of fronts i and j travels."""
    a = np.array([frame.omegas[i], frame.omegas[j]], dtype=float)
    x = np.linalg.solve(a, np.ones(2))
    return float(np.arctan2(x[1], x[0]))


def two_wave_probe(frame: CharFrame, probe: ConeProbe):
    """Pair choice and probe placement for the two-wave null check.

    Each pair's crossing point moves faster than the wave speed, so its
    wake grazes the circle on the whole arc between the pair's two
    tangencies, centered on the crossing direction; the response layers
    riding the pair's fronts contaminate a wide shoulder around each
    tangency as well.  Measuring at the antipode of the crossing direction
    of the pair whose crossing lies farthest from the probe puts the null
    statistic as far from all of that as the geometry allows.
    """
    best, best_dist = None, -1.0
    for i in range(3):
        for j in range(i + 1, 3):
            d = _ang_dist(crossing_angle(frame, i, j), probe.angle)
            if d > best_dist:
                best, best_dist = (i, j), d
    null_angle = crossing_angle(frame, *best) + np.pi
    return best, replace(probe, angle=float(np.arctan2(np.sin(null_angle), np.cos(null_angle))))


def cone_amplitude(fld: SpaceTimeField, probe: ConeProbe, frame=None, band=None) -> float:
    """Peak band-passed magnitude in the probe's arc tube around the circle.

    The raw response is dominated by its smooth low-frequency bulk; the
    band keeps the singular part.  The tube is 8h wide, spans probe.arc to
    each side of the probe angle, and drops angles within the probe's
    exclusion of a plane tangency.
    """
    frame = _frame_of(fld, frame)
    state = _nearest_state(fld, probe.t_probe)
    band = band if band is not None else amplitude_band(fld.grid)
    bp, mask = _tube_values(state, probe, frame, band)
    return float(np.max(np.abs(bp[mask])))


def probe_band_energy(fld: SpaceTimeField, probe: ConeProbe, frame=None, band=None) -> float:
    """Band-passed squared mass in the probe tube (the two-wave null metric)."""
    frame = _frame_of(fld, frame)
    state = _nearest_state(fld, probe.t_probe)
    band = band if band is not None else amplitude_band(fld.grid)
    bp, mask = _tube_values(state, probe, frame, band)
    return float(np.sum(bp[mask] ** 2) * fld.grid.cell_volume)


def _clean_half_length(grid, probe, frame, r0, t_traces, cap=None):
    """Largest radial slice half-length clear of fronts and box edges.

    Fronts sit at x . omega = t_traces (mod the direction's box period);
    crossings of the slice line x(s) = (r0 + s) * direction are kept out of
    the window with a 10% margin, as is the antipodal cone crossing.
    """
    g = _square_axis(grid)
    half_box = 0.5 * g.extent
    nu = probe.direction
    bound = min(
        (0.98 * half_box) / max(abs(nu[0]), abs(nu[1])) - r0,
        0.30 * g.extent,
    )
    clearances = [1.8 * r0]
    if frame is not None:
        for omega in frame.omegas:
            p, q = _integer_direction(omega)
            period = g.extent / float(np.hypot(p, q))
            c = float(nu[0] * omega[0] + nu[1] * omega[1])
            if abs(c) < 1e-12:
                continue
            span = abs(bound) + r0 + period
            kmax = int(np.ceil(span / period)) + 1
            for k in range(-kmax, kmax + 1):
                s = (t_traces + k * period) / c - r0
                if abs(s) > 1e-9:
                    clearances.append(0.9 * abs(s))
    ell = min(bound, min(clearances))
    if ell < 10.0 * g.spacing:
        raise ValueError("probe geometry leaves no room for a slice window")
    return ell


def _slice_fit(profile, band, min_bins) -> DecayFit:
    """Power-law fit of a windowed slice, flagging fits the data cannot support."""
    try:
        return decay_exponent(profile.windowed, profile.grid, band=band, min_bins=min_bins)
    except ValueError as err:
        if "usable bins" not in str(err):
            raise
        # Whole band at the noise floor: decay beat the instrument, which is
        # itself evidence that nothing of finite order crossed the window.
        b = band if band is not None else (8.0, profile.grid.nyquist / 4.0)
        return DecayFit(
            slope=-np.inf,
            intercept=np.nan,
            rms_residual=np.nan,
            n_bins=0,
            band=(float(b[0]), float(b[1])),
            flags=frozenset({"superpolynomial", "noise_floor", "inconclusive"}),
        )


def cone_order_estimate(
    fld: SpaceTimeField,
    probe: ConeProbe,
    frame=None,
    band=None,
    half_length=None,
    center_radius=None,
    min_bins=6,
) -> DecayFit:
    """Transversal decay slope across the cone at one probe angle.

    Takes a windowed radial slice through the probe point (the smooth bulk
    below the fit band removed first) and fits the log-log decay of its
    DFT.  Exactly one conormal crossing sits inside
    the window (fronts and the antipodal crossing are kept out by the
    half-length choice), so the fitted slope reads off the transversal
    symbol order of the circle wave directly; no curvature correction is
    needed in this representation.  center_radius moves the window off the
    circle, e.g. onto a smooth region as a control.
    """
    frame = _frame_of(fld, frame)
    state = _nearest_state(fld, probe.t_probe)
    r0 = float(state.t) if center_radius is None else float(center_radius)
    if half_length is None:
        half_length = _clean_half_length(fld.grid, probe, frame, r0, state.t)
    band = band if band is not None else default_band(fld.grid)
    lo = band[0]
    hp = high_pass(state.u, fld.grid, 0.375 * lo, 0.75 * lo)
    sl = windowed_slice(
        hp,
        fld.grid,
        center=r0 * probe.direction,
        direction=probe.direction,
        half_length=half_length,
    )
    return _slice_fit(sl, band, min_bins)


def front_order_estimate(
    fld: SpaceTimeField,
    omega,
    t=None,
    offset=0.0,
    half_length=1.2,
    band=None,
    min_bins=6,
) -> DecayFit:
    """Decay slope across one plane front (the incoming-wave control).

    Slices along omega through the front line {x . omega = t} at a lateral
    offset; pick the offset so other fronts stay outside the window.
    """
    t = float(fld.times[-1]) if t is None else float(t)
    state = _nearest_state(fld, t)
    w = np.asarray(omega, dtype=float)
    w = w / np.hypot(*w)
    perp = np.array([-w[1], w[0]])
    center = state.t * w + offset * perp
    band = band if band is not None else default_band(fld.grid)
    lo = band[0]
    hp = high_pass(state.u, fld.grid, 0.375 * lo, 0.75 * lo)
    sl = windowed_slice(hp, fld.grid, center=center, direction=w, half_length=half_length)
    return _slice_fit(sl, band, min_bins)


def ridge_radius(
    fld: SpaceTimeField,
    t: float,
    frame=None,
    band=None,
    n_angles=64,
    exclusion=np.deg2rad(25.0),
    r_span=(0.4, 1.6),
) -> float:
    """Median radius of the high-passed intensity ridge on one time slice.

    Radial rays (plane tangency angles excluded) sample |high-pass u| by
    cubic interpolation; each ray reports the radius of its peak inside
    r_span * t and the median over rays is returned.  High-passing keeps
    all resolved frequencies above the bulk, so the peak tightens onto the
    layer as the grid refines instead of sitting a fixed fraction of a
    band wavelength off it.
    """
    frame = _frame_of(fld, frame)
    state = _nearest_state(fld, t)
    grid = fld.grid
    g = _square_axis(grid)
    band = band if band is not None else default_band(grid)
    lo = band[0]
    bp = np.abs(high_pass(state.u, grid, 0.375 * lo, 0.75 * lo))
    circle = locate_cone(frame, state.t)
    angles = circle.clear_angles(n_angles, exclusion)
    if angles.size == 0:
        raise ValueError("exclusion removed every probe angle")
    n_r = max(16, int(np.ceil((r_span[1] - r_span[0]) * state.t / (0.25 * g.spacing))))
    radii = np.linspace(r_span[0] * state.t, r_span[1] * state.t, n_r)
    x1 = np.outer(np.cos(angles), radii)
    x2 = np.outer(np.sin(angles), radii)
    i1 = (x1 - g.start) / g.spacing
    i2 = (x2 - g.start) / g.spacing
    vals = ndimage.map_coordinates(bp, [i1, i2], order=3, mode="grid-wrap")
    best = radii[np.argmax(vals, axis=1)]
    return float(np.median(best))


@dataclass(frozen=True)
class EpsScaling:
    """Result of the amplitude-vs-data-strength regression."""

    exponent: float
    eps: tuple
    amplitudes: tuple
    dropped: tuple
    band: tuple

    def __float__(self):
        return self.exponent


def amplitude_scaling(config: ExperimentConfig, eps_list, probe=None, band=None) -> EpsScaling:
    """Log-log regression of cone amplitude against data strength.

    Needs at least three amplitudes spanning a factor of 4.  Runs that
    blow up are dropped (recorded in ``dropped``); amplitudes at the noise
    floor are dropped too, and the regression is refused outright if
    nothing measurable is left.
    """
    eps_list = sorted(float(e) for e in eps_list)
    if len(eps_list) < 3:
        raise ValueError("need at least three data strengths")
    if eps_list[-1] < 4.0 * eps_list[0]:
        raise ValueError("data strengths must span at least a factor of 4")
    if probe is None:
        if not config.probes:
            raise ValueError("config carries no probe")
        probe = config.probes[0]
    band = band if band is not None else amplitude_band(config.grid)
    used, amps, dropped = [], [], []
    for e in eps_list:
        cfg = replace(config, eps=e)
        try:
            resp = nonlinear_response(cfg)
        except BlowupError:
            dropped.append(e)
            continue
        amps.append(cone_amplitude(resp, probe, cfg.frame, band=band))
        used.append(e)
    amps = np.asarray(amps)
    if amps.size == 0 or np.max(amps) <= 0.0:
        raise ValueError("cone amplitudes sit at the noise floor; nothing to fit")
    alive = amps > 1e3 * _EPS * np.max(amps)
    dropped.extend(e for e, ok in zip(used, alive) if not ok)
    if np.count_nonzero(alive) < 3:
        raise ValueError("fewer than three amplitudes above the noise floor")
    x = np.log(np.asarray(used)[alive])
    y = np.log(amps[alive])
    exponent = float(np.polyfit(x, y, 1)[0])
    return EpsScaling(
        exponent=exponent,
        eps=tuple(np.asarray(used)[alive]),
        amplitudes=tuple(amps[alive]),
        dropped=tuple(dropped),
        band=tuple(band),
    )


def _tube_correlation(state_a, state_b, probe, frame, band) -> float:
    bp_a, mask = _tube_values(state_a, probe, frame, band)
    bp_b, _ = _tube_values(state_b, probe, frame, band)
    a = bp_a[mask]
    b = bp_b[mask]
    denom = np.sqrt(np.sum(a**2) * np.sum(b**2))
    if denom == 0.0:
        return 0.0
    return float(np.sum(a * b) / denom)


@dataclass(frozen=True)
class CoeffEstimate:
    """Cone-amplitude ratio and signed overlap against the baseline run."""

    c_hat: float
    correlation: float
    band: tuple


def coefficient_recovery(base: ExperimentConfig, trials, probe=None, band=None):
    """Cone-amplitude ratios of trial couplings against a baseline.

    The ratio estimates the trial's cubic coefficient relative to the
    baseline's, the common propagation factor cancelling; the signed
    correlation over the probe tube distinguishes a flipped coefficient
    from a rescaled one.  Everything except the coupling must match the
    baseline, and a baseline amplitude at the noise floor is rejected.
    """
    if probe is None:
        if not base.probes:
            raise ValueError("config carries no probe")
        probe = base.probes[0]
    band = band if band is not None else amplitude_band(base.grid)
    resp0 = nonlinear_response(base)
    state0 = _nearest_state(resp0, probe.t_probe)
    bp0, mask = _tube_values(state0, probe, base.frame, band)
    amp0 = float(np.max(np.abs(bp0[mask])))
    if amp0 <= 1e3 * _EPS * float(np.max(np.abs(bp0))):
        raise ValueError("baseline cone amplitude is at the noise floor")
    out = []
    for trial in trials:
        cfg = trial if isinstance(trial, ExperimentConfig) else replace(base, P=trial)
        if replace(cfg, P=base.P) != base:
            raise ValueError("trial must differ from the baseline only in the coupling")
        resp = nonlinear_response(cfg)
        state = _nearest_state(resp, probe.t_probe)
        bp, _ = _tube_values(state, probe, cfg.frame, band)
        amp = float(np.max(np.abs(bp[mask])))
        corr = _tube_correlation(state0, state, probe, base.frame, band)
        out.append(CoeffEstimate(c_hat=amp / amp0, correlation=corr, band=tuple(band)))
    return out


@dataclass
class ExperimentReport:
    """Summary numbers of one interaction experiment, with their windows."""

    cone_fit: DecayFit
    incoming_fit: DecayFit
    cone_amplitude: float
    eps_exponent: float | None
    coeff_estimates: list
    null_energies: dict
    band: tuple
    probe: ConeProbe
    notes: dict = field(default_factory=dict)


def default_experiment(
    points=512,
    extent=13.5,
    m=-2.6,
    eps=0.05,
    a3=1.0,
    t0=-1.125,
    t1=3.8,
    record_stride=1_000_000_000,
    probe_angle=np.deg2rad(157.5),
    dt_factor=0.9,
) -> ExperimentConfig:
    """Standard configuration: symmetric frame, gated cubic coupling.

    The probe angle sits 67.5 degrees from the nearest plane tangency, and
    the late probe time matters: the circle wave accumulates through the
    resonance while the smooth forced response does not, so the contrast
    between them grows with propagation distance.  At t1 = 3.8 on this box
    the fronts cross the probe ray far outside the slice window and wrap
    around influence has not arrived.  eps = 0.05 keeps the run firmly in
    the weak regime (the response stays far below the data).  The defaults
    take about 650 steps; record_stride keeps only the final slice.
    """
    grid = grid2d(points, extent)
    h = grid.axes[0].spacing
    solver = SolverConfig(dt=dt_factor * h / np.pi, t0=t0, t1=t1, record_stride=record_stride)
    probes = (ConeProbe(t_probe=t1, angle=probe_angle),)
    return ExperimentConfig(
        m=m,
        eps=eps,
        frame=DEFAULT_FRAME,
        P=cubic_nonlinearity(a3),
        solver=solver,
        grid=grid,
        probes=probes,
    )


def run_experiment(
    config: ExperimentConfig,
    eps_factors=(0.25, 0.5, 1.0),
    trials=(),
    polarization=False,
    two_wave_check=True,
) -> ExperimentReport:
    """Full pipeline: nulls, cone slope and amplitude, scaling, recovery.

    The cone slope is read from the plain nonlinear response: its two runs
    share the data, so their common discretization error cancels in the
    difference.  polarization=True adds the seven-run isolated trilinear
    field's slope to the notes as a cross-check.  Removing the pair and
    self content reshapes the slice spectrum (the result is insensitive to
    the step size), so the polarized slope is an independent reading with
    its own scatter, not the plain slope minus noise; expect it to sit
    shallower at a single probe angle.
    """
    if not config.probes:
        raise ValueError("config carries no probe")
    probe = config.probes[0]
    fit_band = default_band(config.grid)
    amp_band = amplitude_band(config.grid)

    resp = nonlinear_response(config)
    cone_fit = cone_order_estimate(resp, probe, config.frame, band=fit_band)
    lin = linear_field(config)
    incoming_fit = front_order_estimate(
        lin, config.frame.omegas[0], t=config.solver.t0, band=fit_band
    )
    amp = cone_amplitude(resp, probe, config.frame, band=amp_band)

    notes = {}
    if polarization:
        iso = polarization_isolate(config)
        notes["polarization_slope"] = cone_order_estimate(
            iso, probe, config.frame, band=fit_band
        ).slope

    nulls = {}
    null_resp = nonlinear_response(replace(config, P=None))
    nulls["p_zero_peak"] = float(np.max(np.abs(null_resp.u)))
    if two_wave_check:
        pair, null_probe = two_wave_probe(config.frame, probe)
        eps_two = tuple(config.eps if k in pair else 0.0 for k in range(3))
        two = nonlinear_response(config, eps=eps_two)
        e_two = probe_band_energy(two, null_probe, config.frame, band=amp_band)
        e_three = probe_band_energy(resp, null_probe, config.frame, band=amp_band)
        nulls["two_wave_pair"] = pair
        nulls["two_wave_angle"] = null_probe.angle
        nulls["two_wave_energy"] = e_two
        nulls["three_wave_energy"] = e_three
        nulls["two_wave_ratio"] = e_two / e_three if e_three > 0 else np.inf

    eps_exponent = None
    if eps_factors:
        scaling = amplitude_scaling(
            config, [f * config.eps for f in eps_factors], probe=probe, band=amp_band
        )
        eps_exponent = scaling.exponent

    estimates = (
        coefficient_recovery(config, trials, probe=probe, band=amp_band) if trials else []
    )

    return ExperimentReport(
        cone_fit=cone_fit,
        incoming_fit=incoming_fit,
        cone_amplitude=amp,
        eps_exponent=eps_exponent,
        coeff_estimates=estimates,
        null_energies=nulls,
        band=tuple(fit_band),
        probe=probe,
        notes=notes,
    )
