"""One-dimensional conormal profiles: synthesis from frequency symbols,
jet extraction, Taylor/singular splitting, pointwise powers, and the
exact-rational spectral mollifier family.

A profile of order m is the inverse transform

    f(s) = integral exp(i s eta) a(eta) d eta,

with canonical symbol a(eta) = (1 + eta^2)^(m/2), m < -1.  On a periodic
grid the integral is truncated at the grid Nyquist frequency and evaluated
by the trapezoid rule at DFT bin spacing, which makes the synthesized
samples an exact band-limited periodic field (sum of periodic images of
the continuum profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .spectral import Grid1D, bump_window, dft_forward, dft_inverse

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SymbolSpec:
    """Canonical one-dimensional symbol (1+eta^2)^(order/2), scaled."""

    order: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.order < -1:
            raise ValueError(f"symbol order must be < -1, got {self.order}")

    def __call__(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        return self.scale * (1.0 + eta * eta) ** (0.5 * self.order)


@dataclass
class ConormalProfile:
    """Sampled profile together with its nominal singularity order."""

    grid: Grid1D
    values: np.ndarray
    order: float | None = None
    truncation_tail: float | None = None

    def spectrum(self) -> np.ndarray:
        return dft_forward(self.values, self.grid)


def synthesize_profile(
    symbol,
    grid: Grid1D,
    cutoff: float | None = None,
) -> ConormalProfile:
    """Synthesize a profile from a symbol by truncated trapezoid quadrature.

    ``symbol`` is a :class:`SymbolSpec` or any vectorized callable of eta.
    Frequencies beyond ``cutoff`` (default: the grid Nyquist pi/h) are
    dropped; for a SymbolSpec of order m the continuum truncation tail
    2*cutoff^(m+1)/(-m-1) is recorded on the returned profile.
    """
    if cutoff is None:
        cutoff = grid.nyquist
    if cutoff > grid.nyquist + 1e-12:
        raise ValueError("cutoff exceeds grid Nyquist frequency")
    eta = grid.freqs()
    a = np.asarray(symbol(eta), dtype=float)
    a[np.abs(eta) > cutoff] = 0.0
    # trapezoid on the DFT lattice: the single -Nyquist bin carries the same
    # weight as two half-weighted endpoints of a symmetric symbol
    vals = np.real(dft_inverse(2.0 * np.pi * a, grid))
    order = getattr(symbol, "order", None)
    tail = None
    if order is not None:
        tail = 2.0 * cutoff ** (order + 1.0) / (-order - 1.0)
    return ConormalProfile(grid=grid, values=vals, order=order, truncation_tail=tail)


def k_of_m(m: float) -> int:
    """The unique integer k with -m-2 <= k < -m-1, for non-integer m < -1."""
    if not m < -1:
        raise ValueError(f"order must be < -1, got {m}")
    if abs(m - round(m)) < 1e-9:
        raise ValueError(f"integer order {m} has no admissible vanishing index")
    k = math.ceil(-m - 2.0)
    assert -m - 2.0 <= k < -m - 1.0
    return k


def profile_jet(profile: ConormalProfile, k: int) -> np.ndarray:
    """Derivatives f^(j)(0), j = 0..k, from spectral moments of the profile.

    Uses f^(j)(0) = (1/2pi) * integral (i eta)^j spectrum(eta) d eta on the
    profile's own frequency lattice, avoiding finite differences of samples.
    """
    if k < 0:
        raise ValueError("jet order must be >= 0")
    spec = profile.spectrum()
    eta = profile.grid.freqs()
    deta = profile.grid.freq_spacing()
    jets = np.empty(k + 1)
    for j in range(k + 1):
        jets[j] = np.real(np.sum((1j * eta) ** j * spec)) * deta / (2.0 * np.pi)
    return jets


@dataclass
class PiriouSplit:
    """Taylor-plus-singular splitting of a profile at the origin."""

    k: int
    coefficients: np.ndarray
    band_limit: float
    taylor: ConormalProfile
    singular: ConormalProfile
    jets: np.ndarray


def piriou_decompose(
    profile: ConormalProfile,
    k: int | None = None,
    band_limit: float = 4.0,
) -> PiriouSplit:
    """Split a profile into a smooth jet-matching part and a remainder
    vanishing to order k+1 at the origin.

    The smooth part is built in frequency: T_hat = P(eta) * bump(eta/limit)
    with P a degree-k polynomial solving the moment system
    (1/2pi) sum (i eta)^j T_hat deta = f^(j)(0), j = 0..k, on the profile's
    own frequency lattice.  A spatial polynomial-times-cutoff subtraction
    would plant the cutoff's transform (decay ~exp(-c sqrt(eta)), slower than
    any |eta|^m tail over the usable bands) on top of the remainder; keeping
    the smooth part's spectrum inside |eta| < limit leaves the remainder
    identical to the input on every fit band.  Jets below quadrature noise
    are snapped to exact zero, so decomposing an already-vanishing profile
    returns an identically zero smooth part.
    """
    if k is None:
        if profile.order is None:
            raise ValueError("profile has no order; pass k explicitly")
        k = k_of_m(profile.order)
    if profile.grid.nyquist <= 2.0 * band_limit:
        raise ValueError(
            "grid too coarse for the jet matcher: nyquist %.3g <= 2*band_limit"
            % profile.grid.nyquist
        )
    jets = profile_jet(profile, k)

    # noise gate: compare each jet against the absolute spectral moment scale
    spec_amp = np.abs(profile.spectrum())
    eta = profile.grid.freqs()
    deta = profile.grid.freq_spacing()
    gated = jets.copy()
    for j in range(k + 1):
        scale = np.sum(np.abs(eta) ** j * spec_amp) * deta / (2.0 * np.pi)
        if abs(gated[j]) <= 64.0 * _EPS * scale:
            gated[j] = 0.0

    s = profile.grid.nodes()
    if not np.any(gated):
        taylor_vals = np.zeros_like(s)
    else:
        env = bump_window(eta / band_limit)
        moments = np.empty((k + 1, k + 1), dtype=complex)
        for j in range(k + 1):
            for n in range(k + 1):
                moments[j, n] = (
                    np.sum((1j * eta) ** j * eta**n * env) * deta / (2.0 * np.pi)
                )
        poly = np.linalg.solve(moments, gated.astype(complex))
        t_hat = env * np.polyval(poly[::-1], eta)
        # coefficients alternate real/imaginary, so t_hat is Hermitian
        taylor_vals = np.real(dft_inverse(t_hat, profile.grid))
    singular_vals = profile.values - taylor_vals
    q = gated / np.array([math.factorial(j) for j in range(k + 1)], dtype=float)
    return PiriouSplit(
        k=k,
        coefficients=q,
        band_limit=band_limit,
        taylor=ConormalProfile(grid=profile.grid, values=taylor_vals, order=None),
        singular=ConormalProfile(
            grid=profile.grid, values=singular_vals, order=profile.order
        ),
        jets=jets,
    )


def profile_power(profile: ConormalProfile, j: int) -> ConormalProfile:
    """Pointwise j-th power of a profile vanishing to order k(m) at 0.

    Records the predicted order m - (j-1)*k(m).  The prediction is a bound on
    singularity strength: it is attained exactly when the input vanishes to
    order k(m) and no further (see extremal_profile); inputs with all jets
    0..k(m) removed vanish one order higher and their powers decay strictly
    faster (j-th power order j*m + j - 1).
    """
    if j < 2:
        raise ValueError("power must be >= 2")
    predicted = None
    if profile.order is not None:
        k = k_of_m(profile.order)
        if k > 0:
            jets = profile_jet(profile, k - 1)
            spec_amp = np.abs(profile.spectrum())
            eta = profile.grid.freqs()
            deta = profile.grid.freq_spacing()
            for n in range(k):
                scale = np.sum(np.abs(eta) ** n * spec_amp) * deta / (2.0 * np.pi)
                if abs(jets[n]) > 1e-6 * scale:
                    raise ValueError(
                        "profile does not vanish to order k(m) at 0"
                    )
        predicted = profile.order - (j - 1) * k
    return ConormalProfile(
        grid=profile.grid, values=profile.values**j, order=predicted
    )


def extremal_profile(m: float, grid: Grid1D) -> ConormalProfile:
    """Conormal profile of order m vanishing to order exactly k(m) at 0.

    Built as ((L/2pi) sin(2pi s/L))^k * g with g synthesized at order m+k:
    the generic element of the product class, whose powers attain the
    predicted orders m-(j-1)k(m).  The sine factor equals s + O(s^3) near
    the origin but stays periodic, so no wrap discontinuity pollutes the
    spectrum.
    """
    k = k_of_m(m)
    g = synthesize_profile(SymbolSpec(m + k), grid)
    s = grid.nodes()
    length = grid.extent
    ramp = (length / (2.0 * np.pi)) * np.sin(2.0 * np.pi * s / length)
    return ConormalProfile(
        grid=grid, values=ramp**k * g.values, order=float(m)
    )


# ---------------------------------------------------------------------------
# exact-rational mollifier family
# ---------------------------------------------------------------------------


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _padd(p, q):
    n = max(len(p), len(q))
    return [
        (p[i] if i < len(p) else Fraction(0)) + (q[i] if i < len(q) else Fraction(0))
        for i in range(n)
    ]


def _pscale(p, c):
    return [c * a for a in p]


def _ppow(p, n):
    out = [Fraction(1)]
    for _ in range(n):
        out = _pmul(out, p)
    return out


def _pderiv(p):
    return [Fraction(i) * p[i] for i in range(1, len(p))] or [Fraction(0)]


def _peval(p, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for a in reversed(p):
        acc = acc * x + a
    return acc


@dataclass(frozen=True)
class MollifierFamily:
    """Exact polynomial data of the soft frequency-truncation ramp.

    The ramp g on (N, 2N] is g(s) = G(s/N) with the universal degree
    2r+2 polynomial G; its derivative satisfies
    G'(sigma) = A * sigma * (sigma-1)^r * (sigma-2)^r.
    """

    r: int
    amplitude: Fraction
    c_coeffs: tuple[Fraction, ...]
    d_coeffs: tuple[Fraction, ...]
    ramp_poly: tuple[Fraction, ...]

    def ramp(self, s, n_cut: float) -> np.ndarray:
        sigma = np.asarray(s, dtype=float) / float(n_cut)
        coef = np.array([float(c) for c in self.ramp_poly])
        return np.polyval(coef[::-1], sigma)

    def ramp_derivative(self, q: int, s, n_cut: float) -> np.ndarray:
        p = list(self.ramp_poly)
        for _ in range(q):
            p = _pderiv(p)
        coef = np.array([float(c) for c in p])
        sigma = np.asarray(s, dtype=float) / float(n_cut)
        return np.polyval(coef[::-1], sigma) / float(n_cut) ** q

    def verify(self) -> dict[str, bool]:
        """Exact-arithmetic identities of the ramp polynomial."""
        g = list(self.ramp_poly)
        checks = {
            "plateau_value_one": _peval(g, Fraction(1)) == 1,
            "endpoint_value_zero": _peval(g, Fraction(2)) == 0,
        }
        p = g
        flat = True
        for _ in range(self.r):
            p = _pderiv(p)
            flat &= _peval(p, Fraction(1)) == 0 and _peval(p, Fraction(2)) == 0
        checks["joint_derivatives_vanish"] = flat
        target = _pscale(
            _pmul(
                [Fraction(0), Fraction(1)],
                _pmul(
                    _ppow([Fraction(-1), Fraction(1)], self.r),
                    _ppow([Fraction(-2), Fraction(1)], self.r),
                ),
            ),
            self.amplitude,
        )
        deriv = _pderiv(g)
        n = max(len(deriv), len(target))
        deriv += [Fraction(0)] * (n - len(deriv))
        target += [Fraction(0)] * (n - len(target))
        checks["derivative_identity"] = deriv == target
        return checks


def mollifier_polynomial(r: int) -> MollifierFamily:
    """Exact coefficients of the degree-2r+2 truncation ramp.

    A = (-1)^(r+1) (2r+2)! / (3 (r+1) (r!)^2),
    C_j = (-1)^j (r+1)!/(r+1-j)! * r!/(r+j+1)!   for j = 0..r+1,
    D_j = (-1)^j r!/(r-j)! * r!/(r+j+1)!          for j = 0..r.
    """
    if not isinstance(r, int) or not 1 <= r <= 20:
        raise ValueError(f"ramp regularity r must be an integer in [1, 20], got {r}")
    rf = math.factorial(r)
    amplitude = Fraction(
        (-1) ** (r + 1) * math.factorial(2 * r + 2), 3 * (r + 1) * rf * rf
    )
    c = tuple(
        Fraction(
            (-1) ** j * math.factorial(r + 1) * rf,
            math.factorial(r + 1 - j) * math.factorial(r + j + 1),
        )
        for j in range(r + 2)
    )
    d = tuple(
        Fraction(
            (-1) ** j * rf * rf,
            math.factorial(r - j) * math.factorial(r + j + 1),
        )
        for j in range(r + 1)
    )
    # G(sigma) = A * [ sum_j C_j (sigma-1)^(r+1-j) (sigma-2)^(r+j+1)
    #               + sum_j D_j (sigma-1)^(r-j)   (sigma-2)^(r+j+1) ]
    sm1 = [Fraction(-1), Fraction(1)]
    sm2 = [Fraction(-2), Fraction(1)]
    acc = [Fraction(0)]
    for j in range(r + 2):
        acc = _padd(acc, _pscale(_pmul(_ppow(sm1, r + 1 - j), _ppow(sm2, r + j + 1)), c[j]))
    for j in range(r + 1):
        acc = _padd(acc, _pscale(_pmul(_ppow(sm1, r - j), _ppow(sm2, r + j + 1)), d[j]))
    g = tuple(a * amplitude for a in acc)
    return MollifierFamily(r=r, amplitude=amplitude, c_coeffs=c, d_coeffs=d, ramp_poly=g)


_BUMP_MASS = None


def _bump_mass() -> float:
    global _BUMP_MASS
    if _BUMP_MASS is None:
        _BUMP_MASS = quad(lambda u: bump_window(u).item(), -1.0, 1.0, epsabs=1e-14)[0]
    return _BUMP_MASS


def chi_window(s) -> np.ndarray:
    """Averaging kernel: 1 on |s|<=1, supported in [-2,2], unit integral.

    Any smooth kernel with these three properties must go negative (the
    plateau alone integrates to more than 2), so a normalized side lobe on
    1 < |s| < 2 is subtracted from a plateau window.
    """
    s = np.asarray(s, dtype=float)
    plateau = _smooth_plateau(s)
    lobe = bump_window(4.0 * (np.abs(s) - 1.5))
    # integral of plateau is exactly 3; each side lobe integrates to bump_mass/4
    lobe_mass = 0.5 * _bump_mass()
    return plateau - (2.0 / lobe_mass) * lobe


def _smooth_plateau(s):
    from .spectral import _smooth_edge

    return _smooth_edge(2.0 - np.abs(np.asarray(s, dtype=float)))


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(24)
_CHI_BREAKS = (-2.0, -1.75, -1.25, -1.0, 1.0, 1.25, 1.75, 2.0)


class PsiMollifier:
    """Soft spectral cutoff psi = chi * ramp, evaluated by panel quadrature.

    psi(eta) = 1 for eta <= N-2 and psi(eta) = 0 for eta >= 2N+2; scaled
    derivatives eta^q psi^(q)(eta), q <= r, are bounded uniformly in N.
    """

    def __init__(self, n_cut: float, r: int):
        if not n_cut > 4:
            raise ValueError("cutoff scale must exceed 4")
        self.n_cut = float(n_cut)
        self.r = r
        self.family = mollifier_polynomial(r)
        # normalize by the chi mass under the same panel rule, so the
        # plateau value is exactly 1 (same nodes, same weights)
        acc = 0.0
        for a, b in zip(_CHI_BREAKS[:-1], _CHI_BREAKS[1:]):
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            acc += half * np.sum(_GAUSS_WEIGHTS * chi_window(mid + half * _GAUSS_NODES))
        self._chi_mass = acc

    def _panels(self, eta: float):
        pts = set(_CHI_BREAKS)
        for edge in (eta - self.n_cut, eta - 2.0 * self.n_cut):
            if -2.0 < edge < 2.0:
                pts.add(edge)
        return sorted(pts)

    def _ramp_piece(self, s: np.ndarray, q: int) -> np.ndarray:
        """q-th derivative of the soft truncation profile at argument s."""
        out = np.zeros_like(s)
        below = s <= self.n_cut
        if q == 0:
            out[below] = 1.0
        mid = (~below) & (s <= 2.0 * self.n_cut)
        if np.any(mid):
            if q == 0:
                out[mid] = self.family.ramp(s[mid], self.n_cut)
            else:
                out[mid] = self.family.ramp_derivative(q, s[mid], self.n_cut)
        return out

    def derivative(self, q: int, eta) -> np.ndarray:
        """psi^(q)(eta); valid for 0 <= q <= r."""
        if not 0 <= q <= self.r:
            raise ValueError(f"derivative order must be in [0, {self.r}]")
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        out = np.empty_like(eta)
        for idx, e in enumerate(eta):
            acc = 0.0
            panels = self._panels(e)
            for a, b in zip(panels[:-1], panels[1:]):
                half = 0.5 * (b - a)
                mid = 0.5 * (a + b)
                t = mid + half * _GAUSS_NODES
                acc += half * np.sum(
                    _GAUSS_WEIGHTS * chi_window(t) * self._ramp_piece(e - t, q)
                )
            out[idx] = acc / self._chi_mass
        return out if out.size > 1 else out[0]

    def __call__(self, eta) -> np.ndarray:
        return self.derivative(0, eta)


def psi_mollifier(n_cut: float, r: int) -> PsiMollifier:
    return PsiMollifier(n_cut, r)
