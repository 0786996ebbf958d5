from fractions import Fraction

import numpy as np
import pytest
from scipy.special import gamma

from cwlab.profiles import (
    ConormalProfile,
    SymbolSpec,
    chi_window,
    extremal_profile,
    k_of_m,
    mollifier_polynomial,
    piriou_decompose,
    profile_jet,
    profile_power,
    psi_mollifier,
    synthesize_profile,
)
from cwlab.spectral import Grid1D, decay_exponent

GRID = Grid1D(1024, 12.0)


def symbol_mass(m):
    # integral of (1+eta^2)^(m/2) over the line, via the beta function
    return np.sqrt(np.pi) * gamma(-0.5 * m - 0.5) / gamma(-0.5 * m)


def test_value_at_zero_matches_symbol_mass():
    prof = synthesize_profile(SymbolSpec(-3.0), GRID)
    i0 = np.argmin(np.abs(GRID.nodes()))
    assert abs(prof.values[i0] - 2.0) < 1e-3  # closed form for m = -3
    prof2 = synthesize_profile(SymbolSpec(-2.6), GRID)
    assert abs(prof2.values[np.argmin(np.abs(GRID.nodes()))] - symbol_mass(-2.6)) < 1e-3


def test_zero_symbol_gives_zero_profile():
    prof = synthesize_profile(lambda eta: np.zeros_like(eta), GRID)
    assert np.all(prof.values == 0.0)


def test_symbol_validation():
    with pytest.raises(ValueError):
        SymbolSpec(-1.0)
    with pytest.raises(ValueError):
        SymbolSpec(0.5)


def test_profile_spectrum_slope():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    fit = decay_exponent(prof.values, GRID, band=(8.0, 64.0))
    assert abs(fit.slope - (-2.6)) < 0.1


def test_profile_slope_stable_under_refinement():
    fits = []
    for n in (1024, 2048):
        g = Grid1D(n, 12.0)
        prof = synthesize_profile(SymbolSpec(-2.6), g, cutoff=np.pi * 1024 / 12.0)
        fits.append(decay_exponent(prof.values, g, band=(8.0, 64.0)).slope)
    assert abs(fits[0] - fits[1]) < 0.05


def test_truncation_tail_recorded():
    prof = synthesize_profile(SymbolSpec(-3.0), GRID)
    lam = GRID.nyquist
    assert np.isclose(prof.truncation_tail, 2.0 * lam**-2.0 / 2.0)


def test_k_of_m():
    assert k_of_m(-2.6) == 1
    assert k_of_m(-1.5) == 0
    assert k_of_m(-4.5) == 3
    for bad in (-1.0, -3.0, -0.5, 0.2):
        with pytest.raises(ValueError):
            k_of_m(bad)


def test_profile_jet_matches_closed_form():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    jets = profile_jet(prof, 1)
    assert abs(jets[0] - symbol_mass(-2.6)) < 1e-3
    assert abs(jets[1]) < 1e-8  # even profile


def test_piriou_reconstruction_and_vanishing():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    split = piriou_decompose(prof)
    assert split.k == 1
    recon = split.taylor.values + split.singular.values
    assert np.max(np.abs(recon - prof.values)) < 1e-12 * np.max(np.abs(prof.values))
    jets = profile_jet(split.singular, split.k)
    scale = np.max(np.abs(prof.values))
    assert np.all(np.abs(jets) < 1e-8 * scale)


def test_piriou_idempotent():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    split = piriou_decompose(prof)
    again = piriou_decompose(split.singular, k=split.k)
    assert np.all(again.taylor.values == 0.0)
    assert np.all(again.coefficients == 0.0)


def test_piriou_singular_keeps_order():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    split = piriou_decompose(prof)
    fit = decay_exponent(split.singular.values, GRID, band=(8.0, 64.0))
    assert abs(fit.slope - (-2.6)) < 0.15


def test_piriou_higher_vanishing_order():
    prof = synthesize_profile(SymbolSpec(-4.5), GRID)
    split = piriou_decompose(prof)
    assert split.k == 3
    jets = profile_jet(split.singular, 3)
    scale = np.max(np.abs(prof.values))
    assert np.all(np.abs(jets) < 1e-7 * scale)
    recon = split.taylor.values + split.singular.values
    assert np.max(np.abs(recon - prof.values)) < 1e-12 * scale


def test_power_orders_attained_on_extremal_element():
    # powers of f = ramp^k * g carry convolution corrections of relative size
    # eta^(m+k+1) ~ eta^-0.6, so the predicted slopes need a band in the
    # asymptotic regime; [32, 256] on a 4096-point grid keeps the bias < 0.1
    grid = Grid1D(4096, 12.0)
    band = (32.0, 256.0)
    v = extremal_profile(-2.6, grid)
    assert abs(decay_exponent(v.values, grid, band=band).slope + 2.6) < 0.15
    p2 = profile_power(v, 2)
    p3 = profile_power(v, 3)
    assert np.isclose(p2.order, -3.6)
    assert np.isclose(p3.order, -4.6)
    assert abs(decay_exponent(p2.values, grid, band=band).slope + 3.6) < 0.3
    assert abs(decay_exponent(p3.values, grid, band=band).slope + 4.6) < 0.3


def test_power_of_jet_killed_remainder_decays_faster():
    # removing the full jet 0..k leaves vanishing order -m-1 > k, so powers
    # decay strictly faster than the class bound m-(j-1)k
    grid = Grid1D(4096, 12.0)
    prof = synthesize_profile(SymbolSpec(-2.6), grid)
    v = piriou_decompose(prof).singular
    band = (32.0, 256.0)
    s2 = decay_exponent(profile_power(v, 2).values, grid, band=band).slope
    s3 = decay_exponent(profile_power(v, 3).values, grid, band=band).slope
    assert s2 < -3.6
    assert s3 < -4.6


def test_power_validation():
    prof = synthesize_profile(SymbolSpec(-2.6), GRID)
    with pytest.raises(ValueError):
        profile_power(extremal_profile(-2.6, GRID), 1)
    with pytest.raises(ValueError):
        # raw profile has a nonzero value at 0: not in the product class
        profile_power(prof, 2)


# ---------------------------------------------------------------------------
# mollifier family
# ---------------------------------------------------------------------------


def test_mollifier_amplitudes():
    assert mollifier_polynomial(1).amplitude == Fraction(4)
    assert mollifier_polynomial(2).amplitude == Fraction(-20)


def test_mollifier_first_coefficients():
    fam = mollifier_polynomial(1)
    assert fam.c_coeffs[0] == Fraction(1, 2)
    assert fam.d_coeffs[0] == Fraction(1, 2)


def test_mollifier_exact_identities():
    for r in range(1, 6):
        checks = mollifier_polynomial(r).verify()
        assert all(checks.values()), (r, checks)


def test_mollifier_validation():
    for bad in (0, 21, -2):
        with pytest.raises(ValueError):
            mollifier_polynomial(bad)
    with pytest.raises(ValueError):
        mollifier_polynomial(1.5)


def test_ramp_endpoint_values():
    fam = mollifier_polynomial(3)
    n = 40.0
    assert abs(fam.ramp(n, n) - 1.0) < 1e-12
    assert abs(fam.ramp(2 * n, n)) < 1e-12


def test_chi_window_properties():
    s = np.linspace(-0.99, 0.99, 41)
    assert np.max(np.abs(chi_window(s) - 1.0)) < 1e-12
    assert np.all(chi_window(np.array([-2.5, 2.01, 3.0])) == 0.0)
    fine = np.linspace(-2.2, 2.2, 200001)
    mass = np.trapezoid(chi_window(fine), fine)
    assert abs(mass - 1.0) < 1e-6
    assert chi_window(fine).min() < -1e-3  # must dip negative


def test_psi_plateau_and_support():
    psi = psi_mollifier(64.0, 2)
    assert abs(psi(60.0) - 1.0) < 1e-9  # below N-2
    assert abs(psi(62.0) - 1.0) < 1e-9
    assert abs(psi(131.0)) < 1e-9  # above 2N+2
    mid = psi(96.0)
    assert 0.0 < mid < 1.0


def test_psi_scaled_derivative_uniformity():
    r = 2
    sup = {q: [] for q in range(1, r + 1)}
    for n in (16.0, 64.0, 256.0, 1024.0):
        psi = psi_mollifier(n, r)
        eta = np.linspace(0.7 * n, 2.4 * n, 160)
        for q in range(1, r + 1):
            vals = np.abs(eta**q * psi.derivative(q, eta))
            sup[q].append(vals.max())
    for q, sups in sup.items():
        ratio = max(sups) / min(sups)
        assert ratio < 1.25, (q, sups)
