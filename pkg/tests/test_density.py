"""Density oracles: closed forms, inversion quadrature, grid convolution."""
import math

import numpy as np
import pytest

from locallimit import density, dist
from locallimit.density import (
    DensityGrid,
    TailBoundError,
    density_cf_inversion,
    density_exact,
    grid_convolve,
    irwin_hall_pdf,
    normalized_uniform_sum_peak,
    std_normal_pdf,
)

SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# closed forms

def test_density_exact_examples(uniform, gaussian, expc):
    assert density_exact(uniform, 2, 0.0) == pytest.approx(1 / math.sqrt(6), abs=1e-15)
    assert density_exact(gaussian, 7, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert density_exact(expc, 1, 0.0) == pytest.approx(math.exp(-1.0))


def test_density_outside_support_is_zero(uniform, expc):
    assert density_exact(uniform, 2, 4.0) == 0.0
    assert density_exact(expc, 4, -2.1) == 0.0


def test_density_exact_rejects_grid_family():
    xs = np.linspace(-2, 2, 101)
    g = dist.make_family("grid", {"xs": xs, "ps": np.exp(-xs ** 2)})
    with pytest.raises(ValueError):
        density_exact(g, 4, 0.0)


def test_irwin_hall_known_values():
    assert irwin_hall_pdf(1, 0.5) == 1.0
    assert irwin_hall_pdf(2, 1.0) == 1.0          # triangle peak
    assert irwin_hall_pdf(3, 1.5) == 0.75          # parabolic-piece peak
    assert irwin_hall_pdf(2, -0.1) == 0.0 and irwin_hall_pdf(2, 2.0) == 0.0
    # mass check by quadrature
    ts = np.linspace(0, 4, 4001)
    vals = [irwin_hall_pdf(4, float(t)) for t in ts]
    assert np.trapezoid(vals, ts) == pytest.approx(1.0, abs=1e-6)


def test_irwin_hall_against_scaled_gamma_limit():
    # CLT sanity: peak of Z_n for uniforms approaches phi(0) from below
    peaks = [density_exact(dist.make_family("uniform_sym"), n, 0.0) for n in (4, 8, 16, 32)]
    assert all(a < b < std_normal_pdf(0.0) for a, b in zip(peaks, peaks[1:]))


def test_uniform_sum_peaks_slice_property():
    vals = {m: normalized_uniform_sum_peak(m) for m in (1, 2, 4, 8, 16)}
    assert vals[1] == 1.0
    for m, v in vals.items():
        assert 1.0 <= v <= math.sqrt(2.0)
    # approaches the CLT peak sqrt(6/pi) from below for growing even m
    lim = math.sqrt(6 / math.pi)
    errs = [abs(vals[m] - lim) for m in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.014


# ---------------------------------------------------------------------------
# characteristic-function inversion

@pytest.mark.parametrize("family,ns", [
    ("uniform_sym", (2, 4, 8, 16, 32)),
    ("exp_centered", (2, 4, 8, 16, 32)),
])
def test_inversion_matches_exact(family, ns):
    d = dist.make_family(family)
    for n in ns:
        for x in np.linspace(-3, 3, 13):
            a = density_exact(d, n, float(x))
            b = density_cf_inversion(d, n, float(x), 1e-8)
            assert b == pytest.approx(a, abs=1e-8)


def test_inversion_gaussian_tight(gaussian):
    got = density_cf_inversion(gaussian, 4, 1.0, 1e-10)
    assert got == pytest.approx(std_normal_pdf(1.0), abs=1e-10)


def test_inversion_preconditions(uniform):
    with pytest.raises(ValueError):
        density_cf_inversion(uniform, 1, 0.0, 1e-8)
    with pytest.raises(ValueError):
        density_cf_inversion(uniform, 4, 0.0, -1e-8)


def test_inversion_grid_family_reports_achievable_tolerance():
    # the grid family only has the conservative decay bound: at desk
    # scale it cannot certify tight tolerances, and says so
    xs = np.linspace(-SQRT3, SQRT3, 1201)
    g = dist.make_family("grid", {"xs": xs, "ps": np.full_like(xs, 1 / (2 * SQRT3))})
    with pytest.raises(TailBoundError) as err:
        density_cf_inversion(g, 64, 0.0, 1e-8)
    assert math.isfinite(err.value.achievable)
    assert err.value.achievable > 1e-8


def test_inversion_grid_family_large_n():
    # the decay bound certifies 1e-8 once n exp(-n/(C n0 M^2)) is tiny
    xs = np.linspace(-SQRT3, SQRT3, 1201)
    g = dist.make_family("grid", {"xs": xs, "ps": np.full_like(xs, 1 / (2 * SQRT3))})
    n = 16384
    u = dist.make_family("uniform_sym")
    for x in (0.0, 0.25):
        got = density_cf_inversion(g, n, x, 1e-8)
        ref = density_exact(u, n, x)
        assert got == pytest.approx(ref, abs=2e-8)


def test_inversion_fast_oscillation_panels(uniform):
    # |x| sqrt(n) > 20 triggers the panel route
    a = density_exact(uniform, 64, 3.0)
    b = density_cf_inversion(uniform, 64, 3.0, 1e-9)
    assert b == pytest.approx(a, abs=1e-9)


# ---------------------------------------------------------------------------
# grid convolution

def test_convolution_n1_identity(uniform):
    g = grid_convolve(uniform, 1, 0.01)
    assert g.n == 1 and g.method == "grid_convolution"
    inner = slice(1, -1)
    assert np.allclose(g.ps[inner], 1 / (2 * SQRT3), atol=1e-12)


def test_convolution_triangle_second_order(uniform):
    for h in (0.01, 0.005):
        g = grid_convolve(uniform, 2, h)
        err = max(abs(float(p) - density_exact(uniform, 2, float(x)))
                  for x, p in zip(g.xs, g.ps))
        assert err <= 4.0 * h ** 2


def test_convolution_n16_matches_oracle(uniform):
    g = grid_convolve(uniform, 16, 0.004)
    step = 40
    err = max(abs(float(p) - density_exact(uniform, 16, float(x)))
              for x, p in zip(g.xs[::step], g.ps[::step]))
    assert err < 1e-3
    assert g.max_density() == pytest.approx(density_exact(uniform, 16, 0.0), abs=1e-3)
    assert g.mass() == pytest.approx(1.0, abs=1e-6)
    assert abs(g.mean()) < 1e-6
    assert g.var() == pytest.approx(1.0, abs=1e-2)


def test_convolution_requires_power_of_two(uniform):
    with pytest.raises(ValueError):
        grid_convolve(uniform, 3, 0.01)


def test_convolution_coarse_step_rejected(expc):
    with pytest.raises(ValueError):
        grid_convolve(expc, 2, 0.01, truncation=(-1.0, 3.0))  # heavy mass dropped


def test_convolution_unbounded_defaults(gaussian, expc):
    for d, n in ((gaussian, 4), (expc, 4)):
        g = grid_convolve(d, n, 0.005)
        assert g.mass() == pytest.approx(1.0, abs=1e-6)


def test_density_grid_csv_roundtrip(tmp_path, uniform):
    g = grid_convolve(uniform, 2, 0.05)
    path = tmp_path / "grid.csv"
    g.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(data[:, 0], g.xs, rtol=0, atol=0)
    assert np.allclose(data[:, 1], g.ps, rtol=0, atol=0)


def test_oracle_triangle_three_routes(uniform):
    # closed form, inversion, and convolution all agree where defined
    g = grid_convolve(uniform, 8, 0.002)
    for x in (-1.5, 0.0, 0.7):
        exact = density_exact(uniform, 8, x)
        inv = density_cf_inversion(uniform, 8, x, 1e-9)
        conv = float(np.interp(x, g.xs, g.ps))
        assert inv == pytest.approx(exact, abs=1e-9)
        assert conv == pytest.approx(exact, abs=5e-5)


def test_convolution_peak_monotone_under_doubling(uniform):
    # raw-sum maxima never exceed the geometric mean of the factors:
    # for iid doubling, M(S_2n) <= M(S_n)
    peaks = {}
    for n in (1, 2, 4, 8):
        g = grid_convolve(uniform, n, 0.004)
        peaks[n] = g.max_density() / math.sqrt(n)
    assert peaks[2] <= peaks[1] * (1 + 1e-9)
    assert peaks[4] <= peaks[2] * (1 + 1e-9)
    assert peaks[8] <= peaks[4] * (1 + 1e-9)


def test_exact_grid_closed_form_invariants(uniform, expc):
    # the window must cover the support: Z_n for uniforms lives on
    # [-sqrt(3n), sqrt(3n)]
    for d, lo, hi in ((uniform, -5.2, 5.2), (expc, -3.0, 14.0)):
        for n in (4, 8):
            g = density.exact_grid(d, n, lo, hi, 0.002)
            assert g.method == "closed_form"
            assert np.all(g.ps >= 0.0)
            assert g.mass() == pytest.approx(1.0, abs=1e-6)
            assert abs(g.mean()) < 1e-6
            assert g.var() == pytest.approx(1.0, abs=1e-4)


def test_uniform_oracle_seam_at_irwin_hall_cutoff(uniform):
    # n <= 40 evaluates the exact rational polynomial, n > 40 inverts the
    # characteristic function; both sides of the seam agree tightly
    for x in (-0.8, 0.0, 0.3):
        rational = density_exact(uniform, 40, x)
        inverted = density_cf_inversion(uniform, 40, x, 1e-12)
        assert inverted == pytest.approx(rational, abs=2e-12)
    v = density_exact(uniform, 64, 0.3)
    assert v == pytest.approx(density_cf_inversion(uniform, 64, 0.3, 1e-12), abs=2e-11)
