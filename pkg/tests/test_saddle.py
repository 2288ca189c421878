"""Saddle solve plus lambda/mu evaluation, checked against closed forms."""
import math

import numpy as np
import pytest

from locallimit import dist, saddle
from locallimit.saddle import lambda_mu_at, solve_saddle, tau_range
from locallimit.series import saddle_point_series


def lam_ref_expc(tau):
    # (log(1+tau) - tau + tau^2/2) / tau^3 via its everywhere-stable series
    return sum((-1.0) ** k * tau ** k / (k + 3) for k in range(60))


def test_solve_example_exp_centered(expc):
    s = solve_saddle(expc, 0.1)
    assert s.z0 == pytest.approx(1 / 11, abs=1e-11)
    assert s.residual <= 1e-11
    assert s.rho[0] == pytest.approx((1 - s.z0) ** -2, rel=1e-9)


def test_solve_gaussian_is_identity(gaussian):
    s = solve_saddle(gaussian, 0.3)
    assert s.z0 == 0.3
    assert s.residual == 0.0


def test_solve_tau_zero(uniform):
    s = solve_saddle(uniform, 0.0)
    assert s.z0 == 0.0 and s.residual == 0.0 and s.iterations == 0
    assert s.rho[0] == pytest.approx(1.0)


@pytest.mark.parametrize("family", ["gaussian", "uniform_sym", "exp_centered"])
def test_solution_invariants_on_certified_disc(family):
    d = dist.make_family(family)
    _, t0 = tau_range(d)
    for tau in np.linspace(-t0, t0, 31):
        tau = float(tau)
        s = solve_saddle(d, tau)
        assert s.residual <= 1e-11
        assert abs(s.z0) <= 2.0 * abs(tau) + 1e-15
        assert s.z0 * tau >= 0.0
        assert 0.5 <= s.rho[0] <= 1.5


def test_monotone_zn(uniform):
    _, t0 = tau_range(uniform)
    zs = [solve_saddle(uniform, float(t)).z0 for t in np.linspace(-t0, t0, 101)]
    assert all(a < b for a, b in zip(zs, zs[1:]))


def test_series_solver_consistency(expc):
    # |z0(tau) - series(tau)| <= C tau^{order+1}; a low truncation order
    # keeps the omitted term far above the 1e-12 solver floor
    order = 3
    c = dist.cumulants(expc, order + 1)
    z0s = saddle_point_series(c, order)
    _, t0 = tau_range(expc)

    def fit_C(npts):
        worst = 0.0
        for tau in np.linspace(t0 / 8, t0 / 2, npts):
            tau = float(tau)
            err = abs(solve_saddle(expc, tau).z0 - z0s(tau))
            worst = max(worst, err / tau ** (order + 1))
        return worst

    c_fine = fit_C(160)
    c_coarse = fit_C(40)
    assert c_fine > 0
    # stable under grid refinement
    assert abs(c_coarse - c_fine) <= 0.2 * c_fine
    # closed form z0 = tau/(1+tau): the first omitted coefficient is 1
    assert c_fine == pytest.approx(1.0, rel=0.2)
    # the fitted constant bounds the error on an independent grid
    for tau in np.linspace(t0 / 8, t0 / 2, 23):
        tau = float(tau)
        assert abs(solve_saddle(expc, tau).z0 - z0s(tau)) <= 1.05 * c_fine * tau ** 4


def test_newton_actually_iterates(expc):
    # far enough out the order-12 warm start is not yet converged
    s = solve_saddle(expc, 0.3)
    assert s.iterations >= 1
    assert s.z0 == pytest.approx(0.3 / 1.3, abs=1e-11)


def test_z0_derivative_one_at_origin(expc, uniform):
    for d in (expc, uniform):
        h = 1e-5
        dz = (solve_saddle(d, h).z0 - solve_saddle(d, -h).z0) / (2 * h)
        assert dz == pytest.approx(1.0, abs=1e-6)


def test_lambda_mu_examples(expc, gaussian, uniform):
    lam, mu = lambda_mu_at(expc, 0.1)
    assert lam == pytest.approx((math.log(1.1) - 0.1 + 0.005) / 0.001, abs=1e-10)
    assert mu == pytest.approx(math.log(1.1), abs=1e-10)
    for tau in (0.0, 0.002, 0.3):
        assert lambda_mu_at(gaussian, tau) == (0.0, 0.0)
    lam_u, mu_u = lambda_mu_at(uniform, 1e-4)
    assert lam_u / 1e-4 == pytest.approx(-0.05, rel=1e-4)
    assert mu_u / 1e-8 == pytest.approx(-0.3, rel=1e-4)


def test_closed_form_chain_101_points(expc):
    _, t0 = tau_range(expc)
    for tau in np.linspace(-t0, t0, 101):
        tau = float(tau)
        if tau != 0.0:
            s = solve_saddle(expc, tau)
            assert s.z0 == pytest.approx(tau / (1 + tau), abs=1e-10)
        lam, mu = lambda_mu_at(expc, tau)
        assert lam == pytest.approx(lam_ref_expc(tau), abs=1e-10)
        assert mu == pytest.approx(math.log1p(tau), abs=1e-10)


def test_lambda_sup_bound(expc, uniform, gaussian):
    # |lambda| <= 700 alpha^-3 on |tau| <= alpha^3/64
    for d in (expc, uniform, gaussian):
        bound = 700.0 / d.alpha ** 3
        for tau in np.linspace(-d.alpha ** 3 / 64, d.alpha ** 3 / 64, 41):
            lam, mu = lambda_mu_at(d, float(tau))
            assert abs(lam) <= bound
            assert isinstance(lam, float) and isinstance(mu, float)


def test_tau_range_values(uniform, gaussian):
    theorem, analytic = tau_range(uniform)
    assert analytic == pytest.approx(uniform.alpha ** 3 / 32)
    assert theorem == pytest.approx(12 * uniform.alpha ** 3 / 6400)
    _, ga = tau_range(gaussian)
    assert ga == pytest.approx(gaussian.alpha ** 3 / 32)


def test_tau_range_scales_with_density_bound():
    # doubling M shrinks the theorem range fourfold
    xs = np.linspace(-math.sqrt(3), math.sqrt(3), 1201)
    ps = np.full_like(xs, 1 / (2 * math.sqrt(3)))
    base = dist.make_family("grid", {"xs": xs, "ps": ps})
    doubled = dist.make_family(
        "grid", {"xs": xs, "ps": ps, "density_bound": 2 * base.density_bound_M})
    t_base, _ = tau_range(base)
    t_doubled, _ = tau_range(doubled)
    assert t_doubled == pytest.approx(t_base / 4.0)


def test_tau_outside_domain(uniform, expc):
    with pytest.raises(ValueError):
        solve_saddle(uniform, 2.0)
    with pytest.raises(ValueError):
        solve_saddle(expc, -1.5)


def test_relaxed_domain_beyond_certified_disc(expc, uniform):
    # the documented wide-tau evaluations keep working
    assert solve_saddle(expc, 0.1).z0 == pytest.approx(1 / 11, abs=1e-11)
    s = solve_saddle(uniform, 1.0)
    assert dist.cgf(uniform, s.z0, 1) == pytest.approx(1.0, abs=1e-11)


from hypothesis import given, settings
from hypothesis import strategies as st


@given(st.floats(-1.0, 1.0), st.sampled_from(["gaussian", "uniform_sym", "exp_centered"]))
@settings(max_examples=60, deadline=None)
def test_saddle_residual_property(frac, family):
    d = dist.make_family(family)
    _, t0 = tau_range(d)
    s = solve_saddle(d, frac * t0)
    assert s.residual <= 1e-11
    assert abs(s.z0) <= 2.0 * abs(frac * t0) + 1e-15
