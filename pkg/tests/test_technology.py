import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontierkit import (
    DivergenceViolation,
    DomainError,
    MoralHazardPrimitives,
    PiecewiseLinearFrontier,
    PowerCost,
    PowerUtility,
    effort_star,
    make_moral_hazard_technology,
    one_sided_deriv,
    verify_ui_assumptions,
)
from frontierkit.technology import effort_star_array


def bisect_oracle(f, lo, hi, iters=200):
    """Independent plain bisection used to freeze expected values."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
    return 0.5 * (lo + hi)


def brute_force_f1(prims, u, resolution=1e-4, L_max=3.0):
    """Grid maximization over effort at the stated resolution."""
    L = np.arange(0.0, L_max, resolution)
    vals = prims.w * L - prims.phi.phi_inv(u + prims.kappa.kappa(L))
    return u + prims.lam * float(vals.max())


class TestDefaultInstancePeaks:
    def test_u0_is_half(self, default_tech):
        # oracle: phi'(phi_inv(u)) = 1/(2u) = lam = 1  =>  u0 = 0.5
        u0_oracle = bisect_oracle(lambda u: 1.0 / (2.0 * u) - 1.0, 1e-6, 10.0)
        assert abs(u0_oracle - 0.5) < 1e-12
        assert abs(default_tech.u0 - 0.5) < 1e-10

    def test_u1_and_effort(self, default_prims, default_tech):
        # coupled FOCs: u1 + L^2 = 1/2 and 4L^3 + 4*u1*L = 1; substitution
        # gives 4L*(u1 + L^2) = 1, so L = 0.5 and u1 = 0.25
        L_oracle = bisect_oracle(lambda L: 4 * L * 0.5 - 1.0, 1e-6, 2.0)
        assert abs(L_oracle - 0.5) < 1e-12
        assert abs(default_tech.u1 - 0.25) < 1e-9
        assert abs(effort_star(default_prims, default_tech.u1) - 0.5) < 1e-9

    def test_u1_cross_check_2d_grid(self, default_prims, default_tech):
        us = np.linspace(0.0, 0.5, 501)
        vals = [brute_force_f1(default_prims, u, resolution=1e-3) for u in us]
        assert abs(us[int(np.argmax(vals))] - default_tech.u1) < 2e-3

    def test_corner_u1(self, corner_tech, corner_prims):
        # corner condition: phi'(phi_inv(kappa(L*(0)))) = 0.5 <= lam = 1
        L0 = effort_star(corner_prims, 0.0)
        assert abs(L0 - 1.0) < 1e-10
        assert corner_tech.u1 == 0.0
        # grid search over u confirms the peak at the origin
        us = np.linspace(0.0, corner_tech.u0, 201)
        vals = corner_tech.f1.value(us)
        assert int(np.argmax(vals)) == 0


class TestEffortStar:
    def test_w4_closed_form(self, corner_prims):
        # 4 L^3 = 4 has root 1
        oracle = bisect_oracle(lambda L: 4 * L**3 - 4.0, 1e-6, 5.0)
        assert abs(oracle - 1.0) < 1e-12
        assert abs(effort_star(corner_prims, 0.0) - 1.0) < 1e-10

    def test_w1_closed_form(self, default_prims):
        oracle = bisect_oracle(lambda L: 4 * L**3 - 1.0, 1e-6, 5.0)
        assert abs(oracle - 0.25 ** (1.0 / 3.0)) < 1e-12
        assert abs(effort_star(default_prims, 0.0) - 0.25 ** (1.0 / 3.0)) < 1e-10

    def test_vanishes_at_large_u(self, default_prims):
        us = np.logspace(0, 6, 13)
        Ls = [effort_star(default_prims, u) for u in us]
        assert all(b < a for a, b in zip(Ls, Ls[1:]))
        assert Ls[-1] < 1e-2

    @given(
        u=st.floats(0.0, 5.0),
        w=st.floats(0.1, 10.0),
        b=st.floats(1.2, 4.0),
        a=st.floats(0.2, 0.8),
    )
    @settings(max_examples=60, deadline=None)
    def test_foc_residual_scaled(self, u, w, b, a):
        prims = MoralHazardPrimitives(
            lam=1.0, w=w, phi=PowerUtility(a), kappa=PowerCost(b)
        )
        L = effort_star(prims, u)
        residual = abs(
            w * float(prims.phi.phi_prime_at_inv(u + prims.kappa.kappa(L)))
            - float(prims.kappa.kappa_prime(L))
        )
        assert residual < 1e-10

    def test_vectorized_matches_scalar(self, default_prims):
        us = np.linspace(0.0, 2.0, 17)
        vec = effort_star_array(default_prims, us)
        scal = np.array([effort_star(default_prims, u) for u in us])
        assert np.max(np.abs(vec - scal)) < 1e-10


class TestOneSidedDerivatives:
    def test_f0_deriv_at_half(self, default_tech):
        # analytic: 1 - 1/phi'(0.25) = 1 - 2*0.5 = 0; finite-difference oracle
        h = 1e-7
        fd = (default_tech.f0.value(0.5 + h) - default_tech.f0.value(0.5 - h)) / (2 * h)
        assert abs(fd) < 1e-6
        assert abs(one_sided_deriv(default_tech.f0, 0.5, "left")) < 1e-10
        assert abs(one_sided_deriv(default_tech.f0, 0.5, "right")) < 1e-10

    def test_piecewise_linear_kink(self):
        f = PiecewiseLinearFrontier([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        assert one_sided_deriv(f, 1.0, "left") == 1.0
        assert one_sided_deriv(f, 1.0, "right") == -1.0

    def test_peak_sandwich(self, default_tech):
        for f in (default_tech.f0, default_tech.f1):
            u = f.peak
            assert f.right_deriv(u) <= 1e-8 <= f.left_deriv(u) + 2e-8

    def test_domain_error(self, default_tech):
        with pytest.raises(DomainError):
            default_tech.f0.left_deriv(-0.5)


class TestFrontierValues:
    def test_f1_matches_brute_force(self, default_prims, default_tech):
        for u in np.linspace(0.0, 0.6, 13):
            expected = brute_force_f1(default_prims, float(u))
            assert abs(default_tech.f1.value(float(u)) - expected) < 1e-6

    def test_derivative_gap_formula(self, default_prims, default_tech):
        # F0'(u) - F1'(u) = lam*[1/phi'(phi_inv(u+kappa(L*))) - 1/phi'(phi_inv(u))]
        p = default_prims
        for u in np.linspace(0.05, 0.45, 9):
            L = effort_star(p, float(u))
            expected = p.lam * (
                1.0 / float(p.phi.phi_prime_at_inv(u + p.kappa.kappa(L)))
                - 1.0 / float(p.phi.phi_prime_at_inv(u))
            )
            got = default_tech.f0.right_deriv(u) - default_tech.f1.right_deriv(u)
            assert expected > 0
            assert abs(got - expected) < 1e-9

    def test_envelope_derivative(self, default_prims, default_tech):
        p = default_prims
        h = 1e-6
        for u in (0.1, 0.25, 0.4):
            fd = (default_tech.f1.value(u + h) - default_tech.f1.value(u - h)) / (2 * h)
            L = effort_star(p, u)
            env = 1.0 - p.lam / float(p.phi.phi_prime_at_inv(u + p.kappa.kappa(L)))
            assert abs(fd - env) < 1e-5


class TestVerifyUiAssumptions:
    def test_default_instance_passes(self, default_tech):
        grid = np.linspace(0.01, default_tech.u0, 40)
        rep = verify_ui_assumptions(default_tech, grid)
        assert rep.overall_pass
        rep["peak-identity"]  # identity residual check ran
        assert rep["peak-identity"].worst_violation < 1e-8

    def test_corner_instance(self, corner_tech):
        grid = np.linspace(0.01, corner_tech.u0, 40)
        rep = verify_ui_assumptions(corner_tech, grid)
        assert rep.overall_pass
        assert rep["peak-identity"].note == "not applicable (corner)"

    def test_degenerate_grid(self, default_tech):
        rep = verify_ui_assumptions(default_tech, [default_tech.u0])
        assert rep.overall_pass
        assert "skipped" in rep["gap-derivative-negative"].note


def test_divergence_violation():
    prims = MoralHazardPrimitives(
        lam=1.0,
        w=1.0,
        phi=PowerUtility(0.5),
        kappa=PowerCost(2.0),
        divergence_grid_L=1e-6,  # tiny grid makes the check fail
    )
    with pytest.raises(DivergenceViolation):
        make_moral_hazard_technology(prims)
