"""Smooth approximant construction: derivative bounds, ordering, convergence."""

import numpy as np
import pytest

from frontierkit.errors import DomainError, ParamsOutOfRange
from frontierkit.frontiers import (
    AffineFrontier,
    PiecewiseLinearFrontier,
    QuadraticFrontier,
)
from frontierkit.smoothing import (
    SmoothingParams,
    averaged_right_derivative,
    build_sequence,
    build_smooth_pair,
    verify_monster,
)
from frontierkit.technology import Technology

NS = [8, 16, 32, 64]


def quad_tech() -> Technology:
    # smooth fixture: closed-form parabolic pair with a wide peak separation
    f0 = QuadraticFrontier(0.25, 1.0, -1.0)  # 0.5 - (u - 0.5)^2
    f1 = QuadraticFrontier(0.9975, 0.1, -1.0)  # 1 - (u - 0.05)^2
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.05, u_star=0.0)


def kinked_tech() -> Technology:
    f0 = PiecewiseLinearFrontier([0.0, 0.5, 0.7], [0.0, 0.3, 0.28])
    f1 = PiecewiseLinearFrontier([0.0, 0.1, 0.45, 0.7], [0.8, 0.85, 0.8, 0.6])
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.1, u_star=0.0)


@pytest.fixture(scope="module", params=["quad", "kinked"])
def tech_and_pairs(request):
    tech = quad_tech() if request.param == "quad" else kinked_tech()
    return tech, build_sequence(tech, NS)


def core_grid(tech, n, count=25):
    return np.linspace(1.0 / n, tech.u0 - 2.0 / n, count)


class TestAveragedDerivative:
    def test_affine_source_exact(self):
        f = AffineFrontier(0.2, 0.6, (0.0, 0.5))
        params = SmoothingParams(n=8, delta=0.05, gamma=0.1, zeta=0.2, eps=0.09)
        got = averaged_right_derivative(f, 0.2, params)
        assert got == pytest.approx(0.6 - 0.1 * 0.2, abs=1e-12)

    def test_straddled_kink_averages_the_slopes(self):
        f = PiecewiseLinearFrontier([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        params = SmoothingParams(n=8, delta=0.1, gamma=1e-9, zeta=0.02, eps=0.009)
        u = 1.0 - 0.05  # window [u, u+delta] straddles the kink symmetrically
        got = averaged_right_derivative(f, u, params)
        assert got == pytest.approx(-params.gamma * u, abs=1e-12)

    def test_window_outside_domain_rejected(self):
        f = PiecewiseLinearFrontier([0.0, 0.5, 0.7], [0.0, 0.3, 0.28])
        params = SmoothingParams(n=8, delta=0.05, gamma=0.1, zeta=0.2, eps=0.09)
        with pytest.raises(DomainError):
            averaged_right_derivative(f, 0.68, params)

    def test_matches_smoothed_frontier_derivative(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        pair = pairs[0]
        for u in core_grid(tech, pair.params.n, 7):
            direct = averaged_right_derivative(tech.f0, float(u), pair.params)
            assert pair.f0n.right_deriv(float(u)) == pytest.approx(direct, abs=1e-9)


class TestParams:
    def test_zeta_must_exceed_twice_eps(self):
        with pytest.raises(ParamsOutOfRange):
            SmoothingParams(n=8, delta=0.05, gamma=0.1, zeta=0.1, eps=0.06)

    def test_window_must_fit_below_one_over_n(self):
        with pytest.raises(ParamsOutOfRange):
            SmoothingParams(n=8, delta=0.2, gamma=0.1, zeta=0.2, eps=0.09)

    def test_n_too_small_for_peak_separation(self):
        with pytest.raises(ParamsOutOfRange):
            SmoothingParams.auto(quad_tech(), 4)

    def test_auto_params_satisfy_ranges(self):
        tech = quad_tech()
        for n in NS:
            p = SmoothingParams.auto(tech, n)
            assert 0 < p.delta < 1 / n
            assert 0 < p.gamma < 1 / (tech.u0 * n)
            assert 2 * p.eps < p.zeta < 2 / n


class TestDerivativeEnvelope:
    def test_natural_bound(self, tech_and_pairs):
        # the smoothed slope sits between F^-(u + 1/n) - 1 and F^+(u) on the core
        tech, pairs = tech_and_pairs
        for pair in pairs:
            n = pair.params.n
            for u in core_grid(tech, n):
                u = float(u)
                for f_src, f_n in ((tech.f0, pair.f0n), (tech.f1, pair.f1n)):
                    d = averaged_right_derivative(f_src, u, pair.params)
                    assert d <= f_src.right_deriv(u) + 1e-9
                    assert d >= f_src.left_deriv(u + 1.0 / n) - 1.0 - 1e-9
                    assert f_n.right_deriv(u) == pytest.approx(d, abs=1e-9)

    def test_strictly_decreasing_slopes(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        for pair in pairs:
            us = np.linspace(1e-3, tech.u0 + 0.1, 301)
            for f in (pair.f0n, pair.f1n):
                ds = np.array([f.right_deriv(float(u)) for u in us])
                assert np.all(np.diff(ds) < 0)

    def test_continuously_differentiable_at_joins(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        for pair in pairs:
            for f in (pair.f0n, pair.f1n):
                for k in f.knots:
                    assert f.left_deriv(float(k)) == pytest.approx(
                        f.right_deriv(float(k)), abs=1e-9
                    )


class TestOrderingAndPeaks:
    def test_pair_strictly_ordered_with_margin(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        for pair in pairs:
            p = pair.params
            us = core_grid(tech, p.n, 41)
            gap = pair.f1n.value(us) - pair.f0n.value(us)
            assert np.min(gap) >= p.zeta - 2 * p.eps - 1e-9
            wide = np.linspace(0.0, tech.u0 + 1.0, 201)
            assert np.min(pair.f1n.value(wide) - pair.f0n.value(wide)) > 0

    def test_peak_locations(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        for pair in pairs:
            n = pair.params.n
            assert tech.u0 - 1.0 / n - 1e-9 <= pair.u0_n <= tech.u0 + 1e-9
            assert abs(pair.u1_n - tech.u1) <= 1.0 / n + 1e-9
            assert abs(pair.u_star_n - tech.u_star) <= 1.0 / n + 1e-9

    def test_gap_argmax_moved_off_the_origin(self, tech_and_pairs):
        # the source gap peaks at 0; each smoothed gap peaks strictly inside
        _, pairs = tech_and_pairs
        for pair in pairs:
            assert pair.u_star_n > 0
            assert pair.gap(pair.u_star_n) > pair.gap(0.0)


class TestConvergence:
    def test_sup_distance_weakly_decreases(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        grid = np.linspace(0.13, 0.24, 81)  # inside every core interval
        f0_src = tech.f0.value(grid)
        f1_src = tech.f1.value(grid)
        errs = [
            max(
                float(np.max(np.abs(pair.f0n.value(grid) - f0_src))),
                float(np.max(np.abs(pair.f1n.value(grid) - f1_src))),
            )
            for pair in pairs
        ]
        for coarse, fine in zip(errs[:-1], errs[1:]):
            assert fine <= coarse + 1e-12

    def test_pointwise_convergence_at_interior_point(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        u = 0.2
        errs = [abs(float(pair.f0n.value(u)) - float(tech.f0.value(u))) for pair in pairs]
        assert errs[-1] <= pairs[-1].params.eps
        assert errs[-1] < errs[0] + 1e-12


class TestMonsterReport:
    def test_all_checks_pass(self, tech_and_pairs):
        tech, pairs = tech_and_pairs
        rep = verify_monster(tech, pairs)
        assert rep.overall_pass, rep.render()

    def test_budget_violation_rejected_at_build(self):
        tech = quad_tech()
        good = SmoothingParams.auto(tech, 8)
        # a window far too wide for the accuracy budget cannot build
        bad = SmoothingParams(
            n=8, delta=0.124, gamma=good.gamma, zeta=good.zeta, eps=1e-4
        )
        with pytest.raises(ParamsOutOfRange):
            build_smooth_pair(tech, bad)
