"""Smooth strictly concave approximants of a kinked technology.

For a window width ``delta`` and tilt ``gamma``, the smoothed derivative is
the windowed average of the source's right derivative minus a linear tilt,

    f_n(u) = (F(u + delta) - F(u)) / delta - gamma * u,

(the window average of ``F^+`` equals the value difference, so no derivative
quadrature is needed). Integrating ``f_n`` from an anchor yields the smoothed
frontier on the core interval ``I_n = [1/n, u0 - 2/n]``; beyond it the pair
is extended by closed-form strictly concave pieces: concave quadratics on
the left (making the gap strictly increasing near 0, so its argmax is
positive) and derivative-clamped exponential-approach pieces on the right
(locating the pre-breakthrough peak at ``u0 - 1/(2n)`` and keeping the
post-breakthrough frontier above forever).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParamsOutOfRange
from .frontiers import INF, Frontier, midpoint_concavity_slack
from .report import VerificationReport
from .technology import Technology

_GL8_NODES, _GL8_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SmoothingParams:
    """Window, tilt, vertical gap and accuracy budgets for one smoothing level.

    All four scale parameters live below ``1/n`` scales, with ``zeta > 2 *
    eps`` so the smoothed pair stays strictly ordered.
    """

    n: int
    delta: float
    gamma: float
    zeta: float
    eps: float

    def __post_init__(self):
        if self.n < 2:
            raise ParamsOutOfRange("n must be at least 2")
        if not 0.0 < self.delta < 1.0 / self.n:
            raise ParamsOutOfRange("delta must lie in (0, 1/n)")
        if not 0.0 < self.eps < 1.0 / self.n:
            raise ParamsOutOfRange("eps must lie in (0, 1/n)")
        if not 0.0 < self.zeta < 2.0 / self.n:
            raise ParamsOutOfRange("zeta must lie in (0, 2/n)")
        if self.zeta <= 2.0 * self.eps:
            raise ParamsOutOfRange("need zeta > 2*eps for strict ordering")

    def validate_for(self, tech: Technology) -> None:
        if 1.0 / self.n >= (tech.u0 - tech.u1) / 3.0:
            raise ParamsOutOfRange(
                f"n={self.n} too small: need 1/n < (u0 - u1)/3"
            )
        if not 0.0 < self.gamma < 1.0 / (tech.u0 * self.n):
            raise ParamsOutOfRange("gamma must lie in (0, 1/(u0 n))")

    @classmethod
    def auto(cls, tech: Technology, n: int) -> "SmoothingParams":
        """Pick (delta, gamma) small enough that the core error is below eps."""
        eps = 0.4 / n
        zeta = 0.9 / n
        delta = 0.5 / n
        gamma = 0.4 / (tech.u0 * n)
        for _ in range(40):
            params = cls(n=n, delta=delta, gamma=gamma, zeta=zeta, eps=eps)
            params.validate_for(tech)
            if _core_error(tech, params) <= 0.95 * eps:
                return params
            delta *= 0.5
            gamma *= 0.5
        raise ParamsOutOfRange("could not reach the accuracy budget eps")


def _window_integral(f: Frontier, u: float, delta: float) -> float:
    """``int_u^{u+delta} f`` exactly per linear/smooth piece (knot-split GL)."""
    cuts = [u] + [k for k in f.knots if u < k < u + delta] + [u + delta]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        total += half * float(
            np.dot(_GL8_WEIGHTS, f.value(mid + half * _GL8_NODES))
        )
    return total


def averaged_right_derivative(f: Frontier, u: float, params: SmoothingParams) -> float:
    """Windowed average of the right derivative minus the linear tilt.

    Computed as a value difference, which equals the window average of
    ``F^+`` exactly for concave ``f``.
    """
    lo, hi = f.domain
    if u < lo or u + params.delta > hi:
        raise DomainError(f"window [{u:g}, {u + params.delta:g}] leaves the domain")
    return (
        float(f.value(u + params.delta)) - float(f.value(u))
    ) / params.delta - params.gamma * u


class _Core:
    """Windowed-average smoother of one source frontier on ``I_n``."""

    def __init__(self, f: Frontier, params: SmoothingParams, anchor: float, shift: float):
        self.f, self.p = f, params
        self.anchor = anchor
        self.shift = shift
        self._H_anchor = _window_integral(f, anchor, params.delta)
        self._F_anchor = float(f.value(anchor))

    def deriv(self, u: float) -> float:
        p = self.p
        return (
            float(self.f.value(u + p.delta)) - float(self.f.value(u))
        ) / p.delta - p.gamma * u

    def value(self, u: float) -> float:
        p = self.p
        h = _window_integral(self.f, u, p.delta)
        return (
            self._F_anchor
            + (h - self._H_anchor) / p.delta
            - p.gamma * 0.5 * (u * u - self.anchor * self.anchor)
            + self.shift
        )


def _core_error(tech: Technology, params: SmoothingParams) -> float:
    """Max deviation of the (shift-corrected) core pair from the source."""
    n = params.n
    a = tech.u_star + 1.0 / n
    us = np.linspace(1.0 / n, tech.u0 - 2.0 / n, 33)
    core0 = _Core(tech.f0, params, a, 0.0)
    core1 = _Core(tech.f1, params, a, 0.0)
    err = 0.0
    for u in us:
        err = max(err, abs(core0.value(float(u)) - float(tech.f0.value(u))))
        err = max(err, abs(core1.value(float(u)) - float(tech.f1.value(u))))
    return err


@dataclass
class _Piece:
    lo: float
    hi: float
    val: object
    der: object


class _PiecewiseFrontier(Frontier):
    """Concave C1 frontier assembled from closed-form pieces."""

    def __init__(self, pieces: list[_Piece], peak: float | None = None):
        self.pieces = pieces
        self.domain = (pieces[0].lo, pieces[-1].hi)
        self.knots = tuple(p.lo for p in pieces[1:])
        if peak is not None:
            self._peak = float(peak)

    def _piece(self, u: float) -> _Piece:
        for p in self.pieces:
            if u <= p.hi:
                return p
        return self.pieces[-1]

    def value(self, u):
        scalar = np.ndim(u) == 0
        us = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(us)
        for i, x in enumerate(us):
            if x < self.domain[0] or x > self.domain[1]:
                out[i] = -INF
            else:
                out[i] = self._piece(float(x)).val(float(x))
        return float(out[0]) if scalar else out

    def _deriv_interior(self, u, side):
        # continuously differentiable by construction: sides agree
        if side == "left":
            for p in reversed(self.pieces):
                if u > p.lo:
                    return float(p.der(float(u)))
        return float(self._piece(float(u)).der(float(u)))


@dataclass
class SmoothedPair:
    """One smoothing level: the frontier pair, its peaks and parameters."""

    f0n: Frontier
    f1n: Frontier
    params: SmoothingParams
    u0_n: float
    u1_n: float
    u_star_n: float
    source: Technology = field(repr=False)

    def gap(self, u):
        return self.f1n.value(u) - self.f0n.value(u)


def _gap_argmax(pair_f0: Frontier, pair_f1: Frontier, hi: float) -> float:
    us = np.linspace(0.0, hi, 601)
    gaps = pair_f1.value(us) - pair_f0.value(us)
    i = int(np.argmax(gaps))
    lo = us[max(0, i - 2)]
    up = us[min(len(us) - 1, i + 2)]
    from .roots import golden_section_max

    g = lambda u: float(pair_f1.value(u)) - float(pair_f0.value(u))
    return golden_section_max(g, float(lo), float(up), tol=1e-12)


def build_smooth_pair(tech: Technology, params: SmoothingParams) -> SmoothedPair:
    """Construct one smoothing level of the pair with all extensions attached."""
    params.validate_for(tech)
    n, delta, gamma, zeta = params.n, params.delta, params.gamma, params.zeta
    if _core_error(tech, params) > params.eps:
        raise ParamsOutOfRange("core deviation exceeds the eps budget")

    u0 = tech.u0
    a = tech.u_star + 1.0 / n
    b, B = 1.0 / n, u0 - 2.0 / n
    core0 = _Core(tech.f0, params, a, 0.0)
    core1 = _Core(tech.f1, params, a, zeta)

    d_b0, d_b1 = core0.deriv(b), core1.deriv(b)
    V_b0, V_b1 = core0.value(b), core1.value(b)
    d_B0, d_B1 = core0.deriv(B), core1.deriv(B)
    V_B0, V_B1 = core0.value(B), core1.value(B)
    if d_B0 <= 0.0:
        raise ParamsOutOfRange("pre-breakthrough frontier must still rise at u0-2/n")
    if d_B1 - 1.5 / n >= 0.0:
        raise ParamsOutOfRange("post-breakthrough frontier must fall at u0-2/n")

    # left extension: concave quadratics whose curvature difference makes the
    # gap strictly increasing near 0
    c0 = 0.5 * n
    g_b = d_b1 - d_b0
    c1 = c0 + n * (max(0.0, -g_b) + 1.0 / n)

    def quad_piece(V, d, c):
        return _Piece(
            0.0, b,
            lambda u, V=V, d=d, c=c: V + d * (u - b) - 0.5 * c * (u - b) ** 2,
            lambda u, d=d, c=c: d + c * (b - u),
        )

    core_piece0 = _Piece(b, B, core0.value, core0.deriv)
    core_piece1 = _Piece(b, B, core1.value, core1.deriv)

    # right extension of F1: derivative glides down to its clamp d_B1 - 1/n
    m1 = d_B1 - 1.0 / n
    right1 = _Piece(
        B, INF,
        lambda u: V_B1 + m1 * (u - B) + (d_B1 - m1) * (1 - math.exp(-n * (u - B))) / n,
        lambda u: m1 + (d_B1 - m1) * math.exp(-n * (u - B)),
    )

    # right extension of F0 in three pieces: rise to a peak at p = u0 - 1/(2n),
    # fall fast to just below F1's slope clamp, then glide to the asymptote
    p = u0 - 0.5 / n
    m0_mid = d_B1 - 1.5 / n
    m0_lim = d_B1 - 2.0 / n
    K = n * max(1.0, -m0_mid)
    u_m = p + (-m0_mid) / K
    V_p = V_B0 + 0.5 * d_B0 * (p - B)  # integral of the linear descent to 0
    V_um = V_p - 0.5 * K * (u_m - p) ** 2

    rise = _Piece(
        B, p,
        lambda u: V_B0 + d_B0 * ((u - B) - 0.5 * (u - B) ** 2 / (p - B)),
        lambda u: d_B0 * (1.0 - (u - B) / (p - B)),
    )
    fall = _Piece(
        p, u_m,
        lambda u: V_p - 0.5 * K * (u - p) ** 2,
        lambda u: -K * (u - p),
    )
    glide = _Piece(
        u_m, INF,
        lambda u: V_um
        + m0_lim * (u - u_m)
        + (m0_mid - m0_lim) * (1 - math.exp(-n * (u - u_m))) / n,
        lambda u: m0_lim + (m0_mid - m0_lim) * math.exp(-n * (u - u_m)),
    )

    f0n = _PiecewiseFrontier([quad_piece(V_b0, d_b0, c0), core_piece0, rise, fall, glide], peak=p)
    f1n = _PiecewiseFrontier([quad_piece(V_b1, d_b1, c1), core_piece1, right1])

    # ordering guard: the extensions keep F1_n above F0_n by construction at
    # the chosen scales, but the margin is instance-dependent, so certify it
    probes = np.linspace(0.0, u0 + 2.0, 257)
    if np.min(f1n.value(probes) - f0n.value(probes)) <= 0.0:
        raise ParamsOutOfRange("extensions failed to keep the pair ordered")

    u1_n = f1n.peak
    u_star_n = _gap_argmax(f0n, f1n, p)

    # strict-local-max fix: lower F1_n slightly below u_star_n if the gap's
    # argmax is not strict there
    gaps = f1n.value(probes) - f0n.value(probes)
    top = float(f1n.value(u_star_n) - f0n.value(u_star_n))
    rivals = gaps[np.abs(probes - u_star_n) > 0.5 / n]
    if rivals.size and np.max(rivals) >= top - 1e-12:
        f1n = _StrictFixFrontier(f1n, u_star_n, params.zeta / 8.0)
        u_star_n = _gap_argmax(f0n, f1n, p)

    return SmoothedPair(
        f0n=f0n, f1n=f1n, params=params,
        u0_n=f0n.peak, u1_n=u1_n, u_star_n=u_star_n, source=tech,
    )


class _StrictFixFrontier(Frontier):
    """Base frontier minus ``eps*(u - u_star)^2`` below ``u_star`` (C1, concave)."""

    def __init__(self, base: Frontier, u_star: float, eps: float):
        self.base, self.u_star, self.eps = base, u_star, eps
        self.domain = base.domain
        self.knots = tuple(sorted(set(base.knots) | {u_star}))

    def _bump(self, u):
        return self.eps * np.square(np.minimum(u - self.u_star, 0.0))

    def value(self, u):
        return self.base.value(u) - self._bump(np.asarray(u, dtype=float))

    def _deriv_interior(self, u, side):
        d = self.base._deriv_interior(u, side)
        return d - 2.0 * self.eps * min(u - self.u_star, 0.0)

    def _compute_peak(self):
        return self.base.peak


def build_sequence(tech: Technology, ns) -> list[SmoothedPair]:
    return [build_smooth_pair(tech, SmoothingParams.auto(tech, n)) for n in ns]


def verify_monster(tech: Technology, sequence: list[SmoothedPair]) -> VerificationReport:
    """Certify the approximation properties of a built smoothing sequence."""
    rep = VerificationReport("smoothing")
    u0, u1, u_star = tech.u0, tech.u1, tech.u_star

    for pair in sequence:
        n = pair.params.n
        grid = np.linspace(0.0, u0, 33)

        slack0 = midpoint_concavity_slack(pair.f0n, grid)
        slack1 = midpoint_concavity_slack(pair.f1n, grid)
        interior = np.linspace(0.05 / n, u0 - 1e-6, 41)
        c1_ok = all(
            abs(f.left_deriv(float(u)) - f.right_deriv(float(u))) < 1e-9
            for f in (pair.f0n, pair.f1n)
            for u in interior
        )
        ordered = bool(np.min(pair.f1n.value(grid) - pair.f0n.value(grid)) > 0)
        rep.add(
            f"model-assumptions-n{n}",
            slack0 > 0 and slack1 > 0 and c1_ok and ordered and pair.u1_n < pair.u0_n,
        )

        peaks_ok = (
            u0 - 1.0 / n - 1e-9 <= pair.u0_n <= u0 + 1e-9
            and abs(pair.u1_n - u1) <= 1.0 / n + 1e-9
            and abs(pair.u_star_n - u_star) <= 1.0 / n + 1e-9
        )
        rep.add(f"peak-locations-n{n}", peaks_ok)

    # (c) uniform derivative bounds across the sequence
    u_lo_probe = 0.5 * u0
    below = min(
        f.right_deriv(float(u))
        for pair in sequence
        for f in (pair.f0n, pair.f1n)
        for u in np.linspace(1e-9, u_lo_probe, 33)
    )
    above = max(
        f.right_deriv(float(u))
        for pair in sequence
        for f in (pair.f0n, pair.f1n)
        for u in np.linspace(u_lo_probe, u0, 33)
    )
    rep.add(
        "uniform-derivative-bounds",
        math.isfinite(below) and math.isfinite(above),
        note=f"min={below:.3g} on [0, u0/2], max={above:.3g} on [u0/2, u0]",
    )

    # (d) derivative limits along convergent probes sandwich into [F^+, F^-]
    largest = max(sequence, key=lambda pr: pr.params.n)
    ok_d, worst = True, 0.0
    probe_points = [0.4 * u0, 0.6 * u0]
    probe_points.extend(k for k in tech.f0.knots if 0 < k < u0)
    probe_points.extend(k for k in tech.f1.knots if 0 < k < u0)
    for u in probe_points:
        n = largest.params.n
        u_n = u - 0.5 * largest.params.delta  # window straddles u itself
        if u_n <= 0:
            continue
        for f_n, f_src in ((largest.f0n, tech.f0), (largest.f1n, tech.f1)):
            d = f_n.right_deriv(float(u_n))
            lo_lim = f_src.right_deriv(float(u)) - 2.0 / n - 2.0 * largest.params.gamma
            hi_lim = f_src.left_deriv(float(u)) + 2.0 / n
            if not lo_lim <= d <= hi_lim:
                ok_d = False
                worst = max(worst, lo_lim - d, d - hi_lim)
    rep.add("derivative-limits-sandwich", ok_d, worst_violation=worst)
    return rep
