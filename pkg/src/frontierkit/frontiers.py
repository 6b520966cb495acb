"""Concave frontiers: evaluable value, one-sided derivatives, domain, peak.

A frontier maps promised utility ``u`` to the best attainable payoff. It is
concave, finite on the interior of its effective domain and ``-inf`` outside
the domain's closure. One-sided derivatives may be ``+inf``/``-inf`` at the
domain endpoints; any ``eta`` in ``[right_deriv(u), left_deriv(u)]`` is a
supergradient at ``u``.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

INF = math.inf


class Frontier:
    """Base class; subclasses fill in `value` and the one-sided derivatives.

    ``value`` accepts scalars or numpy arrays. Derivative accessors are
    scalar-only.
    """

    #: closure of the effective domain, as a pair (lo, hi); hi may be inf
    domain: tuple[float, float] = (0.0, INF)

    #: derivative breakpoints, if any (used for exact windowed integrals)
    knots: tuple[float, ...] = ()

    def value(self, u):
        raise NotImplementedError

    def _deriv_interior(self, u: float, side: str) -> float:
        raise NotImplementedError

    def _check_domain(self, u: float) -> None:
        lo, hi = self.domain
        if u < lo or u > hi:
            raise DomainError(f"u={u:g} outside domain closure [{lo:g}, {hi:g}]")

    def left_deriv(self, u: float) -> float:
        self._check_domain(u)
        if u <= self.domain[0]:
            return INF
        return self._deriv_interior(u, "left")

    def right_deriv(self, u: float) -> float:
        self._check_domain(u)
        if u >= self.domain[1]:
            return -INF
        return self._deriv_interior(u, "right")

    @property
    def peak(self) -> float:
        """Argmax of the frontier over its domain (cached)."""
        cached = getattr(self, "_peak", None)
        if cached is None:
            cached = self._compute_peak()
            self._peak = cached
        return cached

    def _compute_peak(self) -> float:
        # the right derivative is nonincreasing; the peak is where it turns
        # nonpositive (machine-precision bisection, kink-safe)
        lo, hi = self.domain
        if math.isinf(hi):
            hi = max(1.0, lo + 1.0)
            while self.right_deriv(hi) > 0.0:
                hi = lo + 2.0 * (hi - lo)
                if hi > 1e12:
                    raise DomainError("no interior peak found below u=1e12")
        if self.right_deriv(lo) <= 0.0:
            return lo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.right_deriv(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def shifted(self, dy: float) -> "Frontier":
        """The same frontier moved up by ``dy`` utils."""
        return ShiftedFrontier(self, dy)


class ParametricFrontier(Frontier):
    """Smooth concave frontier given by closed-form value and derivative."""

    def __init__(
        self,
        value_fn: Callable,
        deriv_fn: Callable[[float], float],
        domain: tuple[float, float] = (0.0, INF),
        peak: float | None = None,
        knots: Sequence[float] = (),
    ):
        self._value_fn = value_fn
        self._deriv_fn = deriv_fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.knots = tuple(knots)
        if peak is not None:
            self._peak = float(peak)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.domain
        inside = (u >= lo) & (u <= hi)
        out = np.where(inside, self._value_fn(np.clip(u, lo, min(hi, 1e300))), -INF)
        return float(out) if out.ndim == 0 else out

    def _deriv_interior(self, u, side):
        return float(self._deriv_fn(u))


class QuadraticFrontier(ParametricFrontier):
    """``a + b*u + c*u**2`` with ``c < 0``, on a given domain."""

    def __init__(self, a: float, b: float, c: float, domain=(0.0, INF)):
        if c >= 0:
            raise ValueError("quadratic frontier needs negative curvature")
        vertex = -b / (2.0 * c)
        super().__init__(
            lambda u: a + b * u + c * u * u,
            lambda u: b + 2.0 * c * u,
            domain=domain,
            peak=min(max(vertex, domain[0]), domain[1]),
        )
        self.coeffs = (a, b, c)


class AffineFrontier(ParametricFrontier):
    """``a + b*u`` on a bounded domain; its peak sits at a domain endpoint."""

    def __init__(self, a: float, b: float, domain: tuple[float, float]):
        if math.isinf(domain[1]):
            raise ValueError("affine frontier needs a bounded domain")
        peak = domain[1] if b >= 0 else domain[0]
        super().__init__(lambda u: a + b * u, lambda u: b, domain=domain, peak=peak)
        self.coeffs = (a, b)


class PiecewiseLinearFrontier(Frontier):
    """Concave piecewise-linear frontier through ``(xs, ys)`` breakpoints."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        slopes = np.diff(ys) / np.diff(xs)
        if np.any(np.diff(slopes) > 1e-12):
            raise ValueError("breakpoint values are not concave")
        self.xs, self.ys, self.slopes = xs, ys, slopes
        self.domain = (float(xs[0]), float(xs[-1]))
        self.knots = tuple(xs[1:-1])

    def value(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= self.xs[0]) & (u <= self.xs[-1])
        out = np.where(inside, np.interp(u, self.xs, self.ys), -INF)
        return float(out) if out.ndim == 0 else out

    def _deriv_interior(self, u, side):
        # segment index such that u lies in [xs[i], xs[i+1]]
        i = int(np.searchsorted(self.xs, u, side="left" if side == "left" else "right"))
        i = min(max(i - 1, 0), len(self.slopes) - 1)
        return float(self.slopes[i])

    def _compute_peak(self) -> float:
        i = int(np.argmax(self.ys))
        return float(self.xs[i])


class CallableFrontier(Frontier):
    """Black-box concave function; one-sided difference quotients, step 1e-6."""

    FD_STEP = 1e-6

    def __init__(self, fn: Callable, domain=(0.0, INF), peak: float | None = None):
        self._fn = fn
        self.domain = (float(domain[0]), float(domain[1]))
        if peak is not None:
            self._peak = float(peak)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.domain
        inside = (u >= lo) & (u <= hi)
        out = np.where(inside, self._fn(np.clip(u, lo, min(hi, 1e300))), -INF)
        return float(out) if out.ndim == 0 else out

    def _deriv_interior(self, u, side):
        h = self.FD_STEP
        if side == "left":
            h = min(h, u - self.domain[0])
            return (self.value(u) - self.value(u - h)) / h
        h = min(h, self.domain[1] - u) if not math.isinf(self.domain[1]) else h
        return (self.value(u + h) - self.value(u)) / h


class ShiftedFrontier(Frontier):
    """A frontier plus a constant."""

    def __init__(self, base: Frontier, dy: float):
        self.base, self.dy = base, float(dy)
        self.domain = base.domain
        self.knots = base.knots

    def value(self, u):
        v = self.base.value(u)
        return v + self.dy if np.ndim(v) == 0 else v + self.dy

    def _deriv_interior(self, u, side):
        return self.base._deriv_interior(u, side)

    def _compute_peak(self):
        return self.base.peak


class CutoffFrontier(Frontier):
    """A frontier truncated to ``-inf`` above a cutoff (shrinks the domain)."""

    def __init__(self, base: Frontier, cutoff: float):
        if cutoff <= base.domain[0]:
            raise ValueError("cutoff must exceed the domain's lower end")
        self.base, self.cutoff = base, float(cutoff)
        self.domain = (base.domain[0], min(base.domain[1], self.cutoff))
        self.knots = tuple(k for k in base.knots if k < self.cutoff)

    def value(self, u):
        u_arr = np.asarray(u, dtype=float)
        inside = (u_arr >= self.domain[0]) & (u_arr <= self.domain[1])
        out = np.where(inside, self.base.value(np.clip(u_arr, *self.domain)), -INF)
        return float(out) if out.ndim == 0 else out

    def _deriv_interior(self, u, side):
        return self.base._deriv_interior(u, side)

    def _compute_peak(self):
        return min(self.base.peak, self.cutoff)


def one_sided_deriv(f: Frontier, u: float, side: str) -> float:
    """One-sided derivative of ``f`` at ``u``; ``side`` is 'left' or 'right'."""
    if side == "left":
        return f.left_deriv(u)
    if side == "right":
        return f.right_deriv(u)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def directional_deriv(f: Frontier, a: float, b: float) -> float:
    """Derivative of ``f`` at ``a`` in the direction of ``b``.

    Right derivative if ``a < b``, left if ``a > b``; the ``a == b`` case is
    inert (it always multiplies a zero difference) and returns the right
    derivative by convention.
    """
    if a > b:
        return f.left_deriv(a)
    return f.right_deriv(a)


def midpoint_concavity_slack(f: Frontier, us: Sequence[float]) -> float:
    """Worst midpoint-concavity slack over all pairs of sample points.

    Returns ``min over pairs of value(mid) - (value(u)+value(v))/2``; a
    concave function yields a nonnegative result up to rounding.
    """
    us = np.asarray(list(us), dtype=float)
    if us.size == 0:
        return INF
    vals = np.atleast_1d(np.asarray(f.value(us), dtype=float))
    finite = np.isfinite(vals)
    us, vals = us[finite], vals[finite]
    if us.size < 2:
        return INF
    iu, iv = np.triu_indices(us.size, k=1)
    mids = 0.5 * (us[iu] + us[iv])
    mid_vals = np.atleast_1d(np.asarray(f.value(mids), dtype=float))
    return float(np.min(mid_vals - 0.5 * (vals[iu] + vals[iv])))
