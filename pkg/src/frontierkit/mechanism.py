"""Mechanisms on a time grid and their discounted payoffs.

A mechanism is a flow-utility path ``x0`` (piecewise constant on grid cells,
constant beyond the horizon) together with a post-breakthrough promise path
``X1``. The continuation promise ``X0_t = r * int_t^inf e^{-r(s-t)} x0_s ds``
is computed cell-exactly by a backward recursion, so no quadrature error
enters the payoff core. Breakthrough times follow a distribution built from
atoms, a piecewise-constant density and an analytic exponential tail, all
three integrated exactly or to Gauss-Legendre accuracy per smooth piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import NonFiniteValue, PreconditionViolation
from .frontiers import INF
from .technology import Technology

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, horizon] with discount rate ``r``."""

    horizon: float
    step: float
    r: float

    def __post_init__(self):
        if self.horizon <= 0 or self.step <= 0 or self.r <= 0:
            raise ValueError("horizon, step and r must be positive")
        count = self.horizon / self.step
        if abs(count - round(count)) > 1e-9:
            raise ValueError("horizon must be an integer number of steps")

    @property
    def n_cells(self) -> int:
        return int(round(self.horizon / self.step))

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_cells + 1)


# ---------------------------------------------------------------------------
# breakthrough distributions


@dataclass(frozen=True)
class BreakthroughDistribution:
    """CDF on [0, inf) as atoms + piecewise-constant density + exponential tail.

    The survival function is computed by summing the mass *beyond* a time
    (never as 1 - cdf), which keeps it exact near total mass.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density_edges: np.ndarray | None = None
    density_values: np.ndarray | None = None
    tail_rate: float = 1.0
    tail_mass: float = 0.0
    tail_start: float = 0.0

    def __post_init__(self):
        for t, m in self.atoms:
            if t < 0 or m < 0:
                raise ValueError("atoms need nonnegative times and masses")
        if (self.density_edges is None) != (self.density_values is None):
            raise ValueError("density edges and values must come together")
        if self.density_edges is not None:
            e = np.asarray(self.density_edges, dtype=float)
            v = np.asarray(self.density_values, dtype=float)
            if len(e) != len(v) + 1 or np.any(np.diff(e) <= 0) or np.any(v < 0):
                raise ValueError("malformed piecewise-constant density")
            object.__setattr__(self, "density_edges", e)
            object.__setattr__(self, "density_values", v)
            if self.tail_mass > 0 and self.tail_start < e[-1]:
                raise ValueError("tail must start at or after the last density edge")
        if self.tail_mass > 0 and self.tail_rate <= 0:
            raise ValueError("tail rate must be positive")
        if abs(self.total_mass() - 1.0) > 1e-12:
            raise ValueError(f"total mass {self.total_mass()!r} is not 1")

    # -- constructors

    @staticmethod
    def exponential(rate: float) -> "BreakthroughDistribution":
        """Exponential(rate) on [0, inf), represented exactly as a pure tail."""
        return BreakthroughDistribution(tail_rate=rate, tail_mass=1.0, tail_start=0.0)

    @staticmethod
    def point_mass(t: float) -> "BreakthroughDistribution":
        return BreakthroughDistribution(atoms=((float(t), 1.0),))

    @staticmethod
    def uniform(a: float, b: float) -> "BreakthroughDistribution":
        return BreakthroughDistribution(
            density_edges=np.array([a, b]),
            density_values=np.array([1.0 / (b - a)]),
        )

    # -- mass accounting

    def total_mass(self) -> float:
        mass = sum(m for _, m in self.atoms) + self.tail_mass
        if self.density_edges is not None:
            mass += float(np.diff(self.density_edges) @ self.density_values)
        return float(mass)

    def sf(self, t: float) -> float:
        """P(tau > t), summed directly from the remaining pieces."""
        mass = sum(m for s, m in self.atoms if s > t)
        if self.density_edges is not None:
            e, v = self.density_edges, self.density_values
            widths = np.clip(e[1:], t, None) - np.clip(e[:-1], t, None)
            mass += float(widths @ v)
        if self.tail_mass > 0:
            mass += self.tail_mass * math.exp(
                -self.tail_rate * max(0.0, t - self.tail_start)
            )
        return float(mass)

    def cdf(self, t: float) -> float:
        """P(tau <= t)."""
        if t < 0:
            return 0.0
        return 1.0 - self.sf(t)

    def pdf(self, t):
        """Density (piecewise-constant pieces plus the exponential tail)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.density_edges is not None:
            e, v = self.density_edges, self.density_values
            k = np.clip(np.searchsorted(e, t, side="right") - 1, 0, len(v) - 1)
            out = np.where((t >= e[0]) & (t < e[-1]), v[k], out)
        if self.tail_mass > 0:
            g = self.tail_rate
            tail = self.tail_mass * g * np.exp(-g * (t - self.tail_start))
            out = np.where(t >= self.tail_start, out + tail, out)
        return out if out.ndim else float(out)

    @property
    def knots(self) -> tuple[float, ...]:
        """Times where the density or atom structure changes."""
        ks = [t for t, _ in self.atoms]
        if self.density_edges is not None:
            ks.extend(self.density_edges.tolist())
        if self.tail_mass > 0:
            ks.append(self.tail_start)
        return tuple(sorted(set(ks)))

    def finite_cutoff(self, extra: float = 0.0) -> float:
        """Last structural time; beyond it only the analytic tail remains."""
        times = [extra, self.tail_start] + [t for t, _ in self.atoms]
        if self.density_edges is not None:
            times.append(float(self.density_edges[-1]))
        return max(times)


# ---------------------------------------------------------------------------
# mechanisms


def _promise_edges(edges: np.ndarray, x0: np.ndarray, r: float, x0_tail: float):
    """Continuation promises at cell edges by exact backward discounting."""
    n = len(x0)
    X = np.empty(n + 1)
    X[n] = x0_tail  # constant flow forever delivers itself
    decay = np.exp(-r * np.diff(edges))
    for k in range(n - 1, -1, -1):
        X[k] = (1.0 - decay[k]) * x0[k] + decay[k] * X[k + 1]
    return X


@dataclass
class Mechanism:
    """Flow path per cell plus a post-breakthrough promise convention.

    ``u1`` set means the no-delay form ``X1_t = max(X0_t, u1)``; otherwise
    ``X1_cells``/``X1_tail`` give an explicit per-cell promise, and if both
    are absent ``X1 = X0`` (the minimal promise allowed by the pointwise
    incentive surrogate ``X1 >= X0``).
    """

    edges: np.ndarray
    x0: np.ndarray
    r: float
    x0_tail: float = 0.0
    u1: float | None = None
    X1_cells: np.ndarray | None = field(default=None)
    X1_tail: float | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.x0 = np.asarray(self.x0, dtype=float)
        if len(self.x0) != len(self.edges) - 1:
            raise ValueError("need one flow value per grid cell")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if self.X1_cells is not None:
            self.X1_cells = np.asarray(self.X1_cells, dtype=float)
            if len(self.X1_cells) != len(self.x0):
                raise ValueError("need one post-breakthrough promise per cell")

    @classmethod
    def from_grid(cls, grid: TimeGrid, x0, **kw) -> "Mechanism":
        return cls(edges=grid.edges, x0=np.asarray(x0, dtype=float), r=grid.r, **kw)

    @property
    def horizon(self) -> float:
        return float(self.edges[-1])

    @cached_property
    def X0_edges(self) -> np.ndarray:
        return _promise_edges(self.edges, self.x0, self.r, self.x0_tail)

    def X0_at(self, t):
        """Continuation promise at arbitrary times (continuous in t)."""
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.x0) - 1)
        Xe = self.X0_edges
        inner = self.x0[k] + (Xe[k + 1] - self.x0[k]) * np.exp(
            -self.r * (self.edges[k + 1] - t)
        )
        out = np.where(t >= self.horizon, self.x0_tail, inner)
        return out if out.ndim else float(out)

    def X1_at(self, t):
        """Post-breakthrough promise at arbitrary times."""
        t = np.asarray(t, dtype=float)
        if self.u1 is not None:
            out = np.maximum(self.X0_at(t), self.u1)
        elif self.X1_cells is not None:
            k = np.clip(
                np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.x0) - 1
            )
            tail = self.X1_tail if self.X1_tail is not None else self.x0_tail
            out = np.where(t >= self.horizon, tail, self.X1_cells[k])
        else:
            out = self.X0_at(t)
        return out if np.ndim(out) else float(out)

    @property
    def no_delay_form(self) -> bool:
        return self.u1 is not None

    def with_knots(self, knots) -> "Mechanism":
        """The same mechanism on a refined edge set including ``knots``."""
        extra = [k for k in knots if 0.0 < k < self.horizon]
        edges = np.unique(np.concatenate([self.edges, np.asarray(extra, dtype=float)]))
        k = np.searchsorted(self.edges, edges[:-1], side="right") - 1
        x0 = self.x0[np.clip(k, 0, len(self.x0) - 1)]
        X1_cells = None
        if self.X1_cells is not None:
            X1_cells = self.X1_cells[np.clip(k, 0, len(self.x0) - 1)]
        return replace(self, edges=edges, x0=x0, X1_cells=X1_cells)


def promised_utility(x0, grid: TimeGrid, x0_tail: float = 0.0) -> np.ndarray:
    """Continuation-promise path at the grid edges for a per-cell flow path."""
    return _promise_edges(grid.edges, np.asarray(x0, dtype=float), grid.r, x0_tail)


def make_deadline_mechanism(T: float, tech: Technology, grid: TimeGrid) -> Mechanism:
    """Flow ``u0`` until the deadline, zero after; no-delay promise form."""
    return _deadline_from_edges(T, tech, grid.edges, grid.r)


def _deadline_from_edges(T: float, tech: Technology, edges, r: float) -> Mechanism:
    edges = np.asarray(edges, dtype=float)
    if T < 0:
        raise ValueError("deadline must be nonnegative")
    if math.isinf(T):
        x0 = np.full(len(edges) - 1, tech.u0)
        return Mechanism(edges=edges, x0=x0, r=r, x0_tail=tech.u0, u1=tech.u1)
    if T > 0.0:
        edges = np.unique(np.append(edges, T))
    x0 = np.where(edges[:-1] < T - 1e-15, tech.u0, 0.0)
    return Mechanism(edges=edges, x0=x0, r=r, x0_tail=0.0, u1=tech.u1)


def deadline_for_promise(v: float, tech: Technology, grid: TimeGrid) -> float:
    """The deadline whose mechanism delivers initial promise ``v``.

    Inverts ``v = u0 * (1 - e^{-rT})``; ``v = u0`` maps to an infinite
    deadline (represented as the explicit extended value).
    """
    if not 0.0 <= v <= tech.u0 + 1e-12:
        raise ValueError(f"promise {v:g} outside [0, u0={tech.u0:g}]")
    frac = min(v / tech.u0, 1.0)
    if frac >= 1.0 - 1e-15:
        return INF
    return -math.log1p(-frac) / grid.r


def no_delay_improve(m: Mechanism, tech: Technology) -> Mechanism:
    """Replace the post-breakthrough promise with ``max(X0, u1)``."""
    return replace(m, u1=tech.u1, X1_cells=None, X1_tail=None)


def normalize(m: Mechanism, tech: Technology) -> Mechanism:
    """Clip the flow to [0, u0] and apply the no-delay form (explicit op)."""
    m = replace(
        m,
        x0=np.clip(m.x0, 0.0, tech.u0),
        x0_tail=float(np.clip(m.x0_tail, 0.0, tech.u0)),
    )
    return no_delay_improve(m, tech)


# ---------------------------------------------------------------------------
# payoff evaluation


def _crossing_knots(m: Mechanism, level: float) -> list[float]:
    """Times where X0 crosses ``level`` inside a cell (one per monotone cell)."""
    if level is None:
        return []
    out = []
    Xe, x0, edges, r = m.X0_edges, m.x0, m.edges, m.r
    for k in range(len(x0)):
        a, b = Xe[k], Xe[k + 1]
        if (a - level) * (b - level) < 0 and b != x0[k]:
            ratio = (level - x0[k]) / (b - x0[k])
            if ratio > 0:
                t = edges[k + 1] + math.log(ratio) / r
                if edges[k] < t < edges[k + 1]:
                    out.append(t)
    return out


def _gl_integral(fn, edges: np.ndarray) -> float:
    """Gauss-Legendre integral of ``fn`` over each cell of ``edges``, summed."""
    if len(edges) < 2:
        return 0.0
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    ts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fn(ts.ravel()).reshape(ts.shape)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def _expect_with_tail(
    G: BreakthroughDistribution,
    point_fn,
    knots,
    tail_coeffs,
):
    """``E_G[h(tau)]`` for ``h`` smooth between knots and affine-in-``e^{-r
    tau}`` beyond the last structural time.

    ``point_fn`` evaluates h at arrays of times; ``tail_coeffs`` is a
    callable ``T -> (a, b, r)`` describing ``h(t) = a + b e^{-r t}`` for
    ``t >= T``, integrated in closed form against the exponential tail.
    """
    T_max = G.finite_cutoff(extra=max(knots) if knots else 0.0)
    edges = np.unique(
        np.concatenate([[0.0, T_max], np.asarray(list(knots) + list(G.knots))])
    )
    edges = edges[(edges >= 0.0) & (edges <= T_max)]
    total = _gl_integral(lambda t: G.pdf(t) * point_fn(t), edges)
    for t, mass in G.atoms:
        total += mass * float(point_fn(np.array([t]))[0])
    if G.tail_mass > 0:
        rem = G.tail_mass * math.exp(-G.tail_rate * (T_max - G.tail_start))
        a, b, r = tail_coeffs(T_max)
        g = G.tail_rate
        total += rem * (a + b * math.exp(-r * T_max) * g / (g + r))
    return total


def payoff(m: Mechanism, tech: Technology, G: BreakthroughDistribution) -> float:
    """Expected discounted principal payoff.

    ``E_G[ r int_0^tau e^{-rt} F0(x0_t) dt + e^{-r tau} F1(X1_tau) ]`` with
    atoms and the exponential tail integrated in closed form and the density
    pieces by per-cell Gauss-Legendre (the integrand is smooth between the
    merged knots).
    """
    r = m.r
    F0x = np.asarray(tech.f0.value(m.x0), dtype=float)
    F0tail = float(tech.f0.value(m.x0_tail))
    if not (np.all(np.isfinite(F0x)) and np.isfinite(F0tail)):
        raise NonFiniteValue("F0 is -inf somewhere on the flow path's range")

    exp_edges = np.exp(-r * m.edges)
    A_edges = np.concatenate([[0.0], np.cumsum(F0x * (exp_edges[:-1] - exp_edges[1:]))])

    def A_at(t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(m.edges, t, side="right") - 1, 0, len(m.x0) - 1)
        inner = A_edges[k] + F0x[k] * (exp_edges[k] - np.exp(-r * t))
        beyond = A_edges[-1] + F0tail * (exp_edges[-1] - np.exp(-r * t))
        return np.where(t >= m.horizon, beyond, inner)

    def point_fn(t):
        vals = A_at(t) + np.exp(-r * t) * tech.f1.value(m.X1_at(t))
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("F1 is -inf somewhere on the promise path's range")
        return vals

    knots = list(m.edges) + _crossing_knots(m, m.u1)

    def tail_coeffs(T):
        # beyond T: A(t) = A(T) + F0tail (e^{-rT} - e^{-rt}) and X1 constant,
        # so h(t) = [A(T) + F0tail e^{-rT}] + [F1(X1c) - F0tail] e^{-rt}
        X1c = float(m.X1_at(max(T, m.horizon) + 1.0))
        a = float(A_at(np.array([T]))[0]) + F0tail * math.exp(-r * T)
        b = float(tech.f1.value(X1c)) - F0tail
        return a, b, r

    return _expect_with_tail(G, point_fn, knots, tail_coeffs)


def _require_affine_f0(tech: Technology) -> tuple[float, float]:
    """Return (intercept, slope) of F0 on [0, u0] or raise."""
    us = np.linspace(0.0, tech.u0, 9)
    vals = np.asarray(tech.f0.value(us), dtype=float)
    slope = (vals[-1] - vals[0]) / (us[-1] - us[0])
    fit = vals[0] + slope * (us - us[0])
    if np.max(np.abs(vals - fit)) > 1e-9:
        raise PreconditionViolation("F0 is not affine on [0, u0]")
    return float(vals[0] - slope * us[0]), float(slope)


def payoff_affine_rewrite(
    m: Mechanism, tech: Technology, G: BreakthroughDistribution
) -> float:
    """Payoff via ``E_G[F0(X0_0) + e^{-r tau} phi(X0_tau)]``.

    Valid when F0 is affine on [0, u0], the mechanism is in no-delay form and
    G has no mass at 0; here ``phi(u) = F1(max(u, u1)) - F0(u)``.
    """
    _require_affine_f0(tech)
    if not m.no_delay_form:
        raise PreconditionViolation("mechanism must be in no-delay form")
    if any(t == 0.0 and mass > 0.0 for t, mass in G.atoms):
        raise PreconditionViolation("G must have no mass at time 0")
    r = m.r

    def phi(u):
        return tech.f1.value(np.maximum(u, m.u1)) - tech.f0.value(u)

    def point_fn(t):
        return np.exp(-r * t) * phi(m.X0_at(t))

    knots = list(m.edges) + _crossing_knots(m, m.u1)

    def tail_coeffs(T):
        X0c = m.x0_tail if T >= m.horizon else float(m.X0_at(T))
        return 0.0, float(phi(np.asarray(X0c))), r

    head = float(tech.f0.value(m.X0_edges[0]))
    return head + _expect_with_tail(G, point_fn, knots, tail_coeffs)


def pi_G(x0_mech: Mechanism, tech: Technology, G: BreakthroughDistribution) -> float:
    """Payoff of a flow path with the promise pinned to its own continuation.

    This is the objective whose concavity and Gateaux derivative the
    variational checks exercise: ``X = X0`` (no separate promise choice).
    """
    m = replace(x0_mech, u1=None, X1_cells=None, X1_tail=None)
    return payoff(m, tech, G)


# ---------------------------------------------------------------------------
# dominance


def _mass_on_region(G: BreakthroughDistribution, in_region, probes) -> float:
    """Approximate G-mass of ``{t : in_region(t)}`` at the probe resolution."""
    mass = sum(m for t, m in G.atoms if in_region(np.array([t]))[0])
    flags = in_region(probes)
    for k in range(len(probes) - 1):
        if flags[k] and flags[k + 1]:
            mass += G.cdf(probes[k + 1]) - G.cdf(probes[k])
    if G.tail_mass > 0 and flags[-1]:
        mass += G.sf(float(probes[-1]))
    return float(mass)


def dominance_check(m: Mechanism, tech: Technology, G_family) -> "VerificationReport":
    """Compare a normalized mechanism against its deadline twin.

    The twin delivers the same initial promise; with affine F0 its
    continuation path is pointwise below the original's and its payoff is
    weakly higher for every G, strictly when G puts mass where the paths
    differ.
    """
    from .report import VerificationReport

    rep = VerificationReport("no-delay")
    _require_affine_f0(tech)
    if not m.no_delay_form or np.any(m.x0 > tech.u0 + 1e-12):
        raise PreconditionViolation("mechanism must be normalized first")

    v = float(m.X0_edges[0])
    T = -math.log1p(-min(v / tech.u0, 1.0 - 1e-15)) / m.r if v < tech.u0 else INF
    twin = _deadline_from_edges(T, tech, m.edges, m.r)

    rep.add(
        "same-initial-promise",
        abs(float(twin.X0_edges[0]) - v) < 1e-9,
        worst_violation=abs(float(twin.X0_edges[0]) - v),
    )

    probes = np.unique(np.concatenate([m.edges, twin.edges, [m.horizon + 1.0]]))
    diff = m.X0_at(probes) - twin.X0_at(probes)
    rep.add(
        "twin-pointwise-below",
        bool(np.min(diff) > -1e-9),
        worst_violation=max(0.0, -float(np.min(diff))),
    )

    changed = lambda t: (m.X0_at(t) - twin.X0_at(t)) > 1e-9
    for i, G in enumerate(G_family):
        gain = payoff(twin, tech, G) - payoff(m, tech, G)
        mass = _mass_on_region(G, changed, probes)
        if mass > 1e-9:
            ok = gain > 1e-12
            note = "strict (mass on changed set)"
        else:
            ok = gain > -1e-9
            note = "weak (no mass on changed set)"
        rep.add(f"payoff-dominance-{i}", ok, worst_violation=max(0.0, -gain), note=note)
    return rep
