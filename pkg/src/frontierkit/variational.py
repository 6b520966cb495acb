"""First-order calculus for the discounted payoff functional.

Contains the Stieltjes integration-by-parts identity, the Euler-equation
residual, the closed-form Gateaux (directional) derivative with its
finite-difference oracle, the integrability bounds that make the Euler
equation meaningful at an infinite horizon, and a strict-concavity probe.

All integrals are Gauss-Legendre per smooth piece (knots at grid edges,
atoms, density breakpoints), with the improper horizon handled by truncating
where ``e^{-rt}`` is below machine scale and subdividing the far region at
the decay scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidProfile, NonConvergent, PreconditionViolation
from .frontiers import directional_deriv
from .mechanism import BreakthroughDistribution, Mechanism, pi_G
from .technology import Technology

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# quadrature plumbing


def _subdivide(a: float, b: float, max_width: float) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / max_width)))
    return np.linspace(a, b, n + 1)


def _integration_edges(knots, r: float, decay: float, pad: float = 37.0) -> np.ndarray:
    """Edges covering [0, T_struct + pad/r], split at knots and the decay scale."""
    ks = sorted({0.0} | {float(k) for k in knots if math.isfinite(k) and k >= 0.0})
    t_big = ks[-1] + pad / r
    ks.append(t_big)
    width = 2.0 / max(r, decay)
    pieces = [_subdivide(a, b, width) for a, b in zip(ks[:-1], ks[1:]) if b > a]
    return np.unique(np.concatenate(pieces))


def _gl_nodes(edges: np.ndarray):
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    ts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return ts, half


def _integral(fn, edges: np.ndarray) -> float:
    ts, half = _gl_nodes(edges)
    vals = np.asarray(fn(ts.ravel()), dtype=float).reshape(ts.shape)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def _cumulative(fn, edges: np.ndarray):
    """Callable ``t -> int_0^t fn`` exact to GL accuracy per piece."""
    ts, half = _gl_nodes(edges)
    cells = half * (np.asarray(fn(ts.ravel()), dtype=float).reshape(ts.shape) @ _GL_WEIGHTS)
    cum_edges = np.concatenate([[0.0], np.cumsum(cells)])

    def cum(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 2)
        h = 0.5 * (t - edges[k])
        m = 0.5 * (t + edges[k])
        nodes = m[:, None] + h[:, None] * _GL_NODES[None, :]
        part = h * (np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape) @ _GL_WEIGHTS)
        return cum_edges[k] + part

    return cum


def _expect_G(G: BreakthroughDistribution, h, edges: np.ndarray) -> float:
    """``E_G[h(tau)]`` with the density (incl. tail) on ``edges`` plus atoms."""
    total = _integral(lambda t: G.pdf(t) * np.asarray(h(t), dtype=float), edges)
    for t, mass in G.atoms:
        total += mass * float(np.asarray(h(np.array([t])))[0])
    return total


# ---------------------------------------------------------------------------
# measures and integration by parts


@dataclass(frozen=True)
class MeasureOnTime:
    """Finite nonnegative measure on [0, inf): atoms + piecewise density."""

    atoms: tuple[tuple[float, float], ...] = ()
    density_edges: np.ndarray | None = None
    density_values: np.ndarray | None = None

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

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.density_edges is not None:
            e, v = self.density_edges, self.density_values
            k = np.clip(np.searchsorted(e, t, side="right") - 1, 0, len(v) - 1)
            out = np.where((t >= e[0]) & (t < e[-1]), v[k], out)
        return out

    def mass_upto(self, t):
        """``nu([0, t])`` (atoms at exactly t included)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for s, m in self.atoms:
            out = out + np.where(t >= s, m, 0.0)
        if self.density_edges is not None:
            e, v = self.density_edges, self.density_values
            widths = np.clip(t[..., None], e[:-1], e[1:]) - e[:-1]
            out = out + widths @ v
        return out

    @property
    def knots(self) -> tuple[float, ...]:
        ks = [t for t, _ in self.atoms]
        if self.density_edges is not None:
            ks.extend(self.density_edges.tolist())
        return tuple(sorted(set(ks)))


def stieltjes_ibp(nu: MeasureOnTime, L0: float, l, T: float):
    """Both sides of ``int_[0,T] L dnu = L(T) nu([0,T]) - int_0^T nu([0,t]) l(t) dt``.

    ``l`` is the density of the absolutely continuous ``L`` (so ``L(t) = L0 +
    int_0^t l``); the two sides are computed independently and returned as a
    pair for comparison.
    """
    knots = sorted({0.0, T} | set(nu.knots))
    knots = [k for k in knots if 0.0 <= k <= T]
    edges = np.unique(
        np.concatenate([_subdivide(a, b, 0.5) for a, b in zip(knots[:-1], knots[1:])])
        if len(knots) > 1
        else np.array([0.0, T])
    )
    L_cum = _cumulative(l, edges)
    L = lambda t: L0 + L_cum(t)

    lhs = _integral(lambda t: nu.density(t) * L(t), edges)
    lhs += sum(m * float(L(np.array([s]))[0]) for s, m in nu.atoms if s <= T)

    LT = float(L(np.array([T]))[0])
    rhs = LT * float(nu.mass_upto(np.array([T]))[0])
    rhs -= _integral(lambda t: nu.mass_upto(t) * np.asarray(l(t), dtype=float), edges)
    return lhs, rhs


# ---------------------------------------------------------------------------
# supergradient profiles


@dataclass
class SupergradientProfile:
    """Supergradient paths for F0 along x and F1 along X, per grid cell.

    Per-cell constant values (with tail constants beyond the horizon) are the
    canonical representation; optional callables override them for smooth
    exact-derivative profiles.
    """

    edges: np.ndarray
    phi0_cells: np.ndarray
    phi1_cells: np.ndarray
    phi0_tail: float = 0.0
    phi1_tail: float = 0.0
    phi0_fn: object | None = None
    phi1_fn: object | None = None

    def _lookup(self, cells, tail, t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(cells) - 1)
        return np.where(t >= self.edges[-1], tail, cells[k])

    def phi0(self, t):
        if self.phi0_fn is not None:
            return np.asarray(self.phi0_fn(np.asarray(t, dtype=float)), dtype=float)
        return self._lookup(self.phi0_cells, self.phi0_tail, t)

    def phi1(self, t):
        if self.phi1_fn is not None:
            return np.asarray(self.phi1_fn(np.asarray(t, dtype=float)), dtype=float)
        return self._lookup(self.phi1_cells, self.phi1_tail, t)

    @classmethod
    def exact(cls, m: Mechanism, tech: Technology) -> "SupergradientProfile":
        """Exact-derivative profile for smooth frontiers along ``m``.

        ``phi0`` follows the flow path cell-by-cell; ``phi1`` follows the
        continuation promise continuously.
        """
        d0 = np.vectorize(lambda u: tech.f0.right_deriv(float(u)))
        d1 = np.vectorize(lambda u: tech.f1.right_deriv(float(u)))
        phi0_cells = d0(m.x0)
        return cls(
            edges=m.edges,
            phi0_cells=np.asarray(phi0_cells, dtype=float),
            phi1_cells=d1(m.X0_at(0.5 * (m.edges[:-1] + m.edges[1:]))),
            phi0_tail=float(d0(m.x0_tail)),
            phi1_tail=float(d1(m.x0_tail)),
            phi0_fn=lambda t: d0(self_x0_at(m, t)),
            phi1_fn=lambda t: d1(m.X0_at(t)),
        )

    def validity_flags(self, m: Mechanism, tech: Technology) -> np.ndarray:
        """Per-cell supergradient membership at the cell midpoints."""
        mids = 0.5 * (m.edges[:-1] + m.edges[1:])
        flags = np.empty(len(mids), dtype=bool)
        for i, t in enumerate(mids):
            x = float(np.clip(m.x0[i], *tech.f0.domain))
            X = float(np.clip(m.X0_at(t), *tech.f1.domain))
            p0 = float(self.phi0(np.array([t]))[0])
            p1 = float(self.phi1(np.array([t]))[0])
            flags[i] = (
                tech.f0.right_deriv(x) - 1e-9 <= p0 <= tech.f0.left_deriv(x) + 1e-9
                and tech.f1.right_deriv(X) - 1e-9 <= p1 <= tech.f1.left_deriv(X) + 1e-9
            )
        return flags


def self_x0_at(m: Mechanism, t):
    """Flow utility at arbitrary times (cell lookup, tail beyond horizon)."""
    t = np.asarray(t, dtype=float)
    k = np.clip(np.searchsorted(m.edges, t, side="right") - 1, 0, len(m.x0) - 1)
    return np.where(t >= m.horizon, m.x0_tail, m.x0[k])


# ---------------------------------------------------------------------------
# Euler residual and integrability


def euler_residual(
    prof: SupergradientProfile, G: BreakthroughDistribution, edges=None
) -> np.ndarray:
    """``[1 - G(t_k)] phi0(t_k) + int_[0, t_k] phi1 dG`` at the grid points.

    Cells where ``G(t) >= 1`` are excluded (the Euler equation is vacuous
    there). Exact at grid points for per-cell-constant ``phi1``: cell masses
    come from CDF differences, which also capture atoms inside cells.
    """
    edges = prof.edges if edges is None else np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    phi1_mid = prof.phi1(mids)
    cdf_vals = np.array([G.cdf(float(t)) for t in edges])
    cum = np.concatenate([[0.0], np.cumsum(phi1_mid * np.diff(cdf_vals))])
    # an atom exactly at 0 belongs to [0, t_k] for every k
    atom0 = sum(m * float(prof.phi1(np.array([0.0]))[0]) for s, m in G.atoms if s == 0.0)
    sf_vals = np.array([G.sf(float(t)) for t in edges])
    phi0_vals = np.asarray(prof.phi0(edges), dtype=float)
    out = np.where(sf_vals > 0.0, sf_vals * phi0_vals + cum + atom0, np.nan)
    return out


@dataclass
class IntegrabilityReport:
    capital_phi_expectation: float
    phi1_abs_expectation: float
    psi0_expectation: float
    psi1_expectation: float
    bound_holds: bool
    slack: float


def integrability_bounds(
    prof: SupergradientProfile,
    G: BreakthroughDistribution,
    m: Mechanism,
    tech: Technology,
    probe_u: float,
) -> IntegrabilityReport:
    """Expectations behind the Euler equation's integrability argument.

    ``Phi(t) = r int_0^t e^{-rs} phi0(s) ds`` must be G-integrable with
    ``E_G Phi(tau) <= E_G |phi1(tau)|`` whenever the Euler residual vanishes.
    Also reports the discounted one-sided-derivative accumulations toward a
    probe promise ``probe_u``.
    """
    r = m.r
    edges = _integration_edges(
        list(m.edges) + list(G.knots), r, G.tail_rate if G.tail_mass > 0 else r
    )
    Phi = _cumulative(lambda t: r * np.exp(-r * t) * prof.phi0(t), edges)
    e_phi = _expect_G(G, lambda t: Phi(t), edges)
    e_abs1 = _expect_G(G, lambda t: np.abs(prof.phi1(t)), edges)

    d0 = np.vectorize(lambda u: directional_deriv(tech.f0, float(u), probe_u))
    d1 = np.vectorize(lambda u: directional_deriv(tech.f1, float(u), probe_u))
    psi0_cum = _cumulative(
        lambda t: r * np.exp(-r * t) * d0(self_x0_at(m, t)), edges
    )
    psi0 = _expect_G(G, lambda t: psi0_cum(t), edges)
    psi1 = _expect_G(G, lambda t: np.exp(-r * t) * d1(m.X0_at(t)), edges)

    slack = e_abs1 - e_phi
    return IntegrabilityReport(
        capital_phi_expectation=e_phi,
        phi1_abs_expectation=e_abs1,
        psi0_expectation=psi0,
        psi1_expectation=psi1,
        bound_holds=slack > -1e-8,
        slack=slack,
    )


def warmup_identity(G: BreakthroughDistribution, r: float) -> float:
    """``E_G[ r int_0^tau e^{-rt} / (1 - G(t)) dt ]``; equals 1 for atom-free G."""
    decay = G.tail_rate if G.tail_mass > 0 else r
    edges = _integration_edges(list(G.knots), r, decay)

    def integrand(t):
        sf = np.array([G.sf(float(s)) for s in np.atleast_1d(t)])
        return r * np.exp(-r * np.asarray(t)) / np.where(sf > 0, sf, np.nan)

    cum = _cumulative(integrand, edges)
    return _expect_G(G, lambda t: cum(t), edges)


# ---------------------------------------------------------------------------
# Gateaux derivative


def _align(m: Mechanism, m_dag: Mechanism) -> tuple[Mechanism, Mechanism]:
    if len(m.edges) == len(m_dag.edges) and np.allclose(m.edges, m_dag.edges):
        return m, m_dag
    a = m.with_knots(m_dag.edges)
    b = m_dag.with_knots(m.edges)
    return a, b


def gateaux_closed_form(
    m: Mechanism,
    m_dag: Mechanism,
    prof: SupergradientProfile,
    tech: Technology,
    G: BreakthroughDistribution,
    check_validity: bool = True,
    return_terms: bool = False,
):
    """Directional derivative of the payoff at ``m`` toward ``m_dag``.

    Sum of four terms: the survival-weighted ``phi0`` integral, the
    accumulated-``phi1`` integral, and two corrections that replace the
    profile with the true directional derivatives along the paths. The
    corrections vanish when the profile equals the exact derivatives on a
    smooth instance.
    """
    m, m_dag = _align(m, m_dag)
    if check_validity:
        flags = prof.validity_flags(m, tech)
        sf_mids = np.array(
            [G.sf(float(t)) for t in 0.5 * (m.edges[:-1] + m.edges[1:])]
        )
        if np.any(~flags & (sf_mids > 0)):
            raise InvalidProfile("profile is not a supergradient where G(t) < 1")

    r = m.r
    decay = G.tail_rate if G.tail_mass > 0 else r
    edges = _integration_edges(
        list(m.edges) + list(m_dag.edges) + list(G.knots), r, decay
    )
    dx = lambda t: self_x0_at(m_dag, t) - self_x0_at(m, t)
    dX = lambda t: m_dag.X0_at(t) - m.X0_at(t)
    sf = np.vectorize(lambda t: G.sf(float(t)))

    term_b = _integral(
        lambda t: r * np.exp(-r * t) * sf(t) * prof.phi0(t) * dx(t), edges
    )
    cum1 = _cumulative_against_G(lambda t: prof.phi1(t), G, edges)
    term_c = _integral(lambda t: r * np.exp(-r * t) * cum1(t) * dx(t), edges)

    d0 = np.vectorize(
        lambda a, b: directional_deriv(tech.f0, float(a), float(b))
    )
    d1 = np.vectorize(
        lambda a, b: directional_deriv(tech.f1, float(a), float(b))
    )
    corr0_cum = _cumulative(
        lambda t: r
        * np.exp(-r * t)
        * (d0(self_x0_at(m, t), self_x0_at(m_dag, t)) - prof.phi0(t))
        * dx(t),
        edges,
    )
    corr0 = _expect_G(G, lambda t: corr0_cum(t), edges)
    corr1 = _expect_G(
        G,
        lambda t: np.exp(-r * t)
        * (d1(m.X0_at(t), m_dag.X0_at(t)) - prof.phi1(t))
        * dX(t),
        edges,
    )
    if return_terms:
        return {
            "survival": term_b,
            "accumulated": term_c,
            "corr0": corr0,
            "corr1": corr1,
            "total": term_b + term_c + corr0 + corr1,
        }
    return term_b + term_c + corr0 + corr1


def _cumulative_against_G(h, G: BreakthroughDistribution, edges: np.ndarray):
    """Callable ``t -> int_[0,t] h dG`` (atoms included up to and at t)."""
    dens_cum = _cumulative(lambda t: h(t) * G.pdf(t), edges)

    def cum(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = dens_cum(t)
        for s, mass in G.atoms:
            out = out + np.where(t >= s, mass * float(h(np.array([s]))[0]), 0.0)
        return out

    return cum


def gateaux_fd(
    m: Mechanism,
    m_dag: Mechanism,
    tech: Technology,
    G: BreakthroughDistribution,
    alphas=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
) -> float:
    """Finite-difference directional derivative with Richardson extrapolation.

    Uses the payoff with the promise pinned to its own continuation; the
    difference quotients of a concave objective are nonincreasing in alpha,
    so the last three are extrapolated to alpha = 0.
    """
    m, m_dag = _align(m, m_dag)
    base = pi_G(m, tech, G)
    quots = []
    for a in sorted(alphas, reverse=True):
        blend = replace(
            m,
            x0=m.x0 + a * (m_dag.x0 - m.x0),
            x0_tail=m.x0_tail + a * (m_dag.x0_tail - m.x0_tail),
        )
        quots.append((a, (pi_G(blend, tech, G) - base) / a))
    diffs = [abs(q2 - q1) for (_, q1), (_, q2) in zip(quots[:-1], quots[1:])]
    if len(diffs) >= 2 and diffs[-1] > 10.0 * diffs[0] + 1e-6:
        raise NonConvergent("difference quotients diverge as alpha decreases")
    # Neville polynomial-in-alpha extrapolation through the last three points
    pts = quots[-3:]
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts], dtype=float)
    for level in range(1, len(pts)):
        for i in range(len(pts) - level):
            ys[i] = (xs[i + level] * ys[i] - xs[i] * ys[i + 1]) / (
                xs[i + level] - xs[i]
            )
    return float(ys[0])


# ---------------------------------------------------------------------------
# strict concavity


def strict_concavity_probe(
    m: Mechanism,
    m_dag: Mechanism,
    lam: float,
    tech: Technology,
    G: BreakthroughDistribution,
) -> tuple[float, bool]:
    """``pi_G`` at the blend minus the blended values; positive iff strictly
    concave between the two flow paths.

    Returns ``(gap, valid)`` where ``valid`` is False when the paths coincide
    (no strictness to test) — the gap is still returned.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie strictly between 0 and 1")
    if G.tail_mass <= 0.0:
        raise PreconditionViolation("G must have an unbounded (exponential) tail")
    m, m_dag = _align(m, m_dag)
    valid = bool(
        np.max(np.abs(m.x0 - m_dag.x0)) > 1e-12
        or abs(m.x0_tail - m_dag.x0_tail) > 1e-12
    )
    blend = replace(
        m,
        x0=lam * m.x0 + (1 - lam) * m_dag.x0,
        x0_tail=lam * m.x0_tail + (1 - lam) * m_dag.x0_tail,
    )
    gap = pi_G(blend, tech, G) - (
        lam * pi_G(m, tech, G) + (1 - lam) * pi_G(m_dag, tech, G)
    )
    return gap, valid
