"""Trichotomy of the frontier gap at its argmax.

Let ``psi = F1 - F0``. At the gap's argmax ``u_star`` exactly one of three
things happens: ``psi`` has a local maximum, ``psi`` has a saddle point
(neither a local max nor a local min, with arbitrarily flat difference
quotients through the point), or both frontiers are kinked there and share a
supergradient. The classifier probes a shrinking family of windows around
``u_star`` and reports a witness with the one-sided derivatives behind the
verdict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UStarAtOrigin
from .technology import Technology

#: shrinking probe radii for the saddle definition's "for every epsilon"
PROBE_EPSILONS = (1e-1, 1e-2, 1e-3)

#: grid points on each side of the probe point, per epsilon window
PROBE_POINTS_PER_SIDE = 64

#: strict-comparison tolerance for the local max/min probes
STRICT_TOL = 1e-10


class GapKind(enum.Enum):
    LOCAL_MAX = "LocalMax"
    SADDLE = "Saddle"
    MUTUAL_KINK = "MutualKink"


@dataclass
class GapWitness:
    """One-sided slopes at the probed point and the shared supergradients."""

    u: float
    f0_left: float
    f0_right: float
    f1_left: float
    f1_right: float
    shared_interval: tuple[float, float]
    notes: list[str] = field(default_factory=list)

    @property
    def psi_left(self) -> float:
        return self.f1_left - self.f0_left

    @property
    def psi_right(self) -> float:
        return self.f1_right - self.f0_right


@dataclass
class GapClassification:
    kind: GapKind
    witness: GapWitness


def shared_supergradient_interval(tech: Technology, u: float) -> tuple[float, float]:
    """Slopes supergradient to both frontiers at ``u``.

    Returns ``(lo, hi)`` with ``lo = max_j right_deriv_j(u)`` and
    ``hi = min_j left_deriv_j(u)``; the interval is empty (no shared
    supergradient) exactly when ``lo > hi``.
    """
    for f in (tech.f0, tech.f1):
        lo_d, hi_d = f.domain
        if u < lo_d or u > hi_d:
            raise DomainError(f"u={u:g} outside domain closure [{lo_d:g}, {hi_d:g}]")
    lo = max(tech.f0.right_deriv(u), tech.f1.right_deriv(u))
    hi = min(tech.f0.left_deriv(u), tech.f1.left_deriv(u))
    return lo, hi


def _probe_window(psi, u_bar: float, eps: float, lo: float, hi: float):
    """Sample points strictly left and right of ``u_bar`` within ``eps``."""
    left_lo = max(lo, u_bar - eps)
    right_hi = min(hi, u_bar + eps)
    n = PROBE_POINTS_PER_SIDE
    left = np.linspace(left_lo, u_bar, n + 1)[:-1] if left_lo < u_bar else np.array([])
    right = np.linspace(u_bar, right_hi, n + 1)[1:] if right_hi > u_bar else np.array([])
    return left, right


def is_saddle(
    psi,
    u_bar: float,
    epsilons=PROBE_EPSILONS,
    domain: tuple[float, float] = (0.0, np.inf),
) -> tuple[bool, dict]:
    """Saddle probe for a scalar function ``psi`` at ``u_bar``.

    True iff, for every probe radius ``eps``, (a) some straddling pair
    ``u < u_bar < u'`` within ``eps`` has ``|psi(u') - psi(u)|/(u' - u) < eps``
    and (b) the local-max and local-min probes both fail inside the window.
    A finite grid can support but never prove the verdict, so the witness
    records the finest resolution reached.
    """
    if u_bar <= 0:
        raise ValueError("the probe point must be positive")
    lo, hi = domain
    center = float(psi(u_bar))
    witness: dict = {"epsilons": [], "flat_quotients": [], "resolution": min(epsilons)}
    for eps in sorted(epsilons, reverse=True):
        left, right = _probe_window(psi, u_bar, eps, lo, hi)
        if left.size == 0 or right.size == 0:
            return False, witness
        lv = np.array([float(psi(x)) for x in left])
        rv = np.array([float(psi(x)) for x in right])
        quot = np.abs(rv[None, :] - lv[:, None]) / (right[None, :] - left[:, None])
        flat = float(quot.min())
        all_vals = np.concatenate([lv, rv])
        not_max = bool(np.any(all_vals > center + STRICT_TOL))
        not_min = bool(np.any(all_vals < center - STRICT_TOL))
        witness["epsilons"].append(eps)
        witness["flat_quotients"].append(flat)
        if not (flat < eps and not_max and not_min):
            return False, witness
    witness["note"] = f"supported at resolution {min(epsilons):g}"
    return True, witness


def classify_u_star(tech: Technology) -> GapClassification:
    """Sort ``u_star`` into the local-max / saddle / mutual-kink trichotomy.

    Only defined for an interior argmax: raises UStarAtOrigin when
    ``u_star = 0`` (the generic moral-hazard case).
    """
    u = tech.u_star
    if abs(u) < 1e-8:
        raise UStarAtOrigin("gap argmax sits at the origin; trichotomy undefined")

    witness = GapWitness(
        u=u,
        f0_left=tech.f0.left_deriv(u),
        f0_right=tech.f0.right_deriv(u),
        f1_left=tech.f1.left_deriv(u),
        f1_right=tech.f1.right_deriv(u),
        shared_interval=shared_supergradient_interval(tech, u),
    )

    lo = max(tech.f0.domain[0], tech.f1.domain[0])
    hi = min(tech.f0.domain[1], tech.f1.domain[1])
    psi = tech.gap
    center = float(psi(u))
    is_local_max = True
    plateau = False
    for eps in PROBE_EPSILONS:
        left, right = _probe_window(psi, u, eps, lo, hi)
        vals = np.array([float(psi(x)) for x in np.concatenate([left, right])])
        if np.any(vals > center + STRICT_TOL):
            is_local_max = False
            break
        plateau = plateau or bool(np.any(np.abs(vals - center) <= STRICT_TOL))
    if is_local_max:
        if plateau:
            witness.notes.append("LocalMax-weak (plateau detected)")
        return GapClassification(GapKind.LOCAL_MAX, witness)

    saddle, probe = is_saddle(psi, u, domain=(lo, hi))
    if saddle:
        witness.notes.append(probe.get("note", ""))
        return GapClassification(GapKind.SADDLE, witness)

    # mutual kink: the proof's chain of one-sided slopes must hold
    s_lo, s_hi = witness.shared_interval
    chain = (
        witness.f1_right < witness.f0_right
        and s_lo <= s_hi
        and witness.f1_left < witness.f0_left
    )
    if not chain:
        witness.notes.append("mutual-kink chain inequalities violated")
    return GapClassification(GapKind.MUTUAL_KINK, witness)
