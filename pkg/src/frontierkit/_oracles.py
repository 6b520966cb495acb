"""Brute-force reference maximizers used only by the test suites.

Kept in the package (not the tests) so the CLI's randomized suites can reuse
them, but never called from the production solvers they cross-check.
"""

from __future__ import annotations


import numpy as np

from .mixture import FrontierDistribution, _alloc_ceiling, _alloc_floor


def brute_force_mixture_value(
    dist: FrontierDistribution,
    u: float,
    step: float = 1e-3,
    cap: float | None = None,
) -> float:
    """Grid maximization over allocations with expectation ``u``.

    The last member's allocation is eliminated through the expectation
    constraint. Free coordinates are scanned on a shrinking multi-resolution
    grid down to the requested step, which is safe for concave objectives.
    """
    members, probs = dist.members, dist.probs
    if cap is None:
        cap = max(10.0 * (1.0 + max(f.peak for f in members)), 2.0 * u + 1.0)
    floors = np.array([_alloc_floor(f) for f in members])
    ceils = np.array([_alloc_ceiling(f, cap) for f in members])
    k = len(members)
    if k == 1:
        return float(members[0].value(u))

    # eliminate the largest-probability member through the constraint so the
    # implied coordinate is least sensitive to the free ones
    last = int(np.argmax(probs))
    free = [i for i in range(k) if i != last]
    centers = 0.5 * (floors[free] + ceils[free])
    radii = 0.5 * (ceils[free] - floors[free])
    best_val, best_x = -np.inf, centers.copy()
    points_per_dim = 13 if k <= 3 else 9

    while True:
        axes = [
            np.linspace(
                max(floors[i], centers[j] - radii[j]),
                min(ceils[i], centers[j] + radii[j]),
                points_per_dim,
            )
            for j, i in enumerate(free)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh])  # one free combo per column
        x_last = (u - probs[free] @ pts) / probs[last]
        valid = (x_last >= floors[last] - 1e-12) & (x_last <= ceils[last] + 1e-12)
        vals = probs[last] * np.asarray(members[last].value(x_last), dtype=float)
        for j, i in enumerate(free):
            vals = vals + probs[i] * np.asarray(members[i].value(pts[j]), dtype=float)
        vals = np.where(valid, vals, -np.inf)
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val, best_x = float(vals[idx]), pts[:, idx].copy()
        if np.all(radii <= step):
            break
        # halve the window around the incumbent; the margin of two grid
        # spacings keeps the true argmax inside for concave objectives
        centers = best_x
        radii = np.maximum(radii / 2.0, step / 2)
    return float(best_val)
