"""Command-line entry point: config ingestion, verification suites, CSV export.

Exit codes: 0 all checks pass, 1 a verification check failed, 2 bad
configuration, 3 computation failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ._oracles import brute_force_mixture_value
from .errors import ConfigError, FrontierKitError, UStarAtOrigin
from .frontiers import (
    AffineFrontier,
    CallableFrontier,
    PiecewiseLinearFrontier,
    QuadraticFrontier,
)
from .gap_analysis import GapKind, classify_u_star
from .mechanism import (
    BreakthroughDistribution,
    Mechanism,
    TimeGrid,
    deadline_for_promise,
    dominance_check,
    make_deadline_mechanism,
    no_delay_improve,
    payoff,
)
from .mixture import FrontierDistribution, mixture_value, verify_mixture_regularity
from .report import VerificationReport
from .smoothing import SmoothingParams, build_sequence, build_smooth_pair, verify_monster
from .technology import (
    MoralHazardPrimitives,
    PowerCost,
    PowerUtility,
    Technology,
    effort_star,
    make_moral_hazard_technology,
    verify_ui_assumptions,
)
from .variational import (
    MeasureOnTime,
    SupergradientProfile,
    euler_residual,
    gateaux_closed_form,
    gateaux_fd,
    integrability_bounds,
    stieltjes_ibp,
    strict_concavity_probe,
    warmup_identity,
)

SUITES = (
    "ui-assns",
    "mixture",
    "saddle",
    "no-delay",
    "euler",
    "gateaux",
    "ibp",
    "smoothing",
    "concavity",
)

EXPORTS = ("frontiers", "mechanism", "residuals", "smoothing")

_DEFAULT_CONFIG = {
    "lambda": 1.0,
    "w": 1.0,
    "phi": {"kind": "power", "exponent": 0.5},
    "kappa": {"kind": "power", "exponent": 2.0},
}


@dataclass
class InstanceConfig:
    """Validated run configuration; `raw` keeps unmodelled extra keys."""

    lam: float
    w: float
    phi_exponent: float
    kappa_exponent: float
    rate: float = 1.0
    perturb: float = 0.0
    raw: dict = field(default_factory=dict)

    def primitives(self) -> MoralHazardPrimitives:
        return MoralHazardPrimitives(
            lam=self.lam,
            w=self.w,
            phi=PowerUtility(self.phi_exponent),
            kappa=PowerCost(self.kappa_exponent),
        )

    def technology(self) -> Technology:
        return make_moral_hazard_technology(self.primitives())


def _positive(data: dict, key: str, default: float) -> float:
    value = data.get(key, default)
    if not isinstance(value, (int, float)) or value <= 0:
        raise ConfigError(f"key `{key}` must be a positive number, got {value!r}")
    return float(value)


def _shape_spec(data: dict, key: str, default: dict) -> float:
    spec = data.get(key, default)
    if not isinstance(spec, dict):
        raise ConfigError(f"key `{key}` must be a mapping with kind/exponent")
    kind = spec.get("kind", "power")
    if kind != "power":
        raise ConfigError(f"key `{key}.kind` must be 'power', got {kind!r}")
    exponent = spec.get("exponent")
    if not isinstance(exponent, (int, float)):
        raise ConfigError(f"key `{key}.exponent` must be a number, got {exponent!r}")
    return float(exponent)


def load_config(path: str | None) -> InstanceConfig:
    if path is None:
        data = dict(_DEFAULT_CONFIG)
    else:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")

    phi_exp = _shape_spec(data, "phi", _DEFAULT_CONFIG["phi"])
    if not 0.0 < phi_exp < 1.0:
        raise ConfigError(f"key `phi.exponent` must lie in (0, 1), got {phi_exp}")
    kappa_exp = _shape_spec(data, "kappa", _DEFAULT_CONFIG["kappa"])
    if kappa_exp <= 1.0:
        raise ConfigError(f"key `kappa.exponent` must exceed 1, got {kappa_exp}")

    perturb = data.get("perturb", 0.0)
    if not isinstance(perturb, (int, float)):
        raise ConfigError(f"key `perturb` must be a number, got {perturb!r}")

    return InstanceConfig(
        lam=_positive(data, "lambda", 1.0),
        w=_positive(data, "w", 1.0),
        phi_exponent=phi_exp,
        kappa_exponent=kappa_exp,
        rate=_positive(data, "rate", 1.0),
        perturb=float(perturb),
        raw=data,
    )


# ---------------------------------------------------------------------------
# canonical fixtures shared by suites (independent of the config instance)


def _quad_tech() -> Technology:
    f0 = QuadraticFrontier(0.25, 1.0, -1.0)  # 0.5 - (u - 0.5)^2
    f1 = QuadraticFrontier(0.9375, 0.5, -1.0)  # 1 - (u - 0.25)^2
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.25, u_star=0.0)


def _affine_tech() -> Technology:
    f0 = AffineFrontier(0.2, 0.6, domain=(0.0, 0.5))
    f1 = QuadraticFrontier(0.9375, 0.5, -1.0)
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.25, u_star=0.0)


def _smooth_fixture() -> Technology:
    f0 = QuadraticFrontier(0.25, 1.0, -1.0)
    f1 = QuadraticFrontier(0.9975, 0.1, -1.0)
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.05, u_star=0.0)


def _kinked_fixture() -> Technology:
    f0 = PiecewiseLinearFrontier([0.0, 0.5, 0.7], [0.0, 0.3, 0.28])
    f1 = PiecewiseLinearFrontier([0.0, 0.1, 0.45, 0.7], [0.8, 0.85, 0.8, 0.6])
    return Technology(f0=f0, f1=f1, u0=0.5, u1=0.1, u_star=0.0)


def _mutual_kink_tech() -> Technology:
    f0 = PiecewiseLinearFrontier([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
    f1 = PiecewiseLinearFrontier([0.0, 1.0, 1.5], [1.0, 1.5, 0.5])
    return Technology(f0=f0, f1=f1, u0=1.0, u1=1.0, u_star=1.0)


def _local_max_tech() -> Technology:
    f0 = QuadraticFrontier(0.0, 2.0, -1.0)
    f1 = QuadraticFrontier(3.0, 4.0, -2.0)
    return Technology(f0=f0, f1=f1, u0=1.0, u1=1.0, u_star=1.0)


def _saddle_tech() -> Technology:
    f0 = QuadraticFrontier(0.0, 10.0, -5.0)
    f1 = CallableFrontier(
        lambda u: 10.0 * u - 5.0 * u * u - (u - 1.0) ** 3,
        domain=(0.0, 2.0),
        peak=1.0,
    )
    return Technology(f0=f0, f1=f1, u0=1.0, u1=1.0, u_star=1.0)


def _mixed_G(rate: float = 1.0) -> BreakthroughDistribution:
    return BreakthroughDistribution(
        density_edges=np.array([0.0, 1.0]),
        density_values=np.array([0.5]),
        tail_rate=rate,
        tail_mass=0.5,
        tail_start=1.0,
    )


def _random_quadratic(rng) -> QuadraticFrontier:
    peak = float(rng.uniform(0.5, 3.0))
    curv = -float(rng.uniform(0.5, 2.0))
    height = float(rng.uniform(0.0, 2.0))
    return QuadraticFrontier(height + curv * peak * peak, -2.0 * curv * peak, curv)


def _random_mechanism(rng, grid: TimeGrid, hi: float) -> Mechanism:
    return Mechanism.from_grid(
        grid,
        rng.uniform(0.05 * hi, 0.9 * hi, grid.n_cells),
        x0_tail=float(rng.uniform(0.05 * hi, 0.9 * hi)),
    )


# ---------------------------------------------------------------------------
# verification suites


def _suite_ui_assns(cfg: InstanceConfig, rng, trials: int) -> VerificationReport:
    tech = cfg.technology()
    return verify_ui_assumptions(tech, np.linspace(0.0, tech.u0, 200))


def _suite_mixture(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("mixture")
    pair = FrontierDistribution(
        [(QuadraticFrontier(-1.0, 2.0, -1.0), 0.5), (QuadraticFrontier(-9.0, 6.0, -1.0), 0.5)]
    )
    us = np.linspace(1.0, 3.0, 21)
    worst = max(abs(mixture_value(pair, float(u))[0] + (u - 2.0) ** 2) for u in us)
    rep.add("closed-form-quadratic-pair", worst < 1e-6, worst)

    for check in verify_mixture_regularity(pair, np.linspace(1.0, 3.0, 9)).checks:
        rep.add("regularity/" + check.check_id, check.passed, check.worst_violation)

    worst = 0.0
    for _ in range(trials):
        members = [_random_quadratic(rng) for _ in range(int(rng.integers(2, 5)))]
        probs = rng.dirichlet(np.ones(len(members)))
        dist = FrontierDistribution(list(zip(members, probs)))
        u = float(rng.uniform(0.5, 2.5))
        value, _ = mixture_value(dist, u)
        oracle = brute_force_mixture_value(dist, u)
        worst = max(worst, abs(value - oracle))
    rep.add("water-filling-vs-brute-force", worst < 1e-5, worst, note=f"{trials} trials")
    return rep


def _suite_saddle(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("saddle")
    try:
        result = classify_u_star(cfg.technology())
        rep.add("config-instance", True, note=f"classified {result.kind.name}")
    except UStarAtOrigin:
        rep.add("config-instance", True, note="gap argmax at the origin; trichotomy not applicable")

    kinked = classify_u_star(_mutual_kink_tech())
    w = kinked.witness
    chain_ok = (
        kinked.kind == GapKind.MUTUAL_KINK
        and w.f1_right < w.f0_right
        and w.f1_left < w.f0_left
        and w.shared_interval[0] <= w.shared_interval[1]
    )
    rep.add("mutual-kink-fixture", chain_ok)
    rep.add("local-max-fixture", classify_u_star(_local_max_tech()).kind == GapKind.LOCAL_MAX)
    rep.add("saddle-fixture", classify_u_star(_saddle_tech()).kind == GapKind.SADDLE)
    return rep


def _suite_no_delay(cfg, rng, trials, grid: TimeGrid) -> VerificationReport:
    rep = VerificationReport("no-delay")
    tech = cfg.technology()
    worst_gain, strict_seen = math.inf, 0
    for k in range(trials):
        # the raw draw has its post-breakthrough promise glued to the flow
        # (X1 = X0); the improvement lifts it to max(X0, u1)
        m = _random_mechanism(rng, grid, tech.u0)
        if k % 2 == 0:
            G = BreakthroughDistribution.exponential(float(rng.uniform(0.3, 2.0)))
        else:
            G = _mixed_G(float(rng.uniform(0.5, 1.5)))
        gain = payoff(no_delay_improve(m, tech), tech, G) - payoff(m, tech, G)
        worst_gain = min(worst_gain, gain)
        strict_seen += gain > 1e-9
    rep.add(
        "no-delay-never-decreases",
        worst_gain > -1e-10,
        worst_violation=max(0.0, -worst_gain),
        note=f"{trials} trials",
    )
    rep.add("no-delay-strict-sometimes", strict_seen > 0, note=f"{strict_seen} strict")

    affine = _affine_tech()
    starts = grid.edges[:-1]
    x0 = np.where(starts < 1.0, 0.5 * affine.u0, np.where(starts < 2.0, affine.u0, 0.0))
    two_step = Mechanism.from_grid(grid, x0, u1=affine.u1)
    family = [BreakthroughDistribution.point_mass(0.5), BreakthroughDistribution.exponential(1.0)]
    for check in dominance_check(two_step, affine, family).checks:
        rep.add("dominance/" + check.check_id, check.passed, check.worst_violation, note=check.note)
    return rep


def _exact_euler_profile(perturb: float = 0.0) -> SupergradientProfile:
    # G = Exp(1), phi1 = -1, phi0(t) = G/(1-G) = e^t - 1 solves the equation
    edges = np.linspace(0.0, 4.0, 41)
    n = len(edges) - 1
    return SupergradientProfile(
        edges=edges,
        phi0_cells=np.zeros(n),
        phi1_cells=-np.ones(n),
        phi1_tail=-1.0,
        phi0_fn=lambda t: (1.0 + perturb) * np.expm1(t),
    )


def _suite_euler(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("euler")
    res = euler_residual(_exact_euler_profile(cfg.perturb), BreakthroughDistribution.exponential(1.0))
    worst = float(np.nanmax(np.abs(res)))
    rep.add("construct-and-check-residual", worst < 1e-9, worst)

    for label, G in (("exponential", BreakthroughDistribution.exponential(1.3)), ("mixed", _mixed_G(0.8))):
        err = abs(warmup_identity(G, r=cfg.rate) - 1.0)
        rep.add(f"warmup-identity-{label}", err < 1e-6, err)

    grid = TimeGrid(horizon=2.0, step=0.25, r=2.0)
    m = Mechanism.from_grid(grid, np.full(grid.n_cells, 0.3), x0_tail=0.3)
    bounds = integrability_bounds(
        _exact_euler_profile(), BreakthroughDistribution.exponential(1.0), m, _quad_tech(), probe_u=0.4
    )
    rep.add("integrability-bound", bounds.bound_holds and bounds.slack > 0, note=f"slack={bounds.slack:.3g}")
    return rep


def _suite_gateaux(cfg, rng, trials, grid: TimeGrid) -> VerificationReport:
    rep = VerificationReport("gateaux")
    tech = _quad_tech()
    small = TimeGrid(horizon=2.0, step=0.25, r=cfg.rate)

    m = _random_mechanism(rng, small, tech.u0)
    prof = SupergradientProfile.exact(m, tech)
    zero = gateaux_closed_form(m, m, prof, tech, _mixed_G())
    rep.add("zero-direction-exact", zero == 0.0, abs(zero))

    worst = 0.0
    for _ in range(trials):
        m = _random_mechanism(rng, small, tech.u0)
        m_dag = _random_mechanism(rng, small, tech.u0)
        prof = SupergradientProfile.exact(m, tech)
        G = _mixed_G(float(rng.uniform(0.6, 1.5)))
        closed = gateaux_closed_form(m, m_dag, prof, tech, G)
        fd = gateaux_fd(m, m_dag, tech, G)
        rel = abs(closed - fd) / max(abs(fd), 1e-6)
        worst = max(worst, rel)
    rep.add("closed-vs-finite-difference", worst < 1e-4, worst, note=f"{trials} trials")
    return rep


def _suite_ibp(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("ibp")
    nu = MeasureOnTime(atoms=((1.0, 1.0),))
    lhs, rhs = stieltjes_ibp(nu, 0.0, lambda t: np.ones_like(t), 2.0)
    rep.add("hand-case-atom", abs(lhs - 1.0) < 1e-12 and abs(rhs - 1.0) < 1e-12)

    worst = 0.0
    done = 0
    while done < trials:
        T = float(rng.uniform(0.5, 3.0))
        atoms = tuple(
            (float(rng.uniform(0, T)), float(rng.uniform(0, 1)))
            for _ in range(rng.integers(0, 4))
        )
        n_pieces = int(rng.integers(1, 4))
        edges = np.sort(rng.uniform(0, T, n_pieces + 1))
        edges[0], edges[-1] = 0.0, T
        if np.any(np.diff(edges) <= 1e-6):
            continue
        nu = MeasureOnTime(
            atoms=atoms, density_edges=edges, density_values=rng.uniform(0, 1, n_pieces)
        )
        a, b, c = rng.uniform(-1, 1, 3)
        lhs, rhs = stieltjes_ibp(
            nu, float(rng.uniform(-1, 1)), lambda t: a + b * t + c * t * t, T
        )
        worst = max(worst, abs(lhs - rhs))
        done += 1
    rep.add("randomized-identity", worst < 1e-9, worst, note=f"{trials} trials")
    return rep


def _suite_smoothing(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("smoothing")
    ns = (8, 16, 32, 64)
    for label, tech in (("smooth", _smooth_fixture()), ("kinked", _kinked_fixture())):
        pairs = build_sequence(tech, ns)
        for check in verify_monster(tech, pairs).checks:
            rep.add(f"{label}/{check.check_id}", check.passed, check.worst_violation, note=check.note)

        bound_ok, gap_ok = True, True
        for pair in pairs:
            p = pair.params
            for u in np.linspace(1.0 / p.n, tech.u0 - 2.0 / p.n, 33):
                u = float(u)
                for f_src, f_n in ((tech.f0, pair.f0n), (tech.f1, pair.f1n)):
                    d = f_n.right_deriv(u)
                    bound_ok &= d <= f_src.right_deriv(u) + 1e-9
                    bound_ok &= d >= f_src.left_deriv(u + 1.0 / p.n) - 1.0 - 1e-9
                gap_ok &= pair.gap(u) >= p.zeta - 2 * p.eps - 1e-9
        rep.add(f"{label}/windowed-derivative-bound", bound_ok)
        rep.add(f"{label}/ordered-with-margin", gap_ok)
    return rep


def _suite_concavity(cfg, rng, trials) -> VerificationReport:
    rep = VerificationReport("concavity")
    tech = _quad_tech()
    small = TimeGrid(horizon=2.0, step=0.25, r=1.0)
    min_gap, all_valid = math.inf, True
    for _ in range(trials):
        m = _random_mechanism(rng, small, tech.u0)
        m_dag = _random_mechanism(rng, small, tech.u0)
        lam = float(rng.uniform(0.05, 0.95))
        G = BreakthroughDistribution.exponential(float(rng.uniform(0.5, 2.0)))
        gap, valid = strict_concavity_probe(m, m_dag, lam, tech, G)
        min_gap = min(min_gap, gap)
        all_valid &= valid
    rep.add(
        "strictly-concave-in-the-flow",
        all_valid and min_gap > 0,
        worst_violation=max(0.0, -min_gap),
        note=f"{trials} trials, min gap {min_gap:.3g}",
    )
    return rep


def run_suite(
    cfg: InstanceConfig,
    suite: str,
    seed: int = 42,
    trials: int = 1000,
    grid: TimeGrid | None = None,
) -> VerificationReport:
    rng = np.random.default_rng(seed)
    grid = grid or TimeGrid(horizon=6.0, step=0.05, r=cfg.rate)
    if suite == "ui-assns":
        return _suite_ui_assns(cfg, rng, trials)
    if suite == "mixture":
        return _suite_mixture(cfg, rng, trials)
    if suite == "saddle":
        return _suite_saddle(cfg, rng, trials)
    if suite == "no-delay":
        return _suite_no_delay(cfg, rng, trials, grid)
    if suite == "euler":
        return _suite_euler(cfg, rng, trials)
    if suite == "gateaux":
        return _suite_gateaux(cfg, rng, trials, grid)
    if suite == "ibp":
        return _suite_ibp(cfg, rng, trials)
    if suite == "smoothing":
        return _suite_smoothing(cfg, rng, trials)
    if suite == "concavity":
        return _suite_concavity(cfg, rng, trials)
    raise ConfigError(f"unknown suite {suite!r}; choose one of {', '.join(SUITES)}")


# ---------------------------------------------------------------------------
# CSV export


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _write_csv(path: Path, header: str, rows) -> Path:
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def _frontier_rows(tech: Technology, us):
    for u in us:
        u = float(u)
        yield (
            u,
            float(tech.f0.value(u)),
            float(tech.f1.value(u)),
            tech.f0.left_deriv(u),
            tech.f0.right_deriv(u),
            tech.f1.left_deriv(u),
            tech.f1.right_deriv(u),
        )


def export_curves(
    cfg: InstanceConfig,
    what: str,
    out_dir: str | Path = ".",
    grid_step: float = 0.05,
    horizon: float = 6.0,
    u_grid=None,
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tech = cfg.technology()

    if what == "frontiers":
        us = np.arange(0.0, tech.u0 + 0.5 * grid_step, grid_step) if u_grid is None else u_grid
        path = _write_csv(
            out / "frontiers.csv",
            "u,F0,F1,F0_left,F0_right,F1_left,F1_right",
            _frontier_rows(tech, us),
        )
        return [path]

    grid = TimeGrid(horizon=horizon, step=grid_step, r=cfg.rate)

    if what == "mechanism":
        T = deadline_for_promise(0.5 * tech.u0, tech, grid)
        m = make_deadline_mechanism(T, tech, grid)
        x0 = np.append(m.x0, m.x0_tail)
        rows = zip(m.edges, x0, m.X0_at(m.edges), m.X1_at(m.edges))
        return [_write_csv(out / "mechanism.csv", "t,x0,X0,X1", rows)]

    if what == "residuals":
        G = BreakthroughDistribution.exponential(cfg.rate)
        prof = _exact_euler_profile(cfg.perturb)
        ts = prof.edges
        res = euler_residual(prof, G)
        sf = np.array([G.sf(float(t)) for t in ts])
        phi0 = np.array([float(prof.phi0(float(t))) for t in ts])
        cum = res - sf * phi0
        rows = zip(ts, res, phi0, cum, sf)
        return [_write_csv(out / "residuals.csv", "t,residual,phi0,cum_phi1_dG,one_minus_G", rows)]

    if what == "smoothing":
        paths = []
        for n in (16, 32, 64):
            pair = build_smooth_pair(tech, SmoothingParams.auto(tech, n))
            us = np.arange(0.0, tech.u0 + 0.5 * grid_step, grid_step)
            rows = (
                (
                    float(u),
                    float(pair.f0n.value(float(u))),
                    float(pair.f1n.value(float(u))),
                    pair.f0n.right_deriv(float(u)),
                    pair.f1n.right_deriv(float(u)),
                )
                for u in us
            )
            paths.append(_write_csv(out / f"smoothing_n{n}.csv", "u,F0n,F1n,f0n,f1n", rows))
        return paths

    raise ConfigError(f"unknown export {what!r}; choose one of {', '.join(EXPORTS)}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_frontier(cfg: InstanceConfig, args) -> int:
    tech = cfg.technology()
    prims = cfg.primitives()
    print(f"u0 = {tech.u0:.12g}")
    print(f"u1 = {tech.u1:.12g}")
    print(f"u_star = {tech.u_star:.12g}")
    print(f"L_star(u1) = {effort_star(prims, tech.u1):.12g}")
    if args.out:
        for path in export_curves(cfg, "frontiers", args.out, grid_step=args.grid_step):
            print(f"wrote {path}")
    return 0


def _cmd_solve_deadline(cfg: InstanceConfig, args) -> int:
    tech = cfg.technology()
    grid = TimeGrid(horizon=args.horizon, step=args.grid_step, r=cfg.rate)
    T = deadline_for_promise(args.promise, tech, grid)
    print(f"T = {'inf' if math.isinf(T) else format(T, '.12g')}")
    m = make_deadline_mechanism(T, tech, grid)
    for rate in (0.5, 1.0, 2.0):
        G = BreakthroughDistribution.exponential(rate)
        print(f"G=exp({rate:g})  payoff = {payoff(m, tech, G):.12g}")
    return 0


def _cmd_verify(cfg: InstanceConfig, args) -> int:
    grid = TimeGrid(horizon=args.horizon, step=args.grid_step, r=cfg.rate)
    rep = run_suite(cfg, args.suite, seed=args.seed, trials=args.trials, grid=grid)
    print(rep.render())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.suite}.txt").write_text(rep.render() + "\n")
    return 0 if rep.overall_pass else 1


def _cmd_smooth(cfg: InstanceConfig, args) -> int:
    tech = cfg.technology()
    try:
        ns = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--n-list must be comma-separated integers: {exc}") from exc
    if not ns:
        raise ConfigError("--n-list must name at least one level")
    pairs = build_sequence(tech, ns)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    step = args.grid_step
    for pair in pairs:
        us = np.arange(0.0, tech.u0 + 0.5 * step, step)
        rows = (
            (
                float(u),
                float(pair.f0n.value(float(u))),
                float(pair.f1n.value(float(u))),
                pair.f0n.right_deriv(float(u)),
                pair.f1n.right_deriv(float(u)),
            )
            for u in us
        )
        path = _write_csv(out / f"smoothing_n{pair.params.n}.csv", "u,F0n,F1n,f0n,f1n", rows)
        print(f"wrote {path}")
    rep = verify_monster(tech, pairs)
    (out / "smoothing_report.txt").write_text(rep.render() + "\n")
    print(rep.render())
    return 0 if rep.overall_pass else 1


def _cmd_export(cfg: InstanceConfig, args) -> int:
    paths = export_curves(
        cfg, args.what, args.out or ".", grid_step=args.grid_step, horizon=args.horizon
    )
    for path in paths:
        print(f"wrote {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML instance configuration")
    common.add_argument("--out", help="output directory for reports and CSV files")
    common.add_argument("--seed", type=int, default=42, help="RNG seed for randomized suites")
    common.add_argument("--trials", type=int, default=1000, help="randomized trial count")
    common.add_argument("--grid-step", type=float, default=0.05, help="sampling step")
    common.add_argument("--horizon", type=float, default=6.0, help="time-grid horizon")

    parser = argparse.ArgumentParser(prog="frontierkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("frontier", parents=[common], help="print peak values, optionally export curves")
    sd = sub.add_parser("solve-deadline", parents=[common], help="deadline for a promise plus payoffs")
    sd.add_argument("--promise", type=float, required=True, help="initial promised utility")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    sm = sub.add_parser("smooth", parents=[common], help="build and certify smoothing levels")
    sm.add_argument("--n-list", default="16,32,64", help="comma-separated smoothing levels")
    ex = sub.add_parser("export", parents=[common], help="write CSV curves")
    ex.add_argument("--what", choices=EXPORTS, required=True)
    return parser


_COMMANDS = {
    "frontier": _cmd_frontier,
    "solve-deadline": _cmd_solve_deadline,
    "verify": _cmd_verify,
    "smooth": _cmd_smooth,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FrontierKitError, ValueError, ArithmeticError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
