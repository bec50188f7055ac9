"""Seeded scenario generators, the full analysis pipeline, and sensitivity sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import TranselectError
from .evidence import (CHIB, FamilyResult, SelectionReport, evidence_chib,
                       evidence_closed_form, evidence_laplace_metropolis,
                       evidence_quadrature, posterior_model_probs)
from .families import ALL_FAMILIES, Family, prepare
from .likelihood import LikelihoodContext, MhConfig, posterior_summary, run_mh
from .priors import (build_power_prior, build_unit_info_prior,
                     estimate_dual_anchor, make_imaginary)

ALL_METHODS = (CHIB, "laplace_metropolis", "quadrature")


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulated dataset: distribution, size, seed.

    Distribution parameters: normal uses (mu, sigma), gamma uses shape/rate,
    student uses df/ncp with the noncentral variate (Z + ncp) / sqrt(V / df).
    """

    distribution: str
    n: int
    seed: int = 0
    mu: float = 0.0
    sigma: float = 1.0
    shape: float = 2.0
    rate: float = 3.0
    df: float = 2.0
    ncp: float = 0.0

    def __post_init__(self) -> None:
        if self.distribution not in ("normal", "gamma", "student"):
            raise ValueError(f"unknown distribution: {self.distribution}")
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if self.sigma <= 0 or self.shape <= 0 or self.rate <= 0 or self.df <= 0:
            raise ValueError("distribution parameters must be positive")


def generate(spec: ScenarioSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    if spec.distribution == "normal":
        return rng.normal(spec.mu, spec.sigma, spec.n)
    if spec.distribution == "gamma":
        return rng.gamma(spec.shape, 1.0 / spec.rate, spec.n)
    z = rng.normal(size=spec.n)
    v = rng.chisquare(spec.df, size=spec.n)
    return (z + spec.ncp) / np.sqrt(v / spec.df)


@dataclass
class AnalysisConfig:
    mh: MhConfig = field(default_factory=MhConfig)
    chib_draws: int = 2000
    n_star: int | None = None              # None: match the observed sample size
    imaginary_source: str = "simulated"
    methods: tuple[str, ...] = ALL_METHODS
    families: tuple[Family, ...] = ALL_FAMILIES
    prob_method: str = CHIB
    include_constant: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.families:
            raise ValueError("at least one family required")
        if not self.methods:
            raise ValueError("at least one evidence method required")
        if self.prob_method not in self.methods:
            self.prob_method = self.methods[0]


def _child_seed(root: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=root, spawn_key=key)
               .generate_state(1)[0])


def analyze_dataset(y, prior_kind: str, cfg: AnalysisConfig,
                    chain_sink=None) -> SelectionReport:
    """Run the whole selection pipeline on a raw data vector for one prior setting.

    chain_sink, if given, is called with (family, chain) for each MH run.
    """
    if prior_kind not in ("A", "B"):
        raise ValueError(f"prior_kind must be 'A' or 'B', got {prior_kind}")
    data = prepare(y)
    n_star = cfg.n_star if cfg.n_star is not None else data.n
    imaginary = make_imaginary(n_star=n_star, source=cfg.imaginary_source,
                               seed=_child_seed(cfg.seed, 99),
                               observed=data.raw)
    anchor = estimate_dual_anchor(imaginary)
    prior_idx = 0 if prior_kind == "A" else 1

    results: list[FamilyResult] = []
    for fam_idx, family in enumerate(ALL_FAMILIES):
        if family not in cfg.families:
            continue
        ctx = LikelihoodContext(family, data, include_constant=cfg.include_constant)
        if not family.has_lambda:
            results.append(FamilyResult(
                family=family, prior_kind=prior_kind,
                evidence={"closed_form": evidence_closed_form(ctx)},
                lambda_mode=None, lambda_sd=None))
            continue

        if prior_kind == "A":
            prior = build_power_prior(family, imaginary)
        else:
            prior = build_unit_info_prior(family, imaginary, anchor=anchor)

        mh_cfg = replace(cfg.mh, seed=_child_seed(cfg.seed, fam_idx, prior_idx, 0))
        chain = run_mh(ctx, prior, mh_cfg)
        if chain_sink is not None:
            chain_sink(family, chain)

        evidence = {}
        if CHIB in cfg.methods:
            evidence[CHIB] = evidence_chib(
                ctx, prior, chain, J=cfg.chib_draws,
                seed=_child_seed(cfg.seed, fam_idx, prior_idx, 1))
        if "laplace_metropolis" in cfg.methods:
            evidence["laplace_metropolis"] = evidence_laplace_metropolis(
                ctx, prior, chain)
        if "quadrature" in cfg.methods:
            evidence["quadrature"] = evidence_quadrature(ctx, prior)

        mode, _, sd = posterior_summary(chain)
        results.append(FamilyResult(family=family, prior_kind=prior_kind,
                                    evidence=evidence, lambda_mode=mode,
                                    lambda_sd=sd))

    return posterior_model_probs(results, prior_kind=prior_kind,
                                 prob_method=cfg.prob_method)


def run_scenario(spec: ScenarioSpec, prior_kind: str,
                 cfg: AnalysisConfig | None = None,
                 chain_sink=None) -> SelectionReport:
    cfg = cfg if cfg is not None else AnalysisConfig(seed=spec.seed)
    return analyze_dataset(generate(spec), prior_kind, cfg, chain_sink=chain_sink)


def gamma_params_for_skewness(skew: float) -> tuple[float, float]:
    """(shape, rate) giving the requested skewness with mean one."""
    a = (2.0 / skew) ** 2
    return a, a


@dataclass(frozen=True)
class SweepSpec:
    """Sensitivity sweep over gamma skewness or student degrees of freedom."""

    axis: str                       # "gamma_skewness" | "student_df"
    points: tuple
    n: int = 1000
    prior_kind: str = "A"
    replications: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.axis not in ("gamma_skewness", "student_df"):
            raise ValueError(f"unknown sweep axis: {self.axis}")
        if not self.points:
            raise ValueError("sweep needs at least one axis point")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


def _sweep_scenario(sweep: SweepSpec, point, seed: int) -> ScenarioSpec:
    if sweep.axis == "gamma_skewness":
        a, b = gamma_params_for_skewness(float(point))
        return ScenarioSpec(distribution="gamma", n=sweep.n, seed=seed,
                            shape=a, rate=b)
    return ScenarioSpec(distribution="student", n=sweep.n, seed=seed,
                        df=float(point), ncp=0.0)


def run_sweep(sweep: SweepSpec, cfg: AnalysisConfig | None = None,
              on_point=None) -> list[dict]:
    """Replicated scenarios per axis point, aggregated into plot-ready rows.

    Each cell is seeded from (sweep seed, point index, replication index).
    on_point, if given, receives each point's rows as they complete; a failing
    point is skipped after its partial rows are flushed.
    """
    rows: list[dict] = []
    for p_idx, point in enumerate(sweep.points):
        probs: dict[Family, list[float]] = {f: [] for f in ALL_FAMILIES}
        modes: dict[Family, list[float]] = {f: [] for f in ALL_FAMILIES}
        failed = False
        for rep in range(sweep.replications):
            cell_seed = _child_seed(sweep.seed, p_idx, rep)
            spec = _sweep_scenario(sweep, point, cell_seed)
            run_cfg = cfg if cfg is not None else AnalysisConfig()
            run_cfg = replace(run_cfg, seed=cell_seed)
            try:
                report = run_scenario(spec, sweep.prior_kind, run_cfg)
            except TranselectError:
                failed = True
                break
            for r in report.results:
                probs[r.family].append(r.posterior_model_prob)
                if r.lambda_mode is not None:
                    modes[r.family].append(r.lambda_mode)
        point_rows = []
        for family in ALL_FAMILIES:
            if not probs[family]:
                continue
            point_rows.append({
                "axis_value": float(point),
                "family": family.value,
                "prior": sweep.prior_kind,
                "mean_pmp": float(np.mean(probs[family])),
                "mean_lambda_mode": (float(np.mean(modes[family]))
                                     if modes[family] else math.nan),
                "replications": len(probs[family]),
            })
        rows.extend(point_rows)
        if on_point is not None:
            on_point(point_rows)
        if failed:
            continue
    return rows
