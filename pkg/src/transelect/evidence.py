"""Marginal-likelihood estimators and posterior model probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentEvidence, OrdinateUnderflow
from .families import ALL_FAMILIES, Family
from .likelihood import LikelihoodContext, PosteriorChain, log_posterior_kernel
from .quadrature import default_limits, default_window, log_integral

CHIB = "chib"
LAPLACE_METROPOLIS = "laplace_metropolis"
QUADRATURE = "quadrature"
CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class EvidenceEstimate:
    log_marginal: float
    method: str
    mc_se: float | None = None
    include_constant: bool = True
    diagnostics: dict = field(default_factory=dict)


def evidence_closed_form(ctx: LikelihoodContext) -> EvidenceEstimate:
    """Exact evidence for the parameter-free Id and Log families."""
    if ctx.family.has_lambda:
        raise ValueError(f"{ctx.family.value} has a transformation parameter")
    return EvidenceEstimate(log_marginal=ctx.loglik(), method=CLOSED_FORM,
                            include_constant=ctx.include_constant)


def _sampling_kernel(ctx: LikelihoodContext, prior, on_log: bool):
    """Log posterior kernel on the sampling scale used by the MH chain."""
    def kern(x: float) -> float:
        lam = math.exp(x) if on_log else x
        val = log_posterior_kernel(ctx, prior, lam)
        return val + x if on_log else val
    return kern


def _log_prior_sampling(prior, on_log: bool, x: float) -> float:
    lam = math.exp(x) if on_log else x
    val = prior.log_density(lam)
    return val + x if on_log else val


def evidence_chib(ctx: LikelihoodContext, prior, chain: PosteriorChain,
                  J: int = 2000, seed: int = 0, n_batches: int = 50) -> EvidenceEstimate:
    """Candidate estimator: likelihood and prior at the mode minus the estimated
    posterior ordinate, with the ordinate built from the MH output."""
    if J < 500:
        raise ValueError("J must be at least 500")
    on_log = chain.on_log_scale
    kern = _sampling_kernel(ctx, prior, on_log)
    x_star = chain.mode
    k_var = chain.step_sd ** 2
    log_k_star = kern(x_star)

    # Numerator: chain average of acceptance-probability-weighted proposal density.
    diff = np.minimum(0.0, log_k_star - chain.log_kernel)
    log_pdf = (-0.5 * math.log(2.0 * math.pi * k_var)
               - (x_star - chain.draws) ** 2 / (2.0 * k_var))
    num_terms = np.exp(diff + log_pdf)
    num = float(num_terms.mean())

    # Denominator: fresh proposal draws centered at the mode.
    rng = np.random.default_rng(seed)
    xj = rng.normal(x_star, math.sqrt(k_var), size=J)
    log_k_j = np.array([kern(float(x)) for x in xj])
    den_terms = np.exp(np.minimum(0.0, log_k_j - log_k_star))
    den = float(den_terms.mean())

    if num <= 0.0 or den <= 0.0:
        raise OrdinateUnderflow(
            f"posterior ordinate underflowed for {ctx.family.value}")
    log_ordinate = math.log(num) - math.log(den)

    batches = np.array_split(num_terms, n_batches)
    batch_means = np.array([b.mean() for b in batches])
    se_num = float(batch_means.std(ddof=1) / math.sqrt(len(batch_means)))
    se_den = float(den_terms.std(ddof=1) / math.sqrt(J))
    mc_se = math.sqrt((se_num / num) ** 2 + (se_den / den) ** 2)

    lam_star = chain.lambda_mode
    log_marginal = (ctx.loglik(lam_star)
                    + _log_prior_sampling(prior, on_log, x_star)
                    - log_ordinate)
    return EvidenceEstimate(
        log_marginal=log_marginal, method=CHIB, mc_se=mc_se,
        include_constant=ctx.include_constant,
        diagnostics={"J": J, "M": chain.draws.size, "k_star": k_var,
                     "lambda_star": lam_star, "log_ordinate": log_ordinate})


def evidence_laplace_metropolis(ctx: LikelihoodContext, prior,
                                chain: PosteriorChain) -> EvidenceEstimate:
    """Gaussian approximation around the chain mode, using the chain variance."""
    on_log = chain.on_log_scale
    var = float(chain.draws.var(ddof=1))
    x_star = chain.mode
    lam_star = chain.lambda_mode
    log_marginal = (0.5 * math.log(2.0 * math.pi) + 0.5 * math.log(var)
                    + _log_prior_sampling(prior, on_log, x_star)
                    + ctx.loglik(lam_star))
    return EvidenceEstimate(
        log_marginal=log_marginal, method=LAPLACE_METROPOLIS,
        include_constant=ctx.include_constant,
        diagnostics={"lambda_star": lam_star, "posterior_var": var})


def evidence_quadrature(ctx: LikelihoodContext, prior) -> EvidenceEstimate:
    """Direct numerical integration of likelihood times prior over lambda."""
    positive = ctx.family is Family.DUAL
    lo, hi = default_window(positive)
    limits = default_limits(positive)

    if getattr(prior, "kind", None) == "A":
        # Ratio form: joint integral with the discounted imaginary likelihood
        # over the precomputed prior normalizer.
        imaginary = prior.imaginary

        def joint(lam: float) -> float:
            return (ctx.loglik(lam)
                    + imaginary.context(ctx.family).loglik(lam) * imaginary.alpha0)

        num = log_integral(joint, lo, hi, limits=limits, boundary_lo=positive)
        log_marginal = num - prior.log_norm_const
    else:
        def integrand(lam: float) -> float:
            lp = prior.log_density(lam)
            return -math.inf if lp == -math.inf else ctx.loglik(lam) + lp

        # Start from the prior's own 10-sigma window so that arbitrarily narrow
        # priors are still resolved by the initial grid; expansion widens it
        # whenever the likelihood pushes mass outside.
        if prior.on_log_scale:
            lo = math.exp(prior.location - 10.0 * prior.scale)
            hi = math.exp(prior.location + 10.0 * prior.scale)
        else:
            lo = prior.location - 10.0 * prior.scale
            hi = prior.location + 10.0 * prior.scale
        lo, hi = max(lo, limits[0]), min(hi, limits[1])
        log_marginal = log_integral(integrand, lo, hi, limits=limits,
                                    boundary_lo=positive)

    return EvidenceEstimate(log_marginal=log_marginal, method=QUADRATURE,
                            include_constant=ctx.include_constant)


@dataclass
class FamilyResult:
    family: Family
    prior_kind: str
    evidence: dict[str, EvidenceEstimate]
    lambda_mode: float | None
    lambda_sd: float | None
    posterior_model_prob: float = math.nan


@dataclass
class SelectionReport:
    prior_kind: str
    prob_method: str
    results: list[FamilyResult]

    @property
    def ranking(self) -> list[Family]:
        order = {fam: i for i, fam in enumerate(ALL_FAMILIES)}
        return [r.family for r in sorted(
            self.results,
            key=lambda r: (-r.posterior_model_prob, order[r.family]))]

    def result_for(self, family: Family) -> FamilyResult:
        for r in self.results:
            if r.family is family:
                return r
        raise KeyError(family)

    def probabilities(self) -> dict[Family, float]:
        return {r.family: r.posterior_model_prob for r in self.results}

    def to_dict(self) -> dict:
        return {
            "prior_kind": self.prior_kind,
            "prob_method": self.prob_method,
            "ranking": [f.value for f in self.ranking],
            "families": [
                {
                    "family": r.family.value,
                    "prior_kind": r.prior_kind,
                    "posterior_model_prob": r.posterior_model_prob,
                    "lambda_mode": r.lambda_mode,
                    "lambda_sd": r.lambda_sd,
                    "evidence": {
                        m: {"log_marginal": e.log_marginal, "mc_se": e.mc_se,
                            "diagnostics": e.diagnostics}
                        for m, e in sorted(r.evidence.items())
                    },
                }
                for r in self.results
            ],
        }

    def csv_rows(self) -> list[dict]:
        rows = []
        for r in self.results:
            for method, est in sorted(r.evidence.items()):
                rows.append({
                    "family": r.family.value,
                    "prior": r.prior_kind,
                    "method": method,
                    "log_marginal": est.log_marginal,
                    "mc_se": "" if est.mc_se is None else est.mc_se,
                    "posterior_model_prob": r.posterior_model_prob,
                    "lambda_mode": "" if r.lambda_mode is None else r.lambda_mode,
                    "lambda_sd": "" if r.lambda_sd is None else r.lambda_sd,
                })
        return rows


def _prob_estimate(result: FamilyResult, prob_method: str) -> EvidenceEstimate:
    if CLOSED_FORM in result.evidence:
        return result.evidence[CLOSED_FORM]
    try:
        return result.evidence[prob_method]
    except KeyError:
        raise InconsistentEvidence(
            f"no {prob_method} evidence for {result.family.value}") from None


def posterior_model_probs(results: list[FamilyResult], prior_kind: str,
                          prob_method: str = CHIB) -> SelectionReport:
    """Normalize per-family evidence into posterior model probabilities.

    The uniform prior over families cancels in the normalization. Every family
    must carry evidence under the same log-constant convention.
    """
    chosen = {r.family: _prob_estimate(r, prob_method) for r in results}
    conventions = {e.include_constant for e in chosen.values()}
    if len(conventions) > 1:
        raise InconsistentEvidence("mixed include_constant conventions")
    order = {fam: i for i, fam in enumerate(ALL_FAMILIES)}
    results = sorted(results, key=lambda r: order[r.family])
    logs = np.array([chosen[r.family].log_marginal for r in results])
    # Subtracting the maximum before exponentiating keeps the normalization
    # stable and nearly exactly invariant to common shifts of the inputs.
    weights = np.exp(logs - logs.max())
    probs = weights / weights.sum()
    for r, p in zip(results, probs):
        r.posterior_model_prob = float(p)
    return SelectionReport(prior_kind=prior_kind, prob_method=prob_method,
                           results=results)
