"""Marginalized likelihood of the untransformed data and posterior sampling for lambda."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .errors import DegenerateTransform, MixingFailure
from .families import Family, PreparedData

_BRANCH_TOL = 1e-10


def _log_constant(n: int) -> float:
    # Exact normalizer from integrating out location/scale under the 1/sigma^2 prior.
    return float(gammaln((n - 1) / 2.0) - (n - 1) / 2.0 * math.log(math.pi)
                 - 0.5 * math.log(n))


class LikelihoodContext:
    """Per-(family, dataset) cache for fast repeated likelihood evaluation.

    log f(y | lambda, T) = C(n) - ((n-1)/2) log SS(lambda) + log|J(lambda)|
    with SS the centered sum of squares of the transformed data. C(n) is
    common to every family and optional.
    """

    def __init__(self, family: Family, data: PreparedData,
                 include_constant: bool = True):
        self.family = family
        self.data = data
        self.include_constant = include_constant
        self.n = data.n
        self.constant = _log_constant(self.n) if include_constant else 0.0

        if family.requires_shift:
            v = data.shifted()
            self._logv = np.log(v)
        else:
            y = data.standardized
            if family is Family.MODULUS:
                self._sign = np.where(y >= 0.0, 1.0, -1.0)
                self._logu = np.log(np.abs(y) + 1.0)
            elif family is Family.YEOJOHNSON:
                pos = y >= 0.0
                self._logu_pos = np.log(y[pos] + 1.0)
                self._logu_neg = np.log(1.0 - y[~pos])
            else:
                self._y = y
        if family in (Family.ID, Family.LOG):
            self._fixed = self._evaluate(0.0)

    def _transform_and_jacobian(self, lam: float) -> tuple[np.ndarray, float]:
        fam = self.family
        if fam is Family.ID:
            return self.data.standardized, 0.0
        if fam is Family.LOG:
            return self._logv, float(-self._logv.sum())
        if fam is Family.BOXCOX:
            lj = (lam - 1.0) * float(self._logv.sum())
            if abs(lam) < _BRANCH_TOL:
                return self._logv, lj
            return (np.exp(lam * self._logv) - 1.0) / lam, lj
        if fam is Family.MODULUS:
            lj = (lam - 1.0) * float(self._logu.sum())
            if abs(lam) < _BRANCH_TOL:
                return self._sign * self._logu, lj
            return self._sign * (np.exp(lam * self._logu) - 1.0) / lam, lj
        if fam is Family.YEOJOHNSON:
            lj = (lam - 1.0) * (float(self._logu_pos.sum()) - float(self._logu_neg.sum()))
            if abs(lam) < _BRANCH_TOL:
                zp = self._logu_pos
            else:
                zp = (np.exp(lam * self._logu_pos) - 1.0) / lam
            if abs(lam - 2.0) < _BRANCH_TOL:
                zn = -self._logu_neg
            else:
                zn = -(np.exp((2.0 - lam) * self._logu_neg) - 1.0) / (2.0 - lam)
            return np.concatenate([zp, zn]), lj
        if fam is Family.DUAL:
            logv = self._logv
            lj = float((np.logaddexp((lam - 1.0) * logv, (-lam - 1.0) * logv)
                        - math.log(2.0)).sum())
            if abs(lam) < _BRANCH_TOL:
                return logv, lj
            return np.sinh(lam * logv) / lam, lj
        raise AssertionError(fam)

    def _evaluate(self, lam: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            z, lj = self._transform_and_jacobian(lam)
            ss = float(np.sum((z - z.mean()) ** 2))
        if not math.isfinite(ss) or not math.isfinite(lj):
            return -math.inf
        if ss <= 0.0:
            raise DegenerateTransform(
                f"transformed data have zero variance ({self.family.value}, lam={lam})")
        return self.constant - (self.n - 1) / 2.0 * math.log(ss) + lj

    def loglik(self, lam: float = 0.0) -> float:
        """log f(y | lambda, T); lambda is ignored for Id and Log."""
        if self.family in (Family.ID, Family.LOG):
            return self._fixed
        self.family.check_lambda(lam)
        return self._evaluate(lam)


def log_marginalized_likelihood(ctx: LikelihoodContext, lam: float = 0.0) -> float:
    return ctx.loglik(lam)


def log_posterior_kernel(ctx: LikelihoodContext, prior, lam: float) -> float:
    """Unnormalized log posterior of lambda: likelihood plus prior log density."""
    lp = prior.log_density(lam)
    if lp == -math.inf:
        return -math.inf
    return ctx.loglik(lam) + lp


@dataclass
class MhConfig:
    burn_in: int = 4000
    draws: int = 16000
    initial_step: float = 0.5
    target_accept: tuple[float, float] = (0.3, 0.5)
    adapt_window: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.draws < 1000:
            raise ValueError("draws must be at least 1000")
        if not (0.0 < self.target_accept[0] < self.target_accept[1] < 1.0):
            raise ValueError("target_accept must be a subinterval of (0, 1)")
        if self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")


@dataclass
class PosteriorChain:
    """Post-burn-in MH output. Dual chains live on the log-lambda scale."""

    family: Family
    on_log_scale: bool
    draws: np.ndarray            # sampling scale
    log_kernel: np.ndarray       # log posterior kernel at each draw
    accept_rate: float
    step_sd: float               # tuned proposal sd, sampling scale (sqrt of k*)
    mode: float                  # refined kernel argmax, sampling scale

    @property
    def lambda_draws(self) -> np.ndarray:
        return np.exp(self.draws) if self.on_log_scale else self.draws

    @property
    def lambda_mode(self) -> float:
        return math.exp(self.mode) if self.on_log_scale else self.mode

    @property
    def lambda_sd(self) -> float:
        return float(self.lambda_draws.std(ddof=1))


def run_mh(ctx, prior, cfg: MhConfig) -> PosteriorChain:
    """Adaptive Gaussian random-walk Metropolis-Hastings for the transformation parameter.

    Dual is sampled on log-lambda so proposals never leave the positive axis;
    the kernel then carries the +log(lambda) change-of-variable term. The
    proposal sd follows a Robbins-Monro recursion toward the midpoint of
    cfg.target_accept during burn-in and is frozen afterwards.
    """
    family = ctx.family
    on_log = family is Family.DUAL

    def kernel(x: float) -> float:
        lam = math.exp(x) if on_log else x
        dom = family.lambda_domain
        if dom is not None and not (dom[0] < lam < dom[1]):
            return -math.inf
        val = log_posterior_kernel(ctx, prior, lam)
        return val + x if on_log else val

    rng = np.random.default_rng(cfg.seed)
    x = math.log(1.2) if on_log else 1.0
    k = kernel(x)
    if k == -math.inf:
        x = getattr(prior, "location", 0.0 if on_log else 1.0)
        k = kernel(x)
    target = 0.5 * (cfg.target_accept[0] + cfg.target_accept[1])
    log_step = math.log(cfg.initial_step)

    total = cfg.burn_in + cfg.draws
    draws = np.empty(cfg.draws)
    kernels = np.empty(cfg.draws)
    accepted = 0
    for t in range(total):
        prop = x + rng.normal(0.0, math.exp(log_step))
        kp = kernel(prop)
        if kp == -math.inf:
            alpha = 0.0
        else:
            alpha = min(1.0, math.exp(min(0.0, kp - k)))
        if rng.random() < alpha:
            x, k = prop, kp
            if t >= cfg.burn_in:
                accepted += 1
        if t < cfg.burn_in:
            log_step += (alpha - target) / (t + 1) ** 0.6
        else:
            draws[t - cfg.burn_in] = x
            kernels[t - cfg.burn_in] = k

    accept_rate = accepted / cfg.draws
    if accept_rate < 0.05 or accept_rate > 0.95:
        raise MixingFailure(
            f"post-burn-in acceptance {accept_rate:.3f} for {family.value}")

    step_sd = math.exp(log_step)
    best = float(draws[int(np.argmax(kernels))])
    res = minimize_scalar(lambda v: -kernel(v), bounds=(best - 3 * step_sd,
                                                        best + 3 * step_sd),
                          method="bounded", options={"xatol": 1e-8})
    mode = float(res.x) if -res.fun >= kernels.max() else best

    return PosteriorChain(family=family, on_log_scale=on_log, draws=draws,
                          log_kernel=kernels, accept_rate=accept_rate,
                          step_sd=step_sd, mode=mode)


def posterior_summary(chain: PosteriorChain) -> tuple[float, float, float]:
    """(mode, mean, sd) of the lambda draws, on the lambda scale."""
    lam = chain.lambda_draws
    if lam.size == 0:
        raise ValueError("empty chain")
    sd = float(lam.std(ddof=1)) if lam.size > 1 else 0.0
    return chain.lambda_mode, float(lam.mean()), sd
