"""Compatible priors for the transformation parameter: power prior and unit-information prior."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonPositiveCurvature
from .families import Family, PreparedData, prepare
from .likelihood import LikelihoodContext
from .quadrature import default_limits, default_window, log_integral

DUAL_ANCHOR_DEFAULT = 1.2


@dataclass
class ImaginaryData:
    """Standardized imaginary dataset grounding both prior settings.

    The discount exponent is fixed at 1/n_star so the data contribute one
    unit of information regardless of their size.
    """

    prepared: PreparedData
    source: str                      # "simulated" | "empirical"
    seed: int | None = None
    _contexts: dict = field(default_factory=dict, repr=False)

    @property
    def n_star(self) -> int:
        return self.prepared.n

    @property
    def alpha0(self) -> float:
        return 1.0 / self.n_star

    def context(self, family: Family) -> LikelihoodContext:
        # Constants are dropped: they cancel in every normalized density built here.
        if family not in self._contexts:
            self._contexts[family] = LikelihoodContext(
                family, self.prepared, include_constant=False)
        return self._contexts[family]


def make_imaginary(n_star: int = 100, source: str = "simulated",
                   seed: int = 0, observed=None) -> ImaginaryData:
    """Simulated standard-normal imaginary data, or a standardized copy of the observed."""
    if source == "simulated":
        if n_star < 10:
            raise ValueError("n_star must be at least 10")
        values = np.random.default_rng(seed).normal(size=n_star)
    elif source == "empirical":
        if observed is None:
            raise ValueError("empirical source requires the observed data")
        values = np.asarray(observed, dtype=float)
    else:
        raise ValueError(f"unknown imaginary-data source: {source}")
    return ImaginaryData(prepared=prepare(values), source=source, seed=seed)


def log_power_prior_kernel(family: Family, imaginary: ImaginaryData,
                           lam: float) -> float:
    """Unnormalized log power prior: the imaginary-data log likelihood discounted by 1/n*."""
    return imaginary.context(family).loglik(lam) * imaginary.alpha0


def power_prior_log_norm_const(family: Family, imaginary: ImaginaryData) -> float:
    """log of the integral of the discounted imaginary-data likelihood over lambda."""
    positive = family is Family.DUAL
    lo, hi = default_window(positive)
    return log_integral(lambda lam: log_power_prior_kernel(family, imaginary, lam),
                        lo, hi, limits=default_limits(positive),
                        boundary_lo=positive)


@dataclass(frozen=True)
class DualAnchor:
    value: float
    from_fallback: bool = False


def estimate_dual_anchor(imaginary: ImaginaryData) -> DualAnchor:
    """Dual-family parameter value acting as 'no transformation': the imaginary-data MLE."""
    ctx = imaginary.context(Family.DUAL)
    lo, hi = 1e-6, 20.0
    res = minimize_scalar(lambda lam: -ctx.loglik(lam), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-6})
    lam = float(res.x)
    # a solution stuck at either bound means no interior maximum was bracketed
    if (not res.success or not math.isfinite(res.fun)
            or lam < 100.0 * lo or lam > 0.99 * hi):
        return DualAnchor(DUAL_ANCHOR_DEFAULT, from_fallback=True)
    return DualAnchor(lam)


def _svar(x: np.ndarray) -> float:
    return float(x.var(ddof=1))


def _scov(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x - x.mean(), y - y.mean()) / (x.size - 1))


def _curvature_inputs(family: Family, imaginary: ImaginaryData,
                      anchor: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(z, dz, d2z, d2 log|J|) of the transformed imaginary data at the prior anchor.

    Derivatives are in lambda for Box-Cox/Modulus/Yeo-Johnson (anchor 1) and in
    log(lambda) for Dual (anchor log of the estimated normality value).
    """
    if family is Family.BOXCOX:
        v = imaginary.prepared.shifted()
        logv = np.log(v)
        z = v - 1.0
        w = v * logv
        dz = w - z
        d2z = w * logv - 2.0 * (w - z)
        return z, dz, d2z, 0.0
    if family is Family.MODULUS:
        y = imaginary.prepared.standardized
        s = np.where(y >= 0.0, 1.0, -1.0)
        logu = np.log(np.abs(y) + 1.0)
        z = y
        w = s * (np.abs(y) + 1.0) * logu
        dz = w - z
        d2z = w * logu - 2.0 * (w - z)
        return z, dz, d2z, 0.0
    if family is Family.YEOJOHNSON:
        y = imaginary.prepared.standardized
        pos = y >= 0.0
        u = np.where(pos, y + 1.0, 1.0 - y)
        logu = np.log(u)
        w = u * logu
        z = y.copy()
        # Positive branch matches Modulus; the negative branch carries 2-lambda,
        # flipping the sign of the first derivative of w relative to z.
        dz = np.where(pos, w - z, w + z)
        d2z = np.where(pos, w * logu - 2.0 * (w - z), -w * logu + 2.0 * (w + z))
        return z, dz, d2z, 0.0
    if family is Family.DUAL:
        v = imaginary.prepared.shifted()
        logv = np.log(v)
        ell = anchor
        a = np.power(v, ell)
        b = np.power(v, -ell)
        z = (a - b) / (2.0 * ell)
        w = (a + b) * logv / 2.0
        dz = w - z
        d2z = z * ell ** 2 * logv ** 2 - (w - z)
        denom = (np.power(v, ell - 1.0) + np.power(v, -ell - 1.0)) ** 2
        jac2 = ell * float(np.sum(
            logv * (np.power(v, 2.0 * (ell - 1.0))
                    + 4.0 * ell * logv / v ** 2
                    - np.power(v, -2.0 * (ell + 1.0))) / denom))
        return z, dz, d2z, jac2
    raise ValueError(f"{family.value} has no transformation parameter prior scale")


def fisher_scale(family: Family, imaginary: ImaginaryData,
                 anchor: DualAnchor | None = None) -> float:
    """Unit-information prior sd: inverse root of the observed information of the
    discounted imaginary-data log likelihood at the prior anchor."""
    anchor_value = (anchor.value if anchor is not None
                    else estimate_dual_anchor(imaginary).value) \
        if family is Family.DUAL else 1.0
    z, dz, d2z, jac2 = _curvature_inputs(family, imaginary, anchor_value)
    n = imaginary.n_star
    sz2 = _svar(z)
    bracket = (_svar(dz) + _scov(z, d2z)) / sz2 - 2.0 * (_scov(z, dz) / sz2) ** 2
    info = (n - 1) / n * bracket - jac2 / n
    if not math.isfinite(info) or info <= 0.0:
        raise NonPositiveCurvature(
            f"observed information {info} for {family.value} at anchor {anchor_value}")
    return info ** -0.5


@dataclass(frozen=True)
class PowerPrior:
    """Prior A: normalized power prior over lambda built from imaginary data."""

    family: Family
    imaginary: ImaginaryData
    log_norm_const: float
    kind: str = "A"

    def log_density(self, lam: float) -> float:
        dom = self.family.lambda_domain
        if dom is not None and not (dom[0] < lam < dom[1]):
            return -math.inf
        return log_power_prior_kernel(self.family, self.imaginary, lam) \
            - self.log_norm_const

    @property
    def location(self) -> float:
        return 1.0


@dataclass(frozen=True)
class UnitInfoPrior:
    """Prior B: normal prior on lambda, log-normal for Dual."""

    family: Family
    location: float
    scale: float
    on_log_scale: bool
    kind: str = "B"

    def __post_init__(self) -> None:
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"prior scale must be positive and finite, got {self.scale}")

    def log_density(self, lam: float) -> float:
        if self.on_log_scale:
            if lam <= 0.0:
                return -math.inf
            x = math.log(lam)
            jac = -x  # 1/lambda change-of-variable factor
        else:
            x, jac = lam, 0.0
        return (-0.5 * math.log(2.0 * math.pi) - math.log(self.scale)
                - (x - self.location) ** 2 / (2.0 * self.scale ** 2) + jac)


def build_power_prior(family: Family, imaginary: ImaginaryData) -> PowerPrior:
    return PowerPrior(family=family, imaginary=imaginary,
                      log_norm_const=power_prior_log_norm_const(family, imaginary))


def build_unit_info_prior(family: Family, imaginary: ImaginaryData,
                          anchor: DualAnchor | None = None) -> UnitInfoPrior:
    if family is Family.DUAL:
        if anchor is None:
            anchor = estimate_dual_anchor(imaginary)
        scale = fisher_scale(family, imaginary, anchor)
        return UnitInfoPrior(family=family, location=math.log(anchor.value),
                             scale=scale, on_log_scale=True)
    scale = fisher_scale(family, imaginary)
    return UnitInfoPrior(family=family, location=1.0, scale=scale, on_log_scale=False)


def log_prior_density(prior, lam: float) -> float:
    return prior.log_density(lam)
