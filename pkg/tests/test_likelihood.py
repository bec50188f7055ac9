import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import gammaln
from scipy.stats import norm

from transelect.errors import DegenerateTransform, MixingFailure
from transelect.families import Family, prepare
from transelect.likelihood import (LikelihoodContext, MhConfig, PosteriorChain,
                                   log_marginalized_likelihood,
                                   log_posterior_kernel, posterior_summary,
                                   run_mh)
from transelect.priors import UnitInfoPrior, build_power_prior, make_imaginary
from transelect.simulate import ScenarioSpec, generate

from _oracles import brute_force_log_evidence, make_data


def _normal_data(n=60, seed=3):
    return prepare(np.random.default_rng(seed).normal(size=n))


class _FlatLikelihood:
    """Stub context with no data information: the posterior equals the prior."""

    def __init__(self, family=Family.BOXCOX):
        self.family = family
        self.include_constant = True

    def loglik(self, lam=0.0):
        return 0.0


class TestMarginalizedLikelihood:
    def test_id_constant_in_lambda(self):
        ctx = LikelihoodContext(Family.ID, _normal_data())
        vals = {ctx.loglik(lam) for lam in (-2.0, 0.0, 1.0, 5.0)}
        assert len(vals) == 1

    def test_boxcox_equals_modulus_on_preincremented_data(self):
        y = np.array([0.4, 1.3, 0.8, 2.6, 0.1, 1.9])
        mod = make_data(y)
        bc = make_data(y + 1.0)
        ctx_mod = LikelihoodContext(Family.MODULUS, mod)
        ctx_bc = LikelihoodContext(Family.BOXCOX, bc)
        for lam in (-1.0, -0.2, 0.0, 0.7, 1.0, 2.4):
            assert abs(ctx_mod.loglik(lam) - ctx_bc.loglik(lam)) < 1e-10

    def test_include_constant_shifts_by_exact_constant(self):
        data = _normal_data(n=41)
        n = data.n
        c = float(gammaln((n - 1) / 2.0) - (n - 1) / 2.0 * math.log(math.pi)
                  - 0.5 * math.log(n))
        for family in (Family.ID, Family.BOXCOX, Family.DUAL):
            with_c = LikelihoodContext(family, data, include_constant=True)
            without = LikelihoodContext(family, data, include_constant=False)
            for lam in (0.4, 1.0, 1.9):
                diff = with_c.loglik(lam) - without.loglik(lam)
                assert abs(diff - c) < 1e-10

    def test_degenerate_transform_raises(self):
        # Constant input has zero variance under the identity map; the fixed
        # value for a parameter-free family is computed eagerly.
        with pytest.raises(DegenerateTransform):
            ctx = LikelihoodContext(Family.ID, make_data([0.0, 0.0, 0.0]))
            ctx.loglik()

    def test_module_level_wrapper(self):
        ctx = LikelihoodContext(Family.BOXCOX, _normal_data())
        assert log_marginalized_likelihood(ctx, 0.8) == ctx.loglik(0.8)

    def test_matches_two_d_brute_force(self):
        data = prepare(np.random.default_rng(12).normal(size=8))
        for family, lam in ((Family.ID, 0.0), (Family.LOG, 0.0),
                            (Family.BOXCOX, 0.6), (Family.MODULUS, 1.4),
                            (Family.YEOJOHNSON, -0.5), (Family.DUAL, 0.8)):
            ctx = LikelihoodContext(family, data, include_constant=True)
            oracle = brute_force_log_evidence(family, data, lam)
            assert abs(ctx.loglik(lam) - oracle) < 1e-3, family


class TestPosteriorKernel:
    def test_kernel_difference_identity(self):
        data = _normal_data()
        ctx = LikelihoodContext(Family.MODULUS, data)
        prior = UnitInfoPrior(Family.MODULUS, location=1.0, scale=0.5,
                              on_log_scale=False)
        for l1, l2 in ((0.2, 1.4), (-0.5, 2.0)):
            lhs = log_posterior_kernel(ctx, prior, l1) - log_posterior_kernel(ctx, prior, l2)
            rhs = (ctx.loglik(l1) + prior.log_density(l1)
                   - ctx.loglik(l2) - prior.log_density(l2))
            assert abs(lhs - rhs) < 1e-12

    def test_outside_prior_support_is_minus_inf(self):
        data = _normal_data()
        ctx = LikelihoodContext(Family.DUAL, data)
        prior = UnitInfoPrior(Family.DUAL, location=0.0, scale=0.3,
                              on_log_scale=True)
        assert log_posterior_kernel(ctx, prior, -0.5) == -math.inf

    def test_degenerate_prior_pins_argmax_to_prior_mean(self):
        data = _normal_data(n=100, seed=9)
        ctx = LikelihoodContext(Family.BOXCOX, data)
        prior = UnitInfoPrior(Family.BOXCOX, location=0.8, scale=1e-6,
                              on_log_scale=False)
        res = minimize_scalar(lambda lam: -log_posterior_kernel(ctx, prior, lam),
                              bounds=(0.7, 0.9), method="bounded",
                              options={"xatol": 1e-9})
        assert abs(float(res.x) - 0.8) < 1e-3


class TestMhConfig:
    def test_defaults_valid(self):
        cfg = MhConfig()
        assert cfg.burn_in == 4000 and cfg.draws == 16000

    def test_too_few_draws_rejected(self):
        with pytest.raises(ValueError):
            MhConfig(draws=500)

    def test_bad_target_rejected(self):
        with pytest.raises(ValueError):
            MhConfig(target_accept=(0.5, 0.3))


class TestRunMh:
    def test_flat_likelihood_recovers_prior(self):
        prior = UnitInfoPrior(Family.BOXCOX, location=0.7, scale=0.3,
                              on_log_scale=False)
        chain = run_mh(_FlatLikelihood(), prior,
                       MhConfig(burn_in=2000, draws=20000, seed=3))
        assert abs(float(chain.draws.mean()) - 0.7) < 0.03
        assert abs(float(chain.draws.std(ddof=1)) - 0.3) < 0.03

    def test_same_seed_bit_identical(self):
        data = _normal_data()
        ctx = LikelihoodContext(Family.BOXCOX, data)
        prior = UnitInfoPrior(Family.BOXCOX, location=1.0, scale=0.5,
                              on_log_scale=False)
        cfg = MhConfig(burn_in=500, draws=2000, seed=17)
        c1 = run_mh(ctx, prior, cfg)
        c2 = run_mh(ctx, prior, cfg)
        np.testing.assert_array_equal(c1.draws, c2.draws)
        assert c1.mode == c2.mode and c1.step_sd == c2.step_sd

    def test_acceptance_rate_in_target_band(self):
        data = _normal_data(n=100, seed=2)
        ctx = LikelihoodContext(Family.YEOJOHNSON, data)
        prior = UnitInfoPrior(Family.YEOJOHNSON, location=1.0, scale=0.5,
                              on_log_scale=False)
        chain = run_mh(ctx, prior, MhConfig(burn_in=2000, draws=8000, seed=1))
        assert 0.2 < chain.accept_rate < 0.6

    def test_dual_draws_strictly_positive(self):
        data = _normal_data(n=80, seed=6)
        ctx = LikelihoodContext(Family.DUAL, data)
        prior = UnitInfoPrior(Family.DUAL, location=math.log(1.2), scale=0.4,
                              on_log_scale=True)
        chain = run_mh(ctx, prior, MhConfig(burn_in=1000, draws=4000, seed=4))
        assert chain.on_log_scale
        assert np.all(chain.lambda_draws > 0.0)

    def test_mode_maximizes_kernel_over_draws(self):
        prior = UnitInfoPrior(Family.MODULUS, location=0.5, scale=0.4,
                              on_log_scale=False)
        ctx = LikelihoodContext(Family.MODULUS, _normal_data(seed=8))
        chain = run_mh(ctx, prior, MhConfig(burn_in=1000, draws=4000, seed=9))
        kern = lambda x: log_posterior_kernel(ctx, prior, x)
        assert kern(chain.mode) >= float(chain.log_kernel.max()) - 1e-12

    def test_mixing_failure_on_pathological_step(self):
        # A gigantic frozen step after no adaptation window forces rejections.
        prior = UnitInfoPrior(Family.BOXCOX, location=1.0, scale=1e-4,
                              on_log_scale=False)
        ctx = LikelihoodContext(Family.BOXCOX, _normal_data(seed=5))
        with pytest.raises(MixingFailure):
            run_mh(ctx, prior, MhConfig(burn_in=0, draws=2000,
                                        initial_step=5e3, seed=0))

    def test_detailed_balance_total_variation(self):
        # Flat likelihood: the normalized kernel is the prior itself, so the
        # chain histogram must match normal bin masses on a 200-point grid.
        prior = UnitInfoPrior(Family.BOXCOX, location=0.0, scale=1.0,
                              on_log_scale=False)
        chain = run_mh(_FlatLikelihood(), prior,
                       MhConfig(burn_in=4000, draws=50000, seed=12))
        edges = np.linspace(-4.0, 4.0, 201)
        hist, _ = np.histogram(chain.draws, bins=edges)
        emp = hist / chain.draws.size
        exact = np.diff(norm.cdf(edges))
        exact = exact / exact.sum()
        tv = 0.5 * float(np.abs(emp - exact).sum())
        assert tv < 0.05, tv


class TestPosteriorSummary:
    def test_degenerate_chain(self):
        chain = PosteriorChain(family=Family.BOXCOX, on_log_scale=False,
                               draws=np.full(5, 0.7), log_kernel=np.zeros(5),
                               accept_rate=0.4, step_sd=0.1, mode=0.7)
        mode, mean, sd = posterior_summary(chain)
        assert (mode, mean, sd) == (0.7, 0.7, 0.0)

    def test_symmetric_synthetic_chain(self):
        rng = np.random.default_rng(0)
        draws = rng.normal(0.9, 0.08, size=20000)
        chain = PosteriorChain(family=Family.BOXCOX, on_log_scale=False,
                               draws=draws, log_kernel=np.zeros(draws.size),
                               accept_rate=0.4, step_sd=0.1, mode=0.9)
        mode, mean, sd = posterior_summary(chain)
        assert abs(mode - mean) < 3.0 * sd / math.sqrt(draws.size)

    def test_empty_chain_rejected(self):
        chain = PosteriorChain(family=Family.BOXCOX, on_log_scale=False,
                               draws=np.empty(0), log_kernel=np.empty(0),
                               accept_rate=0.0, step_sd=0.1, mode=0.0)
        with pytest.raises(ValueError):
            posterior_summary(chain)


class TestPosteriorBands:
    """Posterior-summary bands on the reference simulated scenarios."""

    def test_gamma_boxcox_posterior_band(self):
        y = generate(ScenarioSpec("gamma", 100, seed=1000, shape=2.0, rate=3.0))
        data = prepare(y)
        imaginary = make_imaginary(n_star=100, seed=42)
        prior = build_power_prior(Family.BOXCOX, imaginary)
        ctx = LikelihoodContext(Family.BOXCOX, data)
        chain = run_mh(ctx, prior, MhConfig(seed=7))
        mode, _, sd = posterior_summary(chain)
        assert abs(mode - 0.44) < 0.15
        assert abs(sd - 0.09) < 0.05

    def test_large_normal_boxcox_mode_band(self):
        y = generate(ScenarioSpec("normal", 1000, seed=1000))
        data = prepare(y)
        imaginary = make_imaginary(n_star=1000, seed=42)
        prior = build_power_prior(Family.BOXCOX, imaginary)
        ctx = LikelihoodContext(Family.BOXCOX, data)
        chain = run_mh(ctx, prior, MhConfig(seed=7))
        mode, _, _ = posterior_summary(chain)
        assert abs(mode - 0.93) < 0.15

    def test_kernel_finite_on_prior_support_grid(self):
        for dist, kw in (("normal", {}), ("gamma", {"shape": 2.0, "rate": 3.0}),
                         ("student", {"df": 2.0, "ncp": -1.0})):
            y = generate(ScenarioSpec(dist, 100, seed=31, **kw))
            data = prepare(y)
            imaginary = make_imaginary(n_star=100, seed=31)
            for family in (Family.BOXCOX, Family.MODULUS, Family.YEOJOHNSON):
                ctx = LikelihoodContext(family, data)
                prior = build_power_prior(family, imaginary)
                for lam in np.linspace(-4.0, 6.0, 41):
                    assert math.isfinite(log_posterior_kernel(ctx, prior, lam))
