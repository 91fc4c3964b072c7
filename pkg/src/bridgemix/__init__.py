"""Exponential power priors via gamma-Zolotarev latents, with a NUTS sampler.

The package provides: the exponential power distribution and its exact
sampler (:mod:`bridgemix.exppower`), the latent-variable mixture
construction (:mod:`bridgemix.mixture`), three interchangeable posterior
parametrizations with analytic gradients (:mod:`bridgemix.targets`), a
self-contained No-U-Turn sampler (:mod:`bridgemix.nuts`), MCMC diagnostics
(:mod:`bridgemix.diagnostics`), evidence-based hyperparameter estimation
(:mod:`bridgemix.evidence`), and an experiment harness with a CLI
(:mod:`bridgemix.experiment`, :mod:`bridgemix.cli`).
"""

from .exppower import (
    ExpPowerParams,
    ep_log_norm_const,
    ep_logpdf,
    ep_sample,
    ep_variance,
    lambda_for_variance,
)
from .mixture import (
    MixtureLatents,
    ZolotarevSampler,
    compose_ep_sample,
    k_factor,
    tilted_stable_sample,
    v_from_latents,
    zolotarev_logpdf,
    zolotarev_sample,
)
from .targets import (
    PARAMETRIZATIONS,
    RegressionProblem,
    TargetSpec,
    log_target_and_grad,
    log_unnorm_posterior_summary,
    pack_state,
    recover_z2,
)
from .nuts import ChainDraws, SamplerConfig, nuts_sample, run_chains
from .diagnostics import ChainSummary, ess, kde, min_ess_over_params, split_rhat
from .evidence import ThetaPoint, build_theta_grid, evidence_objective, fit_sigma2_tau2

__version__ = "0.1.0"
