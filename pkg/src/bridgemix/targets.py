"""Log posterior targets for bridge-penalized regression, three ways.

The model is ``y = X z2 + e`` with ``e ~ normal(0, sigma2 I)`` and an
exponential power prior ``p(z2) ~ exp(-lam * ||z2||_q^q)``.  The posterior
can be simulated in three interchangeable parametrizations:

``naive``
    directly in ``z2``; the log target is not differentiable at zeros when
    ``q <= 1`` (the kink is kept verbatim, with subgradient 0, because
    reproducing its failure modes is part of the point);
``centered``
    jointly in ``(z2, xi, delta)`` using the gamma-Zolotarev latents, which
    makes the log target differentiable everywhere;
``noncentered``
    in ``(w, xi, delta)`` with ``z2`` recovered deterministically, which
    removes the prior's funnel-shaped coupling between ``z2`` and the
    latents.

All targets are expressed in unconstrained coordinates (``xi = exp(u)``,
``delta = pi * logistic(t)``) with the log-Jacobian included, and include
their full normalizing constants, so the three parametrizations integrate
to the same evidence -- a property the test suite checks by quadrature.

This module is the plain-numpy reference implementation.  The sampler uses
a compiled mirror (:mod:`bridgemix._kernels`) that is tested for exact
agreement against these functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, gammaln

from .exppower import ExpPowerParams

__all__ = [
    "PARAMETRIZATIONS",
    "RegressionProblem",
    "TargetSpec",
    "gaussian_likelihood",
    "log_target_and_grad",
    "recover_z2",
    "log_unnorm_posterior_summary",
    "noncentered_scale",
    "pack_state",
    "target_dim",
]

PARAMETRIZATIONS = ("naive", "centered", "noncentered")

# Likelihood contract: maps z2 to (value, gradient) of the smooth penalty
# g(z2) that is *subtracted* from the log target.
LikelihoodFn = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class RegressionProblem:
    """Response, design and noise variance of the regression model."""

    y: np.ndarray
    X: np.ndarray
    sigma2: float

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if y.ndim != 1 or X.ndim != 2:
            raise ValueError("y must be a vector and X a matrix")
        if X.shape[0] != y.size or y.size < 1 or X.shape[1] < 1:
            raise ValueError(f"incompatible shapes y {y.shape}, X {X.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must be finite")
        if not (self.sigma2 > 0.0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def m(self) -> int:
        return self.y.size

    @property
    def n2(self) -> int:
        return self.X.shape[1]


def gaussian_likelihood(problem: RegressionProblem) -> LikelihoodFn:
    """The shipped smooth component: ``g(z2) = ||y - X z2||^2 / (2 sigma2)``."""

    X, y, sigma2 = problem.X, problem.y, problem.sigma2

    def value_and_grad(z2: np.ndarray) -> tuple[float, np.ndarray]:
        r = X @ z2 - y
        return float(r @ r) / (2.0 * sigma2), (X.T @ r) / sigma2

    return value_and_grad


@dataclass(frozen=True)
class TargetSpec:
    """A regression problem, prior parameters and a parametrization choice.

    ``g`` may override the smooth component with any (value, gradient)
    callable honoring the likelihood contract; only the Gaussian one ships
    and only it is supported by the compiled sampler path.
    """

    problem: RegressionProblem
    ep: ExpPowerParams
    parametrization: str
    g: Optional[LikelihoodFn] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(
                f"parametrization must be one of {PARAMETRIZATIONS}, "
                f"got {self.parametrization!r}"
            )
        if self.parametrization != "naive" and not (self.ep.q < 2.0):
            raise ValueError(
                "centered/noncentered parametrizations require q < 2"
            )

    @property
    def n2(self) -> int:
        return self.problem.n2

    @property
    def dim(self) -> int:
        return target_dim(self.parametrization, self.n2)

    def likelihood(self) -> LikelihoodFn:
        return self.g if self.g is not None else gaussian_likelihood(self.problem)


def target_dim(parametrization: str, n2: int) -> int:
    """Dimension of the unconstrained state vector."""
    return n2 if parametrization == "naive" else 3 * n2


def pack_state(
    parametrization: str,
    z2_or_w: np.ndarray,
    xi: Optional[np.ndarray] = None,
    delta: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Assemble an unconstrained state vector from constrained quantities."""
    lead = np.asarray(z2_or_w, dtype=float)
    if parametrization == "naive":
        return lead.copy()
    if xi is None or delta is None:
        raise ValueError("mixture parametrizations require xi and delta")
    xi = np.asarray(xi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(xi <= 0.0) or np.any(delta <= 0.0) or np.any(delta >= np.pi):
        raise ValueError("latents outside their domains")
    t = np.log(delta) - np.log(np.pi - delta)  # logit(delta/pi)
    return np.concatenate([lead, np.log(xi), t])


def _split(state: np.ndarray, n2: int):
    return state[..., :n2], state[..., n2 : 2 * n2], state[..., 2 * n2 :]


def _target_const(spec: TargetSpec) -> float:
    """Per-coordinate log normalizing constant times n2.

    naive:        q lam^(1/q) / (2 Gamma(1/q))        (the prior's constant)
    centered:     q lam^(1/q) / (2 pi Gamma(1/q))     (joint in z2, xi, delta)
    noncentered:  q / (2^(3/2) pi Gamma(1/q))         (joint in w, xi, delta)
    """
    q, lam = spec.ep.q, spec.ep.lam
    base = np.log(q) - gammaln(1.0 / q)
    if spec.parametrization == "naive":
        c = base + np.log(lam) / q - np.log(2.0)
    elif spec.parametrization == "centered":
        c = base + np.log(lam) / q - np.log(2.0 * np.pi)
    else:
        c = base - 1.5 * np.log(2.0) - np.log(np.pi)
    return spec.n2 * float(c)


def noncentered_scale(
    ep: ExpPowerParams, xi: np.ndarray, delta: np.ndarray
) -> np.ndarray:
    """Per-coordinate factor mapping ``w`` to ``z2``.

    ``z2 = 2^(-1/2) lam^(-1/q) * xi**((2-q)/(2q)) * sin(q d/2)**(-1/2)
    * sin((2-q) d/2)**((q-2)/(2q)) * sin(d)**(1/q) * w``.
    """
    q = ep.q
    l1 = np.log(np.sin(0.5 * q * delta))
    l2 = np.log(np.sin(0.5 * (2.0 - q) * delta))
    l3 = np.log(np.sin(delta))
    log_scale = (
        -0.5 * np.log(2.0)
        - np.log(ep.lam) / q
        + (2.0 - q) / (2.0 * q) * np.log(xi)
        - 0.5 * l1
        + (q - 2.0) / (2.0 * q) * l2
        + l3 / q
    )
    return np.exp(log_scale)


def recover_z2(spec: TargetSpec, state: np.ndarray) -> np.ndarray:
    """Regression coefficients implied by an unconstrained state.

    Identity extraction for the naive and centered parametrizations; the
    deterministic recovery transform for the non-centered one.  Accepts a
    single state vector or a matrix of states (one per row).
    """
    state = np.asarray(state, dtype=float)
    n2 = spec.n2
    if spec.parametrization == "naive":
        return state[..., :n2].copy()
    lead, u, t = _split(state, n2)
    if spec.parametrization == "centered":
        return lead.copy()
    xi = np.exp(u)
    delta = np.pi * expit(t)
    return noncentered_scale(spec.ep, xi, delta) * lead


def log_unnorm_posterior_summary(
    problem: RegressionProblem, ep: ExpPowerParams, z2: np.ndarray
) -> np.ndarray:
    """Scalar chain summary ``||y - X z2||^2/(2 sigma2) + lam ||z2||_q^q``.

    This is the quantity whose posterior mean and kernel density estimate
    are compared across chains and parametrizations.  Vectorized over rows
    of ``z2``.
    """
    z2 = np.asarray(z2, dtype=float)
    r = z2 @ problem.X.T - problem.y
    fit = np.sum(r * r, axis=-1) / (2.0 * problem.sigma2)
    penalty = ep.lam * np.sum(np.abs(z2) ** ep.q, axis=-1)
    return fit + penalty


def log_target_and_grad(
    spec: TargetSpec, state: np.ndarray
) -> tuple[float, np.ndarray]:
    """Log target density in unconstrained coordinates, with its gradient.

    Returns the log of the (normalized-prior) joint density of the chosen
    parametrization, including the log-Jacobian of the ``xi``/``delta``
    transforms, and the exact gradient with respect to the unconstrained
    state.  Non-finite values are returned as-is; overflow is what
    divergence detection consumes, so it is reported rather than masked.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (spec.dim,):
        raise ValueError(f"state must have shape ({spec.dim},)")
    q, lam = spec.ep.q, spec.ep.lam
    n2 = spec.n2
    g_fn = spec.likelihood()
    const = _target_const(spec)
    grad = np.empty_like(state)

    if spec.parametrization == "naive":
        z2 = state
        g, g_grad = g_fn(z2)
        logp = const - g - lam * np.sum(np.abs(z2) ** q)
        # Subgradient 0 at kinks; for q > 1 the penalty derivative vanishes
        # at zero anyway.
        pen = np.zeros_like(z2)
        nz = z2 != 0.0
        pen[nz] = lam * q * np.sign(z2[nz]) * np.abs(z2[nz]) ** (q - 1.0)
        grad[:] = -g_grad - pen
        return float(logp), grad

    lead, u, t = _split(state, n2)
    xi = np.exp(u)
    sig = expit(t)
    delta = np.pi * sig
    ddelta_dt = np.pi * sig * (1.0 - sig)
    l1 = np.log(np.sin(0.5 * q * delta))
    l2 = np.log(np.sin(0.5 * (2.0 - q) * delta))
    l3 = np.log(np.sin(delta))
    # d/d(delta) of the three log sines
    d1 = 0.5 * q / np.tan(0.5 * q * delta)
    d2 = 0.5 * (2.0 - q) / np.tan(0.5 * (2.0 - q) * delta)
    d3 = 1.0 / np.tan(delta)
    # log-Jacobian of xi = exp(u), delta = pi*logistic(t)
    log_jac = np.sum(u) + np.sum(np.log(np.pi) + np.log(sig) + np.log1p(-sig))
    djac_dt = 1.0 - 2.0 * sig

    if spec.parametrization == "centered":
        z2 = lead
        g, g_grad = g_fn(z2)
        # coefficient of z2^2: lam^(2/q) xi^((q-2)/q) s1 s2^((2-q)/q) s3^(-2/q)
        log_a = (
            2.0 / q * np.log(lam)
            + (q - 2.0) / q * u
            + l1
            + (2.0 - q) / q * l2
            - 2.0 / q * l3
        )
        term = z2 * z2 * np.exp(log_a)
        logp = const - g - np.sum(term) - np.sum(xi) + log_jac
        dlog_a_ddelta = d1 + (2.0 - q) / q * d2 - 2.0 / q * d3
        grad[:n2] = -g_grad - 2.0 * z2 * np.exp(log_a)
        grad[n2 : 2 * n2] = -(q - 2.0) / q * term - xi + 1.0
        grad[2 * n2 :] = -term * dlog_a_ddelta * ddelta_dt + djac_dt
        return float(logp), grad

    # non-centered
    w = lead
    log_scale = (
        -0.5 * np.log(2.0)
        - np.log(lam) / q
        + (2.0 - q) / (2.0 * q) * u
        - 0.5 * l1
        + (q - 2.0) / (2.0 * q) * l2
        + l3 / q
    )
    scale = np.exp(log_scale)
    z2 = scale * w
    g, g_grad = g_fn(z2)
    prior_sin = -0.5 * l1 + (q - 2.0) / (2.0 * q) * l2 + l3 / q
    logp = (
        const
        - g
        - 0.5 * np.sum(w * w)
        + (2.0 - q) / (2.0 * q) * np.sum(u)
        - np.sum(xi)
        + np.sum(prior_sin)
        + log_jac
    )
    dsin_ddelta = -0.5 * d1 + (q - 2.0) / (2.0 * q) * d2 + d3 / q
    grad[:n2] = -g_grad * scale - w
    grad[n2 : 2 * n2] = (
        -(g_grad * z2) * (2.0 - q) / (2.0 * q)
        + (2.0 - q) / (2.0 * q)
        - xi
        + 1.0
    )
    grad[2 * n2 :] = (
        (-(g_grad * z2) + 1.0) * dsin_ddelta * ddelta_dt + djac_dt
    )
    return float(logp), grad
