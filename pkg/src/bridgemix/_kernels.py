"""Compiled inner loops for the sampler (numba).

This module mirrors the plain-numpy target evaluation in
:mod:`bridgemix.targets` and implements one multinomial no-u-turn transition
over it.  The numpy implementations remain the reference; the test suite
checks the two routes agree to floating-point accuracy.  Everything here is
deterministic given the passed ``numpy.random.Generator``.

Target arguments are passed as one flat tuple
``targ = (kind, X, XT, y, sigma2, q, lam, const)`` with ``kind`` 0 = naive,
1 = centered, 2 = non-centered; ``const`` is the parametrization's log
normalizing constant (already multiplied by the coordinate count).

Division by zero and overflow deliberately follow IEEE semantics
(``error_model="numpy"``): non-finite log densities are what divergence
detection consumes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAIVE, CENTERED, NONCENTERED = 0, 1, 2

_JIT = dict(cache=True, error_model="numpy", fastmath=False, nogil=True)


@njit(**_JIT)
def target_logp_grad(targ, state, grad):
    kind, X, XT, y, sigma2, q, lam, const = targ
    m = X.shape[0]
    n2 = X.shape[1]
    logp = const

    if kind == NAIVE:
        z2 = state
    elif kind == CENTERED:
        z2 = state[:n2]
    else:
        # z2 = scale(xi, delta) * w, scale computed in log space
        z2 = np.empty(n2)
        for j in range(n2):
            u = state[n2 + j]
            t = state[2 * n2 + j]
            sig = 1.0 / (1.0 + np.exp(-t))
            delta = np.pi * sig
            l1 = np.log(np.sin(0.5 * q * delta))
            l2 = np.log(np.sin(0.5 * (2.0 - q) * delta))
            l3 = np.log(np.sin(delta))
            log_scale = (
                -0.5 * np.log(2.0)
                - np.log(lam) / q
                + (2.0 - q) / (2.0 * q) * u
                - 0.5 * l1
                + (q - 2.0) / (2.0 * q) * l2
                + l3 / q
            )
            z2[j] = np.exp(log_scale) * state[j]

    # Gaussian likelihood g and its gradient in z2
    g = 0.0
    r = np.empty(m)
    for i in range(m):
        acc = -y[i]
        for j in range(n2):
            acc += X[i, j] * z2[j]
        r[i] = acc
        g += acc * acc
    g /= 2.0 * sigma2
    logp -= g
    ggrad = np.empty(n2)
    for j in range(n2):
        acc = 0.0
        for i in range(m):
            acc += XT[j, i] * r[i]
        ggrad[j] = acc / sigma2

    if kind == NAIVE:
        for j in range(n2):
            z = state[j]
            if z != 0.0:
                az = np.abs(z)
                logp -= lam * az**q
                grad[j] = -ggrad[j] - lam * q * np.sign(z) * az ** (q - 1.0)
            else:
                grad[j] = -ggrad[j]
        return logp

    for j in range(n2):
        u = state[n2 + j]
        t = state[2 * n2 + j]
        xi = np.exp(u)
        sig = 1.0 / (1.0 + np.exp(-t))
        delta = np.pi * sig
        ddelta_dt = np.pi * sig * (1.0 - sig)
        s1 = np.sin(0.5 * q * delta)
        s2 = np.sin(0.5 * (2.0 - q) * delta)
        s3 = np.sin(delta)
        l1 = np.log(s1)
        l2 = np.log(s2)
        l3 = np.log(s3)
        d1 = 0.5 * q * np.cos(0.5 * q * delta) / s1
        d2 = 0.5 * (2.0 - q) * np.cos(0.5 * (2.0 - q) * delta) / s2
        d3 = np.cos(delta) / s3
        # log-Jacobian of xi = exp(u), delta = pi*logistic(t)
        logp += u + np.log(np.pi) + np.log(sig) + np.log1p(-sig)
        djac_dt = 1.0 - 2.0 * sig

        if kind == CENTERED:
            z = state[j]
            log_a = (
                2.0 / q * np.log(lam)
                + (q - 2.0) / q * u
                + l1
                + (2.0 - q) / q * l2
                - 2.0 / q * l3
            )
            a = np.exp(log_a)
            term = z * z * a
            logp += -term - xi
            da_ddelta = d1 + (2.0 - q) / q * d2 - 2.0 / q * d3
            grad[j] = -ggrad[j] - 2.0 * z * a
            grad[n2 + j] = -(q - 2.0) / q * term - xi + 1.0
            grad[2 * n2 + j] = -term * da_ddelta * ddelta_dt + djac_dt
        else:
            w = state[j]
            prior_sin = -0.5 * l1 + (q - 2.0) / (2.0 * q) * l2 + l3 / q
            logp += (
                -0.5 * w * w
                + (2.0 - q) / (2.0 * q) * u
                - xi
                + prior_sin
            )
            dsin_ddelta = -0.5 * d1 + (q - 2.0) / (2.0 * q) * d2 + d3 / q
            scale = z2[j] / w if w != 0.0 else 0.0
            if w == 0.0:
                # recompute the scale explicitly; z2[j] is 0 here
                log_scale = (
                    -0.5 * np.log(2.0)
                    - np.log(lam) / q
                    + (2.0 - q) / (2.0 * q) * u
                    - 0.5 * l1
                    + (q - 2.0) / (2.0 * q) * l2
                    + l3 / q
                )
                scale = np.exp(log_scale)
            gz = ggrad[j] * z2[j]
            grad[j] = -ggrad[j] * scale - w
            grad[n2 + j] = -gz * (2.0 - q) / (2.0 * q) + (2.0 - q) / (2.0 * q) - xi + 1.0
            grad[2 * n2 + j] = (1.0 - gz) * dsin_ddelta * ddelta_dt + djac_dt
    return logp


@njit(**_JIT)
def _kinetic(r, inv_metric):
    acc = 0.0
    for i in range(r.size):
        acc += inv_metric[i] * r[i] * r[i]
    return 0.5 * acc


@njit(**_JIT)
def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    hi = a if a > b else b
    return hi + np.log(np.exp(a - hi) + np.exp(b - hi))


@njit(**_JIT)
def _turned(rho, r_lo, r_hi, inv_metric):
    lo = 0.0
    hi = 0.0
    for i in range(rho.size):
        lo += rho[i] * inv_metric[i] * r_lo[i]
        hi += rho[i] * inv_metric[i] * r_hi[i]
    return lo <= 0.0 or hi <= 0.0


@njit(**_JIT)
def _leapfrog(targ, theta, r, grad, eps, inv_metric):
    d = theta.size
    r1 = np.empty(d)
    theta1 = np.empty(d)
    for i in range(d):
        r1[i] = r[i] + 0.5 * eps * grad[i]
    for i in range(d):
        theta1[i] = theta[i] + eps * inv_metric[i] * r1[i]
    grad1 = np.empty(d)
    logp1 = target_logp_grad(targ, theta1, grad1)
    for i in range(d):
        r1[i] = r1[i] + 0.5 * eps * grad1[i]
    return theta1, r1, grad1, logp1


@njit(**_JIT)
def _build_tree(targ, depth, direction, theta, r, grad, logp, joint0,
                eps, inv_metric, max_delta, rng):
    """Grow a subtree of 2**depth leapfrog steps from one trajectory end.

    Returns, in order: outer end (theta, r, grad, logp), temporal boundary
    momenta (earliest, latest), momentum sum, proposal (theta, logp, grad),
    log weight, acceptance-stat sum and count, continue flag, divergence
    flag, max energy error, leapfrog count.
    """
    if depth == 0:
        theta1, r1, grad1, logp1 = _leapfrog(targ, theta, r, grad,
                                             direction * eps, inv_metric)
        joint = logp1 - _kinetic(r1, inv_metric)
        if np.isnan(joint):
            joint = -np.inf
        err = joint0 - joint  # energy increase along the step
        divergent = not np.isfinite(joint) or err > max_delta
        logw = joint - joint0
        alpha = np.exp(logw) if logw < 0.0 else 1.0
        ok = 0 if divergent else 1
        return (theta1, r1, grad1, logp1, r1, r1, r1.copy(),
                theta1, logp1, grad1, logw, alpha, 1, ok, 1 if divergent else 0,
                err if np.isfinite(err) else np.inf, 1)

    (theta_o, r_o, grad_o, logp_o, rl1, rh1, rho1, prop1, plogp1, pgrad1,
     logw1, alpha1, na1, ok1, div1, emax1, nl1) = _build_tree(
        targ, depth - 1, direction, theta, r, grad, logp, joint0,
        eps, inv_metric, max_delta, rng)
    if ok1 == 0:
        return (theta_o, r_o, grad_o, logp_o, rl1, rh1, rho1, prop1, plogp1,
                pgrad1, logw1, alpha1, na1, 0, div1, emax1, nl1)

    (theta_o2, r_o2, grad_o2, logp_o2, rl2, rh2, rho2, prop2, plogp2, pgrad2,
     logw2, alpha2, na2, ok2, div2, emax2, nl2) = _build_tree(
        targ, depth - 1, direction, theta_o, r_o, grad_o, logp_o, joint0,
        eps, inv_metric, max_delta, rng)

    nl = nl1 + nl2
    alpha = alpha1 + alpha2
    na = na1 + na2
    div = 1 if (div1 == 1 or div2 == 1) else 0
    emax = max(emax1, emax2)
    if ok2 == 0:
        return (theta_o2, r_o2, grad_o2, logp_o2, rl1, rh1, rho1, prop1,
                plogp1, pgrad1, logw1, alpha, na, 0, div, emax, nl)

    logw = _logaddexp(logw1, logw2)
    # multinomial choice between the two half-trees
    if np.log(rng.random()) < logw2 - logw:
        prop, plogp, pgrad = prop2, plogp2, pgrad2
    else:
        prop, plogp, pgrad = prop1, plogp1, pgrad1
    rho = rho1 + rho2

    # temporal order: first-built subtree is earlier when integrating forward
    if direction > 0:
        e_lo, e_hi, e_rho = rl1, rh1, rho1
        l_lo, l_hi, l_rho = rl2, rh2, rho2
    else:
        e_lo, e_hi, e_rho = rl2, rh2, rho2
        l_lo, l_hi, l_rho = rl1, rh1, rho1
    ok = 1
    if _turned(rho, e_lo, l_hi, inv_metric):
        ok = 0
    elif _turned(e_rho + l_lo, e_lo, l_lo, inv_metric):
        ok = 0
    elif _turned(l_rho + e_hi, e_hi, l_hi, inv_metric):
        ok = 0
    return (theta_o2, r_o2, grad_o2, logp_o2, e_lo, l_hi, rho, prop, plogp,
            pgrad, logw, alpha, na, ok, div, emax, nl)


@njit(**_JIT)
def nuts_transition(targ, theta, logp, grad, eps, inv_metric, max_depth,
                    max_delta, rng):
    """One multinomial NUTS transition.

    Returns (theta', logp', grad', accept_stat, divergent, max_energy_error,
    n_leapfrog, tree_depth).
    """
    d = theta.size
    r0 = np.empty(d)
    for i in range(d):
        r0[i] = rng.standard_normal() / np.sqrt(inv_metric[i])
    joint0 = logp - _kinetic(r0, inv_metric)

    theta_m = theta.copy()
    r_m = r0.copy()
    grad_m = grad.copy()
    logp_m = logp
    theta_p = theta.copy()
    r_p = r0.copy()
    grad_p = grad.copy()
    logp_p = logp
    rho = r0.copy()
    prop = theta.copy()
    prop_logp = logp
    prop_grad = grad.copy()
    logw = 0.0
    alpha_sum = 0.0
    n_alpha = 0
    divergent = 0
    emax = 0.0
    nleap = 0
    depth = 0

    while depth < max_depth:
        forward = rng.random() < 0.5
        rho_old = rho
        r_m_old = r_m
        r_p_old = r_p
        if forward:
            (theta_p, r_p, grad_p, logp_p, s_lo, s_hi, s_rho, s_prop,
             s_plogp, s_pgrad, s_logw, a, na, ok, div, err, nl) = _build_tree(
                targ, depth, 1, theta_p, r_p, grad_p, logp_p, joint0,
                eps, inv_metric, max_delta, rng)
        else:
            (theta_m, r_m, grad_m, logp_m, s_lo, s_hi, s_rho, s_prop,
             s_plogp, s_pgrad, s_logw, a, na, ok, div, err, nl) = _build_tree(
                targ, depth, -1, theta_m, r_m, grad_m, logp_m, joint0,
                eps, inv_metric, max_delta, rng)
        alpha_sum += a
        n_alpha += na
        nleap += nl
        if err > emax:
            emax = err
        if ok == 0:
            if div == 1:
                divergent = 1
            break
        # biased progressive acceptance of the new half of the trajectory
        if s_logw > logw or np.log(rng.random()) < s_logw - logw:
            prop = s_prop
            prop_logp = s_plogp
            prop_grad = s_pgrad
        rho = rho_old + s_rho
        logw = _logaddexp(logw, s_logw)
        depth += 1
        # u-turn checks on the merged tree, in temporal (minus-to-plus)
        # order: E is the earlier part, L the later
        if forward:
            e_rho, e_lo, e_hi = rho_old, r_m_old, r_p_old
            l_rho, l_lo, l_hi = s_rho, s_lo, s_hi
        else:
            e_rho, e_lo, e_hi = s_rho, s_lo, s_hi
            l_rho, l_lo, l_hi = rho_old, r_m_old, r_p_old
        if _turned(rho, e_lo, l_hi, inv_metric):
            break
        if _turned(e_rho + l_lo, e_lo, l_lo, inv_metric):
            break
        if _turned(l_rho + e_hi, e_hi, l_hi, inv_metric):
            break

    accept = alpha_sum / n_alpha if n_alpha > 0 else 0.0
    return (prop, prop_logp, prop_grad, accept, divergent, emax, nleap, depth)


@njit(**_JIT)
def find_reasonable_epsilon(targ, theta, logp, grad, inv_metric, eps0, rng):
    """Double or halve the step size until one-step acceptance crosses 1/2."""
    d = theta.size
    eps = eps0
    r = np.empty(d)
    for i in range(d):
        r[i] = rng.standard_normal() / np.sqrt(inv_metric[i])
    joint0 = logp - _kinetic(r, inv_metric)
    _, r1, _, logp1 = _leapfrog(targ, theta, r, grad, eps, inv_metric)
    joint1 = logp1 - _kinetic(r1, inv_metric)
    diff = joint1 - joint0 if np.isfinite(joint1) else -np.inf
    direction = 1.0 if diff > np.log(0.5) else -1.0
    for _ in range(100):
        eps = eps * (2.0**direction)
        _, r1, _, logp1 = _leapfrog(targ, theta, r, grad, eps, inv_metric)
        joint1 = logp1 - _kinetic(r1, inv_metric)
        diff = joint1 - joint0 if np.isfinite(joint1) else -np.inf
        if direction > 0 and diff <= np.log(0.5):
            break
        if direction < 0 and diff >= np.log(0.5):
            break
        if eps > 1e7 or eps < 1e-10:
            break
    return eps
