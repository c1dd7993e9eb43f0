"""Shared test oracles: finite-difference gradients and an independent FIM."""
from __future__ import annotations

import numpy as np

from isacbf.sensing import echo_mean, obs_noise_vars


def fd_fim(state, w_k, config, eps: float = 1e-7) -> np.ndarray:
    """Fisher information matrix over (theta, d, v_dot) built independently.

    The angle block uses a central-difference Jacobian of the noiseless echo
    (distance, and hence the reflection amplitude, held fixed); the delay and
    Doppler blocks come straight from the scalar measurement models
    nu = 2d/c + noise and mu = 2*v_dot*f_c/c + noise.
    """
    noise = obs_noise_vars(state.theta, state.dist, w_k, config)
    f = np.zeros((3, 3))
    if not noise.observable:
        return f
    rp = echo_mean(state.theta + eps, state.dist, w_k, config)
    rm = echo_mean(state.theta - eps, state.dist, w_k, config)
    dr = (rp - rm) / (2.0 * eps)
    c = config.wave_speed
    f[0, 0] = float(np.vdot(dr, dr).real) / noise.sigma_r2
    f[1, 1] = (2.0 / c) ** 2 / noise.sigma_nu2
    f[2, 2] = (2.0 * config.carrier_hz / c) ** 2 / noise.sigma_mu2
    return f


def fd_grad(fun, x: np.ndarray, idx, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function at selected flat indices."""
    x = np.asarray(x, dtype=float)
    out = np.empty(len(idx))
    flat = x.ravel()
    for j, i in enumerate(idx):
        orig = flat[i]
        step = eps * max(1.0, abs(orig))
        flat[i] = orig + step
        fp = fun(x)
        flat[i] = orig - step
        fm = fun(x)
        flat[i] = orig
        out[j] = (fp - fm) / (2.0 * step)
    return out


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = np.maximum(np.abs(a), np.abs(b))
    denom[denom == 0.0] = 1.0
    return float(np.max(np.abs(a - b) / denom))
