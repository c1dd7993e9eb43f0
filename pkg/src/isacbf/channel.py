"""Steering vectors, path loss, effective downlink channels, SINR, sum-rate."""
from __future__ import annotations

import numpy as np

from .config import SimConfig


def steering(theta: float, n_ant: int) -> np.ndarray:
    """Unit-norm ULA steering vector; entry m is exp(-j*pi*m*cos(theta))/sqrt(N)."""
    if n_ant < 1:
        raise ValueError("n_ant must be >= 1")
    m = np.arange(n_ant)
    return np.exp(-1j * np.pi * m * np.cos(theta)) / np.sqrt(n_ant)


def steering_dtheta(theta: float, n_ant: int) -> np.ndarray:
    """Entry-wise derivative of steering() with respect to theta."""
    m = np.arange(n_ant)
    return (1j * np.pi * m * np.sin(theta)) * steering(theta, n_ant)


def path_loss_amp(dist: float, config: SimConfig) -> float:
    """One-way amplitude path loss sqrt(alpha_0 * (d/d_0)^-zeta)."""
    if not dist > 0:
        raise ValueError("distance must be > 0")
    return float(np.sqrt(config.pathloss_ref
                         * (dist / config.ref_dist) ** (-config.pathloss_exp)))


def effective_channel(theta: float, dist: float, config: SimConfig) -> np.ndarray:
    """Downlink channel h = sqrt(N_t) * alpha(d) * a(theta), length N_t."""
    return np.sqrt(config.n_tx) * path_loss_amp(dist, config) \
        * steering(theta, config.n_tx)


def sinr(h_k: np.ndarray, W: np.ndarray, k: int, sigma2: float) -> float:
    """SINR of user k for beamforming matrix W (columns are per-user beams)."""
    gains = np.abs(h_k.conj() @ W) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    return float(signal / (interference + sigma2))


def sum_rate(H: np.ndarray, W: np.ndarray, sigma2: float) -> float:
    """Sum of log2(1 + SINR_k) over the K users; H and W are N_t x K."""
    if H.shape[1] != W.shape[1]:
        raise ValueError("H and W must have the same number of columns")
    total = 0.0
    for k in range(H.shape[1]):
        total += np.log2(1.0 + sinr(H[:, k], W, k, sigma2))
    return float(total)
