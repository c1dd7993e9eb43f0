import numpy as np
import pytest
from hypothesis import given, strategies as st

from isacbf.channel import (effective_channel, path_loss_amp, sinr, steering,
                            steering_dtheta, sum_rate)

# frozen oracle values (high-precision arithmetic, defaults alpha0=1e-7,
# zeta=2.55, d0=1): one-way amplitude at d=25 m and the matching channel norm
ALPHA_25 = 5.2194710000789454e-6
HNORM_25 = 2.95257867068988e-5


@given(theta=st.floats(0.01, np.pi - 0.01), n=st.integers(1, 64))
def test_steering_unit_norm(theta, n):
    a = steering(theta, n)
    assert np.linalg.norm(a) == pytest.approx(1.0, rel=1e-12)
    assert a[0] == pytest.approx(1.0 / np.sqrt(n))
    assert np.allclose(np.abs(a), 1.0 / np.sqrt(n))


def test_steering_phase_progression():
    theta, n = 0.7, 16
    a = steering(theta, n)
    ratios = a[1:] / a[:-1]
    assert np.allclose(ratios, np.exp(-1j * np.pi * np.cos(theta)))


def test_steering_rejects_empty():
    with pytest.raises(ValueError):
        steering(0.5, 0)


def test_steering_dtheta_matches_fd():
    theta, n, eps = 0.9, 32, 1e-7
    fd = (steering(theta + eps, n) - steering(theta - eps, n)) / (2 * eps)
    assert np.allclose(steering_dtheta(theta, n), fd, rtol=1e-6, atol=1e-9)


def test_path_loss_frozen_value(cfg):
    assert path_loss_amp(25.0, cfg) == pytest.approx(ALPHA_25, rel=1e-12)
    assert path_loss_amp(cfg.ref_dist, cfg) == pytest.approx(
        np.sqrt(cfg.pathloss_ref))
    with pytest.raises(ValueError):
        path_loss_amp(0.0, cfg)


def test_path_loss_monotone_decreasing(cfg):
    ds = np.linspace(5, 200, 40)
    vals = [path_loss_amp(d, cfg) for d in ds]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_effective_channel(cfg):
    h = effective_channel(0.9272952180016122, 25.0, cfg)
    assert h.shape == (cfg.n_tx,)
    assert np.linalg.norm(h) == pytest.approx(HNORM_25, rel=1e-12)
    # h is a scaled steering vector
    a = steering(0.9272952180016122, cfg.n_tx)
    assert np.allclose(h, np.sqrt(cfg.n_tx) * ALPHA_25 * a, rtol=1e-10)


def test_sinr_no_interference():
    n, sigma2 = 8, 0.5
    h = np.ones(n, dtype=complex)
    w = np.zeros((n, 2), dtype=complex)
    w[:, 0] = 0.25
    assert sinr(h, w, 0, sigma2) == pytest.approx(abs(h.conj() @ w[:, 0]) ** 2
                                                  / sigma2)


def test_sinr_with_interference():
    n, sigma2 = 4, 1e-3
    rng = np.random.default_rng(0)
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    gains = np.abs(h.conj() @ w) ** 2
    expect = gains[1] / (gains[0] + gains[2] + sigma2)
    assert sinr(h, w, 1, sigma2) == pytest.approx(expect, rel=1e-12)


def test_sum_rate_matches_per_user_sum():
    rng = np.random.default_rng(1)
    n, k, sigma2 = 8, 3, 1e-2
    h = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    w = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    total = sum(np.log2(1 + sinr(h[:, i], w, i, sigma2)) for i in range(k))
    assert sum_rate(h, w, sigma2) == pytest.approx(total, rel=1e-12)


def test_sum_rate_shape_mismatch():
    with pytest.raises(ValueError):
        sum_rate(np.zeros((4, 2), complex), np.zeros((4, 3), complex), 1.0)
