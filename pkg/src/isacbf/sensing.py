"""Echo statistics, noisy observations, Fisher information, and CRLBs.

The echo seen from one vehicle after matched filtering is
r = G*beta*xi*b(theta)*(a(theta)^H w) + noise, with G = sqrt(N_t*N_r).
Delay/Doppler estimates carry Gaussian errors whose variances scale inversely
with the beam gain |a^H w|^2; angle and distance CRLBs follow in closed form
from the diagonal 3x3 Fisher matrix over (theta, d, v_dot).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import steering, steering_dtheta
from .config import SimConfig
from .kinematics import VehicleState

# beams with |a^H w|^2 below this (relative to ||w||^2) are unobservable
_GAIN_FLOOR = 1e-30


@dataclass(frozen=True)
class ObservationRecord:
    nu_hat: float      # delay estimate, s
    mu_hat: float      # Doppler estimate, Hz
    theta_hat: float   # angle estimate, rad
    d_hat: float       # distance estimate, m (= c*nu_hat/2)
    vdot_hat: float    # radial speed estimate, m/s (= c*mu_hat/(2 f_c))


@dataclass(frozen=True)
class SensingNoiseModel:
    sigma_r2: float    # echo noise variance, W
    sigma_nu2: float   # delay variance, s^2
    sigma_mu2: float   # Doppler variance, Hz^2
    beam_gain: float   # |a(theta)^H w|^2
    observable: bool


@dataclass(frozen=True)
class FisherInfo:
    f: np.ndarray          # 3x3 information matrix over (theta, d, v_dot)
    crlb_theta: float      # rad^2
    crlb_d: float          # m^2


def reflection_coeff(dist: float, config: SimConfig) -> complex:
    """Two-way reflection coefficient rho_rcs / (2 d)."""
    if not dist > 0:
        raise ValueError("distance must be > 0")
    return config.rcs_coeff / (2.0 * dist)


def beam_gain(theta: float, w_k: np.ndarray) -> float:
    a = steering(theta, len(w_k))
    return float(np.abs(a.conj() @ w_k) ** 2)


def obs_noise_vars(theta: float, dist: float, w_k: np.ndarray,
                   config: SimConfig) -> SensingNoiseModel:
    """Delay/Doppler error variances for a given geometry and transmit beam.

    Both variances scale as 1/(xi * |psi|^2 * |a^H w|^2) with
    |psi|^2 = N_t*N_r*|beta|^2 (the Doppler phase has unit modulus).
    """
    gain = beam_gain(theta, w_k)
    sigma_r2 = config.echo_noise_var
    wnorm2 = float(np.vdot(w_k, w_k).real)
    if gain <= _GAIN_FLOOR * max(1.0, wnorm2):
        return SensingNoiseModel(sigma_r2=sigma_r2, sigma_nu2=math.inf,
                                 sigma_mu2=math.inf, beam_gain=gain,
                                 observable=False)
    psi2 = config.n_tx * config.n_rx * abs(reflection_coeff(dist, config)) ** 2
    denom = config.mf_gain * psi2 * gain
    sigma_nu2 = config.rho_nu ** 2 * config.noise_rsu / denom
    sigma_mu2 = config.rho_mu ** 2 * config.noise_rsu / denom
    return SensingNoiseModel(sigma_r2=sigma_r2, sigma_nu2=sigma_nu2,
                             sigma_mu2=sigma_mu2, beam_gain=gain,
                             observable=True)


def generate_observation(state: VehicleState, w_k: np.ndarray,
                         config: SimConfig, rng: np.random.Generator,
                         mode: str = "relative") -> ObservationRecord | None:
    """Noisy (delay, Doppler, angle) observation of one vehicle.

    mode "relative": theta_hat = theta*(1+e), e ~ N(0, obs_rel_mse);
    mode "crlb":     theta_hat = theta + N(0, CRLB(theta, w)).
    Returns None when the beam carries no energy toward the vehicle.
    """
    noise = obs_noise_vars(state.theta, state.dist, w_k, config)
    if not noise.observable:
        return None
    c = config.wave_speed
    nu = 2.0 * state.dist / c + rng.normal(0.0, math.sqrt(noise.sigma_nu2))
    mu = 2.0 * state.radial_v * config.carrier_hz / c \
        + rng.normal(0.0, math.sqrt(noise.sigma_mu2))
    if mode == "relative":
        theta_hat = state.theta * (1.0 + rng.normal(0.0, math.sqrt(config.obs_rel_mse)))
    elif mode == "crlb":
        info = fisher_information(state, w_k, config)
        theta_hat = state.theta + rng.normal(0.0, math.sqrt(info.crlb_theta))
    else:
        raise ValueError(f"unknown observation mode: {mode!r}")
    return ObservationRecord(nu_hat=nu, mu_hat=mu, theta_hat=theta_hat,
                             d_hat=c * nu / 2.0,
                             vdot_hat=c * mu / (2.0 * config.carrier_hz))


def echo_mean(theta: float, dist: float, w_k: np.ndarray,
              config: SimConfig) -> np.ndarray:
    """Noiseless matched-filtered echo G*beta*xi*b(theta)*(a(theta)^H w)."""
    g = math.sqrt(config.n_tx * config.n_rx)
    beta = reflection_coeff(dist, config)
    a = steering(theta, config.n_tx)
    b = steering(theta, config.n_rx)
    return g * beta * config.mf_gain * b * (a.conj() @ w_k)


def echo_dtheta(theta: float, dist: float, w_k: np.ndarray,
                config: SimConfig) -> np.ndarray:
    """Closed-form derivative of echo_mean with respect to theta."""
    g = math.sqrt(config.n_tx * config.n_rx)
    beta = reflection_coeff(dist, config)
    a = steering(theta, config.n_tx)
    ap = steering_dtheta(theta, config.n_tx)
    b = steering(theta, config.n_rx)
    bp = steering_dtheta(theta, config.n_rx)
    return g * beta * config.mf_gain * (bp * (a.conj() @ w_k) + b * (ap.conj() @ w_k))


def fisher_information(state: VehicleState, w_k: np.ndarray,
                       config: SimConfig) -> FisherInfo:
    """Diagonal FIM over (theta, d, v_dot) and the angle/distance CRLBs.

    f11 = ||d(echo)/d(theta)||^2 / sigma_r^2, f22 = (2/c)^2 / sigma_nu^2,
    f33 = (2 f_c/c)^2 / sigma_mu^2.  Zero beam gain yields infinite CRLBs.
    """
    noise = obs_noise_vars(state.theta, state.dist, w_k, config)
    c = config.wave_speed
    f = np.zeros((3, 3))
    if not noise.observable:
        return FisherInfo(f=f, crlb_theta=math.inf, crlb_d=math.inf)
    dr = echo_dtheta(state.theta, state.dist, w_k, config)
    f[0, 0] = float(np.vdot(dr, dr).real) / noise.sigma_r2
    f[1, 1] = (2.0 / c) ** 2 / noise.sigma_nu2
    f[2, 2] = (2.0 * config.carrier_hz / c) ** 2 / noise.sigma_mu2
    crlb_theta = 1.0 / f[0, 0] if f[0, 0] > 0 else math.inf
    crlb_d = noise.sigma_nu2 * c ** 2 / 4.0
    return FisherInfo(f=f, crlb_theta=crlb_theta, crlb_d=crlb_d)
