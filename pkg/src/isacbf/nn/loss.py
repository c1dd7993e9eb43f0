"""Penalty-based training loss and its gradient w.r.t. the network output.

The scalar cost is

  J = -(1/Nb) sum_i sum_k log2(1 + SINR_ik)
      + lambda_theta * relu(mean_ik CRLB_theta - gamma_theta)^2
      + lambda_d     * relu(mean_ik CRLB_d     - gamma_d)^2
      + lambda_power * (1/Nb) sum_i relu(||W_i||_F^2 - P)^2

with the CRLBs evaluated at each example's true geometry using the network's
per-user beams.  Everything here is expressed in terms of the real network
output O [Nb, K, M, 2]; dJ/dO comes from Wirtinger calculus on the complex
beam columns w_k = O[...,0] + j O[...,1] and is verified against finite
differences in the tests.

CRLB terms are clamped at CAP_FACTOR * gamma so the loss stays finite at
pathological (zero-beam) parameter points; clamped terms contribute zero
gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import SimConfig

CAP_FACTOR = 1e6
_LN2 = float(np.log(2.0))


@dataclass
class BatchGeometry:
    """Per-example constants needed to evaluate the loss for a dataset."""
    h: np.ndarray        # [Ne, K, M] complex true channels (rows are h_k)
    a: np.ndarray        # [Ne, K, M] steering at true angles
    ap: np.ndarray       # [Ne, K, M] d(steering)/d(theta)
    s_bp: np.ndarray     # [Ne, K] ||b'(theta)||^2
    q_bp: np.ndarray     # [Ne, K] complex b'(theta)^H b(theta)
    c1sq: np.ndarray     # [Ne, K] |G beta xi|^2
    c_dist: np.ndarray   # [Ne, K] CRLB_d numerator: CRLB_d = c_dist/|a^H w|^2

    def __len__(self):
        return self.h.shape[0]

    def subset(self, idx) -> "BatchGeometry":
        return BatchGeometry(*(getattr(self, f)[idx] for f in
                               ("h", "a", "ap", "s_bp", "q_bp", "c1sq", "c_dist")))


def build_geometry(h: np.ndarray, thetas: np.ndarray, dists: np.ndarray,
                   config: SimConfig) -> BatchGeometry:
    """Precompute loss constants from true channels/angles/distances.

    h: [Ne, K, M] complex; thetas, dists: [Ne, K].
    """
    nt, nr = config.n_tx, config.n_rx
    m = np.arange(nt)
    cos_t = np.cos(thetas)[..., None]
    sin_t = np.sin(thetas)[..., None]
    a = np.exp(-1j * np.pi * m * cos_t) / np.sqrt(nt)
    ap = (1j * np.pi * m * sin_t) * a
    mr = np.arange(nr)
    # ||b'||^2 = (pi sin)^2 * sum(m^2)/Nr ; b'^H b = -j pi sin (Nr-1)/2
    s_bp = (np.pi * sin_t[..., 0]) ** 2 * float((mr ** 2).sum()) / nr
    q_bp = -1j * np.pi * sin_t[..., 0] * (nr - 1) / 2.0
    beta2 = np.abs(config.rcs_coeff) ** 2 / (2.0 * dists) ** 2
    c1sq = nt * nr * beta2 * config.mf_gain ** 2
    psi2 = nt * nr * beta2
    c_dist = (config.wave_speed ** 2 / 4.0) * config.rho_nu ** 2 \
        * config.noise_rsu / (config.mf_gain * psi2)
    return BatchGeometry(h=h, a=a, ap=ap, s_bp=s_bp, q_bp=q_bp,
                         c1sq=c1sq, c_dist=c_dist)


def _relu(x):
    return x if x > 0.0 else 0.0


def penalty_loss_and_grad(o: np.ndarray, geom: BatchGeometry,
                          config: SimConfig, want_grad: bool = True):
    """Loss J and dJ/dO for a batch of network outputs.

    o: [Nb, K, M, 2] real; geom must cover the same examples.
    Returns (J, parts) or (J, parts, gO).
    """
    nb, k, _, _ = o.shape
    w = o[..., 0] + 1j * o[..., 1]                       # [Nb, K, M]
    sig2 = config.noise_vehicle
    cap_t = CAP_FACTOR * config.gamma_theta
    cap_d = CAP_FACTOR * config.gamma_d

    # SINR / sum-rate term
    s = np.einsum("ikm,ijm->ikj", geom.h.conj(), w)      # s[i,k,j] = h_k^H w_j
    g2 = np.abs(s) ** 2
    sig = np.einsum("ikk->ik", g2)
    interf = g2.sum(axis=2) - sig
    denom = interf + sig2
    phi = sig / denom
    rate = np.log2(1.0 + phi).sum() / nb

    # CRLB terms at the true geometry
    u = np.einsum("ikm,ikm->ik", geom.a.conj(), w)
    v = np.einsum("ikm,ikm->ik", geom.ap.conj(), w)
    d_theta = geom.c1sq * (geom.s_bp * np.abs(u) ** 2 + np.abs(v) ** 2
                           + 2.0 * (geom.q_bp * np.conj(u) * v).real)
    sr2 = config.echo_noise_var
    with np.errstate(divide="ignore"):
        crlb_t = np.where(d_theta > sr2 / cap_t, sr2 / np.maximum(d_theta, 1e-300),
                          cap_t)
        u2 = np.abs(u) ** 2
        crlb_d = np.where(u2 > geom.c_dist / cap_d,
                          geom.c_dist / np.maximum(u2, 1e-300), cap_d)
    mean_t = float(crlb_t.mean())
    mean_d = float(crlb_d.mean())
    viol_t = _relu(mean_t - config.gamma_theta)
    viol_d = _relu(mean_d - config.gamma_d)

    # power term
    pw = np.sum(np.abs(w) ** 2, axis=(1, 2))
    viol_p = np.maximum(pw - config.power_budget, 0.0)

    j = (-rate
         + config.lambda_theta * viol_t ** 2
         + config.lambda_d * viol_d ** 2
         + config.lambda_power * float((viol_p ** 2).mean()))
    parts = {"rate": rate, "crlb_theta_mean": mean_t, "crlb_d_mean": mean_d,
             "power_mean": float(pw.mean()),
             "pen_theta": config.lambda_theta * viol_t ** 2,
             "pen_d": config.lambda_d * viol_d ** 2,
             "pen_power": config.lambda_power * float((viol_p ** 2).mean())}
    if not want_grad:
        return j, parts

    # dJ/d(conj w) accumulated over all terms, then mapped to the real output
    gw = np.zeros_like(w)

    # rate term
    coef = 1.0 / ((1.0 + phi) * denom)                   # [Nb, K]
    t_kj = -(coef * phi)[:, :, None] * s                 # k != j part
    kk = np.arange(k)
    t_kj[:, kk, kk] = coef * s[:, kk, kk]
    gw += -(1.0 / (nb * _LN2)) * np.einsum("ikj,ikm->ijm", t_kj, geom.h)

    # CRLB_theta penalty
    if viol_t > 0.0:
        live = crlb_t < cap_t
        dj_dcrlb = 2.0 * config.lambda_theta * viol_t / crlb_t.size
        with np.errstate(divide="ignore", over="ignore"):
            dcrlb_dd = np.where(live, -sr2 / np.maximum(d_theta, 1e-300) ** 2,
                                0.0)
        coef_t = dj_dcrlb * dcrlb_dd
        du = geom.c1sq * (geom.s_bp * u + geom.q_bp * v)
        dv = geom.c1sq * (v + np.conj(geom.q_bp) * u)
        gw += (coef_t * du)[..., None] * geom.a + (coef_t * dv)[..., None] * geom.ap

    # CRLB_d penalty
    if viol_d > 0.0:
        live = crlb_d < cap_d
        dj_dcrlb = 2.0 * config.lambda_d * viol_d / crlb_d.size
        with np.errstate(divide="ignore", over="ignore"):
            coef_d = np.where(live, -geom.c_dist / np.maximum(u2, 1e-300) ** 2,
                              0.0)
        gw += (dj_dcrlb * coef_d * u)[..., None] * geom.a

    # power penalty
    gw += (2.0 * config.lambda_power / nb) * viol_p[:, None, None] * w

    g_o = np.empty_like(o)
    g_o[..., 0] = 2.0 * gw.real
    g_o[..., 1] = 2.0 * gw.imag
    return j, parts, g_o


def penalty_loss(model, x: np.ndarray, geom: BatchGeometry,
                 config: SimConfig) -> tuple[float, dict]:
    """Loss of a model on a batch (x: [Nb, tau, K, M, 2] raw inputs)."""
    o = model.forward(x)
    return penalty_loss_and_grad(o, geom, config, want_grad=False)


def gradient(model, x: np.ndarray, geom: BatchGeometry,
             config: SimConfig) -> tuple[float, dict, np.ndarray]:
    """Loss and exact reverse-mode gradient w.r.t. the flat parameter vector."""
    o, cache = model.forward(x, want_cache=True)
    j, parts, g_o = penalty_loss_and_grad(o, geom, config)
    if not np.isfinite(j):
        raise FloatingPointError(f"non-finite loss: {j}")
    return j, parts, model.backward(g_o, cache)
