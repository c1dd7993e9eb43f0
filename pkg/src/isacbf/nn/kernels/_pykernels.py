"""Pure-numpy fallback kernels for the conv/pool hot path.

Shapes follow channels-last layout: x is [B, H, W, C_in], filters are
[F, 3, 3, C_in], conv output is [B, H, W, F] with zero-padded "same"
convolution (implemented as cross-correlation, the usual NN convention).
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def conv2d3x3_same_fwd(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    bsz, h, wd, cin = x.shape
    nf = w.shape[0]
    xp = np.zeros((bsz, h + 2, wd + 2, cin), dtype=x.dtype)
    xp[:, 1:-1, 1:-1, :] = x
    y = np.broadcast_to(b, (bsz, h, wd, nf)).copy()
    for dy in range(3):
        for dx in range(3):
            # [B,H,W,Cin] @ [Cin,F]
            y += xp[:, dy:dy + h, dx:dx + wd, :] @ w[:, dy, dx, :].T
    return y


def conv2d3x3_same_bwd(x: np.ndarray, w: np.ndarray, gy: np.ndarray):
    bsz, h, wd, cin = x.shape
    nf = w.shape[0]
    xp = np.zeros((bsz, h + 2, wd + 2, cin), dtype=x.dtype)
    xp[:, 1:-1, 1:-1, :] = x
    gxp = np.zeros_like(xp)
    gw = np.zeros_like(w)
    for dy in range(3):
        for dx in range(3):
            patch = xp[:, dy:dy + h, dx:dx + wd, :]
            gw[:, dy, dx, :] = np.einsum("bijc,bijf->fc", patch, gy)
            gxp[:, dy:dy + h, dx:dx + wd, :] += gy @ w[:, dy, dx, :]
    gb = gy.sum(axis=(0, 1, 2))
    return gxp[:, 1:-1, 1:-1, :], gw, gb


def maxpool2x2_fwd(x: np.ndarray):
    bsz, h, wd, c = x.shape
    win = x.reshape(bsz, h // 2, 2, wd // 2, 2, c).transpose(0, 1, 3, 5, 2, 4)
    win = win.reshape(bsz, h // 2, wd // 2, c, 4)
    idx = win.argmax(axis=-1)
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return out, idx.astype(np.int64)


def maxpool2x2_bwd(idx: np.ndarray, gy: np.ndarray, shape) -> np.ndarray:
    bsz, h, wd, c = shape
    gwin = np.zeros((bsz, h // 2, wd // 2, c, 4), dtype=gy.dtype)
    np.put_along_axis(gwin, idx[..., None], gy[..., None], axis=-1)
    gwin = gwin.reshape(bsz, h // 2, wd // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    return gwin.reshape(bsz, h, wd, c)
