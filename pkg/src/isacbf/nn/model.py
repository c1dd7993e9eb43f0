"""The predictive beamforming networks.

HCLNet: per-vehicle CNN feature extraction on each history slot, temporal
LSTM over the window, and a linear output layer producing the real/imaginary
parts of the beamforming matrix.  All parameters live in one flat float64
vector; the structured weights are views into it, and gradients come from an
explicit reverse pass checked against finite differences in the tests.

NaiveNet: the fully-connected baseline mapping the last slot's estimated
(angle, distance) pairs straight to a beamforming matrix.
"""
from __future__ import annotations

import numpy as np

from ..config import SimConfig
from ..io_container import load_container, save_container
from . import kernels

LSTM_HIDDEN = 64
CONV_FILTERS = 4
CNN_ROWS = 4  # a length-M antenna vector is reshaped to 4 x (M/4) x 2


class HistoryWindow:
    """Ordered window of estimated channel matrices, oldest first."""

    def __init__(self, slots: list[np.ndarray]):
        if not slots:
            raise ValueError("history window must contain at least one slot")
        shape = slots[0].shape
        for s in slots:
            if s.shape != shape:
                raise ValueError("all history slots must share a shape")
        self.slots = [np.asarray(s, dtype=complex) for s in slots]

    def __len__(self):
        return len(self.slots)

    def as_tensor(self) -> np.ndarray:
        """Real tensor [tau, K, M, 2]; channel 0 real part, channel 1 imaginary."""
        tau = len(self.slots)
        m, k = self.slots[0].shape
        out = np.empty((tau, k, m, 2))
        for t, h in enumerate(self.slots):
            out[t, :, :, 0] = h.real.T
            out[t, :, :, 1] = h.imag.T
        return out


def map_input(window: HistoryWindow, config: SimConfig,
              kappa: float = 1.0) -> np.ndarray:
    """Pack a history window into the network input tensor, scaled by kappa."""
    if len(window) != config.history_len:
        raise ValueError(
            f"expected {config.history_len} history slots, got {len(window)}")
    return kappa * window.as_tensor()


def window_to_complex(tensor: np.ndarray) -> list[np.ndarray]:
    """Inverse of HistoryWindow.as_tensor (before any kappa scaling)."""
    return [(tensor[t, :, :, 0] + 1j * tensor[t, :, :, 1]).T
            for t in range(tensor.shape[0])]


def output_to_matrix(o: np.ndarray) -> np.ndarray:
    """Map the real [K, M, 2] network output to the complex N_t x K matrix."""
    return (o[:, :, 0] + 1j * o[:, :, 1]).T


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class HCLNet:
    def __init__(self, config: SimConfig, kappa: float = 1.0):
        m = config.n_tx
        if m % 8 != 0:
            raise ValueError("n_tx must be divisible by 8 for the CNN reshape")
        self.config = config
        self.kappa = float(kappa)
        self.k = config.n_vehicles
        self.m = m
        self.tau = config.history_len
        self.hidden = LSTM_HIDDEN
        self.feat = self.k * m          # concatenated CNN features per slot
        self.out_dim = 2 * self.k * m
        self._shapes = [
            ("conv_w", (CONV_FILTERS, 3, 3, 2)),
            ("conv_b", (CONV_FILTERS,)),
            ("wx", (4 * self.hidden, self.feat)),
            ("wh", (4 * self.hidden, self.hidden)),
            ("lstm_b", (4 * self.hidden,)),
            ("fc_w", (self.hidden, self.out_dim)),
            ("fc_b", (self.out_dim,)),
        ]
        self.n_params = sum(int(np.prod(s)) for _, s in self._shapes)
        self.params = np.zeros(self.n_params)
        self._views = {}
        off = 0
        for name, shape in self._shapes:
            size = int(np.prod(shape))
            self._views[name] = self.params[off:off + size].reshape(shape)
            off += size

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    def init_params(self, rng: np.random.Generator) -> None:
        """Glorot-uniform weights, zero biases, +1 forget-gate bias; the output
        layer is scaled by sqrt(P/K) so initial beams start near the budget."""
        v = self._views
        v["conv_w"][:] = _glorot(rng, v["conv_w"].shape, 18, 36)
        v["conv_b"][:] = 0.0
        h, f = self.hidden, self.feat
        v["wx"][:] = _glorot(rng, v["wx"].shape, f, h)
        v["wh"][:] = _glorot(rng, v["wh"].shape, h, h)
        v["lstm_b"][:] = 0.0
        v["lstm_b"][h:2 * h] = 1.0  # forget gate
        scale = np.sqrt(self.config.power_budget / self.config.n_vehicles)
        v["fc_w"][:] = scale * _glorot(rng, v["fc_w"].shape, h, self.out_dim)
        v["fc_b"][:] = 0.0

    # ---- single-slice building blocks --------------------------------------

    def cnn_forward(self, slice_m2: np.ndarray) -> np.ndarray:
        """Feature vector (length M) for one M x 2 per-vehicle channel slice:
        reshape to 4 x (M/4) x 2, conv+ReLU, 2x2 max-pool, flatten."""
        if slice_m2.shape != (self.m, 2):
            raise ValueError(f"expected ({self.m}, 2) slice, got {slice_m2.shape}")
        x4 = np.ascontiguousarray(
            slice_m2.reshape(1, CNN_ROWS, self.m // CNN_ROWS, 2), dtype=np.float64)
        z = kernels.conv2d3x3_same_fwd(x4, self.view("conv_w"), self.view("conv_b"))
        p, _ = kernels.maxpool2x2_fwd(z * (z > 0))
        return p.reshape(-1)

    def lstm_step(self, x: np.ndarray, h_prev: np.ndarray,
                  c_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One LSTM update for a single feature vector (widths feat/hidden)."""
        if x.shape != (self.feat,) or h_prev.shape != (self.hidden,):
            raise ValueError("bad lstm_step input widths")
        hh = self.hidden
        gates = self.view("wx") @ x + self.view("wh") @ h_prev + self.view("lstm_b")
        gi = _sigmoid(gates[:hh])
        gf = _sigmoid(gates[hh:2 * hh])
        gg = np.tanh(gates[2 * hh:3 * hh])
        go = _sigmoid(gates[3 * hh:])
        c = gf * c_prev + gi * gg
        return go * np.tanh(c), c

    # ---- forward / backward ------------------------------------------------

    def forward(self, x: np.ndarray, want_cache: bool = False):
        """Batched forward pass.

        x: [Nb, tau, K, M, 2] raw input tensor (kappa applied here).
        Returns O [Nb, K, M, 2] and, optionally, the cache for backward().
        """
        nb = x.shape[0]
        if x.shape[1:] != (self.tau, self.k, self.m, 2):
            raise ValueError(f"bad input shape {x.shape}")
        v = self._views
        xs = self.kappa * np.asarray(x, dtype=np.float64)
        b = nb * self.tau * self.k
        x4 = np.ascontiguousarray(
            xs.reshape(b, CNN_ROWS, self.m // CNN_ROWS, 2))
        z = kernels.conv2d3x3_same_fwd(x4, v["conv_w"], v["conv_b"])
        mask = z > 0
        r = z * mask
        p, idx = kernels.maxpool2x2_fwd(r)
        seq = p.reshape(nb, self.tau, self.feat)
        h = np.zeros((nb, self.hidden))
        c = np.zeros((nb, self.hidden))
        steps = []
        hh = self.hidden
        for t in range(self.tau):
            xt = seq[:, t, :]
            gates = xt @ v["wx"].T + h @ v["wh"].T + v["lstm_b"]
            gi = _sigmoid(gates[:, :hh])
            gf = _sigmoid(gates[:, hh:2 * hh])
            gg = np.tanh(gates[:, 2 * hh:3 * hh])
            go = _sigmoid(gates[:, 3 * hh:])
            c_new = gf * c + gi * gg
            tc = np.tanh(c_new)
            h_new = go * tc
            steps.append((xt, h, c, gi, gf, gg, go, tc))
            h, c = h_new, c_new
        o = h @ v["fc_w"] + v["fc_b"]
        out = o.reshape(nb, self.k, self.m, 2)
        if not want_cache:
            return out
        cache = {"x4": x4, "mask": mask, "idx": idx, "pshape": r.shape,
                 "steps": steps, "h_final": h, "nb": nb}
        return out, cache

    def backward(self, g_out: np.ndarray, cache: dict) -> np.ndarray:
        """Gradient of a scalar loss w.r.t. the flat parameter vector, given
        the loss gradient w.r.t. the network output [Nb, K, M, 2]."""
        v = self._views
        nb = cache["nb"]
        go = g_out.reshape(nb, self.out_dim)
        g_fc_w = cache["h_final"].T @ go
        g_fc_b = go.sum(axis=0)
        gh = go @ v["fc_w"].T
        gc = np.zeros_like(gh)
        g_wx = np.zeros_like(v["wx"])
        g_wh = np.zeros_like(v["wh"])
        g_lb = np.zeros_like(v["lstm_b"])
        gseq = np.empty((nb, self.tau, self.feat))
        for t in range(self.tau - 1, -1, -1):
            xt, h_prev, c_prev, gi, gf, gg, go_, tc = cache["steps"][t]
            d_o = gh * tc
            gc = gc + gh * go_ * (1.0 - tc * tc)
            d_i = gc * gg
            d_g = gc * gi
            d_f = gc * c_prev
            gc_prev = gc * gf
            dgates = np.concatenate([
                d_i * gi * (1.0 - gi),
                d_f * gf * (1.0 - gf),
                d_g * (1.0 - gg * gg),
                d_o * go_ * (1.0 - go_),
            ], axis=1)
            g_wx += dgates.T @ xt
            g_wh += dgates.T @ h_prev
            g_lb += dgates.sum(axis=0)
            gseq[:, t, :] = dgates @ v["wx"]
            gh = dgates @ v["wh"]
            gc = gc_prev
        b = nb * self.tau * self.k
        gp = gseq.reshape(b, self.pool_h, self.pool_w, CONV_FILTERS)
        gr = kernels.maxpool2x2_bwd(cache["idx"], gp, cache["pshape"])
        gz = gr * cache["mask"]
        _, g_cw, g_cb = kernels.conv2d3x3_same_bwd(cache["x4"], v["conv_w"], gz)
        grad = np.empty_like(self.params)
        off = 0
        for name, shape in self._shapes:
            size = int(np.prod(shape))
            block = {"conv_w": g_cw, "conv_b": g_cb, "wx": g_wx, "wh": g_wh,
                     "lstm_b": g_lb, "fc_w": g_fc_w, "fc_b": g_fc_b}[name]
            grad[off:off + size] = block.ravel()
            off += size
        return grad

    @property
    def pool_h(self) -> int:
        return CNN_ROWS // 2

    @property
    def pool_w(self) -> int:
        return self.m // CNN_ROWS // 2

    # ---- inference ---------------------------------------------------------

    def predict(self, window: HistoryWindow, project: bool = False) -> np.ndarray:
        """Beamforming matrix (N_t x K) for one history window."""
        x = map_input(window, self.config)[None, ...]
        o = self.forward(x)
        w = output_to_matrix(o[0])
        if project:
            pw = float(np.sum(np.abs(w) ** 2))
            if pw > self.config.power_budget:
                w = w * np.sqrt(self.config.power_budget / pw)
        return w

    # ---- persistence -------------------------------------------------------

    def save(self, path: str) -> None:
        meta = {"kind": "hcl", "kappa": self.kappa,
                "config": self.config.as_dict(),
                "shapes": {n: list(s) for n, s in self._shapes}}
        save_container(path, meta, {"params": self.params})

    @classmethod
    def load(cls, path: str, config: SimConfig) -> "HCLNet":
        meta, arrays = load_container(path)
        if meta.get("kind") != "hcl":
            raise ValueError(f"{path}: not an HCL-Net model file")
        net = cls(config, kappa=meta["kappa"])
        if arrays["params"].shape != net.params.shape:
            raise ValueError(f"{path}: parameter count mismatch")
        net.params[:] = arrays["params"]
        return net


class NaiveNet:
    """FC baseline: (angle, distance) of the last slot -> beamforming matrix.

    Two ReLU hidden layers of width 128; distances are divided by 100 m on
    input to keep features O(1).
    """

    HIDDEN = 128
    DIST_SCALE = 100.0

    def __init__(self, config: SimConfig):
        self.config = config
        self.k = config.n_vehicles
        self.m = config.n_tx
        self.in_dim = 2 * self.k
        self.out_dim = 2 * self.k * self.m
        hdim = self.HIDDEN
        self._shapes = [
            ("w1", (self.in_dim, hdim)), ("b1", (hdim,)),
            ("w2", (hdim, hdim)), ("b2", (hdim,)),
            ("w3", (hdim, self.out_dim)), ("b3", (self.out_dim,)),
        ]
        self.n_params = sum(int(np.prod(s)) for _, s in self._shapes)
        self.params = np.zeros(self.n_params)
        self._views = {}
        off = 0
        for name, shape in self._shapes:
            size = int(np.prod(shape))
            self._views[name] = self.params[off:off + size].reshape(shape)
            off += size

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    def init_params(self, rng: np.random.Generator) -> None:
        v = self._views
        h = self.HIDDEN
        v["w1"][:] = _glorot(rng, v["w1"].shape, self.in_dim, h)
        v["w2"][:] = _glorot(rng, v["w2"].shape, h, h)
        scale = np.sqrt(self.config.power_budget / self.config.n_vehicles)
        v["w3"][:] = scale * _glorot(rng, v["w3"].shape, h, self.out_dim)
        for b in ("b1", "b2", "b3"):
            v[b][:] = 0.0

    def features(self, thetas: np.ndarray, dists: np.ndarray) -> np.ndarray:
        """Input features for batches of [Nb, K] angle/distance estimates."""
        return np.concatenate([thetas, dists / self.DIST_SCALE], axis=1)

    def forward(self, x: np.ndarray, want_cache: bool = False):
        v = self._views
        z1 = x @ v["w1"] + v["b1"]
        a1 = np.maximum(z1, 0.0)
        z2 = a1 @ v["w2"] + v["b2"]
        a2 = np.maximum(z2, 0.0)
        o = a2 @ v["w3"] + v["b3"]
        out = o.reshape(x.shape[0], self.k, self.m, 2)
        if not want_cache:
            return out
        return out, {"x": x, "z1": z1, "a1": a1, "z2": z2, "a2": a2}

    def backward(self, g_out: np.ndarray, cache: dict) -> np.ndarray:
        v = self._views
        go = g_out.reshape(g_out.shape[0], self.out_dim)
        g_w3 = cache["a2"].T @ go
        g_b3 = go.sum(axis=0)
        ga2 = (go @ v["w3"].T) * (cache["z2"] > 0)
        g_w2 = cache["a1"].T @ ga2
        g_b2 = ga2.sum(axis=0)
        ga1 = (ga2 @ v["w2"].T) * (cache["z1"] > 0)
        g_w1 = cache["x"].T @ ga1
        g_b1 = ga1.sum(axis=0)
        grad = np.empty_like(self.params)
        off = 0
        blocks = {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2,
                  "w3": g_w3, "b3": g_b3}
        for name, shape in self._shapes:
            size = int(np.prod(shape))
            grad[off:off + size] = blocks[name].ravel()
            off += size
        return grad

    def save(self, path: str) -> None:
        meta = {"kind": "naive", "kappa": 1.0,
                "config": self.config.as_dict(),
                "shapes": {n: list(s) for n, s in self._shapes}}
        save_container(path, meta, {"params": self.params})

    @classmethod
    def load(cls, path: str, config: SimConfig) -> "NaiveNet":
        meta, arrays = load_container(path)
        if meta.get("kind") != "naive":
            raise ValueError(f"{path}: not a naive-DL model file")
        net = cls(config)
        if arrays["params"].shape != net.params.shape:
            raise ValueError(f"{path}: parameter count mismatch")
        net.params[:] = arrays["params"]
        return net


def load_model(path: str, config: SimConfig):
    meta, _ = load_container(path)
    kind = meta.get("kind")
    if kind == "hcl":
        return HCLNet.load(path, config)
    if kind == "naive":
        return NaiveNet.load(path, config)
    raise ValueError(f"{path}: unknown model kind {kind!r}")
