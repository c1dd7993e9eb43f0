"""Gradient-descent training loop for the beamforming networks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import SimConfig
from .loss import BatchGeometry, penalty_loss_and_grad


class TrainingDiverged(RuntimeError):
    def __init__(self, trace):
        super().__init__("training loss became non-finite")
        self.trace = trace


@dataclass
class TrainHyper:
    lr: float = 1e-3
    batch_size: int = 256
    max_iters: int = 2000
    momentum: float = 0.9
    # global gradient-norm ceiling; the penalty terms produce cliff-like
    # gradients when a constraint is badly violated
    max_grad_norm: float = 100.0
    seed: int = 0


@dataclass
class TrainResult:
    loss_trace: list = field(default_factory=list)


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    if batch_size >= n:
        while True:
            yield slice(None)
    while True:
        perm = rng.permutation(n)
        for start in range(0, n - batch_size + 1, batch_size):
            yield perm[start:start + batch_size]


def train(model, inputs, geom: BatchGeometry, config: SimConfig,
          hyper: TrainHyper) -> TrainResult:
    """Minimize the penalty loss by momentum gradient descent.

    ``model`` is an HCLNet or NaiveNet (already initialized); ``inputs`` is the
    stacked per-example network input (first axis = example) and ``geom`` the
    matching BatchGeometry.  Divergence (non-finite loss) aborts with the
    trace attached.
    """
    rng = np.random.default_rng(hyper.seed)
    result = TrainResult()
    velocity = np.zeros_like(model.params)
    batches = _batches(len(geom), hyper.batch_size, rng)
    for it in range(hyper.max_iters):
        idx = next(batches)
        x = inputs[idx]
        sub = geom if isinstance(idx, slice) else geom.subset(idx)
        o, cache = model.forward(x, want_cache=True)
        j, _, g_o = penalty_loss_and_grad(o, sub, config)
        if not np.isfinite(j):
            raise TrainingDiverged(result.loss_trace)
        result.loss_trace.append(float(j))
        grad = model.backward(g_o, cache)
        gnorm = float(np.linalg.norm(grad))
        if hyper.max_grad_norm > 0 and gnorm > hyper.max_grad_norm:
            grad = grad * (hyper.max_grad_norm / gnorm)
        velocity = hyper.momentum * velocity - hyper.lr * grad
        model.params += velocity
    return result
