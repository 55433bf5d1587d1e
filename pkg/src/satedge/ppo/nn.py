"""Tiny tanh MLP with hand-written backprop, and Adam."""
from __future__ import annotations

import numpy as np


class MLP:
    """``x -> tanh(x W0 + b0) -> ... -> x W_last + b_last`` on row batches."""

    def __init__(self, sizes, rng: np.random.Generator, out_scale: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        self.params = []
        n_layers = len(self.sizes) - 1
        for k, (n_in, n_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            gain = out_scale if k == n_layers - 1 else 1.0
            # orthogonal init, the usual choice for small policy nets
            a = rng.standard_normal((max(n_in, n_out), min(n_in, n_out)))
            q, r = np.linalg.qr(a)
            q = q * np.sign(np.diag(r))
            W = q if n_in >= n_out else q.T
            self.params += [gain * W[:n_in, :n_out].copy(), np.zeros(n_out)]

    def copy(self) -> "MLP":
        other = object.__new__(MLP)
        other.sizes = self.sizes
        other.params = [p.copy() for p in self.params]
        return other

    def forward(self, x: np.ndarray):
        acts = [x]
        n_layers = len(self.params) // 2
        for k in range(n_layers):
            z = acts[-1] @ self.params[2 * k] + self.params[2 * k + 1]
            acts.append(np.tanh(z) if k < n_layers - 1 else z)
        return acts[-1], acts

    def backward(self, acts, dout: np.ndarray) -> list:
        """Gradients w.r.t. ``params`` given dLoss/dOutput."""
        n_layers = len(self.params) // 2
        grads = [None] * len(self.params)
        delta = dout
        for k in reversed(range(n_layers)):
            grads[2 * k] = acts[k].T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k > 0:
                delta = (delta @ self.params[2 * k].T) * (1.0 - acts[k] ** 2)
        return grads


class Adam:
    def __init__(self, params, lr=3e-4, betas=(0.9, 0.999), eps=1e-5):
        self.lr, self.b1, self.b2, self.eps = lr, betas[0], betas[1], eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        """In-place descent step on ``params``."""
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}
