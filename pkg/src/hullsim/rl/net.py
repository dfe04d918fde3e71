"""Dense Q-network with hand-rolled backprop; no external ML runtime.

Rectified hidden layers, mean-squared temporal-difference loss, plain
gradient descent with global-norm gradient clipping. Analytic gradients are
checked against central finite differences in the test suite.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"HSQN"
FORMAT_VERSION = 1
GRAD_CLIP_NORM = 10.0


class QNetwork:
    """MLP mapping an observation row to one Q-value per discrete action."""

    def __init__(self, sizes: tuple[int, ...], rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        rng = rng or np.random.default_rng(0)
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            scale = np.sqrt(2.0 / n_in)
            self.weights.append(rng.normal(0.0, scale, size=(n_in, n_out)))
            self.biases.append(np.zeros(n_out))

    def copy(self) -> "QNetwork":
        dup = QNetwork.__new__(QNetwork)
        dup.sizes = self.sizes
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(x, dtype=np.float64))
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    def _forward_cached(self, x: np.ndarray):
        pre: list[np.ndarray] = []
        post: list[np.ndarray] = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i < last else z
            post.append(h)
        return h, pre, post

    def loss_and_grads(self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray):
        """Mean-squared TD loss over (x, a, y) and its gradients."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = x.shape[0]
        q, pre, post = self._forward_cached(x)
        qa = q[np.arange(n), actions]
        err = qa - targets
        loss = float(np.mean(err ** 2))
        dq = np.zeros_like(q)
        dq[np.arange(n), actions] = 2.0 * err / n
        gw = [np.empty(0)] * len(self.weights)
        gb = [np.empty(0)] * len(self.biases)
        delta = dq
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = post[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (pre[i - 1] > 0.0)
        return loss, gw, gb

    def apply_gradients(self, gw, gb, lr: float, clip_norm: float = GRAD_CLIP_NORM) -> float:
        """Clipped gradient-descent step; returns the pre-clip global norm."""
        total = 0.0
        for g in gw:
            total += float(np.sum(g * g))
        for g in gb:
            total += float(np.sum(g * g))
        norm = np.sqrt(total)
        scale = 1.0 if norm <= clip_norm else clip_norm / norm
        for w, g in zip(self.weights, gw):
            w -= lr * scale * g
        for b, g in zip(self.biases, gb):
            b -= lr * scale * g
        return norm

    # --- serialization: magic, version, layer shapes, little-endian f32 ------

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", FORMAT_VERSION, len(self.weights)))
            for w in self.weights:
                f.write(struct.pack("<II", w.shape[0], w.shape[1]))
            for w, b in zip(self.weights, self.biases):
                f.write(w.astype("<f4").tobytes())
                f.write(b.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "QNetwork":
        with open(path, "rb") as f:
            blob = f.read()
        if blob[:4] != MAGIC:
            raise ValueError("not a policy weights file (bad magic)")
        version, n_layers = struct.unpack_from("<II", blob, 4)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported weights version {version}")
        off = 12
        shapes = []
        for _ in range(n_layers):
            n_in, n_out = struct.unpack_from("<II", blob, off)
            shapes.append((n_in, n_out))
            off += 8
        net = cls.__new__(cls)
        net.sizes = tuple([shapes[0][0]] + [s[1] for s in shapes])
        net.weights, net.biases = [], []
        for n_in, n_out in shapes:
            w = np.frombuffer(blob, dtype="<f4", count=n_in * n_out, offset=off)
            off += 4 * n_in * n_out
            b = np.frombuffer(blob, dtype="<f4", count=n_out, offset=off)
            off += 4 * n_out
            net.weights.append(w.reshape(n_in, n_out).astype(np.float64))
            net.biases.append(b.astype(np.float64))
        if off != len(blob):
            raise ValueError("trailing bytes in weights file")
        return net
