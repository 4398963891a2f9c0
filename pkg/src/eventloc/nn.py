"""Minimal self-contained neural-network kernel.

Hand-coded layers over numpy arrays: dense, LSTM cell and sequence (with
backprop through time), bidirectional wrapper with variational recurrent
dropout, width-3 same-padded residual convolution, inverted dropout,
binary cross-entropy in stable logit form, Adam, and a finite-difference
gradient checker. No autodiff graph: every backward is written out.

Arrays default to 64-bit; initializers accept a dtype so training can run
in 32-bit when speed matters.

Per-step LSTM update, gates in (i, f, g, o) order:

    pre = x_t W + h_{t-1} U + b
    i, f, o = sigmoid(pre_i), sigmoid(pre_f), sigmoid(pre_o)
    g = tanh(pre_g)
    c_t = f * c_{t-1} + i * g
    h_t = o * tanh(c_t)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.result_type(x, np.float32))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


# ---------------------------------------------------------------------------
# parameters and optimizer


class ParamStore:
    """Named parameter tensors with matching gradient buffers."""

    def __init__(self, dtype=np.float64, rng_seed: int = 0):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.dtype = dtype
        self.rng_seed = rng_seed

    def add(self, name: str, value: np.ndarray) -> None:
        if name in self.params:
            raise ValueError(f"duplicate parameter name {name!r}")
        self.params[name] = np.asarray(value, dtype=self.dtype)
        self.grads[name] = np.zeros_like(self.params[name])

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def scale_grads(self, factor: float) -> None:
        for g in self.grads.values():
            g *= factor

    def accumulate(self, grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            self.grads[name] += g

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.params.items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        for name, value in snapshot.items():
            if self.params[name].shape != value.shape:
                raise ValueError(f"shape mismatch restoring {name!r}")
            self.params[name][...] = value


@dataclass
class AdamState:
    """First/second moment buffers plus hyperparameters for Adam."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_store(cls, store: ParamStore, lr: float = 1e-3, beta1: float = 0.9,
                  beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        state = cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        for name, value in store.params.items():
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        return state


def adam_step(store: ParamStore, state: AdamState) -> None:
    """One bias-corrected Adam update from the gradients in the store."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1 ** state.step
    bias2 = 1.0 - b2 ** state.step
    for name, param in store.params.items():
        g = store.grads[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * (g * g)
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        param -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# initializers


def uniform_fan_in(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int,
                   dtype=np.float64) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def orthogonal(rng: np.random.Generator, n: int, dtype=np.float64) -> np.ndarray:
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))  # fix sign so the result is deterministic
    return q.astype(dtype)


def init_dense(rng: np.random.Generator, in_dim: int, out_dim: int,
               dtype=np.float64) -> tuple[np.ndarray, np.ndarray]:
    return (uniform_fan_in(rng, (in_dim, out_dim), in_dim, dtype),
            np.zeros(out_dim, dtype=dtype))


def init_lstm(rng: np.random.Generator, input_dim: int, hidden: int,
              dtype=np.float64) -> dict[str, np.ndarray]:
    """LSTM parameters: fan-in uniform input weights, per-gate orthogonal
    recurrent weights, zero biases except forget-gate bias 1.0."""
    w = uniform_fan_in(rng, (input_dim, 4 * hidden), input_dim, dtype)
    u = np.hstack([orthogonal(rng, hidden, dtype) for _ in range(4)])
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden:2 * hidden] = 1.0
    return {"W": w, "U": u, "b": b}


def init_conv3(rng: np.random.Generator, channels: int,
               dtype=np.float64) -> tuple[np.ndarray, np.ndarray]:
    kernel = uniform_fan_in(rng, (3, channels, channels), 3 * channels, dtype)
    return kernel, np.zeros(channels, dtype=dtype)


# ---------------------------------------------------------------------------
# dense layer

_ACTIVATIONS = ("relu", "sigmoid", "identity")


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray, activation: str = "identity"):
    """act(x W + b) broadcast over rows; returns (output, cache)."""
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ValueError(f"dense shape mismatch: x {x.shape} vs W {w.shape}")
    if b.shape != (w.shape[1],):
        raise ValueError(f"dense bias shape {b.shape} does not match W {w.shape}")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    pre = x @ w + b
    if activation == "relu":
        out = relu(pre)
    elif activation == "sigmoid":
        out = sigmoid(pre)
    else:
        out = pre
    return out, (x, w, pre, out, activation)


def dense_backward(d_out: np.ndarray, cache):
    """Gradients (dx, dW, db) for a dense forward pass."""
    x, w, pre, out, activation = cache
    if activation == "relu":
        d_pre = d_out * (pre > 0)
    elif activation == "sigmoid":
        d_pre = d_out * out * (1.0 - out)
    else:
        d_pre = d_out
    return d_pre @ w.T, x.T @ d_pre, d_pre.sum(axis=0)


# ---------------------------------------------------------------------------
# LSTM


def lstm_cell(x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray,
              params: dict[str, np.ndarray]):
    """One gated update; returns (h_t, c_t)."""
    (h_t, c_t), _ = _lstm_step(x_t, h_prev, c_prev, params)
    return h_t, c_t


def _lstm_step(x_t, h_prev, c_prev, params):
    w, u, b = params["W"], params["U"], params["b"]
    hidden = u.shape[0]
    if x_t.shape[-1] != w.shape[0] or h_prev.shape[-1] != hidden:
        raise ValueError("lstm_cell shape mismatch")
    pre = x_t @ w + h_prev @ u + b
    i = sigmoid(pre[..., :hidden])
    f = sigmoid(pre[..., hidden:2 * hidden])
    g = np.tanh(pre[..., 2 * hidden:3 * hidden])
    o = sigmoid(pre[..., 3 * hidden:])
    c_t = f * c_prev + i * g
    tanh_c = np.tanh(c_t)
    h_t = o * tanh_c
    return (h_t, c_t), (i, f, g, o, tanh_c)


def lstm_forward(x: np.ndarray, params: dict[str, np.ndarray],
                 h_mask: np.ndarray | None = None):
    """Run the cell over a whole (n, m) sequence; returns (H, cache).

    ``h_mask`` is a per-sequence dropout mask (already inverted-scaled)
    applied to the previous hidden state inside the recurrence.
    """
    w, u, b = params["W"], params["U"], params["b"]
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ValueError(f"lstm shape mismatch: x {x.shape} vs W {w.shape}")
    n = x.shape[0]
    hidden = u.shape[0]
    dtype = w.dtype

    pre_x = x @ w  # gate inputs from x, all steps at once
    h = np.zeros(hidden, dtype=dtype)
    c = np.zeros(hidden, dtype=dtype)
    h_all = np.zeros((n, hidden), dtype=dtype)
    h_in_all = np.zeros((n, hidden), dtype=dtype)
    c_prev_all = np.zeros((n, hidden), dtype=dtype)
    gates = np.zeros((n, 5, hidden), dtype=dtype)  # i, f, g, o, tanh(c)

    for t in range(n):
        h_in = h * h_mask if h_mask is not None else h
        pre = pre_x[t] + h_in @ u + b
        i = sigmoid(pre[:hidden])
        f = sigmoid(pre[hidden:2 * hidden])
        g = np.tanh(pre[2 * hidden:3 * hidden])
        o = sigmoid(pre[3 * hidden:])
        c_prev_all[t] = c
        c = f * c + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        h_all[t] = h
        h_in_all[t] = h_in
        gates[t, 0], gates[t, 1], gates[t, 2], gates[t, 3], gates[t, 4] = i, f, g, o, tanh_c

    cache = (x, params, h_mask, h_all, h_in_all, c_prev_all, gates)
    return h_all, cache


def lstm_backward(d_h_all: np.ndarray, cache):
    """Backprop through time; returns (dx, {"W","U","b"} gradients)."""
    x, params, h_mask, h_all, h_in_all, c_prev_all, gates = cache
    w, u = params["W"], params["U"]
    n, hidden = d_h_all.shape
    d_pre_all = np.zeros((n, 4 * hidden), dtype=w.dtype)

    dh_next = np.zeros(hidden, dtype=w.dtype)
    dc_next = np.zeros(hidden, dtype=w.dtype)
    for t in range(n - 1, -1, -1):
        i, f, g, o, tanh_c = gates[t]
        dh = d_h_all[t] + dh_next
        do = dh * tanh_c * o * (1.0 - o)
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        di = dc * g * i * (1.0 - i)
        df = dc * c_prev_all[t] * f * (1.0 - f)
        dg = dc * i * (1.0 - g * g)
        d_pre = np.concatenate([di, df, dg, do])
        d_pre_all[t] = d_pre
        dh_in = d_pre @ u.T
        dh_next = dh_in * h_mask if h_mask is not None else dh_in
        dc_next = dc * f

    grads = {
        "W": x.T @ d_pre_all,
        "U": h_in_all.T @ d_pre_all,
        "b": d_pre_all.sum(axis=0),
    }
    return d_pre_all @ w.T, grads


def bilstm(x: np.ndarray, params: dict[str, dict[str, np.ndarray]],
           recurrent_dropout: float = 0.0, training: bool = False,
           rng: np.random.Generator | None = None):
    """Concatenate left-to-right and right-to-left LSTM states per step.

    Recurrent dropout draws one inverted mask per sequence per direction
    and applies it to the previous hidden state; inference is mask-free.
    Returns ((n, 2H) output, cache).
    """
    mask_f = mask_b = None
    if training and recurrent_dropout > 0.0:
        if rng is None:
            raise ValueError("recurrent dropout in training mode needs an rng")
        hidden = params["fwd"]["U"].shape[0]
        keep = 1.0 - recurrent_dropout
        mask_f = (rng.random(hidden) < keep) / keep
        mask_b = (rng.random(hidden) < keep) / keep
    fwd_out, fwd_cache = lstm_forward(x, params["fwd"], mask_f)
    bwd_out_rev, bwd_cache = lstm_forward(x[::-1], params["bwd"], mask_b)
    out = np.hstack([fwd_out, bwd_out_rev[::-1]])
    return out, (fwd_cache, bwd_cache)


def bilstm_backward(d_out: np.ndarray, cache):
    """Returns (dx, {"fwd": grads, "bwd": grads})."""
    fwd_cache, bwd_cache = cache
    hidden = d_out.shape[1] // 2
    dx_f, grads_f = lstm_backward(d_out[:, :hidden], fwd_cache)
    dx_b_rev, grads_b = lstm_backward(d_out[::-1, hidden:], bwd_cache)
    return dx_f + dx_b_rev[::-1], {"fwd": grads_f, "bwd": grads_b}


# ---------------------------------------------------------------------------
# residual width-3 convolution


def residual_conv_block(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray):
    """y = x + relu(conv3(x)) with zero same-padding and stride 1."""
    if x.ndim != 2 or kernel.shape != (3, x.shape[1], x.shape[1]):
        raise ValueError(
            f"conv shape mismatch: x {x.shape} vs kernel {kernel.shape}"
        )
    n, c = x.shape
    padded = np.zeros((n + 2, c), dtype=x.dtype)
    padded[1:-1] = x
    windows = np.hstack([padded[:-2], padded[1:-1], padded[2:]])  # (n, 3c)
    pre = windows @ kernel.reshape(3 * c, c) + bias
    act = relu(pre)
    return x + act, (x, windows, kernel, pre)


def residual_conv_backward(d_out: np.ndarray, cache):
    """Returns (dx, dK, db) for a residual conv block."""
    x, windows, kernel, pre = cache
    n, c = x.shape
    d_act = d_out * (pre > 0)
    d_kernel = (windows.T @ d_act).reshape(3, c, c)
    d_bias = d_act.sum(axis=0)
    d_windows = d_act @ kernel.reshape(3 * c, c).T
    d_padded = np.zeros((n + 2, c), dtype=x.dtype)
    d_padded[:-2] += d_windows[:, :c]
    d_padded[1:-1] += d_windows[:, c:2 * c]
    d_padded[2:] += d_windows[:, 2 * c:]
    return d_padded[1:-1] + d_out, d_kernel, d_bias


# ---------------------------------------------------------------------------
# dropout


def dropout(x: np.ndarray, rate: float, training: bool,
            rng: np.random.Generator | None = None):
    """Inverted dropout: survivors scaled by 1/(1-rate) at training time so
    inference needs no rescaling. Returns (output, mask or None)."""
    if not training or rate <= 0.0:
        return x, None
    if rng is None:
        raise ValueError("dropout in training mode needs an rng")
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep) / keep
    return x * mask, mask


def dropout_backward(d_out: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return d_out if mask is None else d_out * mask


# ---------------------------------------------------------------------------
# loss

BCE_CLAMP = 1e-12


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy from probabilities (clamped away from 0/1)."""
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    if probs.shape != labels.shape:
        raise ValueError("bce_loss length mismatch")
    p = np.clip(probs, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def bce_with_logits(logits: np.ndarray, labels: np.ndarray):
    """Numerically stable mean BCE; returns (loss, gradient w.r.t. logits).

    loss = mean( max(z, 0) - z y + log(1 + exp(-|z|)) )
    dz   = (sigmoid(z) - y) / n
    """
    z = np.asarray(logits, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if z.shape != y.shape:
        raise ValueError("bce_with_logits length mismatch")
    n = z.size
    loss = float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))
    grad = (sigmoid(z) - y) / n
    return loss, grad


# ---------------------------------------------------------------------------
# finite-difference verification


def grad_check(loss_and_grads, params: dict[str, np.ndarray], eps: float = 1e-5,
               coords_per_tensor: int = 120, seed: int = 0) -> float:
    """Compare analytic gradients against central finite differences.

    ``loss_and_grads`` recomputes the scalar loss and a gradient dict for
    the current parameter values. For each tensor a random subsample of
    coordinates is perturbed in place by +/-eps. Errors are normalized by
    max(1, |analytic|, |numeric|) so near-zero gradients are compared
    absolutely. Returns the maximum error over all sampled coordinates.
    """
    rng = np.random.default_rng(seed)
    _, analytic = loss_and_grads()
    worst = 0.0
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        size = flat.size
        count = min(size, coords_per_tensor)
        coords = rng.choice(size, size=count, replace=False)
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + eps
            loss_plus, _ = loss_and_grads()
            flat[idx] = original - eps
            loss_minus, _ = loss_and_grads()
            flat[idx] = original
            numeric = (loss_plus - loss_minus) / (2.0 * eps)
            a = float(analytic[name].reshape(-1)[idx])
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, err)
    return worst
