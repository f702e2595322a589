"""Gated recurrent network core: forward pass, loss, and exact backprop.

Everything here is plain numpy written out by hand so the finite-difference
check can certify the gradients. One step of the recurrence, acting on the
concatenation z_t = [S_{t-1}, x_t]:

    f, i, o = sigmoid(W_{f,i,o} z_t + b_{f,i,o})
    g       = tanh(W_c z_t + b_c)
    C_t     = f * C_{t-1} + i * g
    S_t     = o * tanh(C_t)

followed by a 3-way softmax head on S_T.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import EmptySequence
from .text import Vocab


@dataclass
class LstmParams:
    w_f: np.ndarray  # (h, h+d)
    w_i: np.ndarray
    w_c: np.ndarray
    w_o: np.ndarray
    b_f: np.ndarray  # (h,)
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.b_f.size


@dataclass
class SentimentModel:
    vocab: Vocab
    embeddings: np.ndarray  # (|V|, d)
    lstm: LstmParams
    head_w: np.ndarray  # (3, h)
    head_b: np.ndarray  # (3,)
    classes: tuple[str, str, str] = ("pos", "neg", "neu")
    loss_trajectory: tuple[float, ...] = ()


def _sigmoid(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.asarray(logits, dtype=float)
    shifted = shifted - shifted.max()
    e = np.exp(shifted)
    return e / e.sum()


def _lstm_trace(x: np.ndarray, params: LstmParams) -> dict:
    """Forward pass keeping every intermediate needed for backprop."""
    steps, _ = x.shape
    h = params.hidden_size
    trace = {k: np.empty((steps, h)) for k in ("f", "i", "o", "g", "c", "tanh_c", "s")}
    trace["z"] = np.empty((steps, h + x.shape[1]))
    s = np.zeros(h)
    c = np.zeros(h)
    for t in range(steps):
        z = np.concatenate([s, x[t]])
        f = _sigmoid(params.w_f @ z + params.b_f)
        i = _sigmoid(params.w_i @ z + params.b_i)
        o = _sigmoid(params.w_o @ z + params.b_o)
        g = np.tanh(params.w_c @ z + params.b_c)
        c = f * c + i * g
        tanh_c = np.tanh(c)
        s = o * tanh_c
        trace["z"][t] = z
        trace["f"][t], trace["i"][t], trace["o"][t], trace["g"][t] = f, i, o, g
        trace["c"][t], trace["tanh_c"][t], trace["s"][t] = c, tanh_c, s
    return trace


def lstm_forward(x_seq, params: LstmParams) -> tuple[list[np.ndarray], np.ndarray]:
    """Hidden states S_1..S_T and the final cell state C_T."""
    if len(x_seq) == 0:
        raise EmptySequence("recurrence needs at least one input vector")
    x = np.asarray(x_seq, dtype=float)
    trace = _lstm_trace(x, params)
    return [trace["s"][t] for t in range(x.shape[0])], trace["c"][-1]


def _forward(model: SentimentModel, ids) -> tuple[dict, np.ndarray, np.ndarray]:
    if len(ids) == 0:
        raise EmptySequence("token id sequence is empty")
    x = model.embeddings[list(ids)]
    trace = _lstm_trace(x, model.lstm)
    logits = model.head_w @ trace["s"][-1] + model.head_b
    return trace, logits, softmax(logits)


def logits_for(model: SentimentModel, ids) -> np.ndarray:
    _, logits, _ = _forward(model, ids)
    return logits


def example_loss(model: SentimentModel, ids, label: int) -> float:
    _, _, p = _forward(model, ids)
    return float(-np.log(p[label]))


def example_loss_and_grads(model: SentimentModel, ids, label: int):
    """Cross-entropy loss and its exact gradient for one encoded example."""
    trace, _, p = _forward(model, ids)
    params = model.lstm
    h = params.hidden_size
    steps = len(ids)

    grads = {
        "emb": np.zeros_like(model.embeddings),
        "w_f": np.zeros_like(params.w_f),
        "w_i": np.zeros_like(params.w_i),
        "w_c": np.zeros_like(params.w_c),
        "w_o": np.zeros_like(params.w_o),
        "b_f": np.zeros_like(params.b_f),
        "b_i": np.zeros_like(params.b_i),
        "b_c": np.zeros_like(params.b_c),
        "b_o": np.zeros_like(params.b_o),
    }
    du = p.copy()
    du[label] -= 1.0
    grads["head_w"] = np.outer(du, trace["s"][-1])
    grads["head_b"] = du

    ds = model.head_w.T @ du
    dc_next = np.zeros(h)
    for t in range(steps - 1, -1, -1):
        f, i, o, g = trace["f"][t], trace["i"][t], trace["o"][t], trace["g"][t]
        tanh_c = trace["tanh_c"][t]
        c_prev = trace["c"][t - 1] if t > 0 else np.zeros(h)

        do = ds * tanh_c
        dc = dc_next + ds * o * (1.0 - tanh_c**2)
        da_f = dc * c_prev * f * (1.0 - f)
        da_i = dc * g * i * (1.0 - i)
        da_g = dc * i * (1.0 - g**2)
        da_o = do * o * (1.0 - o)

        z = trace["z"][t]
        grads["w_f"] += np.outer(da_f, z)
        grads["w_i"] += np.outer(da_i, z)
        grads["w_c"] += np.outer(da_g, z)
        grads["w_o"] += np.outer(da_o, z)
        grads["b_f"] += da_f
        grads["b_i"] += da_i
        grads["b_c"] += da_g
        grads["b_o"] += da_o

        dz = (
            params.w_f.T @ da_f
            + params.w_i.T @ da_i
            + params.w_c.T @ da_g
            + params.w_o.T @ da_o
        )
        ds = dz[:h]
        dc_next = dc * f
        grads["emb"][ids[t]] += dz[h:]
    return float(-np.log(p[label])), grads


def zero_gradients(model: SentimentModel) -> dict:
    return {
        "emb": np.zeros_like(model.embeddings),
        "w_f": np.zeros_like(model.lstm.w_f),
        "w_i": np.zeros_like(model.lstm.w_i),
        "w_c": np.zeros_like(model.lstm.w_c),
        "w_o": np.zeros_like(model.lstm.w_o),
        "b_f": np.zeros_like(model.lstm.b_f),
        "b_i": np.zeros_like(model.lstm.b_i),
        "b_c": np.zeros_like(model.lstm.b_c),
        "b_o": np.zeros_like(model.lstm.b_o),
        "head_w": np.zeros_like(model.head_w),
        "head_b": np.zeros_like(model.head_b),
    }


def clip_gradients(grads: dict, max_norm: float) -> dict:
    total = float(np.sqrt(sum(float((g**2).sum()) for g in grads.values())))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return {k: g * scale for k, g in grads.items()}


def apply_gradients(
    model: SentimentModel, grads: dict, learning_rate: float
) -> SentimentModel:
    """One plain gradient-descent step; returns a new model, inputs untouched."""
    lr = float(learning_rate)
    lstm = LstmParams(
        w_f=model.lstm.w_f - lr * grads["w_f"],
        w_i=model.lstm.w_i - lr * grads["w_i"],
        w_c=model.lstm.w_c - lr * grads["w_c"],
        w_o=model.lstm.w_o - lr * grads["w_o"],
        b_f=model.lstm.b_f - lr * grads["b_f"],
        b_i=model.lstm.b_i - lr * grads["b_i"],
        b_c=model.lstm.b_c - lr * grads["b_c"],
        b_o=model.lstm.b_o - lr * grads["b_o"],
    )
    return replace(
        model,
        embeddings=model.embeddings - lr * grads["emb"],
        lstm=lstm,
        head_w=model.head_w - lr * grads["head_w"],
        head_b=model.head_b - lr * grads["head_b"],
    )
