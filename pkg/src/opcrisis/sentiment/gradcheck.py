"""Finite-difference verification of the network gradients."""

from __future__ import annotations

import copy

import numpy as np

from . import network
from .classifier import _encode_example
from .network import SentimentModel
from .text import LabeledExample

# parameter naming: grads dict key -> (owner attribute path)
_PARAM_KEYS = (
    "emb",
    "w_f",
    "w_i",
    "w_c",
    "w_o",
    "b_f",
    "b_i",
    "b_c",
    "b_o",
    "head_w",
    "head_b",
)


def _param_array(model: SentimentModel, key: str) -> np.ndarray:
    if key == "emb":
        return model.embeddings
    if key in ("head_w", "head_b"):
        return getattr(model, key)
    return getattr(model.lstm, key)


def grad_check(model: SentimentModel, example: LabeledExample, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error per parameter is |g_a - g_n| / max(|g_a|, |g_n|, 1e-8);
    the analytic side must survive every coordinate, including embedding rows
    the example never touches (both sides are zero there).
    """
    ids = _encode_example(model.vocab, example.text)
    work = copy.deepcopy(model)
    _, grads = network.example_loss_and_grads(work, ids, example.label)

    worst = 0.0
    for key in _PARAM_KEYS:
        arr = _param_array(work, key)
        analytic = grads[key]
        flat = arr.reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + step
            up, _ = network.example_loss_and_grads(work, ids, example.label)
            flat[idx] = saved - step
            down, _ = network.example_loss_and_grads(work, ids, example.label)
            flat[idx] = saved
            numeric = (up - down) / (2.0 * step)
            ga = float(analytic.reshape(-1)[idx])
            err = abs(ga - numeric) / max(abs(ga), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
