"""Finite-difference gradient checking for any model built on a ParamStore."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .params import ParamStore


def grad_check(
    loss_and_grads: Callable[[], float],
    store: ParamStore,
    eps: float = 1e-5,
    min_coords: int = 100,
    seed: int = 0,
) -> float:
    """Compare analytic gradients against central finite differences.

    ``loss_and_grads`` must be deterministic: it evaluates the loss on fixed
    inputs using ``store.params`` and (re)fills ``store.grads``. A random
    subset of at least ``min_coords`` parameter coordinates is probed
    (everything, when the model is smaller than that). Returns the maximum
    relative error; raises on a non-finite loss.
    """
    loss = loss_and_grads()
    if not math.isfinite(loss):
        raise ValueError(f"non-finite loss {loss}; cannot gradient-check")
    analytic = {name: g.copy() for name, g in store.grads.items()}

    coords = [(name, i) for name, p in store.params.items() for i in range(p.size)]
    rng = np.random.default_rng(seed)
    if len(coords) > min_coords:
        # Probe at least one coordinate of every parameter, then fill randomly.
        chosen = {}
        for name, p in store.params.items():
            chosen[(name, int(rng.integers(p.size)))] = None
        order = rng.permutation(len(coords))
        for j in order:
            if len(chosen) >= min_coords:
                break
            chosen[coords[j]] = None
        coords = list(chosen)

    max_rel = 0.0
    for name, flat_idx in coords:
        theta = store.params[name].reshape(-1)
        original = theta[flat_idx]
        theta[flat_idx] = original + eps
        loss_plus = loss_and_grads()
        theta[flat_idx] = original - eps
        loss_minus = loss_and_grads()
        theta[flat_idx] = original
        if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
            raise ValueError(f"non-finite loss while perturbing {name}[{flat_idx}]")
        numeric = (loss_plus - loss_minus) / (2.0 * eps)
        ana = float(analytic[name].reshape(-1)[flat_idx])
        denom = max(abs(numeric) + abs(ana), 1e-8)
        rel = abs(numeric - ana) / denom
        max_rel = max(max_rel, rel)

    # Leave the store in its analytic state.
    loss_and_grads()
    return max_rel
