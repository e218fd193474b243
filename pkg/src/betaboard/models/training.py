"""Batched training loop and evaluation metrics for the ordering models."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from ..nn import adam_step, save_checkpoint


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 300
    lr: float = 1e-3
    batch_size: int = 64
    teacher_forcing: float = 1.0
    eval_interval: int = 10
    checkpoint_path: str | None = None
    seed: int = 0
    ignore_pads: bool = False


@dataclass(frozen=True)
class Accuracy:
    overall: float
    non_pad: float
    pad_output_fraction: float = 0.0


def token_accuracy(predicted, target, pad_id: int | None = None) -> Accuracy:
    """Exact-match fraction over all positions, plus a non-pad-only fraction.

    ``pad_output_fraction`` reports how often the prediction itself is the
    pad token, the collapse indicator.
    """
    predicted = np.asarray(predicted)
    target = np.asarray(target)
    if predicted.shape != target.shape:
        raise ValueError(f"length mismatch: predicted {predicted.shape} vs target {target.shape}")
    match = predicted == target
    overall = float(match.mean())
    if pad_id is None:
        return Accuracy(overall=overall, non_pad=overall)
    real = target != pad_id
    non_pad = float(match[real].mean()) if real.any() else 1.0
    pad_frac = float((predicted == pad_id).mean())
    return Accuracy(overall=overall, non_pad=non_pad, pad_output_fraction=pad_frac)


def _slice_inputs(inputs: tuple, idx: np.ndarray) -> tuple:
    return tuple(arr[idx] for arr in inputs)


def train_loop(model, train_examples, val_examples, cfg: TrainConfig) -> list[dict]:
    """Minibatch Adam training for the ART or simple transformer.

    Cross-entropy runs over every position, pads included, unless
    ``cfg.ignore_pads`` switches on the pad-ignoring remedy. The best
    checkpoint by validation loss is kept alongside the latest one.
    Deterministic for a fixed seed.
    """
    inputs, targets = model.collate(train_examples)
    val_inputs, val_targets = model.collate(val_examples) if val_examples else (None, None)
    ignore_id = model.cfg.pad_id if cfg.ignore_pads else None
    n = targets.shape[0]
    rng = np.random.default_rng(cfg.seed)
    history: list[dict] = []
    best_val = math.inf

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss = model.loss_and_grads(_slice_inputs(inputs, idx), targets[idx], ignore_id)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss {loss} at epoch {epoch}")
            adam_step(model.store, lr=cfg.lr)
            batch_losses.append(loss)
        row: dict = {"epoch": epoch, "train_loss": float(np.mean(batch_losses))}

        if val_inputs is not None and (epoch % cfg.eval_interval == 0 or epoch == cfg.epochs):
            val_loss = model.loss_only(val_inputs, val_targets, ignore_id)
            preds = model.predictions(val_inputs)
            acc = token_accuracy(preds, val_targets, model.cfg.pad_id)
            row["val_loss"] = val_loss
            row["val_acc"] = acc.overall
            row["val_acc_non_pad"] = acc.non_pad
            row["val_pad_fraction"] = acc.pad_output_fraction
            if cfg.checkpoint_path and val_loss < best_val:
                best_val = val_loss
                save_checkpoint(
                    _best_path(cfg.checkpoint_path),
                    model.store,
                    _checkpoint_config(model, cfg, epoch, val_loss),
                )
        history.append(row)

    if cfg.checkpoint_path:
        save_checkpoint(
            cfg.checkpoint_path,
            model.store,
            _checkpoint_config(model, cfg, cfg.epochs, history[-1].get("val_loss")),
        )
        if val_inputs is None:
            # No validation: the latest checkpoint doubles as best.
            save_checkpoint(
                _best_path(cfg.checkpoint_path),
                model.store,
                _checkpoint_config(model, cfg, cfg.epochs, None),
            )
    return history


def _best_path(path: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + "_best" + p.suffix))


def _checkpoint_config(model, cfg: TrainConfig, epoch: int, val_loss) -> dict:
    return {
        "model": model.kind,
        "model_config": model.config_dict(),
        "train_config": asdict(cfg),
        "epoch": epoch,
        "val_loss": val_loss,
    }


HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "val_ppl", "val_acc"]


def history_to_csv(history: Sequence[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTORY_COLUMNS)
    for row in history:
        writer.writerow(
            [
                row.get("epoch", ""),
                _fmt(row.get("train_loss")),
                _fmt(row.get("val_loss")),
                _fmt(row.get("val_ppl")),
                _fmt(row.get("val_acc")),
            ]
        )
    return buf.getvalue().encode("utf-8")


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))
