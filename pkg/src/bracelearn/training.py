"""Mini-batch Adam training plus the loss and error metrics.

Training operates on normalized windowed data; the headline error metric
(NRMSE, percent of the true force range) is computed in physical units
after denormalization.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import NormStats, WindowedDataset, denormalize
from .errors import DegenerateDataError, DivergenceError, ValidationError
from .lstm import NetworkParams, backward_batch, forward_batch, parameter_arrays, predict

#: An epoch must beat the best loss by at least this much to reset patience.
MIN_IMPROVEMENT = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 200
    clip_norm: float = 1.0  # global gradient-norm ceiling; 0 disables clipping
    seed: int = 0
    early_stop_patience: int = 25
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ValidationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValidationError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.clip_norm < 0:
            raise ValidationError(f"clip_norm must be >= 0, got {self.clip_norm}")
        if self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed}")
        if self.early_stop_patience < 1:
            raise ValidationError(
                f"early_stop_patience must be >= 1, got {self.early_stop_patience}"
            )
        for name in ("adam_beta1", "adam_beta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1), got {value}")
        if self.adam_eps <= 0:
            raise ValidationError(f"adam_eps must be positive, got {self.adam_eps}")


@dataclass
class TrainReport:
    """Outcome of one training run."""

    losses: list[float] = field(default_factory=list)
    epochs_run: int = 0
    seed: int = 0
    wall_seconds: float = 0.0
    train_nrmse: float | None = None
    test_nrmse: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "epochs_run": self.epochs_run,
            "seed": self.seed,
            "final_loss": self.losses[-1] if self.losses else None,
            "train_nrmse": self.train_nrmse,
            "test_nrmse": self.test_nrmse,
            "losses": list(self.losses),
        }
        # wall-clock time is inherently non-deterministic, so reproducible
        # artifacts leave it out unless explicitly requested
        if include_timing:
            out["wall_seconds"] = self.wall_seconds
        return out


def mse_loss(pred, target) -> float:
    """Mean of squared differences."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size < 1:
        raise ValidationError(
            f"pred and target must be equal-length and non-empty, "
            f"got {pred.shape} vs {target.shape}"
        )
    return float(np.mean((pred - target) ** 2))


def nrmse(pred, target) -> float:
    """Root-mean-square error normalized by the target range, in percent."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size < 2:
        raise ValidationError(
            f"pred and target must be equal-length with at least 2 samples, "
            f"got {pred.shape} vs {target.shape}"
        )
    spread = float(target.max() - target.min())
    if spread == 0.0:
        raise DegenerateDataError("target series is constant; NRMSE is undefined")
    return 100.0 * math.sqrt(float(np.mean((pred - target) ** 2))) / spread


def clip_global_norm(arrays: list[np.ndarray], max_norm: float) -> float:
    """Scale gradient arrays in place so their global norm is <= max_norm.

    Returns the pre-clip global norm. ``max_norm`` of 0 disables clipping.
    """
    total = math.sqrt(sum(float(np.dot(a.ravel(), a.ravel())) for a in arrays))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for arr in arrays:
            arr *= scale
    return total


class _AdamState:
    """First/second moment accumulators, one pair per parameter block."""

    def __init__(self, params: list[np.ndarray]):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray], cfg: TrainConfig):
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        correction1 = 1.0 - b1**self.t
        correction2 = 1.0 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= cfg.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + cfg.adam_eps
            )


def evaluate_nrmse(net: NetworkParams, data: WindowedDataset, stats: NormStats) -> float:
    """NRMSE of the network on a windowed dataset, in physical force units."""
    preds = predict(net, data.inputs)
    return nrmse(denormalize(preds, stats), denormalize(data.targets, stats))


def train(
    net: NetworkParams,
    train_set: WindowedDataset,
    cfg: TrainConfig,
    *,
    test_set: WindowedDataset | None = None,
    stats: NormStats | None = None,
) -> tuple[NetworkParams, TrainReport]:
    """Fit the network with shuffled mini-batch Adam; parameters update in place.

    Each epoch shuffles the window order with the seeded generator,
    accumulates mean gradients per batch, clips the global gradient norm,
    and applies Adam with bias correction. Training halts at
    ``max_epochs`` or once the epoch loss has failed to improve on the
    best seen by at least MIN_IMPROVEMENT for ``early_stop_patience``
    consecutive epochs. When ``test_set`` and ``stats`` are given, the
    report carries NRMSE for both splits in physical units.
    """
    if net.input_dim != train_set.input_dim:
        raise ValidationError(
            f"network input_dim {net.input_dim} does not match dataset "
            f"input_dim {train_set.input_dim}"
        )
    rng = np.random.default_rng(cfg.seed)
    inputs = train_set.inputs
    targets = train_set.targets
    num = train_set.num_windows
    params = parameter_arrays(net)
    adam = _AdamState(params)

    started = time.perf_counter()
    losses: list[float] = []
    best = math.inf
    stale = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(num)
        accumulated = 0.0
        for start in range(0, num, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            preds, tape = forward_batch(net, inputs[idx])
            residual = preds - targets[idx]
            # an overflowing loss is the divergence signal, not a warning
            with np.errstate(over="ignore"):
                batch_loss = float(np.mean(residual * residual))
            if not math.isfinite(batch_loss):
                raise DivergenceError(
                    f"training loss became non-finite at epoch {epoch}",
                    epoch=epoch,
                    last_loss=losses[-1] if losses else None,
                )
            accumulated += batch_loss * len(idx)
            grads = backward_batch(net, tape, (2.0 / len(idx)) * residual)
            grad_arrays = parameter_arrays(grads)
            clip_global_norm(grad_arrays, cfg.clip_norm)
            adam.step(params, grad_arrays, cfg)
        epoch_loss = accumulated / num
        losses.append(epoch_loss)
        if best - epoch_loss >= MIN_IMPROVEMENT:
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                break

    report = TrainReport(
        losses=losses,
        epochs_run=len(losses),
        seed=cfg.seed,
        wall_seconds=time.perf_counter() - started,
    )
    if stats is not None:
        report.train_nrmse = evaluate_nrmse(net, train_set, stats)
        if test_set is not None:
            report.test_nrmse = evaluate_nrmse(net, test_set, stats)
    return net, report
