"""From-scratch dense-network substrate: layers, loss, optimizer, scheduler.

Training math runs entirely in 64-bit floats so central-difference gradient
checks stay meaningful. Parameters are mutable arrays owned by their layers;
everything else in the package treats them as opaque.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Protocol

import numpy as np

from traitfusion.rng import Xoshiro256PP
from traitfusion.types import NumericError, ValidationError

ACTIVATIONS = ("none", "relu", "sigmoid")


class DenseLayer:
    """Fully connected layer y = activation(W x + b).

    ``weights`` has shape (out, in). ``forward`` accepts a single vector or
    a batch with samples in rows and caches what ``backward`` needs.
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray, activation: str = "none") -> None:
        if activation not in ACTIVATIONS:
            raise ValidationError(f"activation must be one of {ACTIVATIONS}")
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValidationError(
                f"inconsistent layer shapes: weights {self.weights.shape}, bias {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValidationError("layer parameters must be finite")
        self.activation = activation
        self._x: Optional[np.ndarray] = None
        self._z: Optional[np.ndarray] = None

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def init(cls, in_dim: int, out_dim: int, activation: str, stream: Xoshiro256PP) -> "DenseLayer":
        """Weights uniform in +-1/sqrt(in_dim) drawn row-major; biases zero."""
        scale = 1.0 / np.sqrt(in_dim)
        flat = stream.floats(out_dim * in_dim)
        weights = (2.0 * flat - 1.0).reshape(out_dim, in_dim) * scale
        return cls(weights, np.zeros(out_dim, dtype=np.float64), activation)

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_dim:
            raise ValidationError(
                f"layer expects input dim {self.in_dim}, got shape {x.shape}"
            )
        z = x @ self.weights.T + self.bias
        self._x, self._z = x, z
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        if self.activation == "sigmoid":
            return 1.0 / (1.0 + np.exp(-z))
        return z

    def backward(self, grad_out: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gradients (dW, db, dx) of the cached forward pass."""
        if self._x is None or self._z is None:
            raise ValidationError("backward called before forward")
        x, z = self._x, self._z
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if self.activation == "relu":
            grad_z = grad_out * (z > 0.0)
        elif self.activation == "sigmoid":
            s = 1.0 / (1.0 + np.exp(-z))
            grad_z = grad_out * s * (1.0 - s)
        else:
            grad_z = grad_out
        if x.ndim == 1:
            grad_w = np.outer(grad_z, x)
            grad_b = grad_z
        else:
            grad_w = grad_z.T @ x
            grad_b = grad_z.sum(axis=0)
        grad_x = grad_z @ self.weights
        return grad_w, grad_b, grad_x


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all entries and its gradient wrt ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValidationError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    if pred.size == 0:
        raise ValidationError("empty batch")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size


class AdamState:
    """Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8.

    Holds one (m, v) pair per parameter array and a shared step counter.
    ``learning_rate`` is owned here and adjusted by the scheduler.
    """

    beta1 = 0.9
    beta2 = 0.999
    eps = 1e-8

    def __init__(self, params: Iterable[np.ndarray], learning_rate: float) -> None:
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.learning_rate = learning_rate


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    """One in-place Adam update; the caller keeps exclusive access to params."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValidationError("adam_step: parameter/gradient count mismatch")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient; training aborted")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


@dataclass
class PlateauScheduler:
    """Multiply the learning rate by ``factor`` after ``patience``
    consecutive epochs without strict improvement of the metric."""

    learning_rate: float
    patience: int = 5
    factor: float = 0.95
    best_metric: float = field(default=np.inf)
    epochs_since_improve: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.factor < 1.0:
            raise ValidationError("factor must be in (0, 1)")
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")

    def step(self, metric: float) -> float:
        """Record one epoch's validation metric; returns the lr to use next."""
        if not np.isfinite(metric):
            raise NumericError(f"scheduler metric is not finite: {metric!r}")
        if metric < self.best_metric:
            self.best_metric = metric
            self.epochs_since_improve = 0
        else:
            self.epochs_since_improve += 1
            if self.epochs_since_improve >= self.patience:
                self.learning_rate *= self.factor
                self.epochs_since_improve = 0
        return self.learning_rate


class GradCheckable(Protocol):
    """What grad_check needs from a model: flat parameter access and a
    scalar loss with analytic parameter gradients on one sample."""

    def parameters(self) -> list[np.ndarray]: ...

    def loss_on(self, sample) -> float: ...

    def grads_on(self, sample) -> list[np.ndarray]: ...


def grad_check(model: GradCheckable, sample, h: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients.

    The denominator is guarded at 1e-6: below that scale the two values are
    compared in absolute terms, because central differences on an O(1) loss
    carry roundoff and truncation noise around 1e-12 that says nothing about
    the analytic gradient. A probe whose step window straddles a relu corner
    measures a chord across two linear pieces instead of the derivative, so
    any parameter reading above 1e-5 is re-probed with the step shrunk 16x
    and 256x and the smallest reading wins; a genuinely wrong gradient
    disagrees at every step size, so refinement cannot hide a real defect.
    """
    params = model.parameters()
    if not params or sum(p.size for p in params) == 0:
        raise ValidationError("model has no parameters to check")
    analytic = [g.copy() for g in model.grads_on(sample)]

    def probe(flat: np.ndarray, i: int, step: float, g_i: float) -> float:
        keep = flat[i]
        flat[i] = keep + step
        up = model.loss_on(sample)
        flat[i] = keep - step
        down = model.loss_on(sample)
        flat[i] = keep
        numeric = (up - down) / (2.0 * step)
        return abs(g_i - numeric) / max(abs(g_i), abs(numeric), 1e-6)

    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            rel = probe(flat, i, h, gflat[i])
            if rel > 1e-5:
                rel = min(rel, probe(flat, i, h / 16.0, gflat[i]))
            if rel > 1e-5:
                rel = min(rel, probe(flat, i, h / 256.0, gflat[i]))
            worst = max(worst, rel)
    return worst


CHECKPOINT_VERSION = 1
_CHECKPOINT_MAGIC = b"TFCK"


def save_checkpoint(path, architecture: dict, params: list[np.ndarray]) -> None:
    """Write magic + JSON header line + flat little-endian float64 params."""
    header = {
        "format_version": CHECKPOINT_VERSION,
        "architecture": architecture,
        "param_count": int(sum(p.size for p in params)),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    flat = np.concatenate([p.reshape(-1) for p in params]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(flat.tobytes())


def load_checkpoint(path) -> tuple[dict, np.ndarray]:
    """Read a checkpoint; returns (architecture, flat float64 params)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CHECKPOINT_MAGIC:
            raise ValidationError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        raw_len = fh.read(4)
        if len(raw_len) < 4:
            raise ValidationError(f"{path}: truncated checkpoint header")
        (header_len,) = struct.unpack("<I", raw_len)
        header_bytes = fh.read(header_len)
        if len(header_bytes) < header_len:
            raise ValidationError(f"{path}: truncated checkpoint header")
        try:
            header = json.loads(header_bytes.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{path}: corrupt checkpoint header: {exc}") from exc
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise ValidationError(
                f"{path}: unsupported checkpoint format_version "
                f"{header.get('format_version')!r}, expected {CHECKPOINT_VERSION}"
            )
        if "architecture" not in header or "param_count" not in header:
            raise ValidationError(f"{path}: checkpoint header missing required fields")
        payload = fh.read()
        if len(payload) % 8 != 0:
            raise ValidationError(f"{path}: truncated parameter payload")
        flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if flat.size != header["param_count"]:
        raise ValidationError(
            f"{path}: parameter payload has {flat.size} values, "
            f"header declares {header['param_count']}"
        )
    return header["architecture"], flat
