"""Shallow autoencoder on integer category codes, trained with a survey-weighted loss.

Layout for p inputs: p -> ceil(p/2) (tanh) -> ceil(p/4) (tanh) -> ceil(p/2)
(identity) -> p (softplus). The training loss is sum_j w_j ||x_j - xhat_j||^2
with normalized weights; scoring rounds the reconstruction to integer codes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .dataset import CategoricalDataset, normalize_weights
from .errors import Diverged, NonFiniteLoss, SurveyKitError


def softplus(a):
    return np.logaddexp(0.0, a)


@dataclass(frozen=True)
class AeArchitecture:
    input_dim: int

    def __post_init__(self):
        if self.input_dim < 1:
            raise SurveyKitError("input_dim must be >= 1")

    @property
    def hidden_dim(self) -> int:
        return math.ceil(self.input_dim / 2)

    @property
    def embedding_dim(self) -> int:
        return math.ceil(self.input_dim / 4)

    @property
    def layer_sizes(self) -> list[int]:
        p = self.input_dim
        return [p, self.hidden_dim, self.embedding_dim, self.hidden_dim, p]

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        s = self.layer_sizes
        out = []
        for fan_in, fan_out in zip(s[:-1], s[1:]):
            out += [(fan_in, fan_out), (fan_out,)]
        return out

    @property
    def n_params(self) -> int:
        return sum(int(np.prod(sh)) for sh in self.shapes)

    def unflatten(self, flat) -> list[np.ndarray]:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise SurveyKitError(f"expected {self.n_params} parameters, got {flat.size}")
        out, pos = [], 0
        for sh in self.shapes:
            size = int(np.prod(sh))
            out.append(flat[pos:pos + size].reshape(sh))
            pos += size
        return out

    def init_params(self, rng) -> np.ndarray:
        parts = []
        for sh in self.shapes:
            if len(sh) == 2:
                bound = 1.0 / math.sqrt(sh[0])
                parts.append(rng.uniform(-bound, bound, size=sh).ravel())
            else:
                parts.append(np.zeros(sh))
        return np.concatenate(parts)


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 500
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int | None = None   # None = full batch
    seed: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        if self.epochs < 1 or not self.learning_rate > 0 or self.tol < 0:
            raise SurveyKitError("epochs and learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise SurveyKitError("momentum must lie in [0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise SurveyKitError("batch_size must be positive")


def _forward(params, X):
    W1, b1, W2, b2, W3, b3, W4, b4 = params
    h1 = np.tanh(X @ W1 + b1)
    z = np.tanh(h1 @ W2 + b2)
    h3 = z @ W3 + b3
    a4 = h3 @ W4 + b4
    return h1, z, h3, a4, softplus(a4)


def loss_and_grad(flat, arch: AeArchitecture, X, w) -> tuple[float, np.ndarray]:
    """Weighted squared reconstruction loss and its gradient w.r.t. the flat parameters."""
    params = arch.unflatten(flat)
    W1, b1, W2, b2, W3, b3, W4, b4 = params
    h1, z, h3, a4, out = _forward(params, X)
    resid = X - out
    loss = float(np.sum(w * np.sum(resid * resid, axis=1)))
    d_out = -2.0 * w[:, None] * resid
    d4 = d_out * expit(a4)
    d3 = d4 @ W4.T
    d2 = (d3 @ W3.T) * (1.0 - z * z)
    d1 = (d2 @ W2.T) * (1.0 - h1 * h1)
    grads = [X.T @ d1, d1.sum(0), h1.T @ d2, d2.sum(0),
             z.T @ d3, d3.sum(0), h3.T @ d4, d4.sum(0)]
    return loss, np.concatenate([g.ravel() for g in grads])


@dataclass(eq=False)
class AeModel:
    architecture: AeArchitecture
    params: np.ndarray
    loss_trace: list[float] = field(default_factory=list)

    def forward(self, x):
        """(reconstruction, embedding) for one row or a batch of rows."""
        X = np.asarray(x, dtype=float)
        h1, z, _, _, out = _forward(self.architecture.unflatten(self.params), np.atleast_2d(X))
        if X.ndim == 1:
            return out[0], z[0]
        return out, z

    def score(self, data) -> np.ndarray:
        """Squared distance between each row and its rounded reconstruction."""
        X = np.asarray(getattr(data, "rows", data), dtype=float)
        recon, _ = self.forward(np.atleast_2d(X))
        rounded = np.floor(recon + 0.5)
        return np.sum((np.atleast_2d(X) - rounded) ** 2, axis=1)

    def training_scores(self, data) -> np.ndarray:
        return self.score(data)

    def to_dict(self):
        return {"architecture": {"input_dim": self.architecture.input_dim,
                                 "layer_sizes": self.architecture.layer_sizes,
                                 "activations": ["tanh", "tanh", "identity", "softplus"]},
                "params": [float(v) for v in self.params],
                "loss_trace": [float(v) for v in self.loss_trace]}


def _as_matrix(data) -> np.ndarray:
    return np.asarray(getattr(data, "rows", data), dtype=float)


def weighted_loss(model: AeModel, data, weights=None) -> float:
    X = _as_matrix(data)
    w = normalize_weights(np.ones(X.shape[0]) if weights is None else weights)
    out, _ = model.forward(X)
    loss = float(np.sum(w * np.sum((X - np.atleast_2d(out)) ** 2, axis=1)))
    if not math.isfinite(loss):
        raise NonFiniteLoss("loss is not finite")
    return loss


def train(data, weights=None, cfg: TrainingConfig = TrainingConfig()) -> AeModel:
    """Gradient descent with momentum; deterministic for a given seed."""
    X = _as_matrix(data)
    n, p = X.shape
    if weights is None and isinstance(data, CategoricalDataset):
        weights = data.weights
    w = normalize_weights(np.ones(n) if weights is None else weights)
    batch = n if cfg.batch_size is None else cfg.batch_size
    if n < batch:
        raise SurveyKitError(f"n={n} is smaller than batch size {batch}")
    arch = AeArchitecture(p)
    rng = np.random.default_rng(cfg.seed)
    theta = arch.init_params(rng)
    velocity = np.zeros_like(theta)
    loss, _ = loss_and_grad(theta, arch, X, w)
    trace = [loss]
    for _ in range(cfg.epochs):
        if batch == n:
            _, grad = loss_and_grad(theta, arch, X, w)
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad
            theta = theta + velocity
        else:
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                # rescaled so each mini-batch estimates the full weighted loss
                _, grad = loss_and_grad(theta, arch, X[idx], w[idx] * (n / idx.size))
                velocity = cfg.momentum * velocity - cfg.learning_rate * grad
                theta = theta + velocity
        new_loss, _ = loss_and_grad(theta, arch, X, w)
        if not math.isfinite(new_loss) or not np.all(np.isfinite(theta)):
            raise Diverged(f"training diverged after {len(trace)} epochs")
        trace.append(new_loss)
        if abs(trace[-2] - new_loss) < cfg.tol:
            break
    return AeModel(arch, theta, trace)


def save_model(model: AeModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()), encoding="utf-8")


def load_model(path) -> AeModel:
    blob = json.loads(Path(path).read_text(encoding="utf-8"))
    arch = AeArchitecture(int(blob["architecture"]["input_dim"]))
    return AeModel(arch, np.array(blob["params"], dtype=float), blob.get("loss_trace", []))


class AutoencoderDetector:
    name = "ae"
    score_key = "re_ae"
    # retraining per left-out row is too costly; stability refits the threshold only
    refit_for_stability = False

    def __init__(self, config: TrainingConfig = TrainingConfig()):
        self.config = config

    def fit(self, data: CategoricalDataset, weights=None) -> AeModel:
        return train(data, data.weights if weights is None else weights, self.config)


def config_dict(cfg: TrainingConfig) -> dict:
    return asdict(cfg)
