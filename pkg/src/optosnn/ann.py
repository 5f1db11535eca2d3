"""Rectifier multilayer perceptron trained with minibatch gradient descent.

Plain numpy implementation: hidden layers use ReLU, the output layer feeds
a softmax cross-entropy loss. Exposed both as free functions (forward,
loss_and_gradients, train_ann) and as a scikit-learn style estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

__all__ = ["AnnModel", "forward", "loss_and_gradients", "train_ann", "MlpClassifier"]


@dataclass
class AnnModel:
    """Weight matrices (out, in) and bias vectors for each layer."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases):
            raise ValueError("need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {i}: weight/bias shapes disagree")
            if i and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i} input dim does not chain")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]


def init_model(sizes, seed: int = 0) -> AnnModel:
    """He-scaled normal initialization, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return AnnModel(weights=weights, biases=biases)


def forward(model: AnnModel, x: np.ndarray, return_hidden: bool = False):
    """Logits for a batch (n, d); optionally also every post-ReLU activation."""
    a = np.asarray(x, dtype=float)
    hidden = []
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        a = z if i == last else np.maximum(z, 0.0)
        if return_hidden and i != last:
            hidden.append(a)
    if return_hidden:
        return a, hidden
    return a


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradients(model: AnnModel, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and its gradients w.r.t. every weight and bias."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    n = x.shape[0]
    acts = [x]
    last = len(model.weights) - 1
    a = x
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    probs = _softmax(acts[-1])
    loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w, grads_b = [None] * len(model.weights), [None] * len(model.weights)
    for i in range(last, -1, -1):
        grads_w[i] = delta.T @ acts[i]
        grads_b[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ model.weights[i]) * (acts[i] > 0)
    return loss, grads_w, grads_b


def train_ann(
    x,
    y,
    sizes,
    epochs: int = 10,
    lr: float = 0.1,
    batch_size: int = 64,
    seed: int = 0,
    verbose: bool = False,
) -> AnnModel:
    """Minibatch SGD on softmax cross-entropy; deterministic given the seed.

    Raises FloatingPointError if the loss turns non-finite (divergence).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    sizes = [int(s) for s in sizes]
    if sizes[0] != x.shape[1]:
        raise ValueError(f"first layer size {sizes[0]} != input dim {x.shape[1]}")
    if sizes[-1] <= y.max():
        raise ValueError("output layer smaller than the number of classes")
    model = init_model(sizes, seed=seed)
    rng = np.random.default_rng(seed + 1)
    n = x.shape[0]
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            loss, gw, gb = loss_and_gradients(model, x[idx], y[idx])
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"training diverged at epoch {epoch}: loss={loss}"
                )
            total += loss * len(idx)
            for i in range(len(model.weights)):
                model.weights[i] -= lr * gw[i]
                model.biases[i] -= lr * gb[i]
        if verbose:
            print(f"epoch {epoch}: mean loss {total / n:.4f}")
    return model


class MlpClassifier(ClassifierMixin, BaseEstimator):
    """Rectifier MLP classifier with the scikit-learn estimator protocol."""

    def __init__(
        self,
        hidden_layer_sizes=(300, 100),
        epochs: int = 10,
        lr: float = 0.1,
        batch_size: int = 64,
        seed: int = 0,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        sizes = [X.shape[1], *self.hidden_layer_sizes, len(self.classes_)]
        self.model_ = train_ann(
            X, y_idx, sizes,
            epochs=self.epochs, lr=self.lr,
            batch_size=self.batch_size, seed=self.seed,
        )
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return forward(self.model_, X)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))
