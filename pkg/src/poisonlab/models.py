"""Linear classifiers (hinge SVM, logistic regression) with L2 regularization.

Objective convention (liblinear style, unregularized bias):

    (1/2) ||w||^2 + C * sum_i loss(y_i, w . x_i + b)

with hinge loss max(0, 1 - y f) or logistic loss log(1 + exp(-y f)).
Both solvers are deterministic and expose a convergence certificate:
duality gap for hinge (dual max-violating-pair updates), gradient norm
for logistic (damped Newton).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset

LOSS_KINDS = ("hinge", "logistic")


@dataclass(frozen=True)
class LinearModel:
    """One weight vector + bias per binary head (one head for binary tasks)."""

    weights: np.ndarray  # (n_heads, d)
    bias: np.ndarray  # (n_heads,)
    loss_kind: str
    reg_c: float
    class_map: dict
    classes: tuple = (0, 1)  # dataset label value per head, ascending

    def __post_init__(self):
        object.__setattr__(self, "weights", np.atleast_2d(np.asarray(self.weights, dtype=np.float64)))
        object.__setattr__(self, "bias", np.atleast_1d(np.asarray(self.bias, dtype=np.float64)))
        object.__setattr__(self, "classes", tuple(int(c) for c in self.classes))
        if not np.isfinite(self.weights).all() or not np.isfinite(self.bias).all():
            raise ValueError("model parameters must be finite")
        if self.reg_c <= 0:
            raise ValueError("reg_c must be positive")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")

    @property
    def n_heads(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if X.shape[1] != self.d:
            raise ValueError(f"expected {self.d} features, got {X.shape[1]}")
        return X @ self.weights.T + self.bias

    def to_json(self) -> str:
        doc = {
            "version": 1,
            "loss_kind": self.loss_kind,
            "reg_c": self.reg_c,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "class_map": {str(k): v for k, v in self.class_map.items()},
            "classes": list(self.classes),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, payload: str) -> "LinearModel":
        doc = json.loads(payload)
        if doc.get("version") != 1:
            raise ValueError(f"unsupported model document version {doc.get('version')!r}")
        return cls(
            np.array(doc["weights"]),
            np.array(doc["bias"]),
            doc["loss_kind"],
            doc["reg_c"],
            {int(k): v for k, v in doc["class_map"].items()},
            tuple(doc["classes"]),
        )


@dataclass(frozen=True)
class TrainReport:
    final_objective: float
    iterations: int
    converged: bool
    wall_time: float


def _hinge_primal(f: np.ndarray, y: np.ndarray, b: float, w_sq: float, C: float) -> float:
    margins = 1.0 - y * (f + b)
    return 0.5 * w_sq + C * np.maximum(margins, 0.0).sum()


def _train_hinge(X, y, C, tol, max_iter):
    """Dual SVM solver: max-violating-pair updates on the linear-kernel dual.

    Keeps the full Gram matrix (datasets here are a few thousand rows at
    most) plus the decision-value vector f = Xw, so each pair update is
    O(n). Stops when the duality gap falls below tol * (1 + |primal|).
    """
    n = X.shape[0]
    K = X @ X.T
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    f = np.zeros(n)  # w . x_k for every training row
    it = 0
    converged = False
    b = 0.0
    gap = np.inf

    for it in range(1, max_iter + 1):
        viol = y - f  # -y_k * grad_k of the dual objective
        up = (y > 0) & (alpha < C - 1e-12) | (y < 0) & (alpha > 1e-12)
        low = (y < 0) & (alpha < C - 1e-12) | (y > 0) & (alpha > 1e-12)
        if not up.any() or not low.any():
            converged = True
            break
        i = np.flatnonzero(up)[np.argmax(viol[up])]
        j = np.flatnonzero(low)[np.argmin(viol[low])]
        m, M = viol[i], viol[j]

        b = 0.5 * (m + M)
        w_sq = float(alpha @ (y * f))
        primal = _hinge_primal(f, y, b, w_sq, C)
        dual = alpha.sum() - 0.5 * w_sq
        gap = primal - dual
        if gap <= tol * (1.0 + abs(primal)) or m - M <= 1e-12:
            converged = True
            break

        a = diag[i] + diag[j] - 2.0 * K[i, j]
        step = (m - M) / a if a > 1e-15 else np.inf
        step = min(step, C - alpha[i] if y[i] > 0 else alpha[i])
        step = min(step, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        f += step * (K[i] - K[j])

    w = X.T @ (alpha * y)
    w_sq = float(w @ w)
    objective = _hinge_primal(f, y, b, w_sq, C)
    return w, b, objective, it, converged


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logistic_objective(theta, X, y, C):
    f = X @ theta[:-1] + theta[-1]
    margins = -y * f
    # log(1 + exp(m)) computed stably
    loss = np.logaddexp(0.0, margins).sum()
    return 0.5 * theta[:-1] @ theta[:-1] + C * loss


def _logistic_grad(theta, X, y, C):
    f = X @ theta[:-1] + theta[-1]
    s = _sigmoid(-y * f)  # d loss / d f = -y * s
    return np.concatenate([theta[:-1] + C * (X.T @ (-y * s)), [C * np.sum(-y * s)]])


def _train_logistic(X, y, C, tol, max_iter):
    """Damped Newton on the primal; certificate is the gradient norm."""
    n, d = X.shape
    theta = np.zeros(d + 1)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        f = X @ theta[:-1] + theta[-1]
        s = _sigmoid(-y * f)  # d loss / d f = -y * s
        grad = np.concatenate([theta[:-1] + C * (X.T @ (-y * s)), [C * np.sum(-y * s)]])
        gnorm = np.linalg.norm(grad)
        if gnorm <= tol * (1.0 + np.linalg.norm(theta)):
            converged = True
            break
        D = s * (1.0 - s)
        XD = X * D[:, None]
        H = np.empty((d + 1, d + 1))
        H[:d, :d] = C * (X.T @ XD)
        H[:d, :d][np.diag_indices(d)] += 1.0
        H[:d, d] = C * XD.sum(axis=0)
        H[d, :d] = H[:d, d]
        H[d, d] = C * D.sum()
        # D can underflow to 0 on separable data; a tiny ridge keeps H PD
        H[d, d] += 1e-12
        delta = np.linalg.solve(H, -grad)

        obj = _logistic_objective(theta, X, y, C)
        t = 1.0
        g_dot_d = grad @ delta
        cand = theta + delta
        cand_obj = _logistic_objective(cand, X, y, C)
        accepted = False
        for _ in range(50):
            if cand_obj < obj and cand_obj <= obj + 1e-4 * t * g_dot_d:
                accepted = True
                break
            t *= 0.5
            cand = theta + t * delta
            cand_obj = _logistic_objective(cand, X, y, C)
        if not accepted:
            # the objective sits at its float64 floor; a full Newton step
            # can still shrink the gradient, so accept it while it does
            full = theta + delta
            if np.linalg.norm(_logistic_grad(full, X, y, C)) < gnorm:
                theta = full
                continue
            converged = True  # no representable progress remains
            break
        theta = cand

    objective = _logistic_objective(theta, X, y, C)
    return theta[:-1], theta[-1], objective, it, converged


def _fit_binary(X, y_signed, loss_kind, reg_c, tol, max_iter):
    if loss_kind == "hinge":
        return _train_hinge(X, y_signed, reg_c, tol, max_iter)
    return _train_logistic(X, y_signed, reg_c, tol, max_iter)


def train(dataset: Dataset, loss_kind: str, reg_c: float, tol: float = 1e-6,
          max_iter: int = 200_000, seed: int = 0):
    """Train a binary linear classifier. Returns (LinearModel, TrainReport).

    The solvers are deterministic, so ``seed`` only pins the interface; it
    never changes the result.
    """
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {loss_kind!r}")
    if dataset.classes.size < 2:
        raise ValueError("training requires at least two classes")
    if dataset.classes.size > 2:
        raise ValueError("use train_multiclass_ovr for more than two classes")
    if not np.isfinite(dataset.features).all():
        raise ValueError("features must be finite")

    start = time.perf_counter()
    y = dataset.signed_labels()
    w, b, objective, iterations, converged = _fit_binary(
        dataset.features, y, loss_kind, reg_c, tol, max_iter
    )
    report = TrainReport(objective, iterations, converged, time.perf_counter() - start)
    model = LinearModel(w[None, :], [b], loss_kind, reg_c, dict(dataset.class_map),
                        tuple(dataset.classes))
    return model, report


def train_multiclass_ovr(dataset: Dataset, loss_kind: str, reg_c: float,
                         tol: float = 1e-6, max_iter: int = 200_000, seed: int = 0):
    """One-vs-rest training: one binary head per class, prediction by argmax."""
    classes = dataset.classes
    if classes.size < 2:
        raise ValueError("training requires at least two classes")
    if classes.size == 2:
        model, _ = train(dataset, loss_kind, reg_c, tol, max_iter, seed)
        return model
    heads = []
    biases = []
    for c in classes:
        y = np.where(dataset.labels == c, 1.0, -1.0)
        w, b, _, _, _ = _fit_binary(dataset.features, y, loss_kind, reg_c, tol, max_iter)
        heads.append(w)
        biases.append(b)
    return LinearModel(np.stack(heads), biases, loss_kind, reg_c,
                       dict(dataset.class_map), tuple(classes))


def predict(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Predicted internal class labels; ties go to the positive class
    (binary) or the lowest class index (multiclass)."""
    scores = model.decision_values(features)
    classes = np.asarray(model.classes, dtype=np.int64)
    if model.n_heads == 1:
        return classes[(scores[:, 0] >= 0.0).astype(np.int64)]
    return classes[np.argmax(scores, axis=1)]


def accuracy(model: LinearModel, dataset: Dataset) -> float:
    if dataset.n == 0:
        raise ValueError("accuracy of an empty dataset is undefined")
    return float(np.mean(predict(model, dataset.features) == dataset.labels))
