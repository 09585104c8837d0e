"""Comparison attacks: random label flipping and a reference bilevel attack.

The bilevel attack climbs the validation loss of the retrained classifier by
projected gradient ascent on a single poison point, differentiating through
the inner training problem with the implicit-function theorem (analytic for
logistic loss; fixed-active-set KKT linearization for hinge). Points are
crafted greedily, appending each optimized point before crafting the next.
A brute-force grid oracle retrains on every cell of a 2-D grid for toy-scale
verification and landscape plots.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .attack import PoisonBatch, clip
from .data import Dataset
from .models import _fit_binary, _sigmoid


@dataclass(frozen=True)
class BilevelConfig:
    step_size: float
    max_outer_iters: int = 50
    retrain_tol: float = 1e-10
    lower_bound: np.ndarray | None = None
    upper_bound: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.step_size < 0:
            raise ValueError("step_size must be non-negative")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be positive")


@dataclass(frozen=True)
class GridOracleSpec:
    resolution: int
    lower_bound: np.ndarray
    upper_bound: np.ndarray

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        object.__setattr__(self, "lower_bound", np.asarray(self.lower_bound, dtype=np.float64))
        object.__setattr__(self, "upper_bound", np.asarray(self.upper_bound, dtype=np.float64))
        if self.lower_bound.shape != (2,) or self.upper_bound.shape != (2,):
            raise ValueError("grid oracle bounds must be 2-vectors")

    def axes(self):
        return (
            np.linspace(self.lower_bound[0], self.upper_bound[0], self.resolution),
            np.linspace(self.lower_bound[1], self.upper_bound[1], self.resolution),
        )


def label_flip_attack(d_val: Dataset, m: int, seed: int) -> PoisonBatch:
    """Sample m validation points without replacement and flip their labels.

    Feature rows are copied bit-identically; only the labels change, each to
    a uniformly random different class (the complement when binary).
    """
    if m > d_val.n:
        raise ValueError(f"cannot flip {m} of {d_val.n} validation samples")
    rng = np.random.default_rng(seed)
    if m == 0:
        return PoisonBatch(np.empty((0, d_val.d)), np.empty(0, dtype=np.int64),
                           np.empty(0, dtype=np.int64))
    idx = rng.choice(d_val.n, size=m, replace=False)
    classes = d_val.classes
    originals = d_val.labels[idx]
    flipped = np.empty(m, dtype=np.int64)
    for i, orig in enumerate(originals):
        others = classes[classes != orig]
        flipped[i] = others[0] if others.size == 1 else rng.choice(others)
    return PoisonBatch(d_val.features[idx].copy(), flipped, originals)


def _signed(labels: np.ndarray, positive_class: int) -> np.ndarray:
    return np.where(labels == positive_class, 1.0, -1.0)


def _val_loss(w, b, X, y_signed, loss_kind) -> float:
    f = X @ w + b
    margins = -y_signed * f
    if loss_kind == "hinge":
        return float(np.maximum(1.0 + margins, 0.0).mean())
    return float(np.logaddexp(0.0, margins).mean())


def _val_loss_grad_theta(w, b, X, y_signed, loss_kind):
    """Gradient of the mean validation loss with respect to (w, b)."""
    f = X @ w + b
    n = X.shape[0]
    if loss_kind == "hinge":
        active = (y_signed * f) < 1.0
        coeff = np.where(active, -y_signed, 0.0) / n
    else:
        coeff = -y_signed * _sigmoid(-y_signed * f) / n
    return X.T @ coeff, float(coeff.sum())


def _logistic_implicit_grad(Xp, yp_signed, w, b, C, g_w, g_b):
    """dL_val/dx_p through the inner stationarity conditions.

    Xp/yp_signed hold the poisoned training set with the poison point in the
    last row. H is the training-objective Hessian at the optimum; the cross
    derivative only involves the poison term.
    """
    n, d = Xp.shape
    f = Xp @ w + b
    s = _sigmoid(-yp_signed * f)
    D = s * (1.0 - s)
    XD = Xp * D[:, None]
    H = np.empty((d + 1, d + 1))
    H[:d, :d] = C * (Xp.T @ XD)
    H[:d, :d][np.diag_indices(d)] += 1.0
    H[:d, d] = C * XD.sum(axis=0)
    H[d, :d] = H[:d, d]
    H[d, d] = C * D.sum() + 1e-12

    g = np.concatenate([g_w, [g_b]])
    try:
        v = np.linalg.solve(H, g)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular inner Hessian in the bilevel attack") from exc

    y_p = yp_signed[-1]
    s_p = s[-1]
    d_p = D[-1]
    v_w, v_b = v[:d], v[d]
    # dL/dx = -v^T dJ, J = cross second derivative of the poison term
    return C * y_p * s_p * v_w - C * d_p * (v_w @ Xp[-1] + v_b) * w


_MARGIN_EPS = 1e-6


def _hinge_sets(Xp, yp_signed, w, b):
    margins = yp_signed * (Xp @ w + b)
    err = margins < 1.0 - _MARGIN_EPS
    on = np.abs(margins - 1.0) <= _MARGIN_EPS
    return err, on


def _hinge_implicit_grad(Xp, yp_signed, w, b, C, g_w, g_b):
    """Fixed-active-set linearization of the hinge inner problem.

    Margin violators keep multiplier 1, on-margin points keep their (least
    squares recovered) multipliers as free variables, the rest contribute
    nothing. Differentiating the stationarity, margin and bias conditions
    yields a small linear system whose adjoint gives dL_val/dx_p.
    """
    err, on = _hinge_sets(Xp, yp_signed, w, b)
    p = Xp.shape[0] - 1
    x_p = Xp[p]
    y_p = yp_signed[p]
    if not err[p] and not on[p]:
        return np.zeros(Xp.shape[1])

    S = np.flatnonzero(on)
    X_S = Xp[S]
    y_S = yp_signed[S]
    lam_p = 1.0
    if on[p]:
        # recover the on-margin multipliers from stationarity + bias condition
        E = np.flatnonzero(err)
        rhs = np.concatenate([w - C * (yp_signed[E] @ Xp[E]) if E.size else w,
                              [-yp_signed[E].sum() if E.size else 0.0]])
        lhs = np.vstack([C * (X_S * y_S[:, None]).T, C * y_S[None, :]])
        lam, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        lam_p = float(lam[np.flatnonzero(S == p)[0]])
    c = C * y_p * lam_p

    s = S.size
    if s == 0:
        return c * g_w

    A = C * (X_S * y_S[:, None]).T  # d x s: dw contribution of the multipliers
    M = np.zeros((s + 1, s + 1))
    M[:s, :s] = X_S @ A
    M[:s, s] = 1.0
    M[s, :s] = y_S
    rhs_adj = np.concatenate([A.T @ g_w, [g_b]])
    v, *_ = np.linalg.lstsq(M.T, rhs_adj, rcond=None)
    grad = c * g_w - c * (X_S.T @ v[:s])
    if on[p]:
        # the poison point's own margin equation carries a direct w term
        grad -= v[np.flatnonzero(S == p)[0]] * w
    return grad


def bilevel_attack_implicit(d_tr: Dataset, d_val: Dataset, y_p: int,
                            cfg: BilevelConfig, loss_kind: str, reg_c: float):
    """Optimize one poison point by implicit-gradient ascent.

    Initialization is a random validation point of a class other than y_p,
    relabeled y_p. Returns (point, telemetry) where telemetry records the
    validation-loss trajectory; the returned point is the iterate with the
    highest recorded validation loss.
    """
    classes = d_tr.classes
    positive = int(classes.max())
    lb = cfg.lower_bound if cfg.lower_bound is not None else d_tr.lower_bound
    ub = cfg.upper_bound if cfg.upper_bound is not None else d_tr.upper_bound
    rng = np.random.default_rng(cfg.seed)

    candidates = np.flatnonzero(d_val.labels != y_p)
    if candidates.size == 0:
        raise ValueError(f"no validation samples outside class {y_p} to initialize from")
    x = d_val.features[rng.choice(candidates)].copy()

    y_tr = _signed(d_tr.labels, positive)
    yp_signed = np.concatenate([y_tr, [1.0 if y_p == positive else -1.0]])
    Xv = d_val.features
    yv = _signed(d_val.labels, positive)

    def retrain(point):
        Xp = np.vstack([d_tr.features, point[None, :]])
        w, b, _, _, _ = _fit_binary(Xp, yp_signed, loss_kind, reg_c, cfg.retrain_tol, 500_000)
        return Xp, w, b

    best_x = x.copy()
    best_loss = -np.inf
    losses = []
    start = time.perf_counter()
    Xp, w, b = retrain(x)
    for _ in range(cfg.max_outer_iters):
        loss = _val_loss(w, b, Xv, yv, loss_kind)
        losses.append(loss)
        if loss > best_loss:
            best_loss = loss
            best_x = x.copy()
        if cfg.step_size == 0.0:
            break
        g_w, g_b = _val_loss_grad_theta(w, b, Xv, yv, loss_kind)
        if loss_kind == "logistic":
            grad = _logistic_implicit_grad(Xp, yp_signed, w, b, reg_c, g_w, g_b)
            x = clip(x + cfg.step_size * grad, lb, ub)
            Xp, w, b = retrain(x)
        else:
            grad = _hinge_implicit_grad(Xp, yp_signed, w, b, reg_c, g_w, g_b)
            sets_before = _hinge_sets(Xp, yp_signed, w, b)
            step = cfg.step_size
            for _ in range(10):
                cand = clip(x + step * grad, lb, ub)
                Xc, wc, bc = retrain(cand)
                same = all(
                    np.array_equal(a[:-1], bef[:-1])
                    for a, bef in zip(_hinge_sets(Xc, yp_signed, wc, bc), sets_before)
                )
                if same:
                    break
                step *= 0.5
            x, Xp, w, b = cand, Xc, wc, bc

    telemetry = {
        "losses": losses,
        "best_loss": best_loss,
        "iterations": len(losses),
        "wall_time": time.perf_counter() - start,
    }
    return best_x, telemetry


def bilevel_poison_batch(d_tr: Dataset, d_val: Dataset, m: int, cfg: BilevelConfig,
                         loss_kind: str, reg_c: float) -> PoisonBatch:
    """Craft m poison points greedily, one implicit-gradient run per point.

    Each optimized point is appended to the training set (with its poison
    label) before the next one is crafted. Poison labels are drawn uniformly
    over the dataset classes from the seeded stream.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    classes = d_tr.classes
    master = np.random.default_rng(cfg.seed)
    point_seeds = master.integers(0, 2**63 - 1, size=m)
    labels = master.choice(classes, size=m)

    cur = d_tr
    points = np.empty((m, d_tr.d))
    telemetry = []
    for i in range(m):
        point_cfg = BilevelConfig(cfg.step_size, cfg.max_outer_iters, cfg.retrain_tol,
                                  cfg.lower_bound, cfg.upper_bound, int(point_seeds[i]))
        x, tele = bilevel_attack_implicit(cur, d_val, int(labels[i]), point_cfg,
                                          loss_kind, reg_c)
        points[i] = x
        telemetry.append(tele)
        cur = Dataset(np.vstack([cur.features, x[None, :]]),
                      np.concatenate([cur.labels, [labels[i]]]),
                      cur.lower_bound, cur.upper_bound, dict(cur.class_map))
    # target_classes mirrors the attack module's convention: the class whose
    # region the point migrated toward is unknown here, so record the label's
    # complement for binary tasks and the label itself otherwise
    if classes.size == 2:
        targets = np.where(labels == classes[0], classes[1], classes[0])
    else:
        targets = labels.copy()
    return PoisonBatch(points, labels, targets, tuple(telemetry))


def bilevel_grid_oracle(d_tr: Dataset, d_val: Dataset, y_p: int,
                        spec: GridOracleSpec, loss_kind: str, reg_c: float,
                        retrain_tol: float = 1e-8) -> np.ndarray:
    """Validation loss of the retrained model for every 2-D grid point.

    Cell [i, j] holds the loss for the poison point (axis0[i], axis1[j]).
    Training rows are put in a canonical order first so the result is
    exactly invariant to the ordering of d_tr.
    """
    if d_tr.d != 2 or d_val.d != 2:
        raise ValueError("the grid oracle only supports 2-D data")
    order = np.lexsort((d_tr.labels, d_tr.features[:, 1], d_tr.features[:, 0]))
    X_tr = d_tr.features[order]
    positive = int(d_tr.classes.max())
    y_tr = _signed(d_tr.labels[order], positive)
    yp_signed = np.concatenate([y_tr, [1.0 if y_p == positive else -1.0]])
    Xv = d_val.features
    yv = _signed(d_val.labels, positive)

    xs, ys = spec.axes()
    out = np.empty((spec.resolution, spec.resolution))
    Xp = np.vstack([X_tr, [[0.0, 0.0]]])
    for i, gx in enumerate(xs):
        for j, gy in enumerate(ys):
            Xp[-1, 0] = gx
            Xp[-1, 1] = gy
            w, b, _, _, _ = _fit_binary(Xp, yp_signed, loss_kind, reg_c, retrain_tol, 500_000)
            out[i, j] = _val_loss(w, b, Xv, yv, loss_kind)
    return out
