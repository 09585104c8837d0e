"""Pure-numpy implementations of the hot kernels.

Reference semantics for the compiled backend: both backends must implement
exactly the same update rules (summation order may differ in the last ulp).
"""

from __future__ import annotations

import numpy as np


def mean_pairwise_distance(bank: np.ndarray) -> float:
    """Mean Euclidean distance over all unordered distinct row pairs."""
    bank = np.asarray(bank, dtype=np.float64)
    n = bank.shape[0]
    sq = np.einsum("ij,ij->i", bank, bank)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (bank @ bank.T)
    np.maximum(d2, 0.0, out=d2)
    iu = np.triu_indices(n, k=1)
    return float(np.sqrt(d2[iu]).mean())


def mean_pairwise_squared_distance(bank: np.ndarray) -> float:
    bank = np.asarray(bank, dtype=np.float64)
    n = bank.shape[0]
    sq = np.einsum("ij,ij->i", bank, bank)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (bank @ bank.T)
    np.maximum(d2, 0.0, out=d2)
    iu = np.triu_indices(n, k=1)
    return float(d2[iu].mean())


def kde_likelihood(bank: np.ndarray, h: float, x: np.ndarray) -> float:
    diff = x[None, :] - bank
    d2 = np.einsum("ij,ij->i", diff, diff)
    return float(np.exp(-d2 / h).mean())


def kde_likelihood_grad(bank: np.ndarray, h: float, x: np.ndarray):
    """Fused likelihood and gradient w.r.t. the query point.

    p = (1/N) sum_i exp(-||x - x_i||^2 / h)
    grad = (1/N) sum_i exp(-||x - x_i||^2 / h) * (-2/h) * (x - x_i)
    """
    diff = x[None, :] - bank
    d2 = np.einsum("ij,ij->i", diff, diff)
    ker = np.exp(-d2 / h)
    n = bank.shape[0]
    p = float(ker.sum() / n)
    grad = (-2.0 / h) * (ker @ diff) / n
    return p, grad


def beta_ascent(protos, bank, h, lb, ub, beta0, alpha, stop_threshold, max_iters):
    """Projected gradient ascent on the prototype coefficients.

    Each iteration: build x = beta . protos, clip to the box, evaluate the
    KDE likelihood and its gradient at the clipped point, zero the gradient
    on coordinates whose unclipped value lies strictly outside the box, and
    step beta by alpha times the chained gradient. Stops when two
    consecutive likelihood values differ by at most ``stop_threshold``.

    Returns (beta, iterations, final_p, initial_p, hit_cap) where final_p
    is the likelihood at the clipped point built from the returned beta.
    """
    beta = np.array(beta0, dtype=np.float64)
    protos = np.asarray(protos, dtype=np.float64)
    p_prev = 0.0
    initial_p = 0.0
    iterations = 0
    hit_cap = True
    for t in range(int(max_iters)):
        x = beta @ protos
        xc = np.minimum(np.maximum(x, lb), ub)
        p, g = kde_likelihood_grad(bank, h, xc)
        g = np.where((x < lb) | (x > ub), 0.0, g)
        beta += alpha * (protos @ g)
        iterations = t + 1
        if t == 0:
            initial_p = p
        elif abs(p - p_prev) <= stop_threshold:
            hit_cap = False
            break
        p_prev = p
    x = beta @ protos
    xc = np.minimum(np.maximum(x, lb), ub)
    final_p = kde_likelihood(bank, h, xc)
    return beta, iterations, final_p, initial_p, hit_cap
