"""Independent oracles used by the test suite.

These deliberately avoid the production code paths: the eigendecomposition
applies explicit dense Givens products, the assignment oracle enumerates
permutations, the Kalman oracle is scalar, and the SVM oracle is a plain
long-run gradient descent.
"""
import itertools
import math

import numpy as np


def jacobi_oracle(a, tol=1e-14, max_sweeps=60):
    """Cyclic Jacobi via explicit Givens-matrix products.

    Returns eigenvalues descending and eigenvectors as columns.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1.0)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p, q in itertools.combinations(range(n), 2):
            if a[p, q] == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
            t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
            c = 1.0 / math.hypot(t, 1.0)
            s = t * c
            g = np.eye(n)
            g[p, p] = g[q, q] = c
            g[p, q] = s
            g[q, p] = -s
            a = g.T @ a @ g
            v = v @ g
    vals = np.diag(a).copy()
    order = np.argsort(-vals)
    return vals[order], v[:, order]


def projector(basis):
    return basis @ basis.T


def brute_force_assignment(cost):
    """Minimum-cost assignment by exhaustive permutation search."""
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n <= m:
        best, best_cols = np.inf, None
        for cols in itertools.permutations(range(m), n):
            total = sum(cost[i, c] for i, c in enumerate(cols))
            if total < best:
                best, best_cols = total, cols
        return best, [(i, c) for i, c in enumerate(best_cols)]
    best, pairs = brute_force_assignment(cost.T)
    return best, sorted((c, r) for r, c in pairs)


def scalar_kalman_update(mean, var, z, obs_var):
    """Textbook 1-D Kalman correction."""
    gain = var / (var + obs_var)
    return mean + gain * (z - mean), (1.0 - gain) * var


def gd_svm_oracle(features, labels, sample_costs, max_steps=1_000_000, tol=1e-10):
    """Plain gradient descent with backtracking on the squared-hinge objective."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    c = np.asarray(sample_costs, dtype=np.float64)

    def objective(w):
        slack = np.maximum(0.0, 1.0 - labels * (features @ w))
        return 0.5 * w @ w + c @ slack**2

    def gradient(w):
        slack = np.maximum(0.0, 1.0 - labels * (features @ w))
        return w - features.T @ (2.0 * c * slack * labels)

    w = np.zeros(features.shape[1])
    fw = objective(w)
    for _ in range(max_steps):
        g = gradient(w)
        gnorm2 = g @ g
        if math.sqrt(gnorm2) <= tol * (1.0 + np.linalg.norm(w)):
            break
        step = 1.0
        while objective(w - step * g) > fw - 0.5 * step * gnorm2 and step > 1e-20:
            step *= 0.5
        w = w - step * g
        fw = objective(w)
    return w, fw


def tpir_sweep_oracle(scores, probe_labels, gallery_labels, target):
    """Best TPIR over every candidate threshold with FPIR <= target."""
    scores = np.asarray(scores, dtype=np.float64)
    gallery_labels = list(gallery_labels)
    known = np.array([lab in gallery_labels for lab in probe_labels])
    top = scores.max(axis=1)
    correct = np.array([
        known[i] and gallery_labels[int(np.argmax(scores[i]))] == probe_labels[i]
        for i in range(len(probe_labels))
    ])
    best = 0.0
    for tau in list(np.unique(top)) + [np.inf]:
        accepted = top >= tau
        fpir = np.sum(accepted & ~known) / np.sum(~known)
        tpir = np.sum(accepted & known & correct) / np.sum(known)
        if fpir <= target:
            best = max(best, tpir)
    return float(best)
