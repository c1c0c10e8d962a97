"""Weighted L2-regularized squared-hinge linear SVM.

Deterministic full-batch gradient descent with backtracking line search on
the smooth convex objective

    0.5 w.w + sum_g C_g * sum_{i in g} max(0, 1 - y_i w.x_i)^2

where each group's cost is the base cost divided by its sample count.
Features are expected pre-augmented: x = [raw / ||raw||; 1].
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError

POSITIVE, NEGATIVE, BACKGROUND = "positive", "negative", "background"
GROUPS = (POSITIVE, NEGATIVE, BACKGROUND)


@dataclass(frozen=True)
class SvmConfig:
    C: float = 10.0
    tolerance: float = 1e-6
    max_iterations: int = 200_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError(f"cost parameter must be positive, got {self.C}")


@dataclass
class SvmProblem:
    features: np.ndarray  # (n, D+1) augmented normalized vectors
    labels: np.ndarray  # (n,) in {+1, -1}
    groups: np.ndarray  # (n,) of POSITIVE/NEGATIVE/BACKGROUND

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.float64).ravel()
        self.groups = np.asarray(self.groups).ravel()
        n = self.features.shape[0]
        if not (self.labels.shape[0] == n == self.groups.shape[0]):
            raise ValidationError("features, labels and groups must align")
        if not set(np.unique(self.groups)) <= set(GROUPS):
            raise ValidationError(f"unknown group tag in {np.unique(self.groups)}")
        expected = np.where(self.groups == POSITIVE, 1.0, -1.0)
        if not np.array_equal(self.labels, expected):
            raise ValidationError("labels inconsistent with group tags")

    @classmethod
    def from_raw(cls, vectors, groups):
        """Normalize and bias-augment raw feature vectors."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0.0):
            raise ValidationError("zero-norm feature vector cannot be normalized")
        feats = np.hstack([vectors / norms[:, None], np.ones((len(vectors), 1))])
        groups = np.asarray(groups).ravel()
        labels = np.where(groups == POSITIVE, 1.0, -1.0)
        return cls(feats, labels, groups)


@dataclass(frozen=True)
class SvmModel:
    w: np.ndarray
    objective: float
    iterations: int

    def decision_values(self, features):
        return np.atleast_2d(np.asarray(features, dtype=np.float64)) @ self.w


def group_costs(counts, C):
    """Per-group costs C / count; empty groups cost 0 (indicator off)."""
    n_pos = counts[0]
    if n_pos < 1:
        raise ValidationError("at least one positive sample required")
    return tuple(C / c if c > 0 else 0.0 for c in counts)


def augment(x):
    """[x / ||x||; 1] for a single raw feature vector."""
    x = np.asarray(x, dtype=np.float64).ravel()
    n = np.linalg.norm(x)
    if n == 0.0:
        raise ValidationError("zero-norm feature vector cannot be normalized")
    return np.append(x / n, 1.0)


def _sample_costs(problem, costs):
    c = np.empty(len(problem.labels))
    for tag, cost in zip(GROUPS, costs):
        c[problem.groups == tag] = cost
    return c


def svm_objective(w, problem, costs):
    """Exact value of the weighted squared-hinge objective."""
    c = _sample_costs(problem, costs)
    slack = np.maximum(0.0, 1.0 - problem.labels * (problem.features @ w))
    return float(0.5 * w @ w + c @ slack**2)


def svm_gradient(w, problem, costs):
    c = _sample_costs(problem, costs)
    margins = problem.labels * (problem.features @ w)
    slack = np.maximum(0.0, 1.0 - margins)
    coeff = -2.0 * c * slack * problem.labels
    return w + problem.features.T @ coeff


def train(problem: SvmProblem, cfg: SvmConfig = SvmConfig()) -> SvmModel:
    """Minimize the objective; deterministic given inputs (starts at w=0).

    Stops when ||grad|| <= tolerance * (1 + ||w||); raises ConvergenceError
    with the final gradient norm if the iteration budget runs out.
    """
    counts = tuple(int(np.sum(problem.groups == g)) for g in GROUPS)
    costs = group_costs(counts, cfg.C)
    w = np.zeros(problem.features.shape[1])
    obj = svm_objective(w, problem, costs)
    step = 1.0
    for it in range(cfg.max_iterations):
        grad = svm_gradient(w, problem, costs)
        gnorm = np.linalg.norm(grad)
        if gnorm <= cfg.tolerance * (1.0 + np.linalg.norm(w)):
            return SvmModel(w, obj, it)
        # Backtracking (Armijo) line search, with mild step growth between
        # iterations so well-conditioned problems don't crawl.
        step = min(step * 2.0, 1.0)
        while True:
            w_new = w - step * grad
            obj_new = svm_objective(w_new, problem, costs)
            if obj_new <= obj - 1e-4 * step * gnorm**2 or step < 1e-18:
                break
            step *= 0.5
        w, obj = w_new, obj_new
    raise ConvergenceError(
        f"SVM did not converge within {cfg.max_iterations} iterations "
        f"(gradient norm {gnorm:.3e})",
        gap=float(gnorm),
    )
