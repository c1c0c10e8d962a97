"""Template aggregation: exemplars and (quality-aware) subspace learning.

A template's subspace is spanned by the top eigenvectors of the uncentered
scatter of its embeddings; the quality-aware variant scales each sample by
the square root of its softmax quality weight before building the scatter.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import symmetric_eigendecomposition
from .errors import ValidationError
from .quality import QualityConfig, quality_weights
from .types import Template

# Eigenvalues below this fraction of the largest are numerical noise and
# would poison log-variance weights downstream.
SPECTRUM_FLOOR_RTOL = 1e-12


@dataclass(frozen=True)
class Exemplar:
    vector: np.ndarray
    kind: str = "plain"  # plain | quality
    degenerate: bool = False


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray  # (D, d), orthonormal columns
    spectrum: np.ndarray  # (d,), descending, non-negative
    kind: str = "plain"  # plain | quality

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def ambient_dim(self):
        return self.basis.shape[0]


@dataclass(frozen=True)
class AggregateConfig:
    subspace_dim: int = 3
    quality: QualityConfig = field(default_factory=QualityConfig)
    center: bool = False  # experimental: subtract the mean before the scatter
    strict: bool = True  # error (rather than truncate) when d > N

    def __post_init__(self):
        if self.subspace_dim < 1:
            raise ValidationError(f"subspace_dim must be >= 1, got {self.subspace_dim}")


def exemplar_mean(tpl: Template) -> Exemplar:
    """Sample mean of the template's embeddings."""
    vec = tpl.samples.mean(axis=0)
    return Exemplar(vec, "plain", degenerate=not np.any(vec))


def exemplar_quality(tpl: Template, cfg: QualityConfig = QualityConfig()) -> Exemplar:
    """Quality-weighted mean: (1/L) * sum_i w_i * y_i with softmax weights."""
    w = quality_weights(tpl.qualities, cfg)
    vec = (w[:, None] * tpl.samples).sum(axis=0) / len(tpl)
    return Exemplar(vec, "quality", degenerate=not np.any(vec))


def _checked_dim(d, n_samples, dim, strict):
    if d < 1:
        raise ValidationError(f"subspace dimension must be >= 1, got {d}")
    cap = min(dim, n_samples)
    if d > cap:
        if strict:
            raise ValidationError(
                f"requested subspace dimension {d} exceeds min(D={dim}, N={n_samples})"
            )
        warnings.warn(f"truncating subspace dimension {d} -> {cap} (short template)")
        d = cap
    return d


def _top_eigenpairs(columns, d):
    """Top-d eigenpairs of columns @ columns.T, via the cheaper Gram matrix
    when there are fewer samples than dimensions."""
    dim, n = columns.shape
    if n < dim:
        gram_vals, gram_vecs = symmetric_eigendecomposition(columns.T @ columns)
        positive = gram_vals > max(gram_vals[0], 0.0) * SPECTRUM_FLOOR_RTOL
        if np.count_nonzero(positive) >= d:
            vals = gram_vals[:d]
            basis = columns @ gram_vecs[:, :d] / np.sqrt(vals)
            return vals, basis
        # Rank-deficient: fall through to the full scatter, whose Jacobi
        # eigenbasis deterministically completes the null directions.
    vals, vecs = symmetric_eigendecomposition(columns @ columns.T)
    return vals[:d], vecs[:, :d]


def _fix_signs(basis):
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def _subspace_from_columns(columns, d, kind):
    vals, basis = _top_eigenpairs(columns, d)
    spectrum = np.maximum(vals, 0.0)
    spectrum[spectrum < spectrum.max(initial=0.0) * SPECTRUM_FLOOR_RTOL] = 0.0
    return Subspace(_fix_signs(basis), spectrum, kind)


def learn_subspace(tpl: Template, d: int, *, center: bool = False, strict: bool = True) -> Subspace:
    """Top-d principal subspace of the template's (uncentered) scatter."""
    d = _checked_dim(d, len(tpl), tpl.dim, strict)
    y = tpl.samples.T.copy()
    if center:
        y -= y.mean(axis=1, keepdims=True)
    return _subspace_from_columns(y, d, "plain")


def learn_subspace_quality(tpl: Template, cfg: AggregateConfig = AggregateConfig()) -> Subspace:
    """Quality-aware subspace: scatter of sqrt(w_i)-scaled samples.

    Weights are the normalized softmax quality weights, so the spectrum is
    stored post-normalization (uniform weights reproduce the plain subspace
    up to a 1/N rescale of the spectrum).
    """
    d = _checked_dim(cfg.subspace_dim, len(tpl), tpl.dim, cfg.strict)
    w = quality_weights(tpl.qualities, cfg.quality)
    y = (tpl.samples * np.sqrt(w)[:, None]).T
    if cfg.center:
        y -= y.mean(axis=1, keepdims=True)
    return _subspace_from_columns(y, d, "quality")
