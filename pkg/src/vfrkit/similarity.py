"""Template-to-template similarity: exemplar cosine, projection metric,
variance-aware projection metric, and their fusions.

The projection metric is computed directly from ||P1^T P2||_F (no SVD);
``principal_angle_cosines`` exists as the slower SVD-equivalent path and
is used as an independent check.
"""
from dataclasses import dataclass

import numpy as np

from .aggregate import AggregateConfig, Exemplar, Subspace, exemplar_mean, exemplar_quality, learn_subspace, learn_subspace_quality
from .core import symmetric_eigendecomposition
from .errors import DegenerateTemplateError, ValidationError
from .types import Template


@dataclass(frozen=True)
class SimilarityConfig:
    exemplar_kind: str = "quality"  # plain | quality
    subspace_kind: str = "quality"  # none | plain | quality
    metric_kind: str = "VPM"  # PM | VPM
    lambda_fusion: float = 1.0

    def __post_init__(self):
        if self.lambda_fusion < 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lambda_fusion}")
        if self.exemplar_kind not in ("plain", "quality"):
            raise ValidationError(f"unknown exemplar kind {self.exemplar_kind!r}")
        if self.subspace_kind not in ("none", "plain", "quality"):
            raise ValidationError(f"unknown subspace kind {self.subspace_kind!r}")
        if self.metric_kind not in ("PM", "VPM"):
            raise ValidationError(f"unknown metric kind {self.metric_kind!r}")


# The six variants evaluated in the ablations, by conventional name.
VARIANTS = {
    "Cos": SimilarityConfig("plain", "none", "PM", 0.0),
    "QCos": SimilarityConfig("quality", "none", "PM", 0.0),
    "Cos+Sub-PM": SimilarityConfig("plain", "plain", "PM", 1.0),
    "QCos+Sub-PM": SimilarityConfig("quality", "plain", "PM", 1.0),
    "QCos+QSub-PM": SimilarityConfig("quality", "quality", "PM", 1.0),
    "QCos+QSub-VPM": SimilarityConfig("quality", "quality", "VPM", 1.0),
}


@dataclass(frozen=True)
class PrincipalAngles:
    cosines: np.ndarray  # descending, in [0, 1]
    r: int


@dataclass(frozen=True)
class TemplateRepresentation:
    exemplar: Exemplar
    subspace: Subspace | None = None
    label: str | None = None


def cosine(a, b):
    """Cosine similarity between two exemplars (or raw vectors)."""
    va = a.vector if isinstance(a, Exemplar) else np.asarray(a, dtype=np.float64)
    vb = b.vector if isinstance(b, Exemplar) else np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise DegenerateTemplateError("cosine undefined for a zero exemplar")
    return float(np.clip(va @ vb / (na * nb), -1.0, 1.0))


def _check_pair(s1: Subspace, s2: Subspace):
    if s1.ambient_dim != s2.ambient_dim:
        raise ValidationError(
            f"ambient dimension mismatch: {s1.ambient_dim} vs {s2.ambient_dim}"
        )


def projection_metric(s1: Subspace, s2: Subspace):
    """sqrt(mean squared principal-angle cosine) = sqrt(||P1^T P2||_F^2 / r)."""
    _check_pair(s1, s2)
    r = min(s1.dim, s2.dim)
    m = s1.basis.T @ s2.basis
    return float(np.sqrt(np.sum(m * m) / r))


def principal_angle_cosines(s1: Subspace, s2: Subspace) -> PrincipalAngles:
    """Cosines of the principal angles, via the eigenvalues of M M^T."""
    _check_pair(s1, s2)
    m = s1.basis.T @ s2.basis
    if m.shape[0] > m.shape[1]:
        m = m.T
    vals, _ = symmetric_eigendecomposition(m @ m.T)
    cosines = np.sqrt(np.clip(vals, 0.0, None))
    return PrincipalAngles(cosines, r=len(cosines))


def variance_weighted_basis(s: Subspace):
    """Basis columns scaled by normalized, non-negative log-eigenvalues.

    All-clamped spectra (every eigenvalue <= 1) fall back to uniform 1/d
    weights, preserving PM-like behavior.
    """
    with np.errstate(divide="ignore"):
        w = np.maximum(0.0, np.log(np.maximum(s.spectrum, np.finfo(float).tiny)))
    total = w.sum()
    if total == 0.0:
        return s.basis / s.dim
    return s.basis * (w / total)


def vpm(s1: Subspace, s2: Subspace):
    """Variance-aware projection metric on variance-weighted bases."""
    _check_pair(s1, s2)
    r = min(s1.dim, s2.dim)
    m = variance_weighted_basis(s1).T @ variance_weighted_basis(s2)
    return float(np.sqrt(np.sum(m * m) / r))


def template_similarity(a: TemplateRepresentation, b: TemplateRepresentation,
                        cfg: SimilarityConfig) -> float:
    """Fused similarity: exemplar cosine + lambda * subspace metric."""
    for rep in (a, b):
        if rep.exemplar.kind != cfg.exemplar_kind:
            raise ValidationError(
                f"representation has {rep.exemplar.kind!r} exemplar, config wants "
                f"{cfg.exemplar_kind!r}"
            )
    score = cosine(a.exemplar, b.exemplar)
    if cfg.subspace_kind == "none":
        return score
    for rep in (a, b):
        if rep.subspace is None:
            raise ValidationError("config requires a subspace but representation has none")
        if rep.subspace.kind != cfg.subspace_kind:
            raise ValidationError(
                f"representation has {rep.subspace.kind!r} subspace, config wants "
                f"{cfg.subspace_kind!r}"
            )
    metric = vpm if cfg.metric_kind == "VPM" else projection_metric
    return score + cfg.lambda_fusion * metric(a.subspace, b.subspace)


def fuse_network_scores(matrices):
    """Element-wise mean of per-network score matrices."""
    mats = [np.asarray(m, dtype=np.float64) for m in matrices]
    if not mats:
        raise ValidationError("need at least one score matrix")
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise ValidationError(f"score matrix shape mismatch: {m.shape} vs {shape}")
    return np.mean(mats, axis=0)


def build_representation(tpl: Template, cfg: SimilarityConfig,
                         agg: AggregateConfig = AggregateConfig()) -> TemplateRepresentation:
    """Compute the exemplar/subspace pair a similarity config calls for."""
    if cfg.exemplar_kind == "quality":
        ex = exemplar_quality(tpl, agg.quality)
    else:
        ex = exemplar_mean(tpl)
    sub = None
    if cfg.subspace_kind == "quality":
        sub = learn_subspace_quality(tpl, agg)
    elif cfg.subspace_kind == "plain":
        sub = learn_subspace(tpl, agg.subspace_dim, center=agg.center, strict=agg.strict)
    return TemplateRepresentation(ex, sub, label=tpl.label)


def score_matrix(probes, gallery, cfg: SimilarityConfig):
    """Similarity of every probe representation against every gallery one."""
    out = np.empty((len(probes), len(gallery)))
    for i, p in enumerate(probes):
        for j, g in enumerate(gallery):
            out[i, j] = template_similarity(p, g, cfg)
    return out
