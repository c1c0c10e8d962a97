"""Detection-score normalization: clamped logits and softmax quality weights."""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Detectors emit 1.0-saturated scores; ingestion clips into the open interval.
SCORE_EPS = 1e-6


@dataclass(frozen=True)
class QualityConfig:
    t: float = 7.0  # logit clamp threshold
    q: float = 0.3  # softmax temperature

    def __post_init__(self):
        if not self.t > 0:
            raise ValidationError(f"clamp threshold must be positive, got {self.t}")
        if self.q < 0:
            raise ValidationError(f"temperature must be non-negative, got {self.q}")


def clip_score(d):
    """Clip a raw detection score into [SCORE_EPS, 1 - SCORE_EPS]."""
    return float(min(max(d, SCORE_EPS), 1.0 - SCORE_EPS))


def clamp_logit(d, t=7.0):
    """Half-logit of a score, clamped above at t: min(0.5*ln(d/(1-d)), t)."""
    if not (0.0 < d < 1.0):
        raise ValidationError(f"score must lie strictly in (0, 1), got {d}")
    return min(0.5 * np.log(d / (1.0 - d)), t)


def quality_weights(scores, cfg=QualityConfig()):
    """Softmax(q * clamped_logit) over one template's detection scores.

    Returns weights in (0, 1] summing to 1; computed with max-subtraction
    so no overflow even at the clamp bound.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        raise ValidationError("quality_weights needs at least one score")
    logits = np.array([clamp_logit(d, cfg.t) for d in scores])
    z = cfg.q * logits
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()
