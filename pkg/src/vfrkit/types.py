"""Shared domain types.

Embeddings are plain float64 NumPy vectors; a Template carries them as an
(N, D) array row-per-sample together with aligned detection scores.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValidationError(f"box needs positive extent, got w={self.w}, h={self.h}")

    @property
    def area(self):
        return self.w * self.h

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Detection:
    """One detected face: where, how confident, and which embedding."""

    video_id: str
    frame: int
    box: BoundingBox
    score: float
    embedding_id: int
    truth_id: str | None = None

    def __post_init__(self):
        if not (0.0 < self.score < 1.0):
            raise ValidationError(
                f"detection score must lie strictly in (0, 1), got {self.score}"
            )


@dataclass
class Template:
    """A set of embeddings plus per-sample quality scores; the matching unit."""

    samples: np.ndarray  # (N, D)
    qualities: np.ndarray  # (N,)
    label: str | None = None
    detections: list = field(default_factory=list)  # provenance, optional

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        self.qualities = np.asarray(self.qualities, dtype=np.float64).ravel()
        if self.samples.shape[0] < 1:
            raise ValidationError("template needs at least one sample")
        if self.samples.shape[0] != self.qualities.shape[0]:
            raise ValidationError(
                f"{self.samples.shape[0]} samples vs {self.qualities.shape[0]} qualities"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("template samples contain non-finite entries")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]
