"""Multi-shot target-face association: pre-association by tracking,
cannot-link constraints, one-shot SVM training and iterative refinement.

The pre-association tracker is injectable; the baseline is a
constant-velocity Kalman box predictor seeded from the anchor (stands in
for an appearance tracker without needing image data).
"""
from dataclasses import dataclass, field

import numpy as np

from . import svm as svm_mod
from .errors import ValidationError
from .svm import SvmConfig, SvmModel, SvmProblem
from .track_sort import SortConfig, init_track_state, iou, kalman_predict, kalman_update, obs_to_box
from .types import BoundingBox, Template


@dataclass(frozen=True)
class TfaConfig:
    k: int = 50  # pre-association frame budget
    pre_iou_min: float = 0.3  # discard drifting pre-associations below this IoU
    gamma: float = 0.1  # cannot-link IoU threshold
    iterations: int = 0  # SVM retraining rounds after the initial one
    svm: SvmConfig = field(default_factory=SvmConfig)
    strict_eq4: bool = False  # score raw (un-normalized, bias-free) features

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError(f"frame budget must be >= 0, got {self.k}")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValidationError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")


class ConstantVelocityBoxTracker:
    """Baseline pre-association tracker built on the Kalman box kernel."""

    def __init__(self, box: BoundingBox):
        self._cfg = SortConfig()
        self._state = init_track_state(box, self._cfg)

    def predict(self) -> BoundingBox:
        self._state = kalman_predict(self._state, self._cfg)
        return obs_to_box(self._state.mean[:4])

    def update(self, box: BoundingBox):
        self._state = kalman_update(self._state, box, self._cfg)


def pre_associate(anchor_index, detections, cfg: TfaConfig = TfaConfig(),
                  scene_cuts=(), tracker_factory=ConstantVelocityBoxTracker):
    """Track the anchor's box through the next k frames, collecting the
    best-IoU detection per frame; low-IoU picks are discarded as drift and
    tracking stops at the first scene cut."""
    anchor = detections[anchor_index]
    by_frame = {}
    for idx, det in enumerate(detections):
        by_frame.setdefault(det.frame, []).append(idx)
    tracker = tracker_factory(anchor.box)
    cuts = sorted(c for c in scene_cuts if c > anchor.frame)
    stop_at = cuts[0] if cuts else None
    t = set()
    for frame in range(anchor.frame + 1, anchor.frame + cfg.k + 1):
        if stop_at is not None and frame >= stop_at:
            break
        predicted = tracker.predict()
        candidates = by_frame.get(frame, [])
        if not candidates:
            continue
        best = max(candidates, key=lambda i: (iou(detections[i].box, predicted), -i))
        if iou(detections[best].box, predicted) >= cfg.pre_iou_min:
            t.add(best)
            tracker.update(detections[best].box)
    return t


def build_cannot_link(detections, gamma=0.1):
    """Pairs (i, j) sharing a frame with IoU <= gamma cannot be one face."""
    by_frame = {}
    for idx, det in enumerate(detections):
        by_frame.setdefault((det.video_id, det.frame), []).append(idx)
    pairs = set()
    for group in by_frame.values():
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                i, j = group[a], group[b]
                if iou(detections[i].box, detections[j].box) <= gamma:
                    pairs.add((min(i, j), max(i, j)))
    return pairs


def build_training_sets(s_p, cannot_link, background_indices=()):
    """Positive set, its cannot-link partners as negatives, plus background.

    Raises when both negative sets come out empty (nothing to separate).
    """
    if not s_p:
        raise ValidationError("positive set must be non-empty")
    s_p = set(s_p)
    s_n = set()
    for i, j in cannot_link:
        if i in s_p:
            s_n.add(j)
        if j in s_p:
            s_n.add(i)
    s_n -= s_p
    s_b = set(background_indices)
    if not s_n and not s_b:
        raise ValidationError(
            "no within-video negatives and no background set; cannot train"
        )
    return s_p, s_n, s_b


def associate(model: SvmModel, decision_values, anchor_index=0):
    """Anchor plus every detection with a strictly positive decision value."""
    a = {i for i, v in enumerate(decision_values) if v > 0.0}
    a.add(anchor_index)
    return a


def refine(a, cannot_link, decision_values, anchor_index=0):
    """Iteratively drop the lowest-scoring member of any violated
    cannot-link pair; the anchor is never removed."""
    a = set(a)
    while True:
        violators = set()
        for i, j in cannot_link:
            if i in a and j in a:
                violators.update((i, j))
        violators.discard(anchor_index)
        if not violators:
            return a
        a.remove(min(violators, key=lambda i: (decision_values[i], i)))


def tfa_run(detections, embeddings, anchor_index, background_embeddings=None,
            cfg: TfaConfig = TfaConfig(), scene_cuts=()):
    """Full association pipeline for one (video, anchor) pair.

    detections: all detections of the video; embeddings: (m, D) array
    aligned with them. Returns the associated detections as a Template.
    """
    detections = list(detections)
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    if embeddings.shape[0] != len(detections):
        raise ValidationError("embeddings must align with detections")
    xbar = np.array([svm_mod.augment(x) for x in embeddings])
    bg = None
    if background_embeddings is not None and len(background_embeddings):
        bg = np.array([svm_mod.augment(x) for x in background_embeddings])

    t = pre_associate(anchor_index, detections, cfg, scene_cuts)
    cannot_link = build_cannot_link(detections, cfg.gamma)
    s_p = {anchor_index} | t
    model = None
    a = s_p
    for _ in range(cfg.iterations + 1):
        bg_idx = range(len(detections), len(detections) + (len(bg) if bg is not None else 0))
        s_p, s_n, s_b = build_training_sets(s_p, cannot_link, bg_idx)
        order_p, order_n = sorted(s_p), sorted(s_n)
        feats = [xbar[i] for i in order_p] + [xbar[i] for i in order_n]
        groups = [svm_mod.POSITIVE] * len(order_p) + [svm_mod.NEGATIVE] * len(order_n)
        if s_b:
            feats.extend(bg)
            groups.extend([svm_mod.BACKGROUND] * len(bg))
        labels = [1.0 if g == svm_mod.POSITIVE else -1.0 for g in groups]
        model = svm_mod.train(SvmProblem(np.array(feats), labels, groups), cfg.svm)
        if cfg.strict_eq4:
            decisions = embeddings @ model.w[:-1]
        else:
            decisions = xbar @ model.w
        a = associate(model, decisions, anchor_index)
        a = refine(a, cannot_link, decisions, anchor_index)
        s_p = a
    order = sorted(a)
    return Template(
        samples=embeddings[order],
        qualities=[detections[i].score for i in order],
        detections=[detections[i] for i in order],
    )
