"""Single-shot face association: constant-velocity Kalman tracking with
IoU-gated Hungarian assignment, plus tracklet quality filtering.

State is the canonical 7-vector (cx, cy, area, aspect, vx, vy, varea);
aspect ratio is observed but carries no velocity.
"""
from dataclasses import dataclass, field

import numpy as np

from .core import hungarian_assignment
from .errors import NumericError, ValidationError
from .types import BoundingBox, Detection


@dataclass(frozen=True)
class SortConfig:
    iou_gate: float = 0.3
    max_age: int = 1
    min_hits: int = 3
    min_length: int = 25
    min_avg_score: float = 0.9
    filtering: bool = True
    # Noise diagonals of the canonical constant-velocity design.
    obs_noise: tuple = (1.0, 1.0, 10.0, 0.01)
    process_noise: tuple = (1.0, 1.0, 1.0, 0.01, 0.01, 0.01, 1e-4)
    init_cov: tuple = (10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4)

    def __post_init__(self):
        if not (0.0 <= self.iou_gate <= 1.0):
            raise ValidationError(f"iou_gate must be in [0, 1], got {self.iou_gate}")


@dataclass
class KalmanTrackState:
    mean: np.ndarray  # (7,)
    cov: np.ndarray  # (7, 7)


@dataclass
class Tracklet:
    id: int
    detections: list  # temporally ordered

    def __post_init__(self):
        frames = [d.frame for d in self.detections]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValidationError("tracklet frames must be strictly increasing")

    @property
    def length(self):
        return len(self.detections)

    @property
    def mean_score(self):
        return float(np.mean([d.score for d in self.detections]))


_F = np.eye(7)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.zeros((4, 7))
_H[0, 0] = _H[1, 1] = _H[2, 2] = _H[3, 3] = 1.0


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes."""
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def box_to_obs(box: BoundingBox):
    return np.array([box.x + box.w / 2.0, box.y + box.h / 2.0, box.area, box.w / box.h])


def obs_to_box(z):
    w = np.sqrt(max(z[2], 1e-12) * max(z[3], 1e-12))
    h = max(z[2], 1e-12) / w
    return BoundingBox(z[0] - w / 2.0, z[1] - h / 2.0, w, h)


def init_track_state(box: BoundingBox, cfg: SortConfig = SortConfig()) -> KalmanTrackState:
    mean = np.zeros(7)
    mean[:4] = box_to_obs(box)
    return KalmanTrackState(mean, np.diag(cfg.init_cov).astype(float))


def kalman_predict(ts: KalmanTrackState, cfg: SortConfig = SortConfig()) -> KalmanTrackState:
    """Advance one frame under the constant-velocity model."""
    mean = ts.mean.copy()
    if mean[2] + mean[6] <= 0:  # area must stay positive
        mean[6] = 0.0
    mean = _F @ mean
    cov = _F @ ts.cov @ _F.T + np.diag(cfg.process_noise)
    return KalmanTrackState(mean, (cov + cov.T) / 2.0)


def kalman_update(ts: KalmanTrackState, box: BoundingBox,
                  cfg: SortConfig = SortConfig()) -> KalmanTrackState:
    """Standard Kalman correction with the box as the (cx, cy, s, r) observation."""
    z = box_to_obs(box)
    innov_cov = _H @ ts.cov @ _H.T + np.diag(cfg.obs_noise)
    try:
        chol = np.linalg.cholesky(innov_cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError("innovation covariance not positive definite") from exc
    gain = np.linalg.solve(chol.T, np.linalg.solve(chol, _H @ ts.cov)).T
    mean = ts.mean + gain @ (z - _H @ ts.mean)
    joseph = np.eye(7) - gain @ _H
    cov = joseph @ ts.cov @ joseph.T + gain @ np.diag(cfg.obs_noise) @ gain.T
    return KalmanTrackState(mean, (cov + cov.T) / 2.0)


@dataclass
class _Track:
    id: int
    state: KalmanTrackState
    detections: list = field(default_factory=list)
    hits: int = 0
    misses: int = 0
    predicted_box: BoundingBox | None = None


def sort_track(detections, cfg: SortConfig = SortConfig()):
    """Assemble per-frame detections of one video into tracklets.

    Per frame, predicted tracks are matched to detections by Hungarian
    assignment on cost 1 - IoU, gated at cfg.iou_gate; tracks unmatched for
    more than max_age frames die; only tracks with >= min_hits detections
    are emitted. Deterministic for identical inputs.
    """
    by_frame = {}
    for det in detections:
        by_frame.setdefault(det.frame, []).append(det)
    if not by_frame:
        return []
    finished, active = [], []
    next_id = 0
    for frame in range(min(by_frame), max(by_frame) + 1):
        for trk in active:
            trk.state = kalman_predict(trk.state, cfg)
            trk.predicted_box = obs_to_box(trk.state.mean[:4])
        dets = by_frame.get(frame, [])
        matched_tracks, matched_dets = set(), set()
        if dets and active:
            cost = np.array([[1.0 - iou(d.box, t.predicted_box) for t in active]
                             for d in dets])
            for di, ti in hungarian_assignment(cost):
                if 1.0 - cost[di, ti] >= cfg.iou_gate:
                    trk = active[ti]
                    trk.state = kalman_update(trk.state, dets[di].box, cfg)
                    trk.detections.append(dets[di])
                    trk.hits += 1
                    trk.misses = 0
                    matched_tracks.add(ti)
                    matched_dets.add(di)
        survivors = []
        for ti, trk in enumerate(active):
            if ti not in matched_tracks:
                trk.misses += 1
            if trk.misses > cfg.max_age:
                finished.append(trk)
            else:
                survivors.append(trk)
        active = survivors
        for di, det in enumerate(dets):
            if di not in matched_dets:
                trk = _Track(next_id, init_track_state(det.box, cfg), [det], hits=1)
                next_id += 1
                active.append(trk)
    finished.extend(active)
    finished.sort(key=lambda t: t.id)
    out = []
    for trk in finished:
        if trk.hits >= cfg.min_hits:
            out.append(Tracklet(len(out), trk.detections))
    return out


def filter_tracklets(tracklets, cfg: SortConfig = SortConfig()):
    """Quality filter: keep length >= min_length and mean score >= min_avg_score.

    Pass-through when cfg.filtering is off ("without filtering" mode).
    """
    if not cfg.filtering:
        return list(tracklets)
    return [t for t in tracklets
            if t.length >= cfg.min_length and t.mean_score >= cfg.min_avg_score]
