"""Open-set 1:N identification metrics: template identity resolution,
CMC rank-K accuracy and TPIR at target FPIR."""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .track_sort import iou

TRUTH_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class EvalReport:
    rank_k: dict  # K -> accuracy
    tpir_at_fpir: dict  # FPIR target -> TPIR
    counts: dict


def resolve_template_identity(detections, truth_boxes, iou_threshold=TRUTH_IOU_THRESHOLD):
    """Majority identity of a template's detections under IoU truth matching.

    truth_boxes maps (video_id, frame) to a list of (BoundingBox, identity).
    Ties break toward the identity matched earliest; returns None when no
    detection overlaps any truth box.
    """
    votes = {}
    first_seen = {}
    for order, det in enumerate(detections):
        best_iou, best_id = 0.0, None
        for box, identity in truth_boxes.get((det.video_id, det.frame), []):
            v = iou(det.box, box)
            if v >= iou_threshold and v > best_iou:
                best_iou, best_id = v, identity
        if best_id is not None:
            votes[best_id] = votes.get(best_id, 0) + 1
            first_seen.setdefault(best_id, order)
    if not votes:
        return None
    return max(votes, key=lambda k: (votes[k], -first_seen[k]))


def rank_k_accuracy(scores, probe_labels, gallery_labels, ks):
    """CMC: fraction of in-gallery probes whose mate ranks in the top K.

    Score ties break by gallery index (stable descending sort).
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    gallery_labels = list(gallery_labels)
    in_gallery = [i for i, lab in enumerate(probe_labels) if lab in gallery_labels]
    if not in_gallery:
        raise ValidationError("no probe label present in the gallery")
    ranks = []
    for i in in_gallery:
        order = np.argsort(-scores[i], kind="stable")
        correct = gallery_labels.index(probe_labels[i])
        ranks.append(int(np.nonzero(order == correct)[0][0]) + 1)
    ranks = np.array(ranks)
    return {k: float(np.mean(ranks <= k)) for k in ks}


def _open_set_curve(scores, probe_labels, gallery_labels):
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    gallery_labels = list(gallery_labels)
    known = np.array([lab in gallery_labels for lab in probe_labels])
    if not np.any(~known):
        raise ValidationError("FPIR undefined without unknown probes")
    top = scores.max(axis=1)
    argtop = scores.argmax(axis=1)
    correct = np.array([
        known[i] and gallery_labels[argtop[i]] == probe_labels[i]
        for i in range(len(probe_labels))
    ])
    # Sweep thresholds over the observed top scores, plus one above all of
    # them (the operating point that rejects everyone: FPIR=0, TPIR=0).
    taus = np.append(np.unique(top)[::-1], -np.inf)
    n_known = int(known.sum())
    n_unknown = int((~known).sum())
    fpir = np.empty(len(taus) + 1)
    tpir = np.empty(len(taus) + 1)
    fpir[0] = tpir[0] = 0.0
    for idx, tau in enumerate(taus, start=1):
        accepted = top >= tau
        fpir[idx] = np.sum(accepted & ~known) / n_unknown
        tpir[idx] = np.sum(accepted & known & correct) / n_known
    return fpir, tpir


def tpir_at_fpir(scores, probe_labels, gallery_labels, fpir_targets):
    """TPIR at the operating threshold meeting each FPIR target.

    Thresholds are the observed top scores; a probe is accepted at score
    >= threshold. TPIR between achievable FPIR levels is linearly
    interpolated.
    """
    fpir, tpir = _open_set_curve(scores, probe_labels, gallery_labels)
    # fpir is non-decreasing over the sweep; keep the best TPIR per level.
    out = {}
    for target in fpir_targets:
        if target >= fpir[-1]:
            out[target] = float(tpir[-1])
            continue
        hi = int(np.searchsorted(fpir, target, side="right"))
        lo = hi - 1
        if fpir[lo] == target:
            # exactly achievable: take the best operating point at this level
            at = tpir[fpir == target]
            out[target] = float(at.max())
        else:
            span = fpir[hi] - fpir[lo]
            frac = (target - fpir[lo]) / span
            out[target] = float(tpir[lo] + frac * (tpir[hi] - tpir[lo]))
    return out


def average_over_splits(reports):
    """Arithmetic mean of per-split reports over a shared metric grid."""
    if not reports:
        raise ValidationError("need at least one report")
    ks = list(reports[0].rank_k)
    targets = list(reports[0].tpir_at_fpir)
    for rep in reports[1:]:
        if list(rep.rank_k) != ks or list(rep.tpir_at_fpir) != targets:
            raise ValidationError("reports use different metric grids")
    rank_k = {k: float(np.mean([r.rank_k[k] for r in reports])) for k in ks}
    tf = {t: float(np.mean([r.tpir_at_fpir[t] for r in reports])) for t in targets}
    counts = {}
    for rep in reports:
        for key, val in rep.counts.items():
            counts[key] = counts.get(key, 0) + val
    return EvalReport(rank_k, tf, counts)


def evaluate_split(scores, probe_labels, gallery_labels, ks=(1, 5, 10),
                   fpir_targets=(0.1, 0.01)) -> EvalReport:
    """Full report for one gallery split."""
    gallery_labels = list(gallery_labels)
    known = [lab for lab in probe_labels if lab in gallery_labels]
    tf = {}
    if fpir_targets:
        tf = tpir_at_fpir(scores, probe_labels, gallery_labels, fpir_targets)
    report = EvalReport(
        rank_k=rank_k_accuracy(scores, probe_labels, gallery_labels, ks),
        tpir_at_fpir=tf,
        counts={
            "probes": len(probe_labels),
            "known_probes": len(known),
            "gallery": len(gallery_labels),
        },
    )
    return report


def report_lines(report: EvalReport):
    """Human-readable table rows plus CSV rows (metric, value)."""
    rows = [(f"rank_{k}", v) for k, v in sorted(report.rank_k.items())]
    rows += [(f"tpir_at_fpir_{t:g}", v) for t, v in
             sorted(report.tpir_at_fpir.items(), reverse=True)]
    rows += [(f"count_{k}", float(v)) for k, v in sorted(report.counts.items())]
    return rows
