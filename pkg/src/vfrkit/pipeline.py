"""End-to-end orchestration: ingest -> associate -> aggregate -> match -> eval.

Single-shot surveillance protocols associate faces with the SORT tracker
(one probe template per tracklet); the multishot search protocol runs the
one-shot-SVM association per anchor. Matching and evaluation are shared.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import json
import numpy as np

from . import io as vio
from .aggregate import AggregateConfig
from .errors import ValidationError
from .evaluation import EvalReport, average_over_splits, evaluate_split, resolve_template_identity
from .similarity import SimilarityConfig, VARIANTS, build_representation, score_matrix
from .tfa import TfaConfig, tfa_run
from .track_sort import SortConfig, filter_tracklets, sort_track
from .types import Template


def worker_count():
    return max(1, int(os.environ.get("VFRKIT_WORKERS", "1")))


@dataclass
class Dataset:
    manifest: vio.DatasetManifest
    detections: list
    scene_cuts: dict
    probe_ids: list
    probe_embeddings: np.ndarray
    gallery_ids: list
    gallery_embeddings: np.ndarray
    gallery_splits: list  # list of template-definition lists
    background_embeddings: np.ndarray | None = None
    anchors: list = field(default_factory=list)


def ingest(manifest: vio.DatasetManifest) -> Dataset:
    """Load and validate everything the manifest references."""
    probe_ids, probe_emb = vio.read_embeddings(manifest.probe_embeddings)
    gallery_ids, gallery_emb = vio.read_embeddings(manifest.gallery_embeddings)
    if probe_emb.shape[1] != gallery_emb.shape[1]:
        raise ValidationError(
            f"probe dimension {probe_emb.shape[1]} != gallery dimension {gallery_emb.shape[1]}"
        )
    detections, cuts = vio.read_detections_jsonl(
        manifest.detections, score_floor=manifest.score_floor,
        known_embedding_ids=set(probe_ids),
    )
    bg = None
    if manifest.background_embeddings is not None:
        _, bg = vio.read_embeddings(manifest.background_embeddings)
        if bg.shape[1] != probe_emb.shape[1]:
            raise ValidationError("background embedding dimension mismatch")
    anchors = []
    if manifest.anchors is not None:
        with open(manifest.anchors) as fh:
            anchors = json.load(fh)["anchors"]
    splits = [vio.load_gallery_split(p) for p in manifest.gallery_splits]
    return Dataset(manifest, detections, cuts, probe_ids, probe_emb,
                   gallery_ids, gallery_emb, splits, bg, anchors)


def _row_lookup(ids):
    return {eid: row for row, eid in enumerate(ids)}


def build_probe_templates(ds: Dataset, sort_cfg: SortConfig, tfa_cfg: TfaConfig):
    """Association stage: templates from tracklets or from TFA anchors."""
    rows = _row_lookup(ds.probe_ids)
    by_video = {}
    for det in ds.detections:
        by_video.setdefault(det.video_id, []).append(det)
    videos = sorted(by_video)

    if ds.manifest.protocol == "multishot_search":
        if not ds.anchors:
            raise ValidationError("multishot_search protocol requires an anchors file")

        def run_anchor(anchor):
            video = anchor["video_id"]
            dets = by_video.get(video, [])
            idx = next((i for i, d in enumerate(dets)
                        if d.embedding_id == anchor["embedding_id"]), None)
            if idx is None:
                raise ValidationError(f"anchor embedding {anchor['embedding_id']} "
                                      f"not detected in video {video!r}")
            emb = ds.probe_embeddings[[rows[d.embedding_id] for d in dets]]
            return tfa_run(dets, emb, idx, ds.background_embeddings, tfa_cfg,
                           scene_cuts=ds.scene_cuts.get(video, ()))

        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            return list(pool.map(run_anchor, ds.anchors))

    def run_video(video):
        tracklets = filter_tracklets(sort_track(by_video[video], sort_cfg), sort_cfg)
        return [Template(
            samples=ds.probe_embeddings[[rows[d.embedding_id] for d in t.detections]],
            qualities=[d.score for d in t.detections],
            detections=t.detections,
        ) for t in tracklets]

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        per_video = list(pool.map(run_video, videos))
    return [tpl for group in per_video for tpl in group]


def build_gallery_templates(ds: Dataset, split):
    rows = _row_lookup(ds.gallery_ids)
    templates = []
    for entry in split:
        try:
            sample_rows = [rows[i] for i in entry["ids"]]
        except KeyError as exc:
            raise ValidationError(f"gallery template {entry.get('label')!r} references "
                                  f"unknown embedding {exc}") from exc
        templates.append(Template(
            samples=ds.gallery_embeddings[sample_rows],
            qualities=entry.get("scores", [0.9] * len(sample_rows)),
            label=str(entry["label"]),
        ))
    return templates


@dataclass
class PipelineResult:
    probe_templates: list
    probe_labels: list
    split_scores: list  # (scores, probe_labels, gallery_labels) per split
    split_reports: list
    report: EvalReport


def run_pipeline(manifest: vio.DatasetManifest, sim_cfg: SimilarityConfig,
                 agg_cfg: AggregateConfig = AggregateConfig(),
                 sort_cfg: SortConfig = SortConfig(),
                 tfa_cfg: TfaConfig = TfaConfig(),
                 ks=(1, 5, 10), fpir_targets=(0.1, 0.01)) -> PipelineResult:
    ds = ingest(manifest)
    sort_cfg = SortConfig(**{**sort_cfg.__dict__, "filtering": manifest.filtering})
    probes = build_probe_templates(ds, sort_cfg, tfa_cfg)
    if not probes:
        raise ValidationError("association produced no probe templates")

    truth = {}
    for det in ds.detections:
        if det.truth_id is not None:
            truth.setdefault((det.video_id, det.frame), []).append((det.box, det.truth_id))
    probe_labels = [resolve_template_identity(t.detections, truth) for t in probes]

    # Short tracklets are expected in pipeline mode; truncate d, don't fail.
    agg_cfg = AggregateConfig(**{**agg_cfg.__dict__, "strict": False})
    probe_reps = [build_representation(t, sim_cfg, agg_cfg) for t in probes]

    galleries = [build_gallery_templates(ds, split) for split in ds.gallery_splits]
    # TPIR@FPIR needs unknown probes in every split; otherwise report CMC only.
    if not all(any(lab not in {t.label for t in gallery} for lab in probe_labels)
               for gallery in galleries):
        fpir_targets = ()
    split_scores, split_reports = [], []
    for gallery in galleries:
        gallery_reps = [build_representation(t, sim_cfg, agg_cfg) for t in gallery]
        gallery_labels = [t.label for t in gallery]
        scores = score_matrix(probe_reps, gallery_reps, sim_cfg)
        split_scores.append((scores, list(probe_labels), gallery_labels))
        split_reports.append(evaluate_split(scores, probe_labels, gallery_labels,
                                            ks, fpir_targets))
    return PipelineResult(probes, probe_labels, split_scores, split_reports,
                          average_over_splits(split_reports))
