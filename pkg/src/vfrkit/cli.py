"""Batch command-line front-end.

Subcommands: synth, track, associate, aggregate, match, eval, pipeline.
Exit codes: 0 success, 2 validation failure, 3 numeric failure,
4 convergence failure, 1 anything else.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as vio
from .aggregate import AggregateConfig
from .datasetgen import write_synth_dataset
from .errors import ConvergenceError, NumericError, ValidationError
from .evaluation import evaluate_split, report_lines
from .pipeline import build_probe_templates, ingest, run_pipeline
from .quality import QualityConfig
from .similarity import (SimilarityConfig, TemplateRepresentation, VARIANTS,
                         build_representation, score_matrix)
from .aggregate import Exemplar, Subspace
from .svm import SvmConfig
from .synth import ScenarioConfig
from .tfa import TfaConfig
from .track_sort import SortConfig

EXIT_VALIDATION, EXIT_NUMERIC, EXIT_CONVERGENCE = 2, 3, 4


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return vio.tomllib.load(fh)


def _cfg_from_table(cls, table, **overrides):
    table = dict(table or {})
    table.update({k: v for k, v in overrides.items() if v is not None})
    fields = cls.__dataclass_fields__
    unknown = set(table) - set(fields)
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    for key in ("quality", "svm"):
        if key in table and isinstance(table[key], dict):
            table[key] = _cfg_from_table(QualityConfig if key == "quality" else SvmConfig,
                                         table[key])
    for key, val in table.items():
        if isinstance(val, list):
            table[key] = tuple(val)
    return cls(**table)


def _similarity_config(conf, variant=None):
    name = variant or conf.get("variant")
    if name:
        if name not in VARIANTS:
            raise ValidationError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}")
        base = VARIANTS[name]
        lam = conf.get("lambda_fusion")
        if lam is not None:
            base = SimilarityConfig(base.exemplar_kind, base.subspace_kind,
                                    base.metric_kind, float(lam))
        return base, name
    table = {k: v for k, v in conf.items() if k in SimilarityConfig.__dataclass_fields__}
    cfg = SimilarityConfig(**table)
    return cfg, "custom"


def cmd_synth(args):
    cfg = ScenarioConfig(
        seed=args.seed, n_identities=args.identities, embedding_dim=args.dim,
        frames=args.frames, noise_base=args.noise, quality_noise_coupling=args.coupling,
        shot_cut_frames=tuple(args.cut or ()),
    )
    manifest = write_synth_dataset(
        args.out, cfg, protocol=args.protocol, unknown_identities=args.unknowns,
        gallery_per_identity=args.gallery_per_id, filtering=not args.no_filtering,
        score_floor=args.score_floor,
    )
    print(f"wrote {manifest}")


def _templates_json(templates):
    return {"templates": [{
        "video_id": t.detections[0].video_id if t.detections else None,
        "ids": [d.embedding_id for d in t.detections],
        "scores": [d.score for d in t.detections],
        "resolved_label": t.label,
    } for t in templates]}


def cmd_track(args):
    ds = ingest(vio.load_manifest(args.manifest))
    sort_cfg = _cfg_from_table(SortConfig, _load_config(args.config).get("sort"),
                               filtering=ds.manifest.filtering)
    templates = build_probe_templates(ds, sort_cfg, TfaConfig())
    Path(args.out).write_text(json.dumps(_templates_json(templates), indent=1))
    print(f"{len(templates)} tracklet templates -> {args.out}")


def cmd_associate(args):
    ds = ingest(vio.load_manifest(args.manifest))
    conf = _load_config(args.config)
    tfa_cfg = _cfg_from_table(TfaConfig, conf.get("tfa"))
    if ds.manifest.protocol != "multishot_search":
        raise ValidationError("associate requires a multishot_search manifest")
    templates = build_probe_templates(ds, SortConfig(), tfa_cfg)
    Path(args.out).write_text(json.dumps(_templates_json(templates), indent=1))
    print(f"{len(templates)} associated templates -> {args.out}")


def _load_templates_for_aggregate(ds, templates_path):
    from .types import Template
    rows = {eid: i for i, eid in enumerate(ds.probe_ids)}
    with open(templates_path) as fh:
        data = json.load(fh)
    out = []
    for entry in data["templates"]:
        out.append(Template(
            samples=ds.probe_embeddings[[rows[i] for i in entry["ids"]]],
            qualities=entry["scores"],
            label=entry.get("resolved_label"),
        ))
    return out


def cmd_aggregate(args):
    ds = ingest(vio.load_manifest(args.manifest))
    conf = _load_config(args.config)
    sim_cfg, _ = _similarity_config(conf.get("similarity", {}), args.variant)
    agg_cfg = _cfg_from_table(AggregateConfig, conf.get("aggregate"), strict=False)
    templates = _load_templates_for_aggregate(ds, args.templates)
    reps = [build_representation(t, sim_cfg, agg_cfg) for t in templates]
    _save_representations(args.out, reps, sim_cfg)
    print(f"{len(reps)} representations -> {args.out}")


def _save_representations(path, reps, sim_cfg):
    data = {
        "exemplars": np.array([r.exemplar.vector for r in reps]),
        "labels": np.array([r.label if r.label is not None else "" for r in reps]),
        "exemplar_kind": np.array(sim_cfg.exemplar_kind),
        "subspace_kind": np.array(sim_cfg.subspace_kind),
    }
    if sim_cfg.subspace_kind != "none":
        data["bases"] = np.array([r.subspace.basis for r in reps])
        data["spectra"] = np.array([r.subspace.spectrum for r in reps])
    np.savez(path, **data)


def _load_representations(path):
    data = np.load(path, allow_pickle=False)
    ex_kind = str(data["exemplar_kind"])
    sub_kind = str(data["subspace_kind"])
    reps = []
    for i, vec in enumerate(data["exemplars"]):
        sub = None
        if sub_kind != "none":
            sub = Subspace(data["bases"][i], data["spectra"][i], sub_kind)
        label = str(data["labels"][i]) or None
        reps.append(TemplateRepresentation(Exemplar(vec, ex_kind), sub, label))
    return reps, ex_kind, sub_kind


def cmd_match(args):
    probes, ex_kind, sub_kind = _load_representations(args.probes)
    gallery, _, _ = _load_representations(args.gallery)
    cfg = SimilarityConfig(ex_kind, sub_kind, args.metric, args.lam)
    scores = score_matrix(probes, gallery, cfg)
    vio.write_scores_csv(args.out, scores,
                         [r.label or f"probe{i}" for i, r in enumerate(probes)],
                         [r.label for r in gallery])
    print(f"{scores.shape[0]}x{scores.shape[1]} scores -> {args.out}")


def cmd_eval(args):
    with open(args.scores) as fh:
        header = fh.readline().strip().split(",")
        gallery_labels = header[1:]
        probe_labels, rows = [], []
        for line in fh:
            parts = line.strip().split(",")
            probe_labels.append(parts[0] if parts[0] != "None" else None)
            rows.append([float(v) for v in parts[1:]])
    report = evaluate_split(np.array(rows), probe_labels, gallery_labels,
                            ks=tuple(args.rank), fpir_targets=tuple(args.fpir))
    rows = report_lines(report)
    vio.write_report_csv(args.out, rows)
    for name, value in rows:
        print(f"{name:>24s}  {value:.4f}")


def cmd_pipeline(args):
    conf = _load_config(args.config)
    manifest_path = Path(args.manifest or conf.get("manifest", ""))
    if not str(manifest_path):
        raise ValidationError("pipeline needs --manifest or a manifest key in --config")
    out = Path(args.out or conf.get("out", "pipeline_out"))
    out.mkdir(parents=True, exist_ok=True)

    manifest = vio.load_manifest(manifest_path)
    filtering = conf.get("filtering")
    if args.no_filtering:
        filtering = False
    if filtering is not None:
        manifest.filtering = bool(filtering)
    sim_cfg, variant = _similarity_config(conf.get("similarity", {}), args.variant)
    agg_cfg = _cfg_from_table(AggregateConfig, conf.get("aggregate"))
    sort_cfg = _cfg_from_table(SortConfig, conf.get("sort"))
    tfa_cfg = _cfg_from_table(TfaConfig, conf.get("tfa"))
    eval_conf = conf.get("eval", {})
    ks = tuple(eval_conf.get("ranks", (1, 5, 10)))
    fpir_targets = tuple(eval_conf.get("fpir", (0.1, 0.01)))

    result = run_pipeline(manifest, sim_cfg, agg_cfg, sort_cfg, tfa_cfg, ks, fpir_targets)

    for i, (scores, plabels, glabels) in enumerate(result.split_scores, start=1):
        vio.write_scores_csv(out / f"scores_g{i}.csv", scores, plabels, glabels)
    rows = report_lines(result.report)
    vio.write_report_csv(out / "report.csv", rows)

    echo = {
        "manifest": str(manifest_path.resolve()),
        "out": str(out.resolve()),
        "filtering": manifest.filtering,
        "similarity": {
            "variant": variant,
            "lambda_fusion": sim_cfg.lambda_fusion,
        } if variant != "custom" else {
            "exemplar_kind": sim_cfg.exemplar_kind,
            "subspace_kind": sim_cfg.subspace_kind,
            "metric_kind": sim_cfg.metric_kind,
            "lambda_fusion": sim_cfg.lambda_fusion,
        },
        "aggregate": {
            "subspace_dim": agg_cfg.subspace_dim, "center": agg_cfg.center,
            "quality": {"t": agg_cfg.quality.t, "q": agg_cfg.quality.q},
        },
        "sort": {k: getattr(sort_cfg, k) for k in SortConfig.__dataclass_fields__},
        "tfa": {
            "k": tfa_cfg.k, "pre_iou_min": tfa_cfg.pre_iou_min, "gamma": tfa_cfg.gamma,
            "iterations": tfa_cfg.iterations, "strict_eq4": tfa_cfg.strict_eq4,
            "svm": {"C": tfa_cfg.svm.C, "tolerance": tfa_cfg.svm.tolerance,
                    "max_iterations": tfa_cfg.svm.max_iterations},
        },
        "eval": {"ranks": list(ks), "fpir": list(fpir_targets)},
    }
    # The echo nests [aggregate.quality] and [tfa.svm]; flatten for the
    # minimal TOML writer.
    flat = {}
    for key, val in echo.items():
        if isinstance(val, dict):
            scalars = {k: v for k, v in val.items() if not isinstance(v, dict)}
            flat[key] = scalars
            for sub, subval in val.items():
                if isinstance(subval, dict):
                    flat[f"{key}.{sub}"] = subval
        else:
            flat[key] = val
    vio.dump_toml(flat, out / "config_echo.toml")

    print(f"variant {variant}: {len(result.probe_templates)} probe templates")
    for name, value in rows:
        print(f"{name:>24s}  {value:.4f}")


def build_parser():
    parser = argparse.ArgumentParser(prog="vfrkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--identities", type=int, default=5)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--coupling", type=float, default=0.0)
    p.add_argument("--cut", type=int, action="append")
    p.add_argument("--unknowns", type=int, default=0)
    p.add_argument("--gallery-per-id", type=int, default=5)
    p.add_argument("--protocol", choices=vio.PROTOCOLS, default="surveillance_single")
    p.add_argument("--no-filtering", action="store_true")
    p.add_argument("--score-floor", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("track", help="single-shot association (SORT)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("associate", help="multi-shot association (one-shot SVM)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_associate)

    p = sub.add_parser("aggregate", help="templates -> representations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--templates", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=sorted(VARIANTS))
    p.add_argument("--config")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("match", help="representations -> score matrix")
    p.add_argument("--probes", required=True)
    p.add_argument("--gallery", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metric", choices=["PM", "VPM"], default="VPM")
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", help="score matrix -> metrics report")
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rank", type=int, action="append", default=None)
    p.add_argument("--fpir", type=float, action="append", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="full run: ingest -> eval")
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.add_argument("--variant", choices=sorted(VARIANTS))
    p.add_argument("--config")
    p.add_argument("--no-filtering", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "eval":
            args.rank = args.rank or [1, 5, 10]
            args.fpir = args.fpir or [0.1, 0.01]
        args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
