"""File formats: FTE1 binary embeddings, JSONL detections with scene-cut
markers, TOML manifests/configs, gallery template JSON and score CSVs.

FTE1 layout: magic "FTE1", u32 count N, u32 dim D (little endian), then
N*D float32 values; a sidecar "<path>.ids.json" holds the id list.
"""
import json
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .quality import clip_score
from .types import BoundingBox, Detection

MAGIC = b"FTE1"


def ids_path(path):
    return Path(f"{path}.ids.json")


def write_embeddings(path, ids, vectors):
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float32))
    ids = list(ids)
    if len(ids) != vectors.shape[0]:
        raise ValidationError(f"{len(ids)} ids vs {vectors.shape[0]} vectors")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", vectors.shape[0], vectors.shape[1]))
        fh.write(vectors.astype("<f4").tobytes())
    with open(ids_path(path), "w") as fh:
        json.dump(ids, fh)


def read_embeddings(path):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise ValidationError(f"{path}: bad magic {raw[:4]!r}, expected FTE1")
    n, d = struct.unpack("<II", raw[4:12])
    expected = 12 + 4 * n * d
    if len(raw) != expected:
        raise ValidationError(f"{path}: expected {expected} bytes, found {len(raw)}")
    vectors = np.frombuffer(raw[12:], dtype="<f4").reshape(n, d).astype(np.float64)
    with open(ids_path(path)) as fh:
        ids = json.load(fh)
    if len(ids) != n:
        raise ValidationError(f"{ids_path(path)}: {len(ids)} ids for {n} vectors")
    return ids, vectors


def write_detections_jsonl(path, detections, scene_cuts=None):
    """Detections as JSON lines; scene cuts as {video_id, cut_frame} markers."""
    with open(path, "w") as fh:
        for video_id, frames in sorted((scene_cuts or {}).items()):
            for frame in sorted(frames):
                fh.write(json.dumps({"video_id": video_id, "cut_frame": frame}) + "\n")
        for det in detections:
            row = {
                "video_id": det.video_id, "frame": det.frame,
                "x": det.box.x, "y": det.box.y, "w": det.box.w, "h": det.box.h,
                "score": det.score, "embedding_id": det.embedding_id,
            }
            if det.truth_id is not None:
                row["truth_id"] = det.truth_id
            fh.write(json.dumps(row) + "\n")


def read_detections_jsonl(path, score_floor=0.0, known_embedding_ids=None):
    """Parse detections and scene-cut markers; malformed rows get file:line
    diagnostics. Scores are floored then clipped into (0, 1)."""
    detections = []
    cuts = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON ({exc})") from exc
            if "cut_frame" in row:
                cuts.setdefault(row["video_id"], []).append(int(row["cut_frame"]))
                continue
            try:
                score = float(row["score"])
                if not (0.0 < score <= 1.0):
                    raise ValidationError(f"score {score} outside (0, 1]")
                if score < score_floor:
                    continue
                emb_id = int(row["embedding_id"])
                if known_embedding_ids is not None and emb_id not in known_embedding_ids:
                    raise ValidationError(f"dangling embedding reference {emb_id}")
                detections.append(Detection(
                    video_id=str(row["video_id"]),
                    frame=int(row["frame"]),
                    box=BoundingBox(float(row["x"]), float(row["y"]),
                                    float(row["w"]), float(row["h"])),
                    score=clip_score(score),
                    embedding_id=emb_id,
                    truth_id=row.get("truth_id"),
                ))
            except (KeyError, TypeError, ValueError, ValidationError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return detections, {k: sorted(v) for k, v in cuts.items()}


PROTOCOLS = (
    "surveillance_single",
    "surveillance_booking",
    "surveillance_surveillance",
    "multishot_search",
)


@dataclass
class DatasetManifest:
    root: Path
    protocol: str
    detections: Path
    probe_embeddings: Path
    gallery_embeddings: Path
    gallery_splits: list  # paths to gallery template JSON files
    background_embeddings: Path | None = None
    anchors: Path | None = None
    filtering: bool = True
    score_floor: float = 0.0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValidationError(f"unknown protocol {self.protocol!r}")
        for p in [self.detections, self.probe_embeddings, self.gallery_embeddings,
                  *self.gallery_splits, self.background_embeddings, self.anchors]:
            if p is not None and not Path(p).exists():
                raise ValidationError(f"manifest references missing file {p}")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    root = path.parent

    def resolve(key, table, required=True):
        val = table.get(key)
        if val is None:
            if required:
                raise ValidationError(f"{path}: missing manifest key {key!r}")
            return None
        return root / val

    emb = data.get("embeddings", {})
    gal = data.get("gallery", {})
    opts = data.get("options", {})
    return DatasetManifest(
        root=root,
        protocol=data.get("protocol", ""),
        detections=resolve("detections", data),
        probe_embeddings=resolve("probe", emb),
        gallery_embeddings=resolve("embeddings", gal),
        gallery_splits=[root / p for p in gal.get("splits", [])],
        background_embeddings=resolve("background", emb, required=False),
        anchors=resolve("anchors", data, required=False),
        filtering=bool(opts.get("filtering", True)),
        score_floor=float(opts.get("score_floor", 0.0)),
    )


def load_gallery_split(path):
    """[{label, ids, scores}] template definitions for one gallery split."""
    with open(path) as fh:
        data = json.load(fh)
    templates = data.get("templates")
    if not isinstance(templates, list):
        raise ValidationError(f"{path}: expected a top-level 'templates' list")
    labels = [t.get("label") for t in templates]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{path}: gallery labels must be unique within a split")
    return templates


def write_scores_csv(path, scores, probe_labels, gallery_labels):
    scores = np.atleast_2d(scores)
    with open(path, "w") as fh:
        fh.write("probe," + ",".join(str(g) for g in gallery_labels) + "\n")
        for lab, row in zip(probe_labels, scores):
            fh.write(str(lab) + "," + ",".join(f"{v:.12g}" for v in row) + "\n")


def write_report_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("metric,value\n")
        for name, value in rows:
            fh.write(f"{name},{value:.12g}\n")


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return json.dumps(str(v))


def dump_toml(data, path):
    """Minimal TOML writer for the flat table-of-scalars configs we echo."""
    lines = []
    tables = []
    for key, val in data.items():
        if isinstance(val, dict):
            tables.append((key, val))
        else:
            lines.append(f"{key} = {_toml_value(val)}")
    for name, table in tables:
        lines.append(f"\n[{name}]")
        for key, val in table.items():
            lines.append(f"{key} = {_toml_value(val)}")
    Path(path).write_text("\n".join(lines) + "\n")
