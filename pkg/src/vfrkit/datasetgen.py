"""Write a complete synthetic dataset (manifest + every referenced file)
in the exact formats the CLI ingests."""
import json
from pathlib import Path

import numpy as np

from . import io as vio
from .synth import (Scenario, ScenarioConfig, gen_background_embeddings,
                    gen_gallery_embeddings, gen_scenario, identity_label)


def write_synth_dataset(out_dir, cfg: ScenarioConfig, protocol="surveillance_single",
                        unknown_identities=0, gallery_per_identity=5,
                        gallery_noise=0.02, background_size=50,
                        filtering=True, score_floor=0.0) -> Path:
    """Generate a scenario and lay it out as an ingestible dataset.

    The last `unknown_identities` identities are held out of both gallery
    splits (open-set unknowns); the remaining ones alternate between G1
    and G2. Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scn = gen_scenario(cfg)

    vio.write_embeddings(out / "probe.fte1",
                         list(range(len(scn.embeddings))), scn.embeddings)
    vio.write_detections_jsonl(out / "detections.jsonl", scn.detections,
                               {scn.video_id: list(scn.scene_cuts)} if scn.scene_cuts else None)

    gal_vecs, gal_scores, gal_owner = gen_gallery_embeddings(
        scn.prototypes, gallery_per_identity, gallery_noise, cfg.seed)
    gal_ids = [f"g{i}" for i in range(len(gal_vecs))]
    vio.write_embeddings(out / "gallery.fte1", gal_ids, gal_vecs)

    known = cfg.n_identities - unknown_identities
    if known < 1:
        raise ValueError("at least one identity must stay in the gallery")
    split_members = [[i for i in range(known) if i % 2 == s] for s in (0, 1)]
    if not split_members[1]:  # tiny scenario: single shared split
        split_members = [split_members[0], split_members[0]]
    split_paths = []
    for s, members in enumerate(split_members, start=1):
        templates = []
        for ident in members:
            rows = [r for r, owner in enumerate(gal_owner) if owner == ident]
            templates.append({
                "label": identity_label(ident),
                "ids": [gal_ids[r] for r in rows],
                "scores": [gal_scores[r] for r in rows],
            })
        path = out / f"gallery_g{s}.json"
        with open(path, "w") as fh:
            json.dump({"templates": templates}, fh, indent=1)
        split_paths.append(path.name)

    lines = [
        f'protocol = "{protocol}"',
        'detections = "detections.jsonl"',
    ]
    if protocol == "multishot_search":
        anchors = []
        seen = set()
        for det in scn.detections:
            if det.truth_id not in seen:
                seen.add(det.truth_id)
                anchors.append({"video_id": det.video_id,
                                "embedding_id": det.embedding_id,
                                "truth_id": det.truth_id})
        with open(out / "anchors.json", "w") as fh:
            json.dump({"anchors": anchors}, fh, indent=1)
        bg = gen_background_embeddings(background_size, cfg.embedding_dim, cfg.seed)
        vio.write_embeddings(out / "background.fte1",
                             [f"b{i}" for i in range(len(bg))], bg)
        lines.append('anchors = "anchors.json"')
    lines += [
        "",
        "[embeddings]",
        'probe = "probe.fte1"',
    ]
    if protocol == "multishot_search":
        lines.append('background = "background.fte1"')
    lines += [
        "",
        "[gallery]",
        'embeddings = "gallery.fte1"',
        "splits = [" + ", ".join(f'"{p}"' for p in split_paths) + "]",
        "",
        "[options]",
        f"filtering = {'true' if filtering else 'false'}",
        f"score_floor = {score_floor!r}",
    ]
    manifest_path = out / "manifest.toml"
    manifest_path.write_text("\n".join(lines) + "\n")
    return manifest_path
