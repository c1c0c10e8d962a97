"""Deterministic synthetic scenario generator.

Identities are unit prototype vectors; videos are per-identity box
trajectories (constant velocity within a shot, re-randomized at shot
cuts); embeddings are the prototype plus Gaussian noise whose scale is
coupled to a synthetic detection score, then re-normalized. Every stream
is seeded per entity, so output is byte-identical per (seed, config).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .types import BoundingBox, Detection

ARENA_WIDTH = 1000.0
BOX_SIZE = 60.0
LANE_HEIGHT = 2.5 * BOX_SIZE  # keeps identities spatially disjoint
MAX_SPEED = 3.0


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    n_identities: int = 3
    embedding_dim: int = 16
    frames: int = 100
    boxes_per_frame: int | None = None  # cap on identities visible per frame
    noise_base: float = 0.0  # sigma_0
    quality_noise_coupling: float = 0.0  # kappa
    shot_cut_frames: tuple = ()

    def __post_init__(self):
        if self.embedding_dim < 2:
            raise ValidationError(f"embedding_dim must be >= 2, got {self.embedding_dim}")
        if self.noise_base < 0:
            raise ValidationError(f"noise_base must be >= 0, got {self.noise_base}")
        if self.n_identities < 1 or self.frames < 1:
            raise ValidationError("need at least one identity and one frame")


@dataclass
class Scenario:
    config: ScenarioConfig
    detections: list  # Detection, with truth_id set
    embeddings: np.ndarray  # (M, D), row index == embedding_id
    prototypes: np.ndarray  # (n_identities, D)
    scene_cuts: tuple
    video_id: str = "synth0"

    def truth_boxes(self):
        """(video_id, frame) -> [(box, identity)] index for evaluation."""
        idx = {}
        for det in self.detections:
            idx.setdefault((det.video_id, det.frame), []).append((det.box, det.truth_id))
        return idx


def identity_label(i):
    return f"id{i:03d}"


def gen_gallery_embeddings(prototypes, per_identity, noise, seed):
    """Gallery samples per identity: lightly-noised, re-normalized prototypes
    with high synthetic detection scores."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 23)))
    vectors, scores, owners = [], [], []
    for ident, proto in enumerate(prototypes):
        for _ in range(per_identity):
            vec = proto + noise * rng.standard_normal(len(proto))
            vectors.append(vec / np.linalg.norm(vec))
            scores.append(float(rng.uniform(0.85, 0.999)))
            owners.append(ident)
    return np.array(vectors), scores, owners


def gen_background_embeddings(n, dim, seed):
    """Random unit vectors standing in for an external negative face set."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 31)))
    vecs = rng.standard_normal((n, dim))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def gen_prototypes(n, dim, seed, max_cosine=0.5, retries=200):
    """n unit vectors with pairwise cosine below max_cosine.

    Rejection-sampled; for n <= dim an orthogonalization fallback (QR)
    guarantees success. Raises when separation is unattainable.
    """
    if n < 1:
        raise ValidationError("need at least one prototype")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 17)))
    for _ in range(retries):
        protos = rng.standard_normal((n, dim))
        protos /= np.linalg.norm(protos, axis=1, keepdims=True)
        gram = np.abs(protos @ protos.T - np.eye(n))
        if gram.max() < max_cosine:
            return protos
    if n <= dim:
        q, _ = np.linalg.qr(rng.standard_normal((dim, n)))
        return q.T.copy()
    raise ValidationError(
        f"could not place {n} prototypes in {dim} dimensions below cosine {max_cosine}"
    )


def _bounce(x, vx, lo, hi):
    x += vx
    if x < lo:
        x, vx = 2 * lo - x, -vx
    elif x > hi:
        x, vx = 2 * hi - x, -vx
    return x, vx


def gen_scenario(cfg: ScenarioConfig) -> Scenario:
    """Generate one single-video scenario with ground truth."""
    root = np.random.SeedSequence(entropy=cfg.seed)
    identity_ss = root.spawn(cfg.n_identities)
    protos = gen_prototypes(cfg.n_identities, cfg.embedding_dim, cfg.seed)

    cuts = tuple(sorted(cfg.shot_cut_frames))
    visible = cfg.boxes_per_frame or cfg.n_identities
    detections = []
    embeddings = []
    per_frame = [[] for _ in range(cfg.frames)]
    for ident in range(cfg.n_identities):
        rng = np.random.default_rng(identity_ss[ident])
        lane_y = 20.0 + ident * LANE_HEIGHT
        x = rng.uniform(0.0, ARENA_WIDTH - BOX_SIZE)
        vx = rng.uniform(-MAX_SPEED, MAX_SPEED)
        for frame in range(cfg.frames):
            if frame in cuts:
                x = rng.uniform(0.0, ARENA_WIDTH - BOX_SIZE)
                vx = rng.uniform(-MAX_SPEED, MAX_SPEED)
            elif frame > 0:
                x, vx = _bounce(x, vx, 0.0, ARENA_WIDTH - BOX_SIZE)
            if ident >= visible:
                continue
            score = rng.uniform(0.3, 0.999)
            sigma = cfg.noise_base * (1.0 + cfg.quality_noise_coupling * (1.0 - score))
            vec = protos[ident] + sigma * rng.standard_normal(cfg.embedding_dim)
            vec /= np.linalg.norm(vec)
            per_frame[frame].append((ident, frame, x, lane_y, score, vec))
    for frame_dets in per_frame:
        for ident, frame, x, y, score, vec in frame_dets:
            detections.append(Detection(
                video_id="synth0",
                frame=frame,
                box=BoundingBox(x, y, BOX_SIZE, BOX_SIZE),
                score=float(score),
                embedding_id=len(embeddings),
                truth_id=identity_label(ident),
            ))
            embeddings.append(vec)
    return Scenario(
        config=cfg,
        detections=detections,
        embeddings=np.array(embeddings),
        prototypes=protos,
        scene_cuts=cuts,
        video_id="synth0",
    )
