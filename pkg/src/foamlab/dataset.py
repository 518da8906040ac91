"""Reproducible image+label dataset builds for the image-to-modulus regressor.

Every sample is a pure function of (config, sample id): the per-sample seed
is a stable hash of the master seed and the id, so builds are bit-identical
across runs and across worker counts. Wall thickness is fixed for the whole
dataset (morphology is the only image signal); the drawn density target maps
to a cell count through the edge-length estimate L ~ 2*H*sqrt(n) and the
realized density is what gets recorded.
"""

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DatasetBuildError,
    GenerationError,
    InvalidConfigError,
    MechanismError,
    PerturbationError,
    SolverError,
)
from .framefem import WallMaterial, homogenized_modulus
from .rng import derive_seed
from .rvegen import RveConfig, generate_rve, png_bytes, rasterize

PAPER_LABEL_RANGE = (282.5, 4587.3)   # MPa, reported dataset modulus envelope
MAX_SAMPLE_ATTEMPTS = 3

SPLIT_NAMES = ("train", "val", "test")
MANIFEST_COLUMNS = ("id", "image", "seed", "n_cells", "mu", "morphology", "label_mpa", "split")


@dataclass(frozen=True)
class DatasetConfig:
    count: int
    out_dir: str
    H: float = 30.0
    t_fixed: float = 0.1142
    mu_range: tuple = (0.061, 0.201)
    morphology_mix: tuple = (0.90, 0.07, 0.03)   # random-convex, concave, regular
    px: int = 512
    split: tuple = (0.70, 0.20, 0.10)
    master_seed: int = 0
    E0: float = 61700.0
    nu0: float = 0.3
    min_sep_factor: float = 0.3

    def validate(self):
        if self.count < 1:
            raise InvalidConfigError(f"count must be >= 1, got {self.count}")
        if abs(sum(self.split) - 1.0) > 1e-9 or any(f < 0 for f in self.split):
            raise InvalidConfigError(f"split fractions must sum to 1, got {self.split}")
        lo, hi = self.mu_range
        if not (0.0 < lo < hi < 1.0):
            raise InvalidConfigError(f"mu_range must satisfy 0 < lo < hi < 1, got {self.mu_range}")
        if abs(sum(self.morphology_mix) - 1.0) > 1e-9 or any(f < 0 for f in self.morphology_mix):
            raise InvalidConfigError(f"morphology mix must sum to 1, got {self.morphology_mix}")
        if self.px < 64:
            raise InvalidConfigError(f"px must be >= 64, got {self.px}")
        if self.t_fixed <= 0:
            raise InvalidConfigError(f"t_fixed must be positive, got {self.t_fixed}")


@dataclass(frozen=True)
class SampleRecord:
    id: int
    image: str
    seed: int
    n_cells: int        # generation target passed to RveConfig
    mu: float           # realized relative density
    morphology: str
    label_mpa: float
    split: str

    def csv_row(self):
        return [
            str(self.id),
            self.image,
            str(self.seed),
            str(self.n_cells),
            "%.12e" % self.mu,
            self.morphology,
            "%.12e" % self.label_mpa,
            self.split,
        ]


@dataclass
class DatasetManifest:
    records: list
    config: DatasetConfig
    checksum: str = ""
    image_hashes: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for r in sorted(self.records, key=lambda r: r.id):
            w.writerow(r.csv_row())
        return buf.getvalue()

    def compute_checksum(self) -> str:
        h = hashlib.sha256()
        h.update(self.to_csv().encode())
        for r in sorted(self.records, key=lambda r: r.id):
            h.update(self.image_hashes[r.id].encode())
        return h.hexdigest()

    def save(self):
        path = os.path.join(self.config.out_dir, "manifest.csv")
        with open(path, "w") as f:
            f.write(self.to_csv())
        sidecar = {
            "config": asdict(self.config),
            "checksum": self.checksum,
            "split_counts": self.split_counts(),
            "image_sha256": {str(k): v for k, v in sorted(self.image_hashes.items())},
        }
        with open(os.path.join(self.config.out_dir, "dataset_config.json"), "w") as f:
            json.dump(sidecar, f, indent=1, sort_keys=True)

    def split_counts(self) -> dict:
        counts = {name: 0 for name in SPLIT_NAMES}
        for r in self.records:
            counts[r.split] += 1
        return counts


def load_manifest(out_dir: str) -> DatasetManifest:
    with open(os.path.join(out_dir, "dataset_config.json")) as f:
        sidecar = json.load(f)
    cfg_d = sidecar["config"]
    for k in ("mu_range", "morphology_mix", "split"):
        cfg_d[k] = tuple(cfg_d[k])
    cfg = DatasetConfig(**cfg_d)
    records = []
    with open(os.path.join(out_dir, "manifest.csv")) as f:
        for row in csv.DictReader(f):
            records.append(SampleRecord(
                id=int(row["id"]),
                image=row["image"],
                seed=int(row["seed"]),
                n_cells=int(row["n_cells"]),
                mu=float(row["mu"]),
                morphology=row["morphology"],
                label_mpa=float(row["label_mpa"]),
                split=row["split"],
            ))
    return DatasetManifest(
        records=records,
        config=cfg,
        checksum=sidecar["checksum"],
        image_hashes={int(k): v for k, v in sidecar["image_sha256"].items()},
    )


# ---------------------------------------------------------------------------
# split assignment
# ---------------------------------------------------------------------------

def split_assign(count: int, fractions=(0.70, 0.20, 0.10), master_seed: int = 0):
    """Deterministic split tags: a seeded permutation cut at the floor sizes;
    the remainder after train and val is test."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidConfigError(f"fractions must sum to 1, got {fractions}")
    rng = np.random.default_rng(derive_seed(master_seed, "split"))
    perm = rng.permutation(count)
    n_train = int(math.floor(fractions[0] * count))
    n_val = int(math.floor(fractions[1] * count))
    tags = [""] * count
    for pos, idx in enumerate(perm):
        if pos < n_train:
            tags[idx] = "train"
        elif pos < n_train + n_val:
            tags[idx] = "val"
        else:
            tags[idx] = "test"
    return tags


# ---------------------------------------------------------------------------
# sample generation
# ---------------------------------------------------------------------------

def cells_for_density(mu: float, H: float, t: float) -> int:
    """Cell count whose expected wall length realizes density mu at fixed t."""
    n = (mu * H / (2.0 * t)) ** 2
    return int(min(max(round(n), 4), 5000))


def sample_rve_config(cfg: DatasetConfig, sample_id: int, attempt: int = 0) -> RveConfig:
    """Deterministic per-sample generation parameters."""
    if attempt == 0:
        seed = derive_seed(cfg.master_seed, sample_id)
    else:
        seed = derive_seed(cfg.master_seed, sample_id, "retry", attempt)
    rng = np.random.default_rng(seed)
    mu_t = rng.uniform(cfg.mu_range[0], cfg.mu_range[1])
    u = rng.random()
    f_conv, f_conc, _f_reg = cfg.morphology_mix
    if u < f_conv:
        morphology = "random-convex"
    elif u < f_conv + f_conc:
        morphology = "concave-perturbed"
    else:
        morphology = "regular-square" if rng.random() < 0.5 else "regular-hex"
    return RveConfig(
        H=cfg.H,
        n_cells=cells_for_density(mu_t, cfg.H, cfg.t_fixed),
        t_fixed=cfg.t_fixed,
        min_sep_factor=cfg.min_sep_factor,
        morphology=morphology,
        concavity_count=1,
        rng_seed=derive_seed(seed, "geom"),
    )


def _build_sample(cfg: DatasetConfig, sample_id: int):
    """Generate, homogenize, and rasterize one sample. Returns
    (record-without-split, png bytes) or raises after bounded retries."""
    material = WallMaterial(E0=cfg.E0, nu0=cfg.nu0)
    last_exc = None
    for attempt in range(MAX_SAMPLE_ATTEMPTS):
        rc = sample_rve_config(cfg, sample_id, attempt)
        try:
            geom = generate_rve(rc)
            label = homogenized_modulus(geom, material)
            img = rasterize(geom, cfg.px)
        except (GenerationError, PerturbationError, MechanismError, SolverError) as exc:
            last_exc = exc
            continue
        data = png_bytes(img)
        rec = SampleRecord(
            id=sample_id,
            image=f"rve_{sample_id:06d}.png",
            seed=rc.rng_seed,
            n_cells=rc.n_cells,
            mu=geom.mu_realized,
            morphology=rc.morphology,
            label_mpa=label,
            split="",
        )
        return rec, data
    raise DatasetBuildError([sample_id], f"sample {sample_id} failed: {last_exc}")


def _sample_worker(args):
    cfg, sample_id = args
    try:
        rec, data = _build_sample(cfg, sample_id)
        return sample_id, rec, data, None
    except DatasetBuildError as exc:
        return sample_id, None, None, str(exc)


def build_dataset(cfg: DatasetConfig, workers: int = 1) -> DatasetManifest:
    """Build the full dataset; bit-identical output for a fixed config."""
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    jobs = [(cfg, i) for i in range(cfg.count)]
    if workers <= 1:
        results = [_sample_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_worker, jobs, chunksize=1))
    results.sort(key=lambda r: r[0])

    failed = [sid for sid, rec, _d, err in results if rec is None]
    if failed:
        raise DatasetBuildError(failed)

    tags = split_assign(cfg.count, cfg.split, cfg.master_seed)
    records = []
    image_hashes = {}
    for sid, rec, data, _err in results:
        rec = SampleRecord(**{**rec.__dict__, "split": tags[sid]})
        with open(os.path.join(cfg.out_dir, rec.image), "wb") as f:
            f.write(data)
        image_hashes[sid] = hashlib.sha256(data).hexdigest()
        records.append(rec)

    manifest = DatasetManifest(records=records, config=cfg, image_hashes=image_hashes)
    manifest.checksum = manifest.compute_checksum()
    manifest.save()
    return manifest


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def label_envelope_check(manifest: DatasetManifest) -> dict:
    """Compare label statistics against the reported modulus envelope.

    Non-fatal: returns a report dict, never raises on out-of-envelope labels.
    """
    if not manifest.records:
        return {"error": "no samples"}
    labels = np.array([r.label_mpa for r in manifest.records])
    lo, hi = PAPER_LABEL_RANGE
    return {
        "n": int(len(labels)),
        "min_mpa": float(labels.min()),
        "max_mpa": float(labels.max()),
        "mean_mpa": float(labels.mean()),
        "envelope_mpa": [lo, hi],
        "frac_below": float(np.mean(labels < lo)),
        "frac_above": float(np.mean(labels > hi)),
    }
