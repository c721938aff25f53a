"""Seeded procedural corpus: ring "biscuits" on a dark background.

One in-spec class plus three defect classes:

* ``OK`` — a textured annulus with mild per-sample jitter in center,
  radii, tone and texture.
* ``NOT_COMPLETE`` — the same annulus with a random angular sector removed.
* ``STRANGE_OBJECT`` — the OK render plus a small bright blob that does not
  belong to the ring texture.
* ``COLOR_DEFECT`` — the OK render with a localized green-channel shift on
  a disc-shaped patch of the ring.

Every sample is a pure function of (kind, seed, params). The base annulus
is drawn from the stream keyed by ``derive_seed(seed, "base")`` and defect
placement from ``derive_seed(seed, "defect")``, so a defect render differs
from the same-seed OK render only inside the defect region.

Dataset-level seeding: sample i (in manifest order) uses
``seed_i = master ^ splitmix64(i)`` — see :mod:`reconad.rng`.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imagecore import Image, save_image
from .rng import derive_seed, generator, sample_seed

MANIFEST_HEADER = ["sample_id", "path", "label", "split", "seed"]
SPLITS = ("train", "val", "test")


class DefectKind(enum.Enum):
    OK = "OK"
    NOT_COMPLETE = "NOT_COMPLETE"
    STRANGE_OBJECT = "STRANGE_OBJECT"
    COLOR_DEFECT = "COLOR_DEFECT"


NOK_KINDS = (DefectKind.NOT_COMPLETE, DefectKind.STRANGE_OBJECT, DefectKind.COLOR_DEFECT)


@dataclass(frozen=True)
class SynthParams:
    """Generator knobs; radii are fractions of the half image size."""

    image_size: int = 256
    ring_outer_radius: float = 0.78
    ring_inner_radius: float = 0.42
    texture_amplitude: float = 0.12
    background_level: float = 0.05
    defect_magnitude: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.image_size < 8:
            raise ValueError("image_size must be >= 8")
        if not 0.0 < self.ring_outer_radius <= 1.0:
            raise ValueError("ring_outer_radius must be in (0, 1]")
        if not 0.0 < self.ring_inner_radius < self.ring_outer_radius:
            raise ValueError("ring_inner_radius must be positive and < outer")
        for name in ("texture_amplitude", "background_level"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 < self.defect_magnitude <= 1.0:
            raise ValueError("defect_magnitude must be in (0, 1]")


@dataclass(frozen=True)
class ManifestRecord:
    sample_id: str
    path: str
    label: DefectKind
    split: str
    seed: int


@dataclass
class DatasetManifest:
    records: list[ManifestRecord] = field(default_factory=list)

    def by_split(self, split: str) -> list[ManifestRecord]:
        return [r for r in self.records if r.split == split]

    def label_counts(self, split: str) -> dict[DefectKind, int]:
        counts: dict[DefectKind, int] = {}
        for r in self.by_split(split):
            counts[r.label] = counts.get(r.label, 0) + 1
        return counts

    def validate(self) -> None:
        ids = [r.sample_id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("sample_ids are not unique")
        for r in self.records:
            if r.split not in SPLITS:
                raise ValueError(f"unknown split {r.split!r}")
            if r.split in ("train", "val") and r.label is not DefectKind.OK:
                raise ValueError(f"{r.split} split contains NOK sample {r.sample_id}")

    def save_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANIFEST_HEADER)
            for r in self.records:
                writer.writerow([r.sample_id, r.path, r.label.value, r.split, r.seed])

    @classmethod
    def load_csv(cls, path: str | Path) -> "DatasetManifest":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != MANIFEST_HEADER:
                raise ValueError(f"unexpected manifest header {header}")
            records = [
                ManifestRecord(row[0], row[1], DefectKind(row[2]), row[3], int(row[4]))
                for row in reader
            ]
        manifest = cls(records)
        manifest.validate()
        return manifest


@dataclass(frozen=True)
class DatasetCounts:
    train_ok: int
    val_ok: int
    test_ok: int
    test_nok: int

    def __post_init__(self) -> None:
        for name in ("train_ok", "val_ok", "test_ok", "test_nok"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def largest_remainder(total: int, fractions: tuple[float, ...]) -> list[int]:
    """Integer apportionment of `total` by `fractions` (must sum to 1).

    Floors every share, then hands leftover units to the largest fractional
    remainders; remainder ties break toward the lower index.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions sum to {sum(fractions)}, expected 1")
    raw = [total * f for f in fractions]
    counts = [int(np.floor(x)) for x in raw]
    leftover = total - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def build_manifest(
    counts: DatasetCounts,
    nok_ratio: tuple[float, float, float],
    master_seed: int,
) -> DatasetManifest:
    """Deterministic manifest: train/val are OK-only, test NOK follows nok_ratio.

    nok_ratio orders the three defect classes as
    (NOT_COMPLETE, STRANGE_OBJECT, COLOR_DEFECT).
    """
    nok_counts = largest_remainder(counts.test_nok, nok_ratio)
    groups: list[tuple[str, DefectKind, int]] = [
        ("train", DefectKind.OK, counts.train_ok),
        ("val", DefectKind.OK, counts.val_ok),
        ("test", DefectKind.OK, counts.test_ok),
        ("test", DefectKind.NOT_COMPLETE, nok_counts[0]),
        ("test", DefectKind.STRANGE_OBJECT, nok_counts[1]),
        ("test", DefectKind.COLOR_DEFECT, nok_counts[2]),
    ]
    records = []
    index = 0
    for split, label, n in groups:
        for i in range(n):
            sid = f"{split}_{label.value.lower()}_{i:05d}"
            records.append(
                ManifestRecord(
                    sample_id=sid,
                    path=f"{split}/{sid}.ppm",
                    label=label,
                    split=split,
                    seed=sample_seed(master_seed, index),
                )
            )
            index += 1
    manifest = DatasetManifest(records)
    manifest.validate()
    return manifest


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _edge(r: np.ndarray, r0: float, width: float) -> np.ndarray:
    """Soft 0->1 transition centered at r0 over +-width."""
    return _smoothstep((r - r0 + width) / (2.0 * width))


def synth_sample(kind: DefectKind, seed: int, params: SynthParams) -> Image:
    """Render one sample; bit-identical for identical (kind, seed, params)."""
    size = params.image_size
    base_rng = generator(derive_seed(seed, "base"))
    half = size / 2.0

    # Fixed draw order keeps the base render identical across defect kinds.
    cx = (size - 1) / 2.0 + base_rng.uniform(-0.03, 0.03) * size
    cy = (size - 1) / 2.0 + base_rng.uniform(-0.03, 0.03) * size
    outer = params.ring_outer_radius * half * (1.0 + base_rng.uniform(-0.05, 0.05))
    inner = params.ring_inner_radius * half * (1.0 + base_rng.uniform(-0.05, 0.05))
    inner = min(inner, 0.85 * outer)
    base_color = np.array([0.72, 0.58, 0.40]) + base_rng.uniform(-0.05, 0.05, 3)
    amps = base_rng.normal(0.0, params.texture_amplitude, 5)
    phases = base_rng.uniform(0.0, 2.0 * np.pi, 5)
    fine = base_rng.uniform(-1.0, 1.0, (size, size)) * params.texture_amplitude * 0.4
    bg_noise = base_rng.uniform(-0.015, 0.015, (size, size, 3))

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    r = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    theta = np.arctan2(yy - cy, xx - cx)

    soft = max(1.0, 0.006 * size)
    mask = _edge(r, inner, soft) * (1.0 - _edge(r, outer, soft))

    if kind is DefectKind.NOT_COMPLETE:
        drng = generator(derive_seed(seed, "defect"))
        theta0 = drng.uniform(-np.pi, np.pi)
        half_width = (0.3 + 1.2 * params.defect_magnitude) / 2.0
        ang = np.abs(np.angle(np.exp(1j * (theta - theta0))))
        mask = mask * _edge(ang, half_width, 0.06)

    shade = np.zeros((size, size))
    for k in range(5):
        shade += amps[k] * np.cos((k + 1) * theta + phases[k])
    ring_shade = np.clip(1.0 + shade + fine, 0.25, 1.6)
    ring_rgb = np.clip(base_color[None, None, :] * ring_shade[:, :, None], 0.0, 0.97)

    bg = np.clip(params.background_level + bg_noise, 0.0, 0.085)
    img = bg + mask[:, :, None] * (ring_rgb - bg)

    if kind is DefectKind.STRANGE_OBJECT:
        drng = generator(derive_seed(seed, "defect"))
        ang = drng.uniform(0.0, 2.0 * np.pi)
        rad = drng.uniform(0.15, 0.8) * outer
        bx, by = cx + rad * np.cos(ang), cy + rad * np.sin(ang)
        rb = size * (0.03 + 0.06 * params.defect_magnitude)
        blob = 1.0 - _edge(np.sqrt((xx - bx) ** 2 + (yy - by) ** 2), rb, 1.0)
        blob_color = np.array([0.95, 0.95, 0.98])
        img = img * (1.0 - blob[:, :, None]) + blob_color[None, None, :] * blob[:, :, None]
    elif kind is DefectKind.COLOR_DEFECT:
        drng = generator(derive_seed(seed, "defect"))
        ang = drng.uniform(0.0, 2.0 * np.pi)
        ring_half_width = (outer - inner) / 2.0
        rad = (inner + outer) / 2.0 + drng.uniform(-0.2, 0.2) * ring_half_width
        dx_, dy_ = cx + rad * np.cos(ang), cy + rad * np.sin(ang)
        rd = (0.35 + 0.5 * params.defect_magnitude) * ring_half_width
        # Hard disc mask: the pixel-diff support against the OK render is
        # exactly this connected disc.
        disc = (xx - dx_) ** 2 + (yy - dy_) ** 2 <= rd * rd
        g = img[:, :, 1]
        img[:, :, 1] = np.where(disc, g + 0.8 * params.defect_magnitude * (1.0 - g), g)

    return Image(np.clip(img, 0.0, 1.0))


def synth_dataset(
    params: SynthParams,
    counts: DatasetCounts,
    nok_ratio: tuple[float, float, float],
    out_dir: str | Path,
) -> DatasetManifest:
    """Render the full corpus and write images plus manifest.csv to out_dir."""
    out = Path(out_dir)
    manifest = build_manifest(counts, nok_ratio, params.seed)
    for split in SPLITS:
        (out / split).mkdir(parents=True, exist_ok=True)
    for rec in manifest.records:
        img = synth_sample(rec.label, rec.seed, params)
        save_image(img, out / rec.path)
    manifest.save_csv(out / "manifest.csv")
    return manifest
