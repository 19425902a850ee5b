"""Segmentation-map driven annotation: connected components, tight boxes,
normalized YOLO records, size filtering, and the bit-exact label file format."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BoxOutOfBounds, EmptyMask, UnknownId

log = logging.getLogger(__name__)

MIN_BOX_SIDE = 5          # px, strict lower bound on max(box w, box h)
MAX_AREA_FRACTION = 0.20  # oversize warning threshold
LABEL_DECIMALS = 6

# 8-neighborhood scan offsets (previously visited neighbors in raster order)
_SCAN_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1))


@dataclass(frozen=True)
class PixelBox:
    """Inclusive-min / exclusive-max pixel rectangle."""
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class AnnotationRecord:
    class_id: int
    x_c: float
    y_c: float
    w: float
    h: float


@dataclass(frozen=True)
class InstanceMask:
    instance_id: int
    class_id: int
    pixels: np.ndarray  # (N, 2) int array of (y, x)


def connected_components(segmap: np.ndarray,
                         class_of: dict[int, int]) -> list[InstanceMask]:
    """Partition nonzero pixels into 8-connected same-id components.

    An instance split by occlusion yields one mask per visible fragment.
    Union-find runs over the nonzero pixels only, so cost tracks object
    coverage rather than image size.
    """
    ys, xs = np.nonzero(segmap)
    if len(ys) == 0:
        return []
    ids = segmap[ys, xs]
    for sid in np.unique(ids):
        if int(sid) not in class_of:
            raise UnknownId(f"segmap id {int(sid)} missing from instance table")

    h, w = segmap.shape
    keys = ys.astype(np.int64) * w + xs.astype(np.int64)
    index_of = {int(k): i for i, k in enumerate(keys)}

    parent = list(range(len(ys)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    seg = segmap
    for i in range(len(ys)):
        y, x, v = int(ys[i]), int(xs[i]), int(ids[i])
        for dy, dx in _SCAN_OFFSETS:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and seg[ny, nx] == v:
                j = index_of[ny * w + nx]
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[rb] = ra

    groups: dict[int, list[int]] = {}
    for i in range(len(ys)):
        groups.setdefault(find(i), []).append(i)

    masks = []
    # deterministic order: by raster position of each component's first pixel
    for root in sorted(groups, key=lambda r: (int(ys[r]), int(xs[r]))):
        members = groups[root]
        pix = np.stack([ys[members], xs[members]], axis=1).astype(np.int64)
        sid = int(ids[members[0]])
        masks.append(InstanceMask(instance_id=sid, class_id=class_of[sid], pixels=pix))
    return masks


def tight_box(mask: InstanceMask) -> PixelBox:
    if mask.pixels.shape[0] == 0:
        raise EmptyMask("cannot box an empty mask")
    ys, xs = mask.pixels[:, 0], mask.pixels[:, 1]
    return PixelBox(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def to_yolo(box: PixelBox, class_id: int, width: int, height: int) -> AnnotationRecord:
    """Normalized center/size record, computed in exact rationals."""
    if not (0 <= box.x_min < box.x_max <= width and 0 <= box.y_min < box.y_max <= height):
        raise BoxOutOfBounds(f"{box} does not fit {width}x{height}")
    x_c = Fraction(box.x_min + box.x_max, 2 * width)
    y_c = Fraction(box.y_min + box.y_max, 2 * height)
    w = Fraction(box.width, width)
    h = Fraction(box.height, height)
    return AnnotationRecord(class_id, float(x_c), float(y_c), float(w), float(h))


def filter_instances(masks: list[InstanceMask], width: int,
                     height: int) -> list[InstanceMask]:
    """Drop masks below the minimum pixel extent; warn on oversize ones.

    Oversize masks are kept but logged -- an oversize instance means scene
    sampling failed to respect the size band and should be investigated.
    """
    kept = []
    limit = MAX_AREA_FRACTION * width * height
    for m in masks:
        box = tight_box(m)
        if max(box.width, box.height) < MIN_BOX_SIDE:
            continue
        if box.area > limit:
            log.warning("OVERSIZE instance %d: box area %d > %.0f px",
                        m.instance_id, box.area, limit)
        kept.append(m)
    return kept


def annotate_segmap(segmap: np.ndarray,
                    class_of: dict[int, int]) -> list[AnnotationRecord]:
    """Full per-frame pipeline: components -> size filter -> YOLO records."""
    h, w = segmap.shape
    masks = filter_instances(connected_components(segmap, class_of), w, h)
    return [to_yolo(tight_box(m), m.class_id, w, h) for m in masks]


def serialize_labels(records: list[AnnotationRecord]) -> str:
    """One `class x_c y_c w h` line per record, 6-decimal fixed point,
    descending box area, with deterministic tie-breaking."""
    ordered = sorted(records,
                     key=lambda r: (-r.w * r.h, r.class_id, r.x_c, r.y_c, r.w, r.h))
    return "".join(
        f"{r.class_id} {r.x_c:.6f} {r.y_c:.6f} {r.w:.6f} {r.h:.6f}\n"
        for r in ordered
    )


def parse_labels(text: str) -> list[AnnotationRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split(" ")
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 5 fields, got {len(parts)}")
        cls = int(parts[0])
        vals = [float(p) for p in parts[1:]]
        records.append(AnnotationRecord(cls, *vals))
    return records


def denormalize(record: AnnotationRecord, width: int, height: int) -> PixelBox:
    """Invert the normalization back to an integer pixel box (nearest px)."""
    x0 = (record.x_c - record.w / 2.0) * width
    x1 = (record.x_c + record.w / 2.0) * width
    y0 = (record.y_c - record.h / 2.0) * height
    y1 = (record.y_c + record.h / 2.0) * height
    return PixelBox(int(round(x0)), int(round(y0)), int(round(x1)), int(round(y1)))
