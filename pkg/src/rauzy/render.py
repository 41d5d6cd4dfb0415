"""PNG/SVG pictures of tile decompositions and CSV export of 3D clouds."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from PIL import Image

from .fractal import TileApprox, bounding_box, export_csv

log = logging.getLogger(__name__)

# indexed by letter - 1; the split letter is drawn black instead
BASE_COLORS = [
    (230, 159, 0),
    (86, 180, 233),
    (0, 158, 115),
    (240, 228, 66),
    (0, 114, 178),
    (213, 94, 0),
    (204, 121, 167),
    (120, 120, 120),
]
BLACK = (0, 0, 0)
WHITE = (255, 255, 255)
SVG_CAP = 50_000


def default_palette(labels, black=None) -> dict:
    """Fixed colour per letter; ``black`` (usually the split letter) is drawn black."""
    pal = {}
    for q, lab in enumerate(labels):
        idx = (lab - 1) if isinstance(lab, int) else q
        pal[lab] = BLACK if lab == black else BASE_COLORS[idx % len(BASE_COLORS)]
    return pal


def cycle_palette(labels) -> dict:
    return {lab: BASE_COLORS[q % len(BASE_COLORS)] for q, lab in enumerate(labels)}


@dataclass
class RenderSpec:
    width: int = 800
    height: int = 800
    palette: dict = field(default_factory=dict)
    point_radius: int = 0
    background: tuple = WHITE
    margin: float = 0.05

    def __post_init__(self):
        if self.width < 64 or self.height < 64:
            raise ValueError("image must be at least 64x64 pixels")
        if not self.palette:
            raise ValueError("empty palette")


def _check(tiles: Mapping, spec: RenderSpec):
    if not tiles:
        raise ValueError("nothing to render")
    missing = [lab for lab in tiles if lab not in spec.palette]
    if missing:
        raise ValueError(f"palette has no colour for {missing}")
    for lab, t in tiles.items():
        if t.dim != 2:
            raise ValueError(f"tile {lab} is {t.dim}-dimensional; only planar clouds render")


def world_to_pixel(tiles: Mapping, spec: RenderSpec):
    """Uniform-scale map from the union bounding box (plus margin) to pixels, y up."""
    boxes = [bounding_box(t) for t in tiles.values()]
    box = boxes[0]
    for other in boxes[1:]:
        box = box.union(other)
    ext = np.maximum(box.extent(), 1e-12)
    usable = np.array([spec.width, spec.height]) * (1 - 2 * spec.margin)
    scale = float(np.min((usable - 1) / ext))
    center = (box.lo + box.hi) / 2
    pix_center = np.array([spec.width - 1, spec.height - 1]) / 2

    def f(points):
        p = (np.asarray(points) - center) * scale
        return np.column_stack([pix_center[0] + p[:, 0], pix_center[1] - p[:, 1]])

    return f


def render_array(tiles: Mapping, spec: RenderSpec) -> np.ndarray:
    _check(tiles, spec)
    to_pix = world_to_pixel(tiles, spec)
    img = np.empty((spec.height, spec.width, 3), dtype=np.uint8)
    img[:] = spec.background
    r = spec.point_radius
    offsets = [(dx, dy) for dx in range(-r, r + 1) for dy in range(-r, r + 1) if dx * dx + dy * dy <= r * r]
    for lab in sorted(tiles, key=str):
        pix = np.rint(to_pix(tiles[lab].points)).astype(np.int64)
        for dx, dy in offsets:
            x = np.clip(pix[:, 0] + dx, 0, spec.width - 1)
            y = np.clip(pix[:, 1] + dy, 0, spec.height - 1)
            img[y, x] = spec.palette[lab]
    return img


def render_raster(tiles: Mapping, spec: RenderSpec) -> bytes:
    """8-bit RGB PNG; labels are drawn in sorted order, later ones on top."""
    buf = io.BytesIO()
    Image.fromarray(render_array(tiles, spec), "RGB").save(buf, format="PNG")
    return buf.getvalue()


def _hex(color) -> str:
    return "#%02x%02x%02x" % tuple(color)


def render_svg(tiles: Mapping, spec: RenderSpec, cap: int = SVG_CAP) -> str:
    """One ``<g>`` per label holding one circle per (subsampled) point."""
    _check(tiles, spec)
    to_pix = world_to_pixel(tiles, spec)
    total = sum(len(t) for t in tiles.values())
    stride = max(1, int(np.ceil(total / cap)))
    radius = max(spec.point_radius, 0.5)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" height="{spec.height}">',
        f'<rect width="100%" height="100%" fill="{_hex(spec.background)}"/>',
    ]
    for lab in sorted(tiles, key=str):
        pix = to_pix(tiles[lab].points[::stride])
        out.append(f'<g id="tile-{lab}" fill="{_hex(spec.palette[lab])}">')
        out.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:g}"/>' for x, y in pix.tolist())
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_3d(tiles: Mapping, directory) -> list[Path]:
    """One CSV per tile label for three-dimensional clouds."""
    directory = Path(directory)
    if not tiles:
        log.info("export_3d: no tiles, nothing written")
        return []
    for lab, t in tiles.items():
        if t.dim != 3:
            raise ValueError(f"tile {lab} is {t.dim}-dimensional, expected 3")
    directory.mkdir(parents=True, exist_ok=True)
    return [export_csv(tiles[lab], directory / f"tile_{lab}.csv") for lab in sorted(tiles, key=str)]
