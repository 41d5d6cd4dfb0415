"""Point-cloud approximations of Rauzy fractals, subtiles and subsubtiles."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .spectral import SpectralData
from .substitution import (
    Occurrence,
    Substitution,
    incidence_matrix,
    occurrences,
    periodic_seed,
    prefix_abelianization,
    prefix_stream,
)

log = logging.getLogger(__name__)

VERIFY_BUDGET = 200_000
PREVIEW_BUDGET = 20_000
DEDUP_DIVISIONS = 2048
MAX_SEED_PREFIX = 1 << 22


@dataclass(frozen=True, eq=False)
class TileApprox:
    """Finite cloud inside one tile; ``points`` has shape ``(count, dim)``."""

    label: str
    points: np.ndarray
    method: str
    convention: str
    point_budget: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError(f"tile {self.label} needs a nonempty (count, dim) array")
        if not np.isfinite(pts).all():
            raise ValueError(f"tile {self.label} has non-finite points")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def diameter(self) -> float:
        return bounding_box(self).diagonal()

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


@dataclass(frozen=True)
class BoundingBox:
    lo: np.ndarray
    hi: np.ndarray

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def union(self, other: BoundingBox) -> BoundingBox:
        return BoundingBox(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))


def bounding_box(t: TileApprox | np.ndarray) -> BoundingBox:
    pts = t.points if isinstance(t, TileApprox) else np.asarray(t)
    return BoundingBox(pts.min(axis=0), pts.max(axis=0))


def union(tiles: Sequence[TileApprox], label: str = "union") -> TileApprox:
    tiles = list(tiles)
    if not tiles:
        raise ValueError("union of no tiles")
    conventions = {t.convention for t in tiles}
    return TileApprox(
        label,
        np.concatenate([t.points for t in tiles]),
        method=tiles[0].method if len({t.method for t in tiles}) == 1 else "mixed",
        convention=conventions.pop() if len(conventions) == 1 else "mixed",
        point_budget=sum(t.point_budget for t in tiles),
    )


def translate(t: TileApprox, vec, label: str | None = None) -> TileApprox:
    return TileApprox(
        label or t.label, t.points + np.asarray(vec, dtype=float), "translated", t.convention, t.point_budget
    )


def full_fractal(tiles: Mapping[int, TileApprox]) -> TileApprox:
    return union([tiles[i] for i in sorted(tiles)], "T")


def _check_spectral(s: Substitution, sd: SpectralData):
    if sd.matrix.shape != (s.n, s.n) or not np.array_equal(sd.matrix, incidence_matrix(s)):
        raise ValueError(f"spectral data ({sd.tag}) was not built for {s}")


def dedup(points: np.ndarray, cell: float) -> np.ndarray:
    """Keep the first point of every occupied grid cell, preserving order."""
    if len(points) == 0 or cell <= 0:
        return points
    keys = np.floor((points - points.min(axis=0)) / cell).astype(np.int64)
    shape = keys.max(axis=0) + 1
    flat = np.ravel_multi_index(keys.T, tuple(int(x) for x in shape))
    _, first = np.unique(flat, return_index=True)
    return points[np.sort(first)]


def prefix_points(s: Substitution, sd: SpectralData, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Projected Abelianized prefixes of the periodic point and the letter after each."""
    _check_spectral(s, sd)
    u = prefix_stream(s, periodic_seed(s), m)
    steps = sd.projection_matrix().T[u - 1]
    pts = np.cumsum(steps, axis=0) - steps
    return pts, u


def live_letters(s: Substitution) -> list[int]:
    """Letters with nonempty tiles: those occurring in images of live letters."""
    live = set(range(1, s.n + 1))
    while True:
        nxt = {x for a in live for x in s.image(a)}
        if nxt == live:
            return sorted(live)
        live = nxt


def tiles_by_prefixes(s: Substitution, sd: SpectralData, m: int) -> dict[int, TileApprox]:
    """Cloud for each nonempty subtile from the first ``m`` letters of a periodic point."""
    pts, u = prefix_points(s, sd, m)
    tiles = {}
    for i in live_letters(s):
        sel = pts[u == i]
        if len(sel) == 0:
            raise ValueError(f"letter {i} does not occur in the first {m} letters; raise m")
        tiles[i] = TileApprox(f"T({i})", sel, "prefix", sd.tag, m)
    return tiles


def _gifs_maps(s: Substitution, sd: SpectralData):
    proj = sd.projection_matrix()
    live = live_letters(s)
    return {
        i: [(occ, proj @ prefix_abelianization(s, occ)) for occ in occurrences(s, i) if occ.j in live]
        for i in live
    }


def gifs_step(s: Substitution, sd: SpectralData, clouds: Mapping[int, np.ndarray], maps=None) -> dict[int, np.ndarray]:
    """One application of the set equation to every tile."""
    if maps is None:
        maps = _gifs_maps(s, sd)
    ht = sd.contraction_matrix().T
    contracted = {j: clouds[j] @ ht for j in clouds}
    return {
        i: np.concatenate([contracted[occ.j] + t for occ, t in maps[i]])
        for i in maps
    }


def _seed_points(s: Substitution, sd: SpectralData, seed: str) -> dict[int, np.ndarray]:
    live = live_letters(s)
    if seed == "origin":
        return {i: np.zeros((1, sd.dim)) for i in live}
    if seed != "prefix":
        raise ValueError(f"unknown seed {seed!r}")
    m = 64 * s.n
    while True:
        pts, u = prefix_points(s, sd, m)
        if set(live) <= set(u.tolist()):
            break
        if m > MAX_SEED_PREFIX:
            raise ValueError(f"letters {sorted(set(live) - set(u.tolist()))} never follow a prefix; is {s} primitive?")
        m *= 4
    return {i: pts[np.argmax(u == i)][None, :] for i in live}


def tiles_by_gifs(
    s: Substitution,
    sd: SpectralData,
    target: int = VERIFY_BUDGET,
    seed: str = "prefix",
    divisions: int = DEDUP_DIVISIONS,
    max_iter: int = 200,
    min_iter: int = 0,
) -> dict[int, TileApprox]:
    """Iterate the graph-directed set equation until each tile holds ``target`` points.

    ``seed="prefix"`` starts every tile from one point of the prefix cloud,
    which already lies in the tile, so all iterates stay inside the exact
    attractor.  ``seed="origin"`` starts from ``{0}``.  After each step the
    clouds are thinned on a grid of cell ``diameter / divisions``.
    """
    _check_spectral(s, sd)
    maps = _gifs_maps(s, sd)
    clouds = _seed_points(s, sd, seed)
    # a tile is finished once it holds `target` points or stops growing on the grid
    done = {i: False for i in clouds}
    it = 0
    while it < max_iter and (it < min_iter or not all(done.values())):
        prev = {i: len(c) for i, c in clouds.items()}
        # thin the inputs when the next step would overshoot the budget by far
        out = max(sum(prev[occ.j] for occ, _ in maps[i]) for i in maps)
        stride = int(out // (4 * target)) if it >= min_iter else 0
        if stride > 1:
            clouds = {i: c[::stride] for i, c in clouds.items()}
        clouds = gifs_step(s, sd, clouds, maps)
        it += 1
        allpts = np.concatenate(list(clouds.values()))
        cell = bounding_box(allpts).diagonal() / divisions
        clouds = {i: dedup(c, cell) for i, c in clouds.items()}
        for i, c in clouds.items():
            saturated = it > 2 and len(c) < 1.1 * prev[i]
            done[i] = len(c) >= target or saturated
    log.debug("GIFS: %d steps, sizes %s", it, {i: len(c) for i, c in clouds.items()})
    return {i: TileApprox(f"T({i})", c, "gifs", sd.tag, target) for i, c in clouds.items()}


def subsubtile(
    s: Substitution,
    sd: SpectralData,
    base: Mapping[int, TileApprox],
    i: int,
    occ: Occurrence,
) -> TileApprox:
    """``h(T(j)) + pi P(s(j)_1 ... s(j)_{k-1})`` for an occurrence ``(j;k)`` of ``i``."""
    occ = Occurrence(*occ)
    if not (1 <= occ.j <= s.n and 1 <= occ.k <= len(s.image(occ.j))) or s.image(occ.j)[occ.k - 1] != i:
        raise ValueError(f"{occ} is not an occurrence of {i} in {s}")
    shift = sd.projection_matrix() @ prefix_abelianization(s, occ)
    pts = base[occ.j].points @ sd.contraction_matrix().T + shift
    return TileApprox(f"T({i},{occ.j};{occ.k})", pts, "translated", base[occ.j].convention, base[occ.j].point_budget)


def subsubtiles(s, sd, base, i, occs=None) -> list[TileApprox]:
    if occs is None:
        occs = occurrences(s, i)
    return [subsubtile(s, sd, base, i, occ) for occ in occs]


def export_csv(t: TileApprox, path) -> Path:
    """One point per row, 9 significant digits, header naming label and convention."""
    path = Path(path)
    axes = ["x", "y", "z", "w"][: t.dim] if t.dim <= 4 else [f"x{q}" for q in range(t.dim)]
    lines = [f"# tile={t.label} convention={t.convention} method={t.method}", ",".join(axes)]
    lines.extend(",".join(f"{x:.9g}" for x in row) for row in t.points.tolist())
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> TileApprox:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()[2:].strip()
        meta = dict(field.split("=", 1) for field in header.split(" "))
        fh.readline()
        pts = np.loadtxt(fh, delimiter=",", ndmin=2)
    return TileApprox(meta["tile"], pts, meta.get("method", "csv"), meta["convention"])
