"""Numerical checks of set identities between tile clouds, plus raster
topology (overlap, connectivity, hole counts).

Two compact sets are treated as equal when the symmetric Hausdorff distance
between their clouds is at most ``tol`` (by default 1% of the diameter of the
reference fractal).  Hole counts are bounded complement components of a
rasterized cloud; they are a heuristic stand-in for the topology of the
exact set.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .fractal import BoundingBox, TileApprox, bounding_box, full_fractal, subsubtile, translate, union
from .spectral import SpectralData
from .substitution import Occurrence, Substitution, occurrences

REPORT_SCHEMA = "rauzy-verify/1"
TOL_FRACTION = 0.01
RASTER_RESOLUTION = 1024
RASTER_DILATION = 2
RASTER_MARGIN = 2
OVERLAP_DIVISIONS = 512
OVERLAP_MAX = 0.02

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)


def _points(x) -> np.ndarray:
    return x.points if isinstance(x, TileApprox) else np.asarray(x, dtype=float)


def _thin(pts: np.ndarray, max_points: int | None) -> np.ndarray:
    if max_points is None or len(pts) <= max_points:
        return pts
    return pts[:: int(np.ceil(len(pts) / max_points))]


def directed_hausdorff(a, b) -> float:
    """``max_{x in a} min_{y in b} |x - y|``."""
    a, b = _points(a), _points(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("Hausdorff distance of an empty cloud")
    return float(cKDTree(b).query(a, k=1)[0].max())


def hausdorff(a, b, max_points: int | None = None) -> float:
    a, b = _thin(_points(a), max_points), _thin(_points(b), max_points)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


@dataclass
class IdentityReport:
    name: str
    statement: str
    left: str
    right: str
    distance: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.distance <= self.tol)


def compare(name: str, statement: str, left: TileApprox, right: TileApprox, tol: float, max_points=None) -> IdentityReport:
    d = hausdorff(left, right, max_points)
    return IdentityReport(
        name, statement, f"{left.label}[{len(left)}]", f"{right.label}[{len(right)}]", d, tol
    )


def default_tol(tiles: Mapping[int, TileApprox], fraction: float = TOL_FRACTION) -> float:
    return fraction * full_fractal(tiles).diameter()


def _shifted(t: TileApprox, perturb) -> TileApprox:
    return t if perturb is None else translate(t, perturb)


def check_gifs_identity(
    s: Substitution,
    sd: SpectralData,
    tiles: Mapping[int, TileApprox],
    tol: float | None = None,
    occ_sets: Mapping[int, Sequence[Occurrence]] | None = None,
    perturb=None,
    max_points: int | None = None,
) -> list[IdentityReport]:
    """Each tile against the union of its subsubtiles.

    ``occ_sets`` overrides the occurrence set per letter (negative controls).
    """
    tol = default_tol(tiles) if tol is None else tol
    reports = []
    for i in sorted(tiles):
        occs = occurrences(s, i) if occ_sets is None else occ_sets[i]
        parts = [subsubtile(s, sd, tiles, i, occ) for occ in occs if occ.j in tiles]
        rhs = _shifted(union(parts, f"U occ({i})"), perturb)
        reports.append(compare(f"gifs[{i}]", f"T({i}) = U_(j;k) in occ({i}) T({i},j;k)", tiles[i], rhs, tol, max_points))
    return reports


def _require_chain(parent: SpectralData, child: SpectralData, step: str):
    if child.convention[: len(parent.convention)] != parent.convention or not child.convention[-1].startswith(step):
        raise ValueError(
            f"eigenvector conventions are unrelated: {child.tag!r} does not extend {parent.tag!r} by a {step} step"
        )


def check_split_identities(
    sigma: Substitution,
    tau: Substitution,
    sd_sigma: SpectralData,
    sd_tau: SpectralData,
    base: Mapping[int, TileApprox],
    split_tiles: Mapping[int, TileApprox],
    a: int,
    I: Sequence[Occurrence],
    tol: float | None = None,
    perturb=None,
    subsubtile_level: bool = True,
    max_points: int | None = 100_000,
    subsubtile_max_points: int | None = 20_000,
) -> list[IdentityReport]:
    """Tiles of a split against unions of subsubtiles of the original.

    ``tau`` must be ``sigma`` with the occurrences ``I`` of ``a`` moved to the
    new letter ``b = n + 1``, and ``sd_tau`` derived from ``sd_sigma``.
    """
    _require_chain(sd_sigma, sd_tau, "split")
    n, b = sigma.n, sigma.n + 1
    I = [Occurrence(*o) for o in I]
    tol = default_tol(base) if tol is None else tol
    reports = []
    for i in range(1, n + 1):
        if i != a:
            reports.append(compare(
                f"split.unchanged[{i}]", f"T_tau({i}) = T_sigma({i})",
                split_tiles[i], _shifted(base[i], perturb), tol, max_points))
    rest = [o for o in occurrences(sigma, a) if o not in set(I)]
    if rest:
        rhs = union([subsubtile(sigma, sd_sigma, base, a, o) for o in rest], f"U occ({a})\\I")
        reports.append(compare(
            f"split.kept[{a}]", f"T_tau({a}) = U_(j;k) in occ({a})\\I T_sigma({a},j;k)",
            split_tiles[a], _shifted(rhs, perturb), tol, max_points))
    rhs = union([subsubtile(sigma, sd_sigma, base, a, o) for o in I], "U I")
    reports.append(compare(
        f"split.moved[{b}]", f"T_tau({b}) = U_(j;k) in I T_sigma({a},j;k)",
        split_tiles[b], _shifted(rhs, perturb), tol, max_points))
    if subsubtile_level:
        reports.extend(_split_subsubtile_reports(
            sigma, tau, sd_sigma, sd_tau, base, split_tiles, a, tol, perturb, subsubtile_max_points))
    return reports


def _split_subsubtile_reports(sigma, tau, sd_sigma, sd_tau, base, split_tiles, a, tol, perturb, max_points):
    b = sigma.n + 1
    worst: dict[str, IdentityReport] = {}
    for i in range(1, tau.n + 1):
        i0 = a if i == b else i
        for occ in occurrences(tau, i):
            if occ.j == b:
                continue
            right = _shifted(subsubtile(sigma, sd_sigma, base, i0, occ), perturb)
            if occ.j != a:
                left = subsubtile(tau, sd_tau, split_tiles, i, occ)
                key = "split.subsubtile.other"
                stmt = "T_tau(i,j;k) = T_sigma(i',j;k) for j not in {a,b}"
            else:
                # T_tau(a) is empty when every occurrence of a moved to b
                left = union([
                    subsubtile(tau, sd_tau, split_tiles, i, o)
                    for o in (occ, Occurrence(b, occ.k)) if o.j in split_tiles
                ], f"T({i},{a};{occ.k})+T({i},{b};{occ.k})")
                key = "split.subsubtile.merged"
                stmt = "T_tau(i,a;k) u T_tau(i,b;k) = T_sigma(i',a;k)"
            rep = compare(key, stmt, left, right, tol, max_points)
            if key not in worst or rep.distance > worst[key].distance:
                worst[key] = rep
    return [worst[k] for k in sorted(worst)]


def check_conjugation_identities(
    tau: Substitution,
    theta: Substitution,
    sd_tau: SpectralData,
    sd_theta: SpectralData,
    tau_tiles: Mapping[int, TileApprox],
    theta_tiles: Mapping[int, TileApprox],
    b: int,
    c: int,
    tol: float | None = None,
    perturb=None,
    max_points: int | None = 100_000,
) -> list[IdentityReport]:
    """Tiles of ``theta`` (conjugate of ``tau`` by ``j -> ij`` with ``i=c, j=b``)
    against tiles and subsubtiles of ``tau``."""
    if b == c:
        # identity automorphism: nothing moves
        return [
            compare(f"conj.unchanged[{i}]", f"T_theta({i}) = T_tau({i})", theta_tiles[i],
                    _shifted(tau_tiles[i], perturb), tol if tol is not None else default_tol(tau_tiles), max_points)
            for i in sorted(theta_tiles)
        ]
    _require_chain(sd_tau, sd_theta, "conjugate")
    tol = default_tol(tau_tiles) if tol is None else tol
    reports = []
    for i in sorted(theta_tiles):
        if i not in (b, c):
            reports.append(compare(
                f"conj.unchanged[{i}]", f"T_theta({i}) = T_tau({i})",
                theta_tiles[i], _shifted(tau_tiles[i], perturb), tol, max_points))
    reports.append(compare(
        "conj.merged", f"T_theta({b}) u T_theta({c}) = T_tau({c})",
        union([theta_tiles[b], theta_tiles[c]], f"T_theta({b})+T_theta({c})"),
        _shifted(tau_tiles[c], perturb), tol, max_points))
    shift = sd_tau.projection_matrix()[:, c - 1]
    reports.append(compare(
        "conj.translated", f"T_theta({b}) = T_tau({b}) - pi_tau P({c})",
        theta_tiles[b], _shifted(translate(tau_tiles[b], -shift, f"T_tau({b})-pi({c})"), perturb), tol, max_points))
    parts = [subsubtile(tau, sd_tau, tau_tiles, c, Occurrence(o.j, o.k - 1)) for o in occurrences(tau, b)]
    reports.append(compare(
        "conj.moved", f"T_theta({b}) = U_(j;k) in occ(tau,{b}) T_tau({c},j;k-1)",
        theta_tiles[b], _shifted(union(parts, "U occ(b) shifted"), perturb), tol, max_points))
    occ_b = set(occurrences(tau, b))
    kept = [o for o in occurrences(tau, c) if Occurrence(o.j, o.k + 1) not in occ_b]
    if kept:
        parts = [subsubtile(tau, sd_tau, tau_tiles, c, o) for o in kept]
        reports.append(compare(
            "conj.kept", f"T_theta({c}) = U_(j;k) in occ(tau,{c}), (j;k+1) not in occ(tau,{b}) T_tau({c},j;k)",
            theta_tiles[c], _shifted(union(parts, "U occ(c) kept"), perturb), tol, max_points))
    reports.append(compare(
        "conj.whole", f"T_theta = U_(i != {b}) T_tau(i)",
        full_fractal(theta_tiles),
        _shifted(union([tau_tiles[i] for i in sorted(tau_tiles) if i != b], "U T_tau(i!=b)"), perturb),
        tol, max_points))
    return reports


def overlap_fraction(a, b, cell: float) -> float:
    """Shared occupied cells over the smaller occupied-cell count."""
    if not cell > 0 or not np.isfinite(cell):
        raise ValueError(f"degenerate cell size {cell}")
    pa, pb = _points(a), _points(b)
    origin = np.minimum(pa.min(axis=0), pb.min(axis=0))

    def cells(p):
        keys = np.floor((p - origin) / cell).astype(np.int64)
        return np.unique(keys, axis=0)

    ca, cb = cells(pa), cells(pb)
    both = np.concatenate([ca, cb])
    _, counts = np.unique(both, axis=0, return_counts=True)
    shared = int(np.count_nonzero(counts > 1))
    return shared / min(len(ca), len(cb))


def _disc(radius: int) -> np.ndarray:
    y, x = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return x * x + y * y <= radius * radius


@dataclass
class Raster:
    """Occupancy grid; cell ``[row, col]`` covers ``lo + (col, row) * cell``."""

    lo: np.ndarray
    cell: float
    occupancy: np.ndarray
    dilation: int

    @property
    def resolution(self) -> int:
        return max(self.occupancy.shape)

    def to_cells(self, points) -> np.ndarray:
        idx = np.floor((_points(points) - self.lo) / self.cell).astype(np.int64)
        return idx[:, ::-1]

    def contains(self, points, erosion: int = 0) -> bool:
        """Whether every point falls on the foreground eroded by ``erosion`` cells."""
        occ = self.occupancy
        if erosion > 0:
            occ = ndimage.binary_erosion(occ, structure=_disc(erosion))
        rc = self.to_cells(points)
        h, w = occ.shape
        inside = (rc[:, 0] >= 0) & (rc[:, 0] < h) & (rc[:, 1] >= 0) & (rc[:, 1] < w)
        if not inside.all():
            return False
        return bool(occ[rc[:, 0], rc[:, 1]].all())

    def foreground_components(self) -> int:
        return int(ndimage.label(self.occupancy, structure=EIGHT)[1])


def rasterize(
    tiles: Sequence[TileApprox] | TileApprox,
    resolution: int = RASTER_RESOLUTION,
    dilation: int = RASTER_DILATION,
    margin: int = RASTER_MARGIN,
    box: BoundingBox | None = None,
) -> Raster:
    """Stamp every point as a disc of radius ``dilation`` cells, then close once.

    The grid is ``resolution`` cells on its long axis with uniform cell size
    and at least ``margin`` empty cells around the footprint.
    """
    if resolution < 64:
        raise ValueError("raster resolution must be at least 64")
    if isinstance(tiles, TileApprox):
        tiles = [tiles]
    pts = np.concatenate([_points(t) for t in tiles])
    if pts.shape[1] != 2:
        raise ValueError("rasterization needs planar clouds")
    box = box or bounding_box(pts)
    pad = margin + 2 * dilation + 1
    ext = float(max(box.extent().max(), 1e-300))
    cell = ext / (resolution - 2 * pad - 1)
    shape = np.floor(box.extent() / cell).astype(int)[::-1] + 2 * pad + 1
    lo = box.lo - pad * cell
    occ = np.zeros(tuple(shape), dtype=bool)
    r = Raster(lo, cell, occ, dilation)
    rc = r.to_cells(pts)
    occ[rc[:, 0], rc[:, 1]] = True
    if dilation > 0:
        disc = _disc(dilation)
        occ = ndimage.binary_dilation(occ, structure=disc)
        occ = ndimage.binary_closing(occ, structure=disc)
    r.occupancy = occ
    return r


def count_holes(r: Raster) -> int:
    """Bounded components of the complement (4-connected)."""
    occ = r.occupancy
    if not occ.any():
        raise ValueError("empty raster")
    labels, count = ndimage.label(~occ, structure=FOUR)
    border = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    border = set(border.tolist()) - {0}
    return count - len(border)


def hole_sizes(r: Raster) -> list[int]:
    labels, count = ndimage.label(~r.occupancy, structure=FOUR)
    border = set(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]).tolist())
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    return sorted((int(sizes[q]) for q in range(1, count + 1) if q not in border), reverse=True)


def disklike_heuristic(tiles: Mapping[int, TileApprox], resolution: int = RASTER_RESOLUTION, dilation: int = RASTER_DILATION) -> dict:
    """One foreground component and no holes, per tile and for the union.

    Heuristic only: a raster cannot certify homeomorphy to a disc.
    """
    out = {}
    for key, t in list(tiles.items()) + [("union", full_fractal(tiles))]:
        r = rasterize(t, resolution, dilation)
        comps, holes = r.foreground_components(), count_holes(r)
        out[key] = {"components": comps, "holes": holes, "disklike": comps == 1 and holes == 0}
    out["heuristic"] = True
    return out


def report_json(reports: Sequence[IdentityReport], extra: dict | None = None) -> str:
    doc = {
        "schema": REPORT_SCHEMA,
        "deterministic": "all operations are deterministic; no random numbers are used",
        "reports": [asdict(r) for r in reports],
        "passed": all(r.passed for r in reports),
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")
