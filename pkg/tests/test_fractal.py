import numpy as np
import pytest

from oracles import count_matrix, letter_frequencies
from rauzy import fractal
from rauzy.fractal import TileApprox, bounding_box
from rauzy.spectral import base_eigenvectors, power_spectral
from rauzy.substitution import occurrences, prefix_abelianization
from rauzy.verify import default_tol, hausdorff


@pytest.fixture(scope="module")
def sigma_tiles(sigma, sd_sigma):
    return fractal.tiles_by_gifs(sigma, sd_sigma, 20_000)


def test_tile_is_read_only():
    t = TileApprox("t", [[0.0, 1.0]], "test", "c")
    with pytest.raises(ValueError):
        t.points[0, 0] = 2
    with pytest.raises(ValueError):
        TileApprox("t", np.zeros((0, 2)), "test", "c")
    with pytest.raises(ValueError):
        TileApprox("t", [[np.nan, 0.0]], "test", "c")


def test_bounding_box():
    single = bounding_box(np.array([[1.0, 2.0]]))
    assert single.lo.tolist() == [1, 2] and single.hi.tolist() == [1, 2] and single.diagonal() == 0
    a = bounding_box(np.array([[0.0, 0.0], [1.0, 1.0]]))
    b = bounding_box(np.array([[-1.0, 0.5], [0.5, 3.0]]))
    u = a.union(b)
    assert u.lo.tolist() == [-1, 0] and u.hi.tolist() == [1, 3]


def test_dedup_keeps_first_per_cell():
    pts = np.array([[0.0, 0.0], [0.01, 0.0], [1.0, 1.0]])
    assert fractal.dedup(pts, 0.5).tolist() == [[0.0, 0.0], [1.0, 1.0]]


def test_prefix_first_point_is_origin(sigma, sd_sigma):
    pts, u = fractal.prefix_points(sigma, sd_sigma, 10)
    assert np.allclose(pts[0], 0) and u[0] == 1


def test_prefix_frequencies(sigma, sd_sigma):
    m = 100_000
    tiles = fractal.tiles_by_prefixes(sigma, sd_sigma, m)
    counts = np.array([len(tiles[i]) for i in (1, 2, 3)]) / m
    assert np.allclose(counts, letter_frequencies(count_matrix(sigma.images, 3)), atol=1e-3)


def test_prefix_rejects_foreign_spectral_data(sigma3, sd_sigma):
    with pytest.raises(ValueError, match="not built"):
        fractal.tiles_by_prefixes(sigma3, sd_sigma, 100)


def test_tiles_of_power_agree(sigma, sigma3, sd_sigma, sd_sigma3):
    a = fractal.tiles_by_prefixes(sigma, sd_sigma, 60_000)
    b = fractal.tiles_by_prefixes(sigma3, sd_sigma3, 60_000)
    tol = default_tol(a)
    for i in (1, 2, 3):
        assert hausdorff(a[i], b[i]) < tol


def test_one_gifs_step_from_origin(sigma3, sd_sigma3):
    tiles = fractal.tiles_by_gifs(sigma3, sd_sigma3, 1, seed="origin", max_iter=1, min_iter=1)
    proj = sd_sigma3.projection_matrix()
    for i, expected in zip((1, 2, 3), (9, 5, 3)):
        occs = occurrences(sigma3, i)
        assert len(occs) == expected
        # (2;4) and (3;4) share the prefix count (1,1,1), hence one point
        want = np.unique(np.array([proj @ prefix_abelianization(sigma3, o) for o in occs]).round(12), axis=0)
        got = np.unique(tiles[i].points.round(12), axis=0)
        assert np.allclose(got, want)


def test_gifs_unknown_seed(sigma, sd_sigma):
    with pytest.raises(ValueError):
        fractal.tiles_by_gifs(sigma, sd_sigma, 10, seed="random")


def test_gifs_reaches_budget(sigma_tiles):
    assert all(len(t) >= 20_000 for t in sigma_tiles.values())
    assert all(t.method == "gifs" for t in sigma_tiles.values())


def test_subsubtile_with_first_position_is_contraction(sigma3, sd_sigma3, sigma_tiles):
    t = fractal.subsubtile(sigma3, sd_sigma3, sigma_tiles, 3, (3, 1))
    assert np.allclose(t.points, sigma_tiles[3].points @ sd_sigma3.contraction_matrix().T)
    with pytest.raises(ValueError):
        fractal.subsubtile(sigma3, sd_sigma3, sigma_tiles, 2, (3, 1))


def test_nine_subsubtiles_cover_tile(sigma3, sd_sigma3, sigma_tiles):
    parts = fractal.subsubtiles(sigma3, sd_sigma3, sigma_tiles, 1)
    assert len(parts) == 9
    assert hausdorff(sigma_tiles[1], fractal.union(parts)) < default_tol(sigma_tiles)


def test_full_fractal_has_area(tribonacci, sd_tribonacci):
    tiles = fractal.tiles_by_gifs(tribonacci, sd_tribonacci, 5_000)
    ext = bounding_box(fractal.full_fractal(tiles)).extent()
    assert (ext > 0.5).all()


def test_translate_and_union():
    t = TileApprox("t", [[0.0, 0.0], [1.0, 0.0]], "test", "c")
    moved = fractal.translate(t, [0.0, 2.0])
    assert moved.points.tolist() == [[0, 2], [1, 2]]
    assert len(fractal.union([t, moved])) == 4


def test_csv_roundtrip(tmp_path, sigma_tiles):
    t = sigma_tiles[2]
    path = fractal.export_csv(t, tmp_path / "t.csv")
    header = path.read_text().splitlines()[:2]
    assert header[0].startswith("# tile=T(2) convention=solved-and-normalized(coord=1)")
    assert header[1] == "x,y"
    back = fractal.read_csv(path)
    assert back.convention == t.convention and np.allclose(back.points, t.points, rtol=1e-8)


def test_quadribonacci_is_three_dimensional(quadribonacci):
    sd = base_eigenvectors(quadribonacci)
    tiles = fractal.tiles_by_gifs(quadribonacci, sd, 2_000)
    assert sorted(tiles) == [1, 2, 3, 4] and tiles[1].dim == 3
    assert power_spectral(sd, 3).dim == 3


def test_letter_without_occurrences_has_no_tile(sigma3, sd_sigma3):
    from rauzy.transform import SplitSpec, split, split_spectral

    tau = split(sigma3, SplitSpec(3, occurrences(sigma3, 3), 3))
    assert fractal.live_letters(tau) == [1, 2, 4]
    tiles = fractal.tiles_by_gifs(tau, split_spectral(sd_sigma3, tau, 3), 2_000)
    assert sorted(tiles) == [1, 2, 4]
    assert sorted(fractal.tiles_by_prefixes(tau, split_spectral(sd_sigma3, tau, 3), 5_000)) == [1, 2, 4]
