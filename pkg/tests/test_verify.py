import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import hausdorff_brute, overlap_brute
from rauzy import fractal, transform, verify
from rauzy.fractal import TileApprox
from rauzy.spectral import base_eigenvectors
from rauzy.substitution import Occurrence, Substitution, occurrences

clouds = arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)), elements=st.floats(-5, 5))


def tile(points, label="t"):
    return TileApprox(label, np.asarray(points, dtype=float), "test", "c")


def test_hausdorff_examples():
    a = np.array([[0.0, 0.0], [1.0, 2.0]])
    assert verify.hausdorff(a, a) == 0
    assert verify.hausdorff([[0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]) == 1
    with pytest.raises(ValueError):
        verify.hausdorff(np.zeros((0, 2)), a)
    with pytest.raises(ValueError, match="dimension"):
        verify.hausdorff(a, np.zeros((1, 3)))


@given(clouds, clouds)
def test_hausdorff_matches_all_pairs(a, b):
    assert verify.hausdorff(a, b) == pytest.approx(hausdorff_brute(a, b), abs=1e-12)


@given(clouds, clouds)
def test_overlap_matches_set_oracle(a, b):
    assert verify.overlap_fraction(a, b, 0.7) == pytest.approx(overlap_brute(a, b, 0.7))


def test_overlap_trivial():
    a = np.random.default_rng(1).random((50, 2))
    assert verify.overlap_fraction(a, a, 0.1) == 1
    assert verify.overlap_fraction(a, a + 10, 0.1) == 0
    with pytest.raises(ValueError):
        verify.overlap_fraction(a, a, 0.0)


def test_identity_report_pass_flag():
    r = verify.compare("x", "A = B", tile([[0, 0]]), tile([[0, 0.5]]), tol=0.4)
    assert not r.passed and r.distance == 0.5


@pytest.fixture(scope="module")
def trib(tribonacci, sd_tribonacci):
    return fractal.tiles_by_gifs(tribonacci, sd_tribonacci, 30_000)


def test_gifs_identity_passes(tribonacci, sd_tribonacci, trib):
    reports = verify.check_gifs_identity(tribonacci, sd_tribonacci, trib)
    assert [r.name for r in reports] == ["gifs[1]", "gifs[2]", "gifs[3]"]
    assert all(r.passed for r in reports)


def test_gifs_identity_wrong_occurrences_fail(tribonacci, sd_tribonacci, trib):
    occ = {i: occurrences(tribonacci, i) for i in (1, 2, 3)}
    occ[1] = occ[1][:1]
    reports = verify.check_gifs_identity(tribonacci, sd_tribonacci, trib, occ_sets=occ)
    assert not reports[0].passed


def test_gifs_identity_perturbed_fails(tribonacci, sd_tribonacci, trib):
    shift = 0.05 * fractal.full_fractal(trib).diameter() * np.array([0.0, 1.0])
    assert not any(r.passed for r in verify.check_gifs_identity(tribonacci, sd_tribonacci, trib, perturb=shift))


@pytest.fixture(scope="module")
def one_hole(sigma):
    rec = transform.drill(sigma, 1, transform.DrillParams(force_N=3, force_I=((1, 7),)))
    base = fractal.tiles_by_gifs(rec.sigma_N, rec.sd_sigma_N, 30_000)
    tau_tiles = fractal.tiles_by_gifs(rec.tau, rec.sd_tau, 30_000)
    theta_tiles = fractal.tiles_by_gifs(rec.theta, rec.sd_theta, 30_000)
    return rec, base, tau_tiles, theta_tiles


def test_split_suite_one_hole(one_hole):
    rec, base, tau_tiles, _ = one_hole
    reports = verify.check_split_identities(rec.sigma_N, rec.tau, rec.sd_sigma_N, rec.sd_tau, base, tau_tiles,
                                            rec.a, rec.I)
    names = [r.name for r in reports]
    assert "split.moved[4]" in names and "split.kept[1]" in names and "split.subsubtile.merged" in names
    assert all(r.passed for r in reports), [(r.name, r.distance, r.tol) for r in reports]


def test_conjugation_suite_one_hole(one_hole):
    rec, base, tau_tiles, theta_tiles = one_hole
    reports = verify.check_conjugation_identities(rec.tau, rec.theta, rec.sd_tau, rec.sd_theta, tau_tiles,
                                                  theta_tiles, rec.b, rec.c, tol=verify.default_tol(base))
    assert {r.name for r in reports} >= {"conj.merged", "conj.translated", "conj.moved", "conj.kept", "conj.whole"}
    assert all(r.passed for r in reports)


def test_unrelated_conventions_rejected(one_hole, sigma):
    rec, base, tau_tiles, theta_tiles = one_hole
    fresh = base_eigenvectors(rec.theta)
    with pytest.raises(ValueError, match="unrelated"):
        verify.check_conjugation_identities(rec.tau, rec.theta, rec.sd_tau, fresh, tau_tiles, theta_tiles,
                                            rec.b, rec.c)


def test_identity_automorphism_has_zero_distance(trib):
    reports = verify.check_conjugation_identities(None, None, None, None, trib, trib, 2, 2)
    assert all(r.distance == 0 and r.passed for r in reports)


def test_full_transfer_split(sigma3, sd_sigma3):
    I = occurrences(sigma3, 3)
    tau = transform.split(sigma3, transform.SplitSpec(3, I, 3))
    sd_tau = transform.split_spectral(sd_sigma3, tau, 3)
    base = fractal.tiles_by_gifs(sigma3, sd_sigma3, 20_000)
    tau_tiles = fractal.tiles_by_gifs(tau, sd_tau, 20_000)
    reports = verify.check_split_identities(sigma3, tau, sd_sigma3, sd_tau, base, tau_tiles, 3, I,
                                            subsubtile_level=False)
    assert "split.kept[3]" not in [r.name for r in reports]
    moved = next(r for r in reports if r.name == "split.moved[4]")
    assert moved.passed
    assert verify.hausdorff(tau_tiles[4], base[3]) <= verify.default_tol(base)


def test_single_point_raster_is_disc():
    r = verify.rasterize(tile([[0.0, 0.0]]), resolution=64, dilation=2)
    assert r.occupancy.sum() == 13
    assert r.foreground_components() == 1 and verify.count_holes(r) == 0


def disc_and_annulus():
    g = np.stack(np.meshgrid(np.linspace(-1, 1, 400), np.linspace(-1, 1, 400)), -1).reshape(-1, 2)
    rad = np.hypot(g[:, 0], g[:, 1])
    return g[rad <= 1], g[(rad <= 1) & (rad >= 0.5)]


def test_hole_counts_disc_and_annulus():
    disc, annulus = disc_and_annulus()
    assert verify.count_holes(verify.rasterize(tile(disc), 256)) == 0
    r = verify.rasterize(tile(annulus), 256)
    assert verify.count_holes(r) == 1
    assert len(verify.hole_sizes(r)) == 1


def test_rasterize_rejects():
    with pytest.raises(ValueError):
        verify.rasterize(tile([[0.0, 0.0, 0.0]]), 128)
    with pytest.raises(ValueError):
        verify.rasterize(tile([[0.0, 0.0]]), 32)


def test_tribonacci_raster_connected_without_holes(trib):
    r = verify.rasterize(list(trib.values()), 1024)
    assert r.foreground_components() == 1 and verify.count_holes(r) == 0
    info = verify.disklike_heuristic(trib, resolution=512)
    assert info["union"]["disklike"] and info["heuristic"] is True


def test_drilled_raster_has_one_cavity(one_hole):
    r = verify.rasterize(list(one_hole[3].values()), 1024)
    assert verify.count_holes(r) == 1


def test_raster_contains():
    disc, _ = disc_and_annulus()
    r = verify.rasterize(tile(disc), 128)
    assert r.contains(np.array([[0.0, 0.0]]), erosion=2)
    assert not r.contains(np.array([[0.99, 0.0]]), erosion=4)
    assert not r.contains(np.array([[5.0, 5.0]]))


def test_report_json():
    r = verify.compare("x", "A = B", tile([[0, 0]]), tile([[0, 0.1]]), tol=0.5)
    doc = json.loads(verify.report_json([r], {"n": np.int64(3)}))
    assert doc["schema"] == "rauzy-verify/1" and doc["passed"] and doc["n"] == 3
    assert doc["reports"][0]["statement"] == "A = B"
    assert "deterministic" in doc
