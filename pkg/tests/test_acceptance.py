"""Acceptance criteria 1-12, one test and one PASS/FAIL line per criterion.

Corpus: the CLI defaults, i.e. every family at eps in {0, 0.05, 0.1} and
radii {0.1, 0.25, 0.5, 1, 2} on n = 2, m = 512, plus one n = 3, m = 128
member per inequality family.
"""

import math

import numpy as np
import pytest

from sharpconc.asymmetry import alpha_convex, alpha_gauss, beta_strong
from sharpconc.cli import DEFAULT_EPS, DEFAULT_RADII, SHARP_EPS, main
from sharpconc.families import (EUCLID_FAMILIES, ScenarioFamily, auto_window, generate_family,
                                sharpness_points)
from sharpconc.gauss1d import INV_SQRT2PI, phi
from sharpconc.grid import GridSpec, rasterize
from sharpconc.measures import anisotropic_perimeter, gauss_barycenter, gaussian_measure, gaussian_perimeter
from sharpconc.morphology import enlarge_ball
from sharpconc.regions import ConvexBody, HalfSpace
from sharpconc.verify import (C_GAUSS, Constants, bm_report, covering_sweep, euclid_deficit_report,
                              gauss_deficit_report, layercake_check, monotone_cover_check,
                              sharpness_fit)

M = 512
M3 = 128
R_MAX = max(DEFAULT_RADII)
GAUSS_CORPUS = ("tilted-halfspace", "shifted-slab-halfspace", "two-halfspace-union", "centered-ball")
SQUARE = ConvexBody.cube(2)
DISK = ConvexBody.ball(2, 1.0 / math.sqrt(math.pi))
ALIGNED = GridSpec(2, 2.56, M)  # h = 0.01: every box edge below sits on a cell edge


def build(fam, m=M, r_max=R_MAX):
    return generate_family(fam, GridSpec(fam.n, auto_window(fam, r_max, m), m))


def worst_margin(reports):
    return min(rep.slack + rep.tolerance for rep in reports)


@pytest.fixture(scope="module")
def gauss_corpus():
    out = []
    for fid in GAUSS_CORPUS:
        for eps in DEFAULT_EPS:
            sc = build(ScenarioFamily(fid, eps))
            out.append((sc, alpha_gauss(sc.E)))
    sc3 = build(ScenarioFamily("two-halfspace-union", 0.1, 3), m=M3)
    out.append((sc3, alpha_gauss(sc3.E)))
    return out


@pytest.fixture(scope="module")
def euclid_corpus():
    out = []
    for fid in EUCLID_FAMILIES:
        for eps in DEFAULT_EPS:
            fam = ScenarioFamily(fid, eps, volume=1.0 if fid == "centered-ball" else None)
            sc = build(fam)
            out.append((sc, alpha_convex(sc.E, fam.body)))
    sc3 = build(ScenarioFamily("perturbed-K", 0.1, 3), m=M3)
    out.append((sc3, alpha_convex(sc3.E, sc3.family.body)))
    return out


# 1 -----------------------------------------------------------------------------------

def test_criterion_01_halfspace_exactness(verdict):
    spec = ALIGNED
    worst_dev, worst_err, ok = 0.0, 0.0, True
    for s in (-1.0, 0.0, 0.5, 2.0):
        H = rasterize(HalfSpace((1.0, 0.0), s), spec)
        for r in (0.25, 1.0):
            g = gaussian_measure(enlarge_ball(H, r))
            dev = abs(g.value - phi(s + r))
            ok &= dev <= g.err + 1e-12 and g.err <= 5e-3
            worst_dev, worst_err = max(worst_dev, dev), max(worst_err, g.err)
    assert verdict(1, ok, f"max |grid - phi(s+r)| = {worst_dev:.2e}, max err = {worst_err:.2e} (<= 5e-3)")


# 2 -----------------------------------------------------------------------------------

def test_criterion_02_equality_cases(verdict):
    ratios = []
    for fid in ("tilted-halfspace", "shifted-slab-halfspace", "two-halfspace-union"):
        sc = build(ScenarioFamily(fid, 0.0))
        a = alpha_gauss(sc.E)
        b = beta_strong(sc.E)
        ratios += [a.value / a.err, b.value / max(b.err, 1e-300)]
        for r in DEFAULT_RADII:
            rep = gauss_deficit_report(sc.E, r, alpha=a)
            ratios.append(abs(rep.lhs.value) / rep.lhs.err)
    for fam in (ScenarioFamily("box", 0.0), ScenarioFamily("perturbed-K", 0.0),
                ScenarioFamily("centered-ball", 0.0, volume=1.0, K=DISK)):
        sc = build(fam)
        K = fam.body
        a = alpha_convex(sc.E, K)
        ratios.append(a.value / a.err if a.err else a.value)
        for r in DEFAULT_RADII:
            rep = euclid_deficit_report(sc.E, K, r, alpha=a)
            bm = bm_report(sc.E, K.scaled(r))
            ratios += [abs(rep.lhs.value) / rep.lhs.err, abs(bm.lhs.value) / bm.lhs.err]
    worst = max(ratios)
    assert verdict(2, worst <= 2.0, f"max |value| / err over eps = 0 members = {worst:.3f} (<= 2)")


# 3 -----------------------------------------------------------------------------------

def test_criterion_03_gaussian_concentration(verdict, gauss_corpus):
    const = Constants(1.0 / (48.0 * math.sqrt(2.0 * math.pi)) / 2000.0)
    assert const.c_gauss == pytest.approx(C_GAUSS, rel=1e-15)
    reps = [gauss_deficit_report(sc.E, r, const, alpha=a) for sc, a in gauss_corpus for r in DEFAULT_RADII]
    passed = all(rep.passed for rep in reps)
    nonneg = all(rep.lhs.value >= -rep.lhs.err for rep in reps)
    assert verdict(3, passed and nonneg,
                   f"{len(reps)} reports, all pass: {passed}, LHS >= -err: {nonneg}, "
                   f"worst margin {worst_margin(reps):.2e}")


# 4 -----------------------------------------------------------------------------------

def test_criterion_04_covering(verdict, gauss_corpus):
    reps = []
    for sc, _ in gauss_corpus:
        radii = (0.25, 0.5, 1.0) if sc.E.n == 2 else (0.5,)
        for r in radii:
            reps += covering_sweep(sc.E, r)
    passed = all(rep.passed for rep in reps)
    assert verdict(4, passed, f"{len(reps)} (set, direction, r) checks, worst margin {worst_margin(reps):.2e}")


# 5 -----------------------------------------------------------------------------------

def test_criterion_05_layercake(verdict, gauss_corpus, euclid_corpus):
    reps = [layercake_check(sc.E, r, 8) for sc, _ in gauss_corpus if sc.E.n == 2 for r in DEFAULT_RADII]
    reps += [layercake_check(sc.E, r, 8, K=sc.family.body) for sc, _ in euclid_corpus if sc.E.n == 2
             for r in DEFAULT_RADII]
    passed = all(rep.passed for rep in reps)
    # near-equality instance: H_{e1,0}, r = 1, steps = 8
    H = build(ScenarioFamily("tilted-halfspace", 0.0)).E
    rep = layercake_check(H, 1.0, 8)
    gap = abs(rep.lhs.value - rep.rhs.value)
    assert verdict(5, passed and gap <= 0.02, f"{len(reps)} checks pass: {passed}; half-space r = 1 "
                                              f"|LHS - RHS| = {gap:.4f} (<= 0.02)")


# 6 -----------------------------------------------------------------------------------

def test_criterion_06_euclidean_concentration(verdict, euclid_corpus):
    reps = [euclid_deficit_report(sc.E, sc.family.body, r, alpha=a)
            for sc, a in euclid_corpus for r in DEFAULT_RADII]
    passed = all(rep.passed for rep in reps)
    E = rasterize(ConvexBody.box((1.0, 0.25)), ALIGNED)
    a = alpha_convex(E, SQUARE)
    box_ok = abs(a.value - 1.0) <= 0.02
    devs = []
    for r in (0.3, 2.0):
        rep = euclid_deficit_report(E, SQUARE, r, alpha=a)
        box_ok &= abs(rep.lhs.value - 0.5 * r) <= rep.lhs.err + 1e-12 and rep.passed
        devs.append(abs(rep.lhs.value - 0.5 * r))
    assert verdict(6, passed and box_ok,
                   f"{len(reps)} reports pass: {passed}; box |LHS - r/2| = {max(devs):.1e}, alpha = {a.value:.4f}")


# 7 -----------------------------------------------------------------------------------

def test_criterion_07_monotone_cover(verdict, euclid_corpus):
    reps = [monotone_cover_check(sc.E, sc.family.body, r) for sc, _ in euclid_corpus for r in DEFAULT_RADII]
    passed = all(rep.passed for rep in reps)
    worst = 0.0
    for K in (SQUARE, DISK):
        E = rasterize(K, ALIGNED)
        for r in DEFAULT_RADII:
            rep = monotone_cover_check(E, K, r)
            for side in (rep.lhs, rep.rhs):
                worst = max(worst, side.value / side.err if side.err else side.value)
    assert verdict(7, passed and worst <= 2.0,
                   f"{len(reps)} checks pass: {passed}; E = K max side / err = {worst:.3f} (<= 2)")


# 8 -----------------------------------------------------------------------------------

def test_criterion_08_brunn_minkowski(verdict, euclid_corpus):
    reps = [bm_report(sc.E, sc.family.body.scaled(r)) for sc, _ in euclid_corpus for r in DEFAULT_RADII]
    passed = all(rep.passed for rep in reps)
    devs = []
    # aligned windows: every edge of E, F and E + F sits on a cell edge
    for F, spec in ((SQUARE, ALIGNED), (ConvexBody.box((1.0, 0.25)), GridSpec(2, 4.0, M))):
        rep = bm_report(rasterize(F.scaled(2.0), spec), F)
        passed &= rep.passed
        devs.append(abs(rep.lhs.value))
    assert verdict(8, passed and max(devs) <= 5e-3,
                   f"{len(reps) + 2} reports pass: {passed}; homothety |LHS| = {max(devs):.1e} (<= 5e-3)")


# 9 -----------------------------------------------------------------------------------

def test_criterion_09_sharpness(verdict):
    slab, _ = sharpness_fit(sharpness_points("shifted-slab-halfspace", SHARP_EPS, 0.5, mass=0.5), 4)
    box, _ = sharpness_fit(sharpness_points("box", SHARP_EPS, 0.5), 4)
    ok = 1.8 <= slab <= 2.2 and 1.8 <= box <= 2.2
    assert verdict(9, ok, f"exponents: gaussian shifted-slab {slab:.3f}, euclidean box {box:.3f} "
                          f"(both need [1.8, 2.2])")


@pytest.mark.parametrize("fid", ["shifted-slab-halfspace", "box"])
def test_sharpness_points_agree_with_grid(fid):
    # the fit uses closed forms; the grid must see the same deficits and asymmetries
    pts = sharpness_points(fid, SHARP_EPS, 0.5, **({"mass": 0.5} if fid != "box" else {}))
    for eps, (alpha_x, deficit_x) in zip(SHARP_EPS, pts):
        sc = build(ScenarioFamily(fid, eps), r_max=0.5)
        if fid == "box":
            rep = euclid_deficit_report(sc.E, SQUARE, 0.5)
        else:
            rep = gauss_deficit_report(sc.E, 0.5)
        assert abs(rep.lhs.value - deficit_x) <= rep.lhs.err
        assert abs(rep.intermediates["alpha"] - alpha_x) <= rep.intermediates["alpha_err"]


# 10 ----------------------------------------------------------------------------------

def test_criterion_10_perimeters(verdict):
    spec = GridSpec(2, 4.0, M)
    rel = []
    for s in (0.0, 1.0):
        p = gaussian_perimeter(rasterize(HalfSpace((1.0, 0.0), s), spec))
        rel.append(abs(p.value / math.exp(-0.5 * s * s) - 1.0))
    # K is the axis-aligned cube; the window scales with sK, so h / s is fixed
    for K, m, scales in ((SQUARE, M, (0.5, 1.0, 2.0)), (ConvexBody.cube(3), M3, (0.5, 1.0))):
        n = K.n
        for s in scales:
            p = anisotropic_perimeter(rasterize(K.scaled(s), GridSpec(n, 0.64 * s, m)), K)
            rel.append(abs(p.value / (n * s ** (n - 1) * K.volume) - 1.0))
    assert verdict(10, max(rel) <= 0.05, f"max relative perimeter error {max(rel):.4f} (<= 0.05)")


# 11 ----------------------------------------------------------------------------------

def test_criterion_11_barycenter(verdict):
    H = rasterize(HalfSpace((1.0, 0.0), 0.0), GridSpec(2, 4.0, M))
    b = gauss_barycenter(H)
    dev = float(np.linalg.norm(np.asarray(b.b) - (-INV_SQRT2PI, 0.0)))
    beta = beta_strong(H)
    ok = dev <= 5e-3 and beta.value <= 2.0 * beta.err
    assert verdict(11, ok, f"|b(H) - (-1/sqrt(2 pi), 0)| = {dev:.1e} (<= 5e-3); "
                           f"beta = {beta.value:.1e}, err = {beta.err:.1e}")


# 12 ----------------------------------------------------------------------------------

def test_criterion_12_determinism(verdict, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[grid]\nm = 64\n[radii]\nr = 0.25, 1\n[run]\nseed = 11\n", encoding="utf-8")
    for name in ("a", "b"):
        main(["--config", str(cfg), "--out", str(tmp_path / name)])
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("report.csv", "summary.json"))
    assert verdict(12, same, "two runs, same config and seed: report.csv and summary.json byte-identical")
