"""Acceptance criteria, one PASS/FAIL line each (see the summary section).

Run with ``pytest tests/test_acceptance.py -v``.  The long studies (axis
averages, sphere map, ensembles) take tens of minutes on one core.
"""

import math
import time

import numpy as np
import pytest

from rcsteane import channels as ch
from rcsteane import experiments as ex
from rcsteane.logical import (
    logical_chi_with_infidelity,
    zrot_closed_forms,
    zrot_recursion_infidelities,
)
from rcsteane.verify import check_brute_force, check_twirl_equivalence, recursion_residuals

ENSEMBLE_N = 2000


@pytest.fixture(scope="module")
def z_threshold():
    start = time.perf_counter()
    res = ex.find_threshold("z", 1, 2)
    return res, time.perf_counter() - start


def test_01_closed_forms(report):
    start = time.perf_counter()
    worst = 0.0
    for w in np.linspace(math.pi / 2 / 50, math.pi / 2, 50):
        cf = zrot_closed_forms(w)
        chi, r = logical_chi_with_infidelity(ch.z_rotation(w))
        _, rt = logical_chi_with_infidelity(ch.twirl(ch.z_rotation(w)))
        worst = max(worst, abs(r - cf["r_raw_L1"]), abs(rt - cf["r_twirled_L1"]), abs(chi[0, 3] - cf["chi03_L1"]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10
    assert report("01 closed-form level 1", ok, f"max residual {worst:.2e} (tol 1e-12), {elapsed:.1f}s (< 10s)")


def test_02_recursion_polynomials(report):
    start = time.perf_counter()
    worst = {}
    for w in (0.05, 0.2, math.pi / 20, 0.5, 1.0):
        for (name, lev), v in recursion_residuals(w, (2, 3)).items():
            worst[name] = max(worst.get(name, 0.0), v)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-12 and elapsed < 60
    detail = ", ".join(f"{k} {v:.2e}" for k, v in sorted(worst.items()))
    assert report("02 recursion levels 2-3", ok, f"max residuals {detail} (tol 1e-12), {elapsed:.1f}s")


def test_03_small_angle_coefficients(report):
    coeffs = []
    for w in (1e-2, 1e-3):
        q = (w / 2) ** 4
        _, r = logical_chi_with_infidelity(ch.z_rotation(w))
        _, rt = logical_chi_with_infidelity(ch.twirl(ch.z_rotation(w)))
        coeffs.append((r / q, rt / q))
    _, r = logical_chi_with_infidelity(ch.z_rotation(1e-3))
    _, rt = logical_chi_with_infidelity(ch.twirl(ch.z_rotation(1e-3)))
    delta = r / rt
    ok = all(abs(a / 63 - 1) < 0.01 and abs(b / 21 - 1) < 0.01 for a, b in coeffs) and abs(delta / 3 - 1) < 1e-3
    fits = ", ".join(f"({a:.3f}, {b:.3f})" for a, b in coeffs)
    assert report("03 small-angle coefficients", ok, f"fits {fits} vs (63, 21) within 1%; delta_1 {delta:.5f} vs 3 within 0.1%")


def test_04_doubly_exponential_gain(report):
    start = time.perf_counter()
    levels = np.arange(1, 6)
    pairs = zrot_recursion_infidelities(math.pi / 20, 5)
    deltas = np.array([r / t for r, t in pairs])
    y = np.log(np.log(deltas))
    slope, icpt = np.polyfit(levels, y, 1)
    resid = y - (slope * levels + icpt)
    r2 = 1 - resid @ resid / np.sum((y - y.mean()) ** 2)
    ideal = 3.0 ** (2.0 ** levels[:3] - 1)
    rel = np.abs(deltas[:3] / ideal - 1)
    elapsed = time.perf_counter() - start
    ok = r2 > 0.999 and np.all(rel < 0.05) and elapsed < 300
    assert report(
        "04 doubly-exponential gain",
        ok,
        f"R^2 {r2:.5f} (> 0.999); delta_1..3 {np.round(deltas[:3], 3).tolist()} vs {ideal.tolist()}, "
        f"rel err {np.round(rel, 4).tolist()} (< 0.05)",
    )


def test_05_z_threshold(report, z_threshold):
    res, elapsed = z_threshold
    ok = res.found and abs(res.omega_star - 0.51) <= 0.02 and elapsed < 120
    assert report("05 Z-axis threshold levels 1-2", ok, f"omega* {res.omega_star:.4f} (target 0.51 +- 0.02), {elapsed:.1f}s")


def test_05b_z_common_crossover_higher_levels(report):
    # supplementary: crossings of consecutive higher-level pairs converge to one angle
    stars = [ex.find_threshold("z", lo, lo + 1, method="recursion").omega_star for lo in (2, 3, 4)]
    ok = all(abs(s - 0.51) <= 0.02 for s in stars)
    assert report("05b Z-axis crossover levels 2-5 (supplementary)", ok, f"omega* {np.round(stars, 4).tolist()} (0.51 +- 0.02)")


@pytest.mark.slow
def test_06_haar_threshold(report, z_threshold):
    start = time.perf_counter()
    res = ex.find_threshold("haar", 1, 2)
    elapsed = time.perf_counter() - start
    z_star = z_threshold[0].omega_star
    ok = res.found and abs(res.omega_star - 0.65) <= 0.05 and res.omega_star > z_star and elapsed < 1800
    star = f"{res.omega_star:.4f}" if res.found else "none"
    assert report(
        "06 axis-averaged threshold", ok, f"omega_bar* {star} (0.65 +- 0.05), Z omega* {z_star:.4f}, {elapsed:.0f}s"
    )


@pytest.mark.slow
def test_06b_haar_crossover_higher_levels(report):
    # supplementary: axis-averaged crossing of levels 2 and 3
    res = ex.find_threshold("haar", 2, 3, interval=(0.4, 0.8))
    ok = res.found and abs(res.omega_star - 0.65) <= 0.05
    star = f"{res.omega_star:.4f}" if res.found else "none"
    assert report("06b axis-averaged crossover levels 2-3 (supplementary)", ok, f"omega_bar* {star} (0.65 +- 0.05)")


@pytest.mark.slow
def test_07_sphere_map(report, z_threshold):
    start = time.perf_counter()
    res = ex.threshold_sphere(8, 16, 1, 2)
    elapsed = time.perf_counter() - start
    z_star = z_threshold[0].omega_star
    found = [(t, p, r.omega_star) for t, p, r in res if r.found]
    best = max(found, key=lambda v: v[2])
    x_star = ex.find_threshold("x", 1, 2).omega_star
    y_star = ex.find_threshold("y", 1, 2).omega_star
    ok = best[2] > z_star and elapsed < 7200
    assert report(
        "07 sphere map",
        ok,
        f"max omega* {best[2]:.4f} at theta={best[0]:.3f}, phi={best[1]:.3f} vs Z {z_star:.4f}; "
        f"{len(found)}/{len(res)} axes with a threshold; equator phi=0 {x_star:.4f}, phi=pi/2 {y_star:.4f}; {elapsed:.0f}s",
    )


@pytest.mark.slow
def test_08_fixed_infidelity_sweep(report):
    p_grid = [1e-4, 2e-4, 5e-4, 1e-3]
    pts, notes = ex.dep_coherent_sweep(p_grid, 0.003, 1)
    vals = [pt.delta_haar for pt in pts]
    ok = len(pts) == len(p_grid) and all(a > b for a, b in zip(vals, vals[1:]))
    assert report("08 fixed-infidelity sweep", ok, f"delta_bar_1 {np.round(vals, 5).tolist()} strictly decreasing in p")


@pytest.fixture(scope="module")
def ensembles():
    return {m: ex.ensemble_study(m, ENSEMBLE_N, levels=2, seed=0) for m in ex.MODELS}


def _classes(records, level):
    out = {"gain": 0, "loss": 0, "grey": 0, "undefined": 0}
    for r in records:
        if r.level == level:
            out[r.classification] += 1
    return out


@pytest.mark.slow
def test_09_ensembles(report, ensembles):
    cptp, rot = ensembles["random-cptp"], ensembles["random-rotations"]
    c1, c2 = _classes(cptp, 1), _classes(cptp, 2)
    r1, r2 = _classes(rot, 1), _classes(rot, 2)
    deltas = [r.delta for r in rot if r.defined]
    a = c1["loss"] == 0
    b = all(c["gain"] > 0 and c["loss"] > 0 for c in (c2, r1, r2))
    c = max(deltas) >= 5 and min(deltas) <= 1 / 5
    assert report(
        "09 ensembles (N=2000)",
        a and b and c,
        f"cptp L1 {c1}; cptp L2 {c2}; rotations L1 {r1}; L2 {r2}; "
        f"rotation delta range [{min(deltas):.3g}, {max(deltas):.3g}] (need <= 0.2 and >= 5)",
    )


def test_10_brute_force_oracle(report):
    res = check_brute_force(seed=11, samples=3)
    assert report("10 dense brute-force oracle", res.passed, f"max |engine - dense| {res.residual:.2e} (tol 1e-8)")


def test_11_twirl_equivalence(report):
    res = check_twirl_equivalence(samples=20)
    assert report("11 twirl equivalence", res.passed, f"max |frame average - twirl| {res.residual:.2e} (tol 1e-14)")
