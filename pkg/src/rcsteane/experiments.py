"""Sweeps, threshold searches, axis averages and noise ensembles.

Every function here returns plain records; the CLI turns them into CSV plus a
JSON manifest.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from . import channels as ch
from .logical import (
    GainRecord,
    NoiseAssignment,
    concatenate_levels,
    zrot_recursion_infidelities,
)

AXES = {"z": (0.0, 0.0), "x": (math.pi / 2, 0.0), "y": (math.pi / 2, math.pi / 2)}


def parse_axis(axis) -> tuple[float, float] | str:
    """``"z"``, ``"x"``, ``"y"``, ``"haar"``, ``"theta,phi"`` or a ``(theta, phi)`` pair."""
    if isinstance(axis, str):
        key = axis.strip().lower()
        if key == "haar":
            return "haar"
        if key in AXES:
            return AXES[key]
        try:
            theta, phi = (float(v) for v in key.split(","))
        except ValueError:
            raise ValueError(f"unrecognised axis {axis!r}") from None
        return theta, phi
    theta, phi = axis
    return float(theta), float(phi)


def axis_label(axis) -> str:
    parsed = parse_axis(axis)
    if parsed == "haar":
        return "haar"
    for name, val in AXES.items():
        if np.allclose(parsed, val):
            return name
    return f"{parsed[0]:.6g},{parsed[1]:.6g}"


def _canonical_axis(theta: float, phi: float) -> tuple[float, float, float]:
    # Conjugating every qubit by the same Pauli flips two axis components and
    # leaves both logical infidelities unchanged, so fold onto ny, nz >= 0.
    n = ch.RotationParams(theta, phi, 0.0).axis
    if n[2] < 0:
        n = n * np.array([-1, 1, -1])
    if n[1] < 0:
        n = n * np.array([-1, -1, 1])
    n = np.where(np.abs(n) < 1e-13, 0.0, n)
    return tuple(round(float(v), 12) for v in n)


@functools.lru_cache(maxsize=200_000)
def _axis_infidelities(axis_key, omega: float, p: float, levels: int):
    chi = ch.unitary_to_chi(ch.axis_unitary(axis_key, omega))
    if p:
        chi = ch.compose(ch.depolarizing(p), chi)
    raw = concatenate_levels(chi, levels)
    tw = concatenate_levels(chi, levels, twirled=True)
    return tuple((a.infidelity, b.infidelity) for a, b in zip(raw, tw))


def rotation_infidelities(
    theta: float, phi: float, omega: float, levels: int, *, p: float = 0.0, method: str = "engine"
) -> list[tuple[float, float]]:
    """``(r_raw, r_twirled)`` for levels ``1..levels`` of i.i.d. rotation noise.

    ``method="recursion"`` uses the closed-form Z-rotation polynomials and is
    only available for the Z axis without depolarizing noise.
    """
    if method == "recursion":
        if p or not np.allclose(ch.RotationParams(theta, phi, 0).axis, [0, 0, 1]):
            raise ValueError("recursion method only covers pure Z rotations")
        return zrot_recursion_infidelities(omega, levels)
    if method != "engine":
        raise ValueError(f"unknown method {method!r}")
    return list(_axis_infidelities(_canonical_axis(theta, phi), float(omega), float(p), levels))


def _ratio(r, t):
    return r / t if t > 0 else math.nan


def rotation_gains(theta, phi, omega, levels, **kw) -> list[float]:
    return [_ratio(r, t) for r, t in rotation_infidelities(theta, phi, omega, levels, **kw)]


def gain_curve(axis, levels: Sequence[int], omegas: Sequence[float], *, method: str = "engine") -> list[GainRecord]:
    theta, phi = parse_axis(axis)
    top = max(levels)
    out = []
    for w in omegas:
        if not 0 < w <= math.pi:
            raise ValueError(f"omega={w} outside (0, pi]")
        pairs = rotation_infidelities(theta, phi, w, top, method=method)
        for lev in levels:
            r, t = pairs[lev - 1]
            out.append(
                GainRecord("rotation", {"axis": axis_label(axis), "theta": theta, "phi": phi, "omega": w}, None, lev, r, t)
            )
    return out


# --- axis averages ------------------------------------------------------------


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Legendre nodes in ``cos(theta)`` times a uniform grid in ``phi``."""

    n_theta: int = 16
    n_phi: int = 32

    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        phis = 2 * math.pi * np.arange(self.n_phi) / self.n_phi
        for ct, wt in zip(x, w):
            theta = math.acos(ct)
            for ph in phis:
                # weights sum to 1: (1/4pi) * wt * (2pi / n_phi)
                yield theta, float(ph), wt / (2 * self.n_phi)


def haar_average_gain(
    levels: int, omega: float, quad: Quadrature = Quadrature(), *, p: float = 0.0
) -> list[float]:
    """Axis-averaged gain for levels ``1..levels``, normalised so constants average to themselves."""
    acc = [[] for _ in range(levels)]
    for theta, phi, wt in quad.nodes():
        for lev, d in enumerate(rotation_gains(theta, phi, omega, levels, p=p)):
            acc[lev].append(wt * d)
    return [math.fsum(a) for a in acc]


# --- thresholds -----------------------------------------------------------------


@dataclass
class ThresholdResult:
    axis: str
    levels: tuple[int, int]
    omega_star: float | None
    bracket: tuple[float, float] | None
    scanned: tuple[float, float] = (0.0, 0.0)

    @property
    def found(self) -> bool:
        return self.omega_star is not None

    def row(self) -> dict:
        lo, hi = self.bracket or ("", "")
        return {
            "axis": self.axis,
            "level_lo": self.levels[0],
            "level_hi": self.levels[1],
            "omega_star": "" if self.omega_star is None else repr(self.omega_star),
            "bracket_lo": lo if lo == "" else repr(lo),
            "bracket_hi": hi if hi == "" else repr(hi),
            "status": "ok" if self.found else "no-threshold",
        }


def bisect_crossing(
    g: Callable[[float], float],
    interval: tuple[float, float] = (0.2, 1.2),
    *,
    step: float = 0.05,
    xtol: float = 1e-4,
) -> tuple[float, tuple[float, float]] | None:
    """First ``+ -> -`` sign change of ``g`` on a coarse scan, refined by bisection."""
    a, b = interval
    grid = np.arange(a, b + step / 2, step)
    prev_x, prev_g = grid[0], g(grid[0])
    for x in grid[1:]:
        gx = g(x)
        if prev_g > 0 and gx < 0:
            lo, hi = float(prev_x), float(x)
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi), (lo, hi)
        if gx == 0 and prev_g > 0:
            return float(x), (float(x), float(x))
        prev_x, prev_g = x, gx
    return None


def find_threshold(
    axis,
    level_lo: int = 1,
    level_hi: int = 2,
    *,
    interval: tuple[float, float] = (0.2, 1.2),
    step: float = 0.05,
    method: str = "engine",
    quad: Quadrature = Quadrature(),
    p: float = 0.0,
) -> ThresholdResult:
    """Rotation angle where ``delta_hi`` drops below ``delta_lo``.

    ``axis="haar"`` thresholds the axis-averaged gains instead.
    """
    parsed = parse_axis(axis)
    if parsed == "haar":
        def g(w):
            d = haar_average_gain(level_hi, w, quad, p=p)
            return d[level_hi - 1] - d[level_lo - 1]
    else:
        theta, phi = parsed

        def g(w):
            d = rotation_gains(theta, phi, w, level_hi, method=method, p=p)
            return d[level_hi - 1] - d[level_lo - 1]

    hit = bisect_crossing(g, interval, step=step)
    label = axis_label(axis)
    if hit is None:
        return ThresholdResult(label, (level_lo, level_hi), None, None, interval)
    return ThresholdResult(label, (level_lo, level_hi), hit[0], hit[1], interval)


def _sphere_point(args):
    theta, phi, lo, hi, interval, step = args
    return theta, phi, find_threshold((theta, phi), lo, hi, interval=interval, step=step)


def sphere_grid(n_theta: int = 8, n_phi: int = 16):
    thetas = np.linspace(0, math.pi, n_theta)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    return [(float(t), float(p)) for t in thetas for p in phis]


def threshold_sphere(
    n_theta: int = 8,
    n_phi: int = 16,
    level_lo: int = 1,
    level_hi: int = 2,
    *,
    interval=(0.2, 1.2),
    step: float = 0.05,
    workers: int = 1,
) -> list[tuple[float, float, ThresholdResult]]:
    jobs = [(t, p, level_lo, level_hi, interval, step) for t, p in sphere_grid(n_theta, n_phi)]
    return _run(jobs, _sphere_point, workers)


# --- depolarizing + coherent ----------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    p: float
    r_target: float
    omega: float
    level: int
    delta_haar: float

    def row(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(self).items()}


def dep_coherent_sweep(
    p_grid: Sequence[float],
    r_target: float,
    level: int = 1,
    quad: Quadrature = Quadrature(),
) -> tuple[list[SweepPoint], list[str]]:
    """Axis-averaged gain at fixed physical infidelity, one point per feasible ``p``.

    The composed channel's infidelity does not depend on the rotation axis, so
    ``omega`` is calibrated once per ``p`` on the Z axis.
    """
    points, notes = [], []
    for p in p_grid:
        try:
            omega = ch.calibrate_omega(p, r_target)
        except ValueError as exc:
            notes.append(f"p={p}: skipped ({exc})")
            continue
        if omega == 0.0:
            # pure depolarizing: twirling changes nothing
            avg = 1.0
        else:
            avg = haar_average_gain(level, omega, quad, p=p)[level - 1]
        points.append(SweepPoint(p, r_target, omega, level, avg))
    return points, notes


# --- ensembles -------------------------------------------------------------------

MODELS = ("random-rotations", "random-cptp")
STRENGTH_RANGE = {"random-rotations": (1e-3, 1e-1), "random-cptp": (1e-3, 1e-1)}


@dataclass(frozen=True)
class EnsembleSample:
    index: int
    strength: float
    physical_infidelity: float
    pairs: tuple[tuple[float, float], ...]


def _sample_noise(model: str, rng: np.random.Generator, levels: int, *, variance: bool = True):
    lo, hi = STRENGTH_RANGE[model]
    strength = float(np.exp(rng.uniform(math.log(lo), math.log(hi))))
    if model == "random-rotations":
        axis = ch.random_axis(rng)
        blocks = [
            NoiseAssignment(tuple(ch.random_axis_rotation(rng, strength, axis=axis, variance=variance) for _ in range(7)))
            for _ in range(7 ** (levels - 1))
        ]
        phys = float(np.mean([ch.process_infidelity(c) for b in blocks for c in b.per_qubit]))
        return strength, phys, blocks
    if model == "random-cptp":
        chi = ch.random_cptp(rng, strength)
        return strength, ch.process_infidelity(chi), chi
    raise ValueError(f"unknown model {model!r}")


def _ensemble_job(args) -> EnsembleSample:
    model, seed, index, levels, variance = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    strength, phys, noise = _sample_noise(model, rng, levels, variance=variance)
    raw = concatenate_levels(noise, levels)
    tw = concatenate_levels(noise, levels, twirled=True)
    return EnsembleSample(index, strength, phys, tuple((a.infidelity, b.infidelity) for a, b in zip(raw, tw)))


def ensemble_study(
    model: str,
    n: int,
    levels: int = 2,
    seed: int = 0,
    *,
    workers: int = 1,
    variance: bool = True,
) -> list[GainRecord]:
    """Per-sample gains for a random noise ensemble.

    Each sample gets its own generator seeded from ``(seed, index)``, so output
    is identical for any worker count.  For ``random-rotations`` every sample
    fixes one random axis and draws a separate angle for each of the
    ``7**levels`` physical qubits; the level-1 record is the first block's.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if n < 1:
        raise ValueError("need at least one sample")
    jobs = [(model, seed, i, levels, variance) for i in range(n)]
    samples = sorted(_run(jobs, _ensemble_job, workers), key=lambda s: s.index)
    out = []
    for s in samples:
        for lev, (r, t) in enumerate(s.pairs, start=1):
            params = {"sample": s.index, "strength": s.strength, "physical_infidelity": s.physical_infidelity}
            out.append(GainRecord(model, params, seed, lev, r, t))
    return out


def _run(jobs, fn, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# --- output ---------------------------------------------------------------------


def write_csv(rows: Sequence[dict], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames: list[str] = []
    for r in rows:
        for k in r:
            if k not in fieldnames:
                fieldnames.append(k)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
    return path


def write_manifest(path: Path, command: str, config: dict, outputs: Sequence[Path], wall_time: float, notes=()) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": [Path(o).name for o in outputs],
        "wall_time_s": round(wall_time, 3),
        "notes": list(notes),
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
