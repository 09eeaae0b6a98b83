"""Independent oracles and the self-check suite behind ``rcsteane verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channels as ch
from .logical import (
    concatenate_levels,
    f00,
    f03,
    g00,
    logical_chi_with_infidelity,
    zrot_closed_forms,
)
from .pauli import PauliOperator, build_min_weight_decoder, coset_phase, multiply, steane_code


def _apply_single_qubit(rho: np.ndarray, chi, q: int, n: int) -> np.ndarray:
    # superop rows/cols are column-stacked: index = row + 2 * col
    s4 = ch.chi_to_superop(chi).reshape(2, 2, 2, 2)  # [c', r', c, r]
    t = rho.reshape((2,) * (2 * n))
    out = np.einsum(s4, [0, 1, 2, 3], t, _idx(q, n), _out_idx(q, n))
    return out.reshape(2**n, 2**n)


def _idx(q, n):
    # operand labels for rho: rows 10.., cols 10+n.., with qubit q replaced by r=3, c=2
    rows = [10 + i for i in range(n)]
    cols = [10 + n + i for i in range(n)]
    rows[q] = 3
    cols[q] = 2
    return rows + cols


def _out_idx(q, n):
    rows = [10 + i for i in range(n)]
    cols = [10 + n + i for i in range(n)]
    rows[q] = 1
    cols[q] = 0
    return rows + cols


def brute_force_logical_chi(per_qubit, code=None, decoder=None) -> np.ndarray:
    """Dense simulation: encode, apply noise, measure syndromes, recover, decode.

    Uses the ``2**n``-dimensional Hilbert space directly and never touches the
    coset-phase bookkeeping.
    """
    code = code or steane_code()
    decoder = decoder or build_min_weight_decoder(code)
    n = code.n
    dim = 2**n
    gens = [g.to_matrix() for g in code.generators]
    proj0 = np.eye(dim, dtype=complex)
    for g in gens:
        proj0 = proj0 @ (np.eye(dim) + g) / 2
    zero = proj0[:, 0] / np.linalg.norm(proj0[:, 0])
    one = code.logical_x.to_matrix() @ zero
    enc = np.stack([zero, one], axis=1)  # (dim, 2)

    nsyn = 1 << len(gens)
    projectors = []
    for s in range(nsyn):
        p = np.eye(dim, dtype=complex)
        for gi, g in enumerate(gens):
            sign = -1 if (s >> (len(gens) - 1 - gi)) & 1 else 1
            p = p @ (np.eye(dim) + sign * g) / 2
        projectors.append((p, decoder.recovery[s].to_matrix()))

    sop = np.zeros((4, 4), dtype=complex)
    for j in range(2):
        for i in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1
            rho = enc @ e @ enc.conj().T
            for q in range(n):
                rho = _apply_single_qubit(rho, per_qubit[q], q, n)
            acc = np.zeros_like(rho)
            for p, r in projectors:
                acc += r @ p @ rho @ p @ r.conj().T
            out = enc.conj().T @ acc @ enc
            sop[:, i + 2 * j] = out.reshape(-1, order="F")
    return ch.superop_to_chi(sop)


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    gating: bool = True

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def check_closed_forms(n_points: int = 50) -> CheckResult:
    worst = 0.0
    for w in np.linspace(math.pi / 2 / n_points, math.pi / 2, n_points):
        cf = zrot_closed_forms(w)
        chi, r = logical_chi_with_infidelity(ch.z_rotation(w))
        _, rt = logical_chi_with_infidelity(ch.twirl(ch.z_rotation(w)))
        worst = max(worst, abs(r - cf["r_raw_L1"]), abs(rt - cf["r_twirled_L1"]), abs(chi[0, 3] - cf["chi03_L1"]))
    return CheckResult("closed-form", worst, 1e-12)


def check_recursion_level1(n_points: int = 20) -> CheckResult:
    """Printed polynomials map the physical Z rotation onto the level-1 channel."""
    worst = 0.0
    for w in np.linspace(0.05, math.pi / 2, n_points):
        phys = ch.z_rotation(w)
        chi, _ = logical_chi_with_infidelity(phys)
        chit, _ = logical_chi_with_infidelity(ch.twirl(phys))
        worst = max(
            worst,
            abs(chi[0, 0] - f00(phys[0, 0].real)),
            abs(chi[0, 3] - f03(phys[0, 3])),
            abs(chit[0, 0] - g00(phys[0, 0].real)),
        )
    return CheckResult("recursion-level1", worst, 1e-12)


def recursion_residuals(omega: float, levels=(2, 3)) -> dict:
    """Engine level-l entries minus the polynomials applied to the engine's level l-1."""
    raw = concatenate_levels(ch.z_rotation(omega), max(levels))
    tw = concatenate_levels(ch.z_rotation(omega), max(levels), twirled=True)
    out = {}
    for lev in levels:
        prev, cur = raw[lev - 2].chi, raw[lev - 1].chi
        prev_t, cur_t = tw[lev - 2].chi, tw[lev - 1].chi
        out[("f00", lev)] = abs(cur[0, 0] - f00(prev[0, 0].real))
        out[("f03", lev)] = abs(cur[0, 3] - f03(prev[0, 3]))
        out[("g00", lev)] = abs(cur_t[0, 0] - g00(prev_t[0, 0].real))
    return out


def check_twirled_recursion(omegas=(0.05, 0.2, math.pi / 20, 0.5, 1.0)) -> CheckResult:
    worst = max(v for w in omegas for (k, _), v in recursion_residuals(w).items() if k == "g00")
    return CheckResult("recursion-twirled-L2-L3", worst, 1e-12)


def check_raw_recursion(omegas=(0.05, 0.2, math.pi / 20, 0.5, 1.0)) -> CheckResult:
    """Raw f00/f03 against the hard-decoder engine at levels 2-3.

    Informational: the printed raw polynomials assume the level-l channel is
    still a pure rotation, which the averaged logical channel is not.
    """
    worst = max(v for w in omegas for (k, _), v in recursion_residuals(w).items() if k != "g00")
    return CheckResult("recursion-raw-L2-L3", worst, 1e-12, gating=False)


def random_noise(rng: np.random.Generator, n: int = 7, t: float = 0.3) -> list:
    return [ch.random_cptp(rng, t) for _ in range(n)]


def check_brute_force(seed: int = 11, samples: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        noise = random_noise(rng)
        engine, _ = logical_chi_with_infidelity(noise)
        dense = brute_force_logical_chi(noise)
        worst = max(worst, float(np.max(np.abs(np.asarray(engine) - dense))))
    return CheckResult("brute-force", worst, 1e-8)


def check_twirl_equivalence(seed: int = 5, samples: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = ch.random_cptp(rng, rng.uniform(0.05, 1.0))
        worst = max(worst, float(np.max(np.abs(np.asarray(ch.pauli_frame_average(x)) - np.asarray(ch.twirl(x))))))
    return CheckResult("twirl-equivalence", worst, 1e-14)


def check_phase_consistency(code=None, decoder=None) -> CheckResult:
    """``R |E Pl| == phi S |Pl|`` rebuilt exactly for every correctable E and l."""
    code = code or steane_code()
    decoder = decoder or build_min_weight_decoder(code)
    failures = 0
    for r in decoder.recovery:
        for st in code.stabilizer_group:
            e = multiply(r, st).bare()
            for l in range(4):
                res = coset_phase(code, decoder, e, l)
                target = code.logicals[l].bare()
                moved = multiply(e, target).bare()
                lhs = multiply(decoder.recovery[code.syndrome(moved)], moved)
                if res is None:
                    failures += 1
                    continue
                phi, s = res
                k = int(round(math.atan2(phi.imag, phi.real) / (math.pi / 2))) % 4
                rhs = multiply(PauliOperator(code.n, 0, 0, k), multiply(s, target))
                if rhs != lhs:
                    failures += 1
    # decoder must also map each syndrome back to zero
    for s, r in enumerate(decoder.recovery):
        if code.syndrome(r) != s:
            failures += 1
    return CheckResult("phi-consistency", float(failures), 0.0)


def run_checks(fast: bool = False) -> list[CheckResult]:
    checks = [
        check_phase_consistency(),
        check_closed_forms(),
        check_recursion_level1(),
        check_twirled_recursion(),
        check_raw_recursion(),
        check_twirl_equivalence(),
    ]
    if not fast:
        checks.append(check_brute_force())
    return checks
