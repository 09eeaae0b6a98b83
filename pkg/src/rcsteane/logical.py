"""Syndrome-averaged logical channel of the Steane code and its concatenations.

For every bare Pauli ``A`` the decoder gives ``R_{s(A)} A = alpha_A S L_k`` with
``L_k`` a logical Pauli.  The averaged logical chi matrix is then

    chi_bar[l, m] = sum_s sum_{A in G(s,l), B in G(s,m)} alpha_A conj(alpha_B) chi[A, B]

where ``G(s,l)`` holds the 64 Paulis with syndrome ``s`` and logical class
``l`` and ``chi[A, B]`` is a product of single-qubit chi entries.  This is the
correctable-set sum ``phi(E,l) phi*(E',m) chi[E Pl, Pm E']`` reindexed by
``A = |E Pl|``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import ChiMatrix, ChannelError, check_chi, twirl
from .pauli import (
    DecoderTable,
    StabilizerCode,
    all_paulis,
    build_min_weight_decoder,
    decompose,
    steane_code,
)

GREY_FRACTION = 0.10
LOGICAL_TOL = 1e-9

# qubit split used to build the product lookup tables
_GROUPS = ((0, 1, 2, 3), (4, 5, 6))


@dataclass(frozen=True)
class CosetTable:
    """Paulis grouped by (logical class, syndrome) with their decoder phases."""

    letters: np.ndarray  # (4, nsyn, 64, n) int8
    alpha: np.ndarray  # (4, nsyn, 64) complex
    pair_index: dict = field(repr=False)  # (l, m) -> tuple of int arrays per qubit group


@functools.lru_cache(maxsize=None)
def coset_table(code: StabilizerCode | None = None, decoder: DecoderTable | None = None) -> CosetTable:
    code = code or steane_code()
    decoder = decoder or build_min_weight_decoder(code)
    nsyn = 1 << len(code.generators)
    size = len(code.stabilizer_group)
    buckets = [[[] for _ in range(nsyn)] for _ in range(4)]
    for p in all_paulis(code.n):
        d = decompose(code, decoder, p)
        buckets[d.logical][d.syndrome].append((p.letters(), 1j**d.phase))
    letters = np.zeros((4, nsyn, size, code.n), dtype=np.int8)
    alpha = np.zeros((4, nsyn, size), dtype=complex)
    for l in range(4):
        for s in range(nsyn):
            group = buckets[l][s]
            if len(group) != size:
                raise RuntimeError(f"class {l} syndrome {s} has {len(group)} members")
            letters[l, s] = [g[0] for g in group]
            alpha[l, s] = [g[1] for g in group]

    pair_index = {}
    for l in range(4):
        for m in range(l, 4):
            pair = 4 * letters[l][:, :, None, :].astype(np.int32) + letters[m][:, None, :, :]
            idx = []
            for grp in _GROUPS:
                acc = np.zeros(pair.shape[:3], dtype=np.int32)
                for q in grp:
                    acc = acc * 16 + pair[..., q]
                idx.append(acc)
            pair_index[(l, m)] = tuple(idx)
    return CosetTable(letters, alpha, pair_index)


@dataclass(frozen=True)
class NoiseAssignment:
    """Seven per-qubit chi matrices, one per physical qubit of a block."""

    per_qubit: tuple[ChiMatrix, ...]

    def __post_init__(self):
        if len(self.per_qubit) != 7:
            raise ValueError(f"need 7 per-qubit channels, got {len(self.per_qubit)}")
        object.__setattr__(self, "per_qubit", tuple(self.per_qubit))

    @classmethod
    def iid(cls, chi: ChiMatrix) -> "NoiseAssignment":
        return cls((chi,) * 7)

    def twirled(self) -> "NoiseAssignment":
        return NoiseAssignment(tuple(twirl(c) for c in self.per_qubit))

    def is_homogeneous(self) -> bool:
        first = self.per_qubit[0]
        return all(c is first or c == first for c in self.per_qubit[1:])


@dataclass(frozen=True)
class LogicalChannel:
    chi: ChiMatrix
    level: int
    twirled_input: bool
    infidelity: float

    @property
    def r(self) -> float:
        return self.infidelity


def _as_noise(noise) -> NoiseAssignment:
    if isinstance(noise, NoiseAssignment):
        return noise
    if isinstance(noise, ChiMatrix):
        return NoiseAssignment.iid(noise)
    return NoiseAssignment(tuple(noise))


def _product_table(chis: Sequence[np.ndarray], group) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for q in group:
        out = np.kron(out, chis[q].reshape(16))
    return out


def logical_chi_with_infidelity(noise, table: CosetTable | None = None) -> tuple[ChiMatrix, float]:
    """Logical chi plus ``1 - chi_bar[0,0]`` summed from the non-identity diagonal.

    The infidelity is accumulated directly (no ``1 - x`` cancellation), so it
    keeps full relative precision far below machine epsilon.
    """
    noise = _as_noise(noise)
    table = table or coset_table()
    chis = [np.asarray(c) for c in noise.per_qubit]
    out = np.zeros((4, 4), dtype=complex)

    if all(not np.any(c - np.diag(np.diag(c))) for c in chis):
        # Pauli input: only A == B terms survive and the output is diagonal
        diags = np.array([np.diag(c).real for c in chis])  # (7, 4)
        qubits = np.arange(diags.shape[0])
        for l in range(4):
            probs = np.prod(diags[qubits, table.letters[l]], axis=-1)  # (nsyn, 64)
            out[l, l] = math.fsum(probs.ravel())
    else:
        tabs = [_product_table(chis, grp) for grp in _GROUPS]
        for (l, m), idx in table.pair_index.items():
            vals = tabs[0][idx[0]]
            for t, ix in zip(tabs[1:], idx[1:]):
                vals = vals * t[ix]
            per_syn = np.einsum("sab,sa,sb->s", vals, table.alpha[l], table.alpha[m].conj())
            entry = complex(math.fsum(per_syn.real), math.fsum(per_syn.imag))
            out[l, m] = entry
            if l != m:
                out[m, l] = entry.conjugate()
    infid = math.fsum(out[k, k].real for k in range(1, 4))
    try:
        check_chi(out, LOGICAL_TOL)
    except ChannelError as exc:
        raise ChannelError(f"logical channel invariant violated: {exc}") from exc
    return ChiMatrix(out, check=False), infid


def logical_chi(code=None, decoder=None, noise=None) -> ChiMatrix:
    """Averaged logical chi matrix for one code block under ``noise``."""
    table = coset_table(code, decoder) if code is not None or decoder is not None else None
    return logical_chi_with_infidelity(noise, table)[0]


def logical_infidelity(code=None, decoder=None, noise=None) -> float:
    table = coset_table(code, decoder) if code is not None or decoder is not None else None
    return logical_chi_with_infidelity(noise, table)[1]


def _blocks_for_level(noise, levels: int) -> list[NoiseAssignment] | None:
    """Per-block level-1 noise, or None when every block shares one assignment."""
    if isinstance(noise, (NoiseAssignment, ChiMatrix)):
        return None
    items = list(noise)
    if items and all(isinstance(c, ChiMatrix) for c in items) and len(items) == 7:
        return None
    expected = 7 ** (levels - 1)
    if len(items) != expected:
        raise ValueError(f"level {levels} needs {expected} block assignments, got {len(items)}")
    return [_as_noise(b) for b in items]


def concatenate_levels(noise, levels: int, *, twirled: bool = False, table=None) -> list[LogicalChannel]:
    """Logical channels of levels ``1..levels`` under a hard decoder.

    ``noise`` is a single chi (i.i.d. everywhere), a :class:`NoiseAssignment`
    repeated in every level-1 block, or a sequence of ``7**(levels-1)``
    assignments, one per level-1 block (block order = nested qubit order).
    When ``twirled`` every physical channel is Pauli-twirled first.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    table = table or coset_table()
    blocks = _blocks_for_level(noise, levels)
    out = []
    if blocks is None:
        na = _as_noise(noise)
        if twirled:
            na = na.twirled()
        chi, r = logical_chi_with_infidelity(na, table)
        out.append(LogicalChannel(chi, 1, twirled, r))
        for lev in range(2, levels + 1):
            chi, r = logical_chi_with_infidelity(NoiseAssignment.iid(chi), table)
            out.append(LogicalChannel(chi, lev, twirled, r))
        return out

    current = []
    for b in blocks:
        chi, r = logical_chi_with_infidelity(b.twirled() if twirled else b, table)
        current.append((chi, r))
    # only the level-1 channel of the first block is reported for level 1 when
    # blocks differ; the top-level channel is the one that matters
    out.append(LogicalChannel(current[0][0], 1, twirled, current[0][1]))
    for lev in range(2, levels + 1):
        nxt = []
        for i in range(0, len(current), 7):
            group = NoiseAssignment(tuple(c for c, _ in current[i : i + 7]))
            nxt.append(logical_chi_with_infidelity(group, table))
        current = nxt
        out.append(LogicalChannel(current[0][0], lev, twirled, current[0][1]))
    return out


def concatenate(noise, levels: int, *, twirled: bool = False) -> LogicalChannel:
    return concatenate_levels(noise, levels, twirled=twirled)[-1]


@dataclass(frozen=True)
class GainRecord:
    model: str
    params: dict
    seed: int | None
    level: int
    r_raw: float
    r_twirled: float

    @property
    def delta(self) -> float:
        if self.r_twirled == 0:
            return math.nan
        return self.r_raw / self.r_twirled

    @property
    def defined(self) -> bool:
        return self.r_twirled > 0

    @property
    def classification(self) -> str:
        return classify(self.r_raw, self.r_twirled)

    def row(self) -> dict:
        out = {"model": self.model}
        out.update(self.params)
        out.update(
            seed="" if self.seed is None else self.seed,
            level=self.level,
            r_raw=repr(self.r_raw),
            r_twirled=repr(self.r_twirled),
            delta=repr(self.delta),
            **{"class": self.classification},
        )
        return out


def classify(r_raw: float, r_twirled: float) -> str:
    if r_twirled == 0 and r_raw == 0:
        return "undefined"
    if abs(r_raw - r_twirled) / max(r_raw, r_twirled) < GREY_FRACTION:
        return "grey"
    return "gain" if r_raw > r_twirled else "loss"


def gain_delta(noise, levels: int, *, model: str = "custom", params=None, seed=None) -> list[GainRecord]:
    """Raw vs twirled logical infidelity for every level ``1..levels``."""
    raw = concatenate_levels(noise, levels)
    tw = concatenate_levels(noise, levels, twirled=True)
    return [
        GainRecord(model, dict(params or {}), seed, a.level, a.infidelity, b.infidelity)
        for a, b in zip(raw, tw)
    ]


# --- closed forms for i.i.d. Z rotations ---------------------------------


def zrot_closed_forms(omega: float) -> dict:
    """Level-1 infidelities (raw, twirled) and chi_bar[0,3] for i.i.d. Z rotations."""
    w = omega
    r_raw = (32 - 21 * math.cos(w) - 14 * math.cos(3 * w) + 3 * math.cos(7 * w)) / 64
    r_tw = (
        256 - 231 * math.cos(w) - 49 * math.cos(3 * w) + 21 * math.cos(5 * w) + 3 * math.cos(7 * w)
    ) / 512
    chi03 = -0.125j * math.sin(w) ** 3 * (9 * math.cos(2 * w) + 3 * math.cos(4 * w) + 2)
    return {"r_raw_L1": r_raw, "r_twirled_L1": r_tw, "chi03_L1": chi03}


F00 = (0, 0, 63, -434, 1260, -1848, 1344, -384)  # coefficients of z^0..z^7
G00 = (0, 0, 21, -98, 210, -252, 168, -48)


def _poly(coeffs, z):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def f00(z):
    return _poly(F00, z)


def g00(z):
    return _poly(G00, z)


def f03(z):
    return -2 * z**3 * (7 + 84 * z**2 + 192 * z**4)


def zrot_recursion_step(z00, z03, twirled: bool = False):
    """One level of the Z-rotation polynomial recursion."""
    if twirled:
        return g00(z00), 0.0
    return f00(z00), f03(z03)


def _deficit_coeffs(coeffs) -> tuple[int, ...]:
    """Coefficients of ``d -> 1 - p(1 - d)`` (exact integer arithmetic)."""
    out = [0] * len(coeffs)
    for k, c in enumerate(coeffs):
        # (1 - d)^k
        for j in range(k + 1):
            out[j] += c * math.comb(k, j) * (-1) ** j
    out = [-c for c in out]
    out[0] += 1
    if out[0] != 0:
        raise ValueError("polynomial does not fix z = 1")
    return tuple(out)


F00_DEFICIT = _deficit_coeffs(F00)
G00_DEFICIT = _deficit_coeffs(G00)


def deficit_step(d: float, twirled: bool = False) -> float:
    """``1 - f(1 - d)`` evaluated without forming ``1 - d``."""
    return _poly(G00_DEFICIT if twirled else F00_DEFICIT, d)


def zrot_recursion_infidelities(omega: float, levels: int) -> list[tuple[float, float]]:
    """``(r_raw, r_twirled)`` for levels ``1..levels`` from the polynomial recursion."""
    s = math.sin(omega / 2) ** 2
    raw, tw = s, s
    out = []
    for _ in range(levels):
        raw = deficit_step(raw)
        tw = deficit_step(tw, twirled=True)
        out.append((raw, tw))
    return out
