"""Pauli-group arithmetic, the Steane code and its minimum-weight decoder.

Paulis are stored in symplectic form: bit strings ``x`` and ``z`` (as Python
ints, qubit 0 in the most significant position) plus a phase exponent ``k`` so
that the operator is ``i**k * X^x Z^z``.  With this convention ``XZ = -iY``,
i.e. a ``(1, 1)`` site with ``k = 0`` is ``i**3 Y``.

Single-qubit letters are indexed ``I, X, Y, Z = 0, 1, 2, 3`` everywhere in the
package, matching the row/column order of the chi matrices.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

LETTERS = "IXYZ"

# (x, z) -> letter index, and back
_XZ_TO_LETTER = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_LETTER_TO_XZ = {v: k for k, v in _XZ_TO_LETTER.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """``i**phase * (X^x Z^z)`` on ``n`` qubits."""

    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.n < 1 or self.x & ~mask or self.z & ~mask:
            raise ValueError(f"bit strings do not fit in {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliOperator":
        """Build from a string like ``"XIZY"``.

        The letters are Hermitian Paulis, so each ``Y`` contributes ``i`` to
        the stored phase (``Y = i X Z``); ``phase`` multiplies the result by
        ``i**phase``.
        """
        label = label.strip().upper()
        n = len(label)
        x = z = 0
        for q, ch in enumerate(label):
            if ch not in LETTERS:
                raise ValueError(f"invalid Pauli letter {ch!r}")
            bx, bz = _LETTER_TO_XZ[LETTERS.index(ch)]
            bit = 1 << (n - 1 - q)
            x |= bit * bx
            z |= bit * bz
        return cls(n, x, z, phase + _popcount(x & z))

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_letters(cls, letters, phase: int = 0) -> "PauliOperator":
        return cls.from_label("".join(LETTERS[int(a)] for a in letters), phase)

    def letters(self) -> tuple[int, ...]:
        """Per-qubit letter indices of the bare operator."""
        n = self.n
        return tuple(
            _XZ_TO_LETTER[((self.x >> (n - 1 - q)) & 1, (self.z >> (n - 1 - q)) & 1)]
            for q in range(n)
        )

    @property
    def label(self) -> str:
        return "".join(LETTERS[a] for a in self.letters())

    @property
    def bare_phase(self) -> int:
        """Exponent ``k`` such that this operator equals ``i**k * |P|``."""
        return (self.phase - _popcount(self.x & self.z)) % 4

    def bare(self) -> "PauliOperator":
        """The Hermitian Pauli ``|P|`` with the global phase stripped."""
        return PauliOperator(self.n, self.x, self.z, _popcount(self.x & self.z))

    def is_bare(self) -> bool:
        return self.bare_phase == 0

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def key(self) -> int:
        """Tie-break key: the integer with bits ``z_bits`` followed by ``x_bits``."""
        return (self.z << self.n) | self.x

    def commutes_with(self, other: "PauliOperator") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix; qubit 0 is the leftmost tensor factor."""
        from .channels import PAULI_MATRICES

        out = np.array([[1.0 + 0j]])
        for a in self.letters():
            out = np.kron(out, PAULI_MATRICES[a])
        return (1j ** self.bare_phase) * out

    def __str__(self) -> str:
        prefix = ["+", "+i", "-", "-i"][self.bare_phase]
        return prefix + self.label


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Product ``p @ q`` with exact phase tracking."""
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")
    # X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}
    phase = p.phase + q.phase + 2 * _popcount(p.z & q.x)
    return PauliOperator(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def weight(p: PauliOperator) -> int:
    return p.weight


def all_paulis(n: int):
    """Every bare Pauli on ``n`` qubits, in increasing weight then tie-break key."""
    ops = [
        PauliOperator(n, x, z, _popcount(x & z))
        for z in range(1 << n)
        for x in range(1 << n)
    ]
    ops.sort(key=lambda p: (p.weight, p.key))
    return ops


@dataclass(frozen=True)
class StabilizerCode:
    n: int
    k: int
    generators: tuple[PauliOperator, ...]
    logical_x: PauliOperator
    logical_z: PauliOperator
    stabilizer_group: tuple[PauliOperator, ...] = field(repr=False, default=())

    def __post_init__(self):
        if not self.stabilizer_group:
            object.__setattr__(self, "stabilizer_group", _generate_group(self.generators))

    @property
    def logical_y(self) -> PauliOperator:
        """``i * Xbar * Zbar``; carries a phase relative to the bare ``Y^n``."""
        return multiply(PauliOperator(self.n, 0, 0, 1), multiply(self.logical_x, self.logical_z))

    @property
    def logicals(self) -> tuple[PauliOperator, ...]:
        """Logical Paulis ``(I, X, Y, Z)`` as operators acting on the code space."""
        return (PauliOperator.identity(self.n), self.logical_x, self.logical_y, self.logical_z)

    def syndrome(self, e: PauliOperator) -> int:
        """Syndrome as an int whose bit ``g`` (from the left) flags generator ``g``."""
        if e.n != self.n:
            raise ValueError(f"qubit count mismatch: {e.n} vs {self.n}")
        r = len(self.generators)
        s = 0
        for g, gen in enumerate(self.generators):
            if not gen.commutes_with(e):
                s |= 1 << (r - 1 - g)
        return s

    def syndrome_string(self, e: PauliOperator) -> str:
        return format(self.syndrome(e), f"0{len(self.generators)}b")

    def __hash__(self):
        return hash((self.n, self.generators, self.logical_x, self.logical_z))

    def __eq__(self, other):
        if not isinstance(other, StabilizerCode):
            return NotImplemented
        return (self.n, self.generators, self.logical_x, self.logical_z) == (
            other.n,
            other.generators,
            other.logical_x,
            other.logical_z,
        )


def _generate_group(generators) -> tuple[PauliOperator, ...]:
    n = generators[0].n
    group = []
    for bits in itertools.product((0, 1), repeat=len(generators)):
        p = PauliOperator.identity(n)
        for b, g in zip(bits, generators):
            if b:
                p = multiply(p, g)
        group.append(p)
    return tuple(group)


STEANE_GENERATORS = ("ZZZZIII", "ZZIIZZI", "ZIZIZIZ", "XXXXIII", "XXIIXXI", "XIXIXIX")


@functools.lru_cache(maxsize=None)
def steane_code() -> StabilizerCode:
    gens = tuple(PauliOperator.from_label(s) for s in STEANE_GENERATORS)
    return StabilizerCode(
        n=7,
        k=1,
        generators=gens,
        logical_x=PauliOperator.from_label("X" * 7),
        logical_z=PauliOperator.from_label("Z" * 7),
    )


syndrome = StabilizerCode.syndrome


@dataclass(frozen=True)
class DecoderTable:
    """Syndrome -> recovery lookup.

    ``recovery[s]`` is a bare Pauli with syndrome ``s``.  ``correctable`` holds
    every bare ``E`` for which ``R_{s(E)} E`` is a stabilizer up to phase.
    """

    code: StabilizerCode
    recovery: tuple[PauliOperator, ...]
    correctable: frozenset[tuple[int, int]] = field(repr=False)

    def __getitem__(self, s: int) -> PauliOperator:
        return self.recovery[s]

    def is_correctable(self, e: PauliOperator) -> bool:
        return (e.x, e.z) in self.correctable

    def to_json(self) -> str:
        r = len(self.code.generators)
        rows = [
            {"syndrome": format(s, f"0{r}b"), "recovery": rec.label, "weight": rec.weight}
            for s, rec in enumerate(self.recovery)
        ]
        return json.dumps(rows, indent=1)


def _stabilizer_index(code: StabilizerCode) -> dict[tuple[int, int], PauliOperator]:
    return {(s.x, s.z): s for s in code.stabilizer_group}


@functools.lru_cache(maxsize=None)
def build_min_weight_decoder(code: StabilizerCode) -> DecoderTable:
    """Exhaustive minimum-weight lookup table.

    Candidates are scanned by weight, then by ascending ``(z_bits, x_bits)``
    key; the first Pauli seen for a syndrome becomes its recovery.
    """
    nsyn = 1 << len(code.generators)
    recovery: list[PauliOperator | None] = [None] * nsyn
    remaining = nsyn
    for p in all_paulis(code.n):
        s = code.syndrome(p)
        if recovery[s] is None:
            recovery[s] = p
            remaining -= 1
            if remaining == 0:
                break
    stabs = code.stabilizer_group
    correctable = frozenset(
        ((r.x ^ st.x), (r.z ^ st.z)) for r in recovery for st in stabs
    )
    return DecoderTable(code, tuple(recovery), correctable)


@dataclass(frozen=True)
class Decomposition:
    """``R_{s(E)} E = phase * S * L`` with ``L`` the logical Pauli of class ``logical``."""

    syndrome: int
    logical: int
    stabilizer: PauliOperator
    phase: int  # exponent of i


@functools.lru_cache(maxsize=None)
def _coset_lookup(code: StabilizerCode):
    # (x, z) of S * L  ->  (S, l)
    table = {}
    for l, log in enumerate(code.logicals):
        for st in code.stabilizer_group:
            prod = multiply(st, log)
            table[(prod.x, prod.z)] = (st, l)
    return table


def decompose(code: StabilizerCode, decoder: DecoderTable, e: PauliOperator) -> Decomposition:
    """Split ``R_{s(E)} E`` into stabilizer, logical class and phase.

    ``L`` is taken from ``code.logicals`` (so ``Ybar = i Xbar Zbar``), which is
    what makes the resulting logical chi matrix use the true logical Y.
    """
    s = code.syndrome(e)
    corrected = multiply(decoder.recovery[s], e)
    st, l = _coset_lookup(code)[(corrected.x, corrected.z)]
    ref = multiply(st, code.logicals[l])
    return Decomposition(s, l, st, (corrected.phase - ref.phase) % 4)


def logical_class(code: StabilizerCode, decoder: DecoderTable, e: PauliOperator) -> int:
    return decompose(code, decoder, e).logical


def coset_phase(code: StabilizerCode, decoder: DecoderTable, e: PauliOperator, l: int):
    """Phase ``phi(E, l)`` with ``R_{s(E)} |E Pbar_l| = phi * S * |Pbar_l|``.

    ``E`` is used as a bare Pauli.  Returns ``(phi, S)``, or ``None`` when the
    corrected operator is not in the coset ``S * |Pbar_l|`` (``E`` is not
    correctable for that ``l``).
    """
    if not 0 <= l <= 3:
        raise ValueError("logical index must be in 0..3")
    target = code.logicals[l].bare()
    moved = multiply(e.bare(), target).bare()
    corrected = multiply(decoder.recovery[code.syndrome(moved)], moved)
    for st in code.stabilizer_group:
        ref = multiply(st, target)
        if (ref.x, ref.z) == (corrected.x, corrected.z):
            return 1j ** ((corrected.phase - ref.phase) % 4), st
    return None
