"""Single-qubit channels in the chi (process-matrix) representation.

A channel acts as ``rho -> sum_ij chi[i, j] P_i rho P_j`` with the Paulis
ordered ``I, X, Y, Z``.  For a trace-preserving map ``trace(chi) == 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

EPS_TOL = 1e-10

PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Superoperator basis for column-stacked vec(): vec(A rho B) = (B^T kron A) vec(rho).
_SUPER_BASIS = np.array(
    [[np.kron(PAULI_MATRICES[j].T, PAULI_MATRICES[i]) for j in range(4)] for i in range(4)]
)


class ChannelError(ValueError):
    """A chi matrix violates Hermiticity, unit trace or positivity."""


class ChiMatrix:
    """Immutable 4x4 process matrix.

    Construction validates the channel invariants and clips eigenvalues in
    ``(-tol, 0)`` to zero.  Pass ``check=False`` to skip both (used for the
    intermediate logical channels, whose invariants are checked separately).
    """

    __slots__ = ("_data",)

    def __init__(self, data, *, check: bool = True, tol: float = EPS_TOL):
        arr = np.array(data, dtype=complex).reshape(4, 4)
        if check:
            arr = _validated(arr, tol)
        arr.setflags(write=False)
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __getitem__(self, idx):
        return self._data[idx]

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __repr__(self):
        return f"ChiMatrix({np.array2string(self._data, precision=4, suppress_small=True)})"

    def __eq__(self, other):
        if not isinstance(other, ChiMatrix):
            return NotImplemented
        return np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash(self._data.tobytes())

    def is_pauli(self, atol: float = 0.0) -> bool:
        off = self._data - np.diag(np.diag(self._data))
        return bool(np.all(np.abs(off) <= atol))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._data, np.asarray(other), atol=atol, rtol=0))

    def to_json(self) -> list:
        return [[[float(v.real), float(v.imag)] for v in row] for row in self._data]

    @classmethod
    def from_json(cls, rows) -> "ChiMatrix":
        if isinstance(rows, str):
            rows = json.loads(rows)
        return cls([[complex(re, im) for re, im in row] for row in rows])


def _validated(arr: np.ndarray, tol: float) -> np.ndarray:
    if not np.allclose(arr, arr.conj().T, atol=tol, rtol=0):
        raise ChannelError("chi matrix is not Hermitian")
    arr = 0.5 * (arr + arr.conj().T)
    tr = np.trace(arr)
    if abs(tr - 1) > tol:
        raise ChannelError(f"chi matrix trace is {tr}, expected 1")
    w, v = np.linalg.eigh(arr)
    if w.min() < -tol:
        raise ChannelError(f"chi matrix not positive semidefinite (min eigenvalue {w.min():.3e})")
    if w.min() < 0:
        arr = (v * np.clip(w, 0, None)) @ v.conj().T
    return arr


def check_chi(chi, tol: float = EPS_TOL) -> None:
    """Raise :class:`ChannelError` unless ``chi`` is a valid trace-preserving chi matrix."""
    _validated(np.asarray(chi, dtype=complex), tol)


def identity_channel() -> ChiMatrix:
    return ChiMatrix(np.diag([1.0, 0, 0, 0]))


def pauli_channel(probs) -> ChiMatrix:
    return ChiMatrix(np.diag(np.asarray(probs, dtype=float)))


def pauli_coefficients(u: np.ndarray) -> np.ndarray:
    """``c_i`` with ``U = sum_i c_i P_i``."""
    u = np.asarray(u, dtype=complex)
    return np.array([np.trace(p @ u) / 2 for p in PAULI_MATRICES])


def unitary_to_chi(u, atol: float = 1e-10) -> ChiMatrix:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=atol):
        raise ChannelError("input is not a 2x2 unitary")
    c = pauli_coefficients(u)
    return ChiMatrix(np.outer(c, c.conj()))


def kraus_to_chi(kraus) -> ChiMatrix:
    chi = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        c = pauli_coefficients(k)
        chi += np.outer(c, c.conj())
    return ChiMatrix(chi)


@dataclass(frozen=True)
class RotationParams:
    """Rotation by ``omega`` about the axis with polar angles ``(theta, phi)``."""

    theta: float
    phi: float
    omega: float

    @property
    def axis(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


def axis_unitary(axis, angle: float) -> np.ndarray:
    """``cos(angle/2) I + i sin(angle/2) n.sigma``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = n[0] * PAULI_MATRICES[1] + n[1] * PAULI_MATRICES[2] + n[2] * PAULI_MATRICES[3]
    return math.cos(angle / 2) * PAULI_MATRICES[0] + 1j * math.sin(angle / 2) * gen


def z_rotation(omega: float) -> ChiMatrix:
    c, s = math.cos(omega / 2), math.sin(omega / 2)
    chi = np.zeros((4, 4), dtype=complex)
    chi[0, 0] = c * c
    chi[3, 3] = s * s
    chi[0, 3] = -1j * c * s
    chi[3, 0] = 1j * c * s
    return ChiMatrix(chi)


def rotation_channel(p: RotationParams | None = None, *, theta=0.0, phi=0.0, omega=None) -> ChiMatrix:
    if p is None:
        p = RotationParams(theta, phi, omega)
    if not (0 <= p.theta <= math.pi):
        raise ValueError(f"theta={p.theta} outside [0, pi]")
    return unitary_to_chi(axis_unitary(p.axis, p.omega))


def depolarizing(p: float) -> ChiMatrix:
    """``rho -> (1 - p) rho + p I/2``."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing strength {p} outside [0, 1]")
    return pauli_channel([1 - 3 * p / 4, p / 4, p / 4, p / 4])


def chi_to_superop(chi) -> np.ndarray:
    return np.einsum("ij,ijab->ab", np.asarray(chi), _SUPER_BASIS)


def superop_to_chi(sop: np.ndarray) -> np.ndarray:
    return np.einsum("ijab,ab->ij", _SUPER_BASIS.conj(), sop) / 4


def compose(a: ChiMatrix, b: ChiMatrix) -> ChiMatrix:
    """Channel that applies ``b`` first and then ``a``."""
    return ChiMatrix(superop_to_chi(chi_to_superop(a) @ chi_to_superop(b)))


def twirl(x: ChiMatrix) -> ChiMatrix:
    """Pauli twirl: keep the diagonal, drop all coherences."""
    return ChiMatrix(np.diag(np.diag(np.asarray(x)).real), check=False)


def pauli_frame_average(x: ChiMatrix) -> ChiMatrix:
    """Average of ``P E(P rho P) P`` over the four single-qubit Paulis.

    Computed on superoperators, so it is independent of :func:`twirl`.
    """
    sop = chi_to_superop(x)
    acc = np.zeros_like(sop)
    for p in PAULI_MATRICES:
        conj = np.kron(p.T, p)
        acc += conj @ sop @ conj
    return ChiMatrix(superop_to_chi(acc / 4))


def process_infidelity(x) -> float:
    return 1.0 - float(np.asarray(x)[0, 0].real)


def random_axis(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_axis_rotation(
    rng: np.random.Generator,
    mu_delta: float,
    *,
    axis=None,
    variance: bool = True,
) -> ChiMatrix:
    """``exp(-i pi/2 delta n.sigma)`` with ``delta ~ Normal(mu, mu)``.

    The second Normal parameter is the variance by default; pass
    ``variance=False`` to use it as the standard deviation.  A uniformly random
    axis is drawn unless ``axis`` is given.
    """
    if axis is None:
        axis = random_axis(rng)
    sd = math.sqrt(mu_delta) if variance else mu_delta
    delta = rng.normal(mu_delta, sd)
    # exp(-i a n.s) = cos(a) - i sin(a) n.s, i.e. axis_unitary with angle -2a
    return unitary_to_chi(axis_unitary(axis, -math.pi * delta))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """GUE sample: N(0,1) diagonal, complex N(0, 1/sqrt 2) off-diagonal parts."""
    diag = rng.standard_normal(dim)
    off = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    h = np.triu(off, 1)
    return h + h.conj().T + np.diag(diag)


def random_cptp(rng: np.random.Generator, t: float, n_ancilla: int = 2) -> ChiMatrix:
    """Reduced dynamics of ``exp(-iHt)`` on qubit (x) ancilla started in ``|0..0>``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    dim_a = 2**n_ancilla
    h = random_hermitian(rng, 2 * dim_a)
    u = scipy.linalg.expm(-1j * t * h)
    # system is the leading tensor factor; row index = 2-level system x ancilla
    u4 = u.reshape(2, dim_a, 2, dim_a)
    kraus = [u4[:, k, :, 0] for k in range(dim_a)]
    return kraus_to_chi(kraus)


def calibrate_omega(
    p: float,
    r_target: float,
    theta: float = 0.0,
    phi: float = 0.0,
    tol: float = 1e-12,
) -> float:
    """Rotation angle that brings ``depolarizing(p)`` after the rotation up to ``r_target``.

    Solved by bisection on the composed channel's process infidelity.
    """
    base = 3 * p / 4
    if base > r_target + tol:
        raise ValueError(f"depolarizing p={p} alone exceeds infidelity {r_target}")
    dep = depolarizing(p)

    def excess(omega):
        chi = compose(dep, rotation_channel(RotationParams(theta, phi, omega)))
        return process_infidelity(chi) - r_target

    if excess(0.0) >= -tol:
        return 0.0
    hi = math.pi
    if excess(hi) < 0:
        raise ValueError(f"infidelity {r_target} unreachable with p={p}")
    lo = 0.0
    # infidelity is increasing in omega on [0, pi]
    while True:
        mid = 0.5 * (lo + hi)
        val = excess(mid)
        if abs(val) <= tol or hi - lo < 1e-15:
            return mid
        if val < 0:
            lo = mid
        else:
            hi = mid
