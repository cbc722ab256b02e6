"""Pauli-basis operator algebra.

Operators on n qubits are expanded in the orthonormal basis
``B_a = sigma_a / sqrt(d)`` with ``d = 2**n``. A Pauli index is a tuple of
base-4 digits ``(a_1, ..., a_n)`` (0=I, 1=X, 2=Y, 3=Z) and its linear index
is big-endian: qubit 1 is the most significant digit. The same ordering is
used by :func:`numpy.kron`, so tensor products of transfer matrices are plain
Kronecker products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import ValidationError

IMAG_TOL = 1e-12
TP_TOL = 1e-10

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULI_LETTERS = "IXYZ"


def dim(n_qubits: int) -> int:
    return 2**n_qubits


def n_qubits_from_dim(d: int) -> int:
    n = int(round(np.log2(d)))
    if n < 1 or 2**n != d:
        raise ValidationError(f"dimension {d} is not a power of two >= 2")
    return n


def index_to_digits(index: int, n_qubits: int) -> tuple[int, ...]:
    """Linear Pauli index -> base-4 digits, qubit 1 first."""
    if not 0 <= index < 4**n_qubits:
        raise ValidationError(f"Pauli index {index} out of range for {n_qubits} qubits")
    digits = []
    for _ in range(n_qubits):
        index, r = divmod(index, 4)
        digits.append(r)
    return tuple(reversed(digits))


def digits_to_index(digits: Sequence[int]) -> int:
    index = 0
    for a in digits:
        if a not in (0, 1, 2, 3):
            raise ValidationError(f"invalid Pauli digit {a}")
        index = 4 * index + a
    return index


def pauli_label(index: int, n_qubits: int) -> str:
    return "".join(PAULI_LETTERS[a] for a in index_to_digits(index, n_qubits))


def pauli_matrix(digits: Sequence[int]) -> np.ndarray:
    """Unnormalized Pauli string ``sigma_a1 (x) ... (x) sigma_an``."""
    out = np.ones((1, 1), dtype=complex)
    for a in digits:
        out = np.kron(out, SIGMA[a])
    return out


@lru_cache(maxsize=None)
def _basis(n_qubits: int) -> np.ndarray:
    d = dim(n_qubits)
    basis = np.array(
        [pauli_matrix(index_to_digits(i, n_qubits)) for i in range(d * d)]
    ) / np.sqrt(d)
    basis.setflags(write=False)
    return basis


def pauli_basis(n_qubits: int) -> np.ndarray:
    """Orthonormal Pauli basis as a read-only ``(d^2, d, d)`` array."""
    if n_qubits < 1:
        raise ValidationError("n_qubits must be >= 1")
    return _basis(n_qubits)


def _as_real(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        residue = float(np.max(np.abs(values.imag), initial=0.0))
        if residue > IMAG_TOL:
            raise ValidationError(f"{what} has imaginary residue {residue:.3e}")
        values = values.real
    values = np.array(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{what} has non-finite entries")
    return values


@dataclass(frozen=True, eq=False)
class Superop:
    """Real Pauli transfer matrix of a linear map on n-qubit operators."""

    matrix: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        m = _as_real(self.matrix, "superoperator")
        d2 = 4**self.n_qubits
        if m.shape != (d2, d2):
            raise ValidationError(
                f"superoperator for {self.n_qubits} qubit(s) must be {d2}x{d2}, got {m.shape}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, n_qubits: int) -> "Superop":
        return cls(np.eye(4**n_qubits), n_qubits)

    @property
    def d(self) -> int:
        return dim(self.n_qubits)

    def __matmul__(self, other: "Superop") -> "Superop":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Superop(n_qubits={self.n_qubits}, matrix=\n{self.matrix})"


@dataclass(frozen=True, eq=False)
class StateVec:
    """Pauli coordinates of an operator used as a column (state) vector."""

    coords: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        c = _as_real(self.coords, "state vector")
        if c.shape != (4**self.n_qubits,):
            raise ValidationError(f"state vector must have length {4**self.n_qubits}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def to_operator(self) -> np.ndarray:
        return from_coords(self.coords, self.n_qubits)


@dataclass(frozen=True, eq=False)
class EffectVec:
    """Pauli coordinates of a POVM element used as a row (effect) vector."""

    coords: np.ndarray
    n_qubits: int

    def __post_init__(self) -> None:
        c = _as_real(self.coords, "effect vector")
        if c.shape != (4**self.n_qubits,):
            raise ValidationError(f"effect vector must have length {4**self.n_qubits}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def to_operator(self) -> np.ndarray:
        return from_coords(self.coords, self.n_qubits)


def _check_hermitian(op: np.ndarray) -> tuple[np.ndarray, int]:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValidationError(f"operator must be square, got shape {op.shape}")
    n = n_qubits_from_dim(op.shape[0])
    asym = float(np.max(np.abs(op - op.conj().T)))
    if asym > IMAG_TOL:
        raise ValidationError(f"operator is not hermitian (max asymmetry {asym:.3e})")
    return op, n


def pauli_coords(op: np.ndarray) -> np.ndarray:
    """``tr(B_a op)`` for all ``a``; ``op`` must be hermitian."""
    op, n = _check_hermitian(op)
    coords = np.einsum("aij,ji->a", pauli_basis(n), op)
    return _as_real(coords, "Pauli coordinates")


def vectorize(op: np.ndarray) -> StateVec:
    """Vectorize a hermitian operator into its Pauli coordinates."""
    op, n = _check_hermitian(op)
    return StateVec(pauli_coords(op), n)


def as_effect(op: np.ndarray) -> EffectVec:
    op, n = _check_hermitian(op)
    return EffectVec(pauli_coords(op), n)


def from_coords(coords: np.ndarray, n_qubits: int) -> np.ndarray:
    """Inverse of :func:`pauli_coords`."""
    return np.einsum("a,aij->ij", np.asarray(coords, dtype=float), pauli_basis(n_qubits))


def unitary_to_superop(U: np.ndarray) -> Superop:
    """Transfer matrix of ``rho -> U rho U^dag``.

    Entry ``(a, b)`` is ``tr(B_a U B_b U^dag)``.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValidationError(f"unitary must be square, got shape {U.shape}")
    n = n_qubits_from_dim(U.shape[0])
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > 1e-10:
        raise ValidationError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3e})")
    basis = pauli_basis(n)
    conj = np.einsum("ij,bjk,lk->bil", U, basis, U.conj())
    m = np.einsum("aji,bij->ab", basis, conj)
    return Superop(_as_real(m, "unitary transfer matrix"), n)


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> Superop:
    """Transfer matrix of ``rho -> sum_k K rho K^dag``."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    n = n_qubits_from_dim(kraus[0].shape[0])
    basis = pauli_basis(n)
    image = sum(np.einsum("ij,bjk,lk->bil", k, basis, k.conj()) for k in kraus)
    m = np.einsum("aji,bij->ab", basis, image)
    return Superop(_as_real(m, "Kraus transfer matrix"), n)


def compose(g2: Superop, g1: Superop) -> Superop:
    """``g2 . g1``: g1 acts first."""
    if g2.n_qubits != g1.n_qubits:
        raise ValidationError(
            f"cannot compose {g2.n_qubits}-qubit and {g1.n_qubits}-qubit superoperators"
        )
    return Superop(g2.matrix @ g1.matrix, g1.n_qubits)


def tensor(ga: Superop, gb: Superop) -> Superop:
    """``ga (x) gb`` with ``ga`` on the leading (more significant) qubits."""
    return Superop(np.kron(ga.matrix, gb.matrix), ga.n_qubits + gb.n_qubits)


@dataclass(frozen=True)
class StructureReport:
    is_tp: bool
    is_unital: bool
    max_row0_deviation: float


def check_structure(g: Superop, tol: float = TP_TOL) -> StructureReport:
    """Trace preservation (first row) and unitality (first column) checks."""
    m = g.matrix
    unit = np.zeros(m.shape[0])
    unit[0] = 1.0
    row0 = float(np.max(np.abs(m[0] - unit)))
    col0 = float(np.max(np.abs(m[:, 0] - unit)))
    return StructureReport(is_tp=row0 <= tol, is_unital=col0 <= tol, max_row0_deviation=row0)


def is_orthogonal(g: Superop, tol: float = 1e-10) -> bool:
    m = g.matrix
    return bool(np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) <= tol)
