"""Noise channels, composed gate-noise models and SPAM models.

All constructors return closed-form transfer matrices; the tests check them
against Kraus-operator conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .exceptions import ValidationError
from .pauli import (
    EffectVec,
    StateVec,
    Superop,
    index_to_digits,
    pauli_coords,
    tensor,
)

SPAM_TOL = 1e-10
_AXES = {"x": 1, "y": 2, "z": 3}


def amplitude_damping(e0: float) -> Superop:
    """Amplitude damping with decay probability ``e0``."""
    if not 0.0 <= e0 <= 1.0:
        raise ValidationError(f"amplitude-damping probability {e0} outside [0, 1]")
    s = np.sqrt(1.0 - e0)
    m = np.diag([1.0, s, s, 1.0 - e0])
    m[3, 0] = e0
    return Superop(m, 1)


def pauli_channel(e1: float, e2: float, e3: float) -> Superop:
    """``rho -> (1 - sum e) rho + sum_a e_a sigma_a rho sigma_a``."""
    probs = (e1, e2, e3)
    if min(probs) < 0 or sum(probs) > 1 + 1e-15:
        raise ValidationError(f"Pauli probabilities {probs} must be >= 0 and sum to <= 1")
    return Superop(np.diag([1.0, 1 - 2 * (e2 + e3), 1 - 2 * (e1 + e3), 1 - 2 * (e1 + e2)]), 1)


def rotation(axis: str, theta: float) -> Superop:
    """Bloch-sphere rotation by ``theta`` about ``axis``, i.e. ``exp(-i theta sigma/2)``."""
    if axis not in _AXES:
        raise ValidationError(f"invalid rotation axis {axis!r}; expected one of x, y, z")
    if not np.isfinite(theta):
        raise ValidationError("rotation angle must be finite")
    a = _AXES[axis]
    # cyclic successors: x -> (y, z), y -> (z, x), z -> (x, y)
    j, k = a % 3 + 1, (a + 1) % 3 + 1
    c, s = np.cos(theta), np.sin(theta)
    m = np.eye(4)
    m[j, j] = c
    m[k, k] = c
    m[k, j] = s
    m[j, k] = -s
    return Superop(m, 1)


def _anticommutes(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    count = sum(1 for x, y in zip(a, b) if x and y and x != y)
    return count % 2 == 1


def pauli_channel_n(weights: Sequence[float], n_qubits: int) -> Superop:
    """General n-qubit Pauli channel from the 4^n - 1 non-identity weights.

    Weights are listed in linear Pauli-index order starting at index 1; the
    identity weight is ``1 - sum(weights)``.
    """
    weights = np.asarray(weights, dtype=float)
    d2 = 4**n_qubits
    if weights.shape != (d2 - 1,):
        raise ValidationError(f"expected {d2 - 1} Pauli weights, got {weights.shape}")
    if np.any(weights < 0) or weights.sum() > 1 + 1e-15:
        raise ValidationError("Pauli weights must be >= 0 with sum <= 1")
    q = np.concatenate([[1.0 - weights.sum()], weights])
    digits = [index_to_digits(i, n_qubits) for i in range(d2)]
    sign = np.array(
        [[-1.0 if _anticommutes(da, db) else 1.0 for db in digits] for da in digits]
    )
    return Superop(np.diag(sign @ q), n_qubits)


def pauli2_channel(q: Sequence[float]) -> Superop:
    """Two-qubit Pauli channel; ``q`` lists q_0x, q_0y, q_0z, q_x0, q_xx, ... q_zz."""
    return pauli_channel_n(q, 2)


def _compose_chain(maps: Sequence[Superop], reverse: bool) -> Superop:
    # maps are written left to right, the rightmost acts first
    ordered = list(reversed(maps)) if reverse else list(maps)
    out = ordered[0].matrix
    for g in ordered[1:]:
        out = out @ g.matrix
    return Superop(out, maps[0].n_qubits)


@dataclass(frozen=True)
class NoiseModel1Q:
    """AD(e0) . Pauli(e1, e2, e3) . Rx(e4) . Ry(e5) . Rz(e6)."""

    e0: float = 0.0
    e1: float = 0.0
    e2: float = 0.0
    e3: float = 0.0
    e4: float = 0.0
    e5: float = 0.0
    e6: float = 0.0

    N_PARAMS = 7

    def __post_init__(self) -> None:
        if not 0 <= self.e0 <= 1:
            raise ValidationError(f"e0={self.e0} outside [0, 1]")
        probs = (self.e1, self.e2, self.e3)
        if min(probs) < 0 or sum(probs) > 1:
            raise ValidationError(f"Pauli probabilities {probs} invalid")
        if not all(np.isfinite(v) for v in self.params):
            raise ValidationError("noise parameters must be finite")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.e0, self.e1, self.e2, self.e3, self.e4, self.e5, self.e6)

    @classmethod
    def from_params(cls, params: Sequence[float]) -> "NoiseModel1Q":
        if len(params) != cls.N_PARAMS:
            raise ValidationError(f"single-qubit noise needs {cls.N_PARAMS} parameters")
        return cls(*(float(p) for p in params))

    def superop(self, reverse: bool = False) -> Superop:
        return noise_1q(self, reverse=reverse)


@dataclass(frozen=True)
class NoiseModel2Q:
    """[AD(e0) x AD(e1)] . Pauli2(e2..e16) . [RxRyRz(e17..e19) x RxRyRz(e20..e22)]."""

    params: tuple[float, ...] = field(default=(0.0,) * 23)

    N_PARAMS = 23

    def __post_init__(self) -> None:
        p = tuple(float(v) for v in self.params)
        if len(p) != self.N_PARAMS:
            raise ValidationError(f"two-qubit noise needs {self.N_PARAMS} parameters")
        if not all(np.isfinite(p)):
            raise ValidationError("noise parameters must be finite")
        if not (0 <= p[0] <= 1 and 0 <= p[1] <= 1):
            raise ValidationError("amplitude-damping probabilities must lie in [0, 1]")
        q = p[2:17]
        if min(q) < 0 or sum(q) > 1:
            raise ValidationError("Pauli2 weights must be >= 0 with q_00 = 1 - sum >= 0")
        object.__setattr__(self, "params", p)

    @classmethod
    def from_params(cls, params: Sequence[float]) -> "NoiseModel2Q":
        return cls(tuple(params))

    def superop(self, reverse: bool = False) -> Superop:
        return noise_2q(self, reverse=reverse)


def noise_1q(m: NoiseModel1Q, reverse: bool = False) -> Superop:
    """Noise map of a single-qubit model.

    By default the written order is read as map composition (Rz acts first,
    AD last). ``reverse=True`` flips it.
    """
    maps = [
        amplitude_damping(m.e0),
        pauli_channel(m.e1, m.e2, m.e3),
        rotation("x", m.e4),
        rotation("y", m.e5),
        rotation("z", m.e6),
    ]
    return _compose_chain(maps, reverse)


def noise_2q(m: NoiseModel2Q, reverse: bool = False) -> Superop:
    p = m.params
    ad = tensor(amplitude_damping(p[0]), amplitude_damping(p[1]))
    rot = tensor(
        _compose_chain([rotation("x", p[17]), rotation("y", p[18]), rotation("z", p[19])], reverse),
        _compose_chain([rotation("x", p[20]), rotation("y", p[21]), rotation("z", p[22])], reverse),
    )
    return _compose_chain([ad, pauli2_channel(p[2:17]), rot], reverse)


def noise_model_for(n_qubits: int, params: Sequence[float]):
    if n_qubits == 1:
        return NoiseModel1Q.from_params(params)
    if n_qubits == 2:
        return NoiseModel2Q.from_params(params)
    raise ValidationError("parametrized noise models exist for 1 and 2 qubits only")


def unit_noise_draw(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Unscaled random parameters: probabilities in [0, 1), angles in [-1, 1)."""
    if n_qubits == 1:
        probs, angles = rng.random(4), rng.uniform(-1.0, 1.0, 3)
    elif n_qubits == 2:
        probs, angles = rng.random(17), rng.uniform(-1.0, 1.0, 6)
    else:
        raise ValidationError("random noise draws exist for 1 and 2 qubits only")
    return np.concatenate([probs, angles])


def max_unit_scale(n_qubits: int, unit: np.ndarray) -> float:
    """Largest scale ``s`` keeping ``s * unit`` a valid parameter vector.

    Shrunk by a few ulps so that rounding in ``s * unit`` cannot push a
    probability sum past one.
    """
    if n_qubits == 1:
        bounds = [1.0 / max(unit[0], 1e-300), 1.0 / max(unit[1:4].sum(), 1e-300)]
    else:
        bounds = [
            1.0 / max(unit[0], 1e-300),
            1.0 / max(unit[1], 1e-300),
            1.0 / max(unit[2:17].sum(), 1e-300),
        ]
    return float(min(bounds)) * (1 - 1e-12)


@dataclass(frozen=True, eq=False)
class SpamModel:
    """Input state plus one effect per measurement outcome (bitstring order)."""

    rho: StateVec
    effects: tuple[EffectVec, ...]

    def __post_init__(self) -> None:
        n = self.rho.n_qubits
        effects = tuple(self.effects)
        if len(effects) < 2:
            raise ValidationError("a measurement needs at least two outcomes")
        if any(e.n_qubits != n for e in effects):
            raise ValidationError("SPAM state and effects act on different qubit counts")
        total = np.sum([e.coords for e in effects], axis=0)
        ident = np.zeros(4**n)
        ident[0] = np.sqrt(2**n)
        dev = float(np.max(np.abs(total - ident)))
        if dev > SPAM_TOL:
            raise ValidationError(f"effects do not sum to the identity (deviation {dev:.3e})")
        trace_dev = abs(self.rho.coords[0] - 1 / np.sqrt(2**n))
        if trace_dev > SPAM_TOL:
            raise ValidationError(f"input state does not have unit trace (deviation {trace_dev:.3e})")
        object.__setattr__(self, "effects", effects)

    @property
    def n_qubits(self) -> int:
        return self.rho.n_qubits

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def effect_matrix(self) -> np.ndarray:
        """Effects stacked as rows, shape ``(M, d^2)``."""
        return np.array([e.coords for e in self.effects])


def ideal_spam(n_qubits: int) -> SpamModel:
    """|0...0> preparation and computational-basis projective readout."""
    d = 2**n_qubits
    effects = []
    for b in range(d):
        proj = np.zeros((d, d))
        proj[b, b] = 1.0
        effects.append(EffectVec(pauli_coords(proj), n_qubits))
    proj0 = np.zeros((d, d))
    proj0[0, 0] = 1.0
    return SpamModel(StateVec(pauli_coords(proj0), n_qubits), tuple(effects))


def offset_state(a: float) -> np.ndarray:
    """``|0><0| + (a / sqrt 2)(X + Y - Z)`` as a 2x2 density matrix."""
    return np.array(
        [[1 - a / np.sqrt(2), a / np.sqrt(2) * (1 - 1j)], [a / np.sqrt(2) * (1 + 1j), a / np.sqrt(2)]],
        dtype=complex,
    )


def offset_spam_1q(a: float) -> SpamModel:
    """Single-qubit SPAM with prep state shifted along (1, 1, -1) and P0 equal to it."""
    rho = offset_state(a)
    bloch = np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])
    length = float(np.linalg.norm(bloch))
    if length > 1 + 1e-12:
        raise ValidationError(f"a={a} gives a non-physical state (Bloch length {length:.6f})")
    p0 = pauli_coords(rho)
    p1 = pauli_coords(np.eye(2) - rho)
    return SpamModel(StateVec(p0, 1), (EffectVec(p0, 1), EffectVec(p1, 1)))


def spam_tensor(single: SpamModel, n: int) -> SpamModel:
    """n-fold product of a single-qubit SPAM model.

    Outcome ``b`` (bit k for qubit k, qubit 1 leftmost) has effect
    ``(x)_k E_{b_k}``.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if single.n_qubits != 1 or single.n_outcomes != 2:
        raise ValidationError("spam_tensor expects a single-qubit, two-outcome model")
    rho = single.rho.coords
    for _ in range(n - 1):
        rho = np.kron(rho, single.rho.coords)
    effects = []
    for bits in product((0, 1), repeat=n):
        e = np.ones(1)
        for b in bits:
            e = np.kron(e, single.effects[b].coords)
        effects.append(EffectVec(e, n))
    return SpamModel(StateVec(rho, n), tuple(effects))
