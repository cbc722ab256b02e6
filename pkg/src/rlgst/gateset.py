"""Gate-set registry: ideal gates, attached noise, SPAM and derived error maps."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .channels import (
    SpamModel,
    ideal_spam,
    max_unit_scale,
    noise_model_for,
    offset_spam_1q,
    spam_tensor,
    unit_noise_draw,
)
from .exceptions import ValidationError
from .pauli import Superop, check_structure, is_orthogonal, unitary_to_superop

STANDARD_GATESETS = ("pauli_xyz", "i_x90_y90", "i_h_t", "twoqubit_ixy_cnot")

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_T = np.diag([1, np.exp(1j * np.pi / 4)])
_X90 = expm(-1j * np.pi / 4 * _X)
_Y90 = expm(-1j * np.pi / 4 * _Y)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def standard_unitaries(name: str) -> dict[str, np.ndarray]:
    """Unitaries of a named gate set, in gate order."""
    if name == "pauli_xyz":
        return {"X": _X, "Y": _Y, "Z": _Z}
    if name == "i_x90_y90":
        return {"I": _I2, "Gx": _X90, "Gy": _Y90}
    if name == "i_h_t":
        return {"I": _I2, "H": _H, "T": _T}
    if name == "twoqubit_ixy_cnot":
        single = {"0": _I2, "x": _X90, "y": _Y90}
        gates = {f"G{i}{j}": np.kron(single[i], single[j]) for i in single for j in single}
        # qubit 1 (leading tensor factor) is the control
        gates["CNOT"] = _CNOT
        return gates
    raise ValidationError(f"unknown gate set {name!r}; expected one of {STANDARD_GATESETS}")


@dataclass(frozen=True, eq=False)
class GateSet:
    """Labelled ideal gates with optional noisy implementations and SPAM."""

    n_qubits: int
    labels: tuple[str, ...]
    ideal: tuple[Superop, ...]
    spam_ideal: SpamModel
    noisy: tuple[Superop, ...] | None = None
    spam: SpamModel | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        if not labels:
            raise ValidationError("a gate set needs at least one gate")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate gate labels in {labels}")
        if len(self.ideal) != len(labels):
            raise ValidationError("one ideal superoperator per label required")
        for label, g in zip(labels, self.ideal):
            if g.n_qubits != self.n_qubits:
                raise ValidationError(f"gate {label!r} acts on {g.n_qubits} qubits")
            if not is_orthogonal(g):
                raise ValidationError(f"ideal gate {label!r} is not unitary")
        if self.noisy is not None:
            if len(self.noisy) != len(labels):
                raise ValidationError("one noisy superoperator per label required")
            for label, g in zip(labels, self.noisy):
                if not check_structure(g).is_tp:
                    raise ValidationError(f"noisy gate {label!r} is not trace preserving")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ideal", tuple(self.ideal))
        if self.noisy is not None:
            object.__setattr__(self, "noisy", tuple(self.noisy))

    @property
    def d(self) -> int:
        return 2**self.n_qubits

    @property
    def n_gates(self) -> int:
        return len(self.labels)

    @property
    def n_outcomes(self) -> int:
        return self.spam_ideal.n_outcomes

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown gate label {label!r}") from None

    def ideal_matrices(self) -> dict[str, np.ndarray]:
        return {lab: g.matrix for lab, g in zip(self.labels, self.ideal)}

    def noisy_matrices(self) -> dict[str, np.ndarray]:
        if self.noisy is None:
            raise ValidationError("gate set has no noisy gates attached")
        return {lab: g.matrix for lab, g in zip(self.labels, self.noisy)}

    @property
    def has_noise(self) -> bool:
        return self.noisy is not None and self.spam is not None


def gateset_from_unitaries(
    unitaries: Mapping[str, np.ndarray], name: str | None = None
) -> GateSet:
    items = list(unitaries.items())
    ideal = tuple(unitary_to_superop(U) for _, U in items)
    n = ideal[0].n_qubits
    return GateSet(
        n_qubits=n,
        labels=tuple(lab for lab, _ in items),
        ideal=ideal,
        spam_ideal=ideal_spam(n),
        name=name,
    )


def standard_gateset(name: str) -> GateSet:
    return gateset_from_unitaries(standard_unitaries(name), name=name)


def attach_noise(
    gs: GateSet,
    models: Sequence[Superop] | Mapping[str, Superop],
    spam: SpamModel | None = None,
) -> GateSet:
    """Noisy gate = noise map applied after the ideal gate."""
    if isinstance(models, Mapping):
        missing = set(gs.labels) - set(models)
        if missing:
            raise ValidationError(f"no noise model for gates {sorted(missing)}")
        models = [models[lab] for lab in gs.labels]
    models = list(models)
    if len(models) != gs.n_gates:
        raise ValidationError(f"expected {gs.n_gates} noise maps, got {len(models)}")
    noisy = tuple(noise @ g for noise, g in zip(models, gs.ideal))
    return replace(gs, noisy=noisy, spam=spam if spam is not None else gs.spam_ideal)


@dataclass(frozen=True, eq=False)
class ErrorMap:
    label: str
    matrix: np.ndarray


def error_maps(gs: GateSet) -> list[ErrorMap]:
    """``e_gamma = noisy . ideal^-1 - 1`` for every gate.

    Ideal gates are orthogonal, so the inverse is the transpose; writing it
    as ``(noisy - ideal) ideal^T`` keeps noiseless gates exactly zero. The
    first row is zeroed exactly: for TP noisy gates it is zero up to rounding.
    """
    if gs.noisy is None:
        raise ValidationError("gate set has no noisy gates attached")
    out = []
    for label, g, gt in zip(gs.labels, gs.ideal, gs.noisy):
        e = (gt.matrix - g.matrix) @ g.matrix.T
        e[0, :] = 0.0
        out.append(ErrorMap(label, e))
    return out


def offset_spam(n_qubits: int, a: float = 0.01) -> SpamModel:
    single = offset_spam_1q(a)
    return single if n_qubits == 1 else spam_tensor(single, n_qubits)


@dataclass(frozen=True, eq=False)
class NoiseDraw:
    """Per-gate noise parameters produced by :func:`calibrated_noise`."""

    params: dict[str, np.ndarray]
    scale: float
    target_agsi: float


def gateset_with_params(
    gs: GateSet,
    params: Mapping[str, Sequence[float]],
    spam: SpamModel | None = None,
    reverse: bool = False,
) -> GateSet:
    maps = {
        lab: noise_model_for(gs.n_qubits, params[lab]).superop(reverse=reverse)
        for lab in gs.labels
    }
    return attach_noise(gs, maps, spam)


def calibrated_noise(
    gs: GateSet,
    target_agsi: float,
    rng: np.random.Generator,
    spam: SpamModel | None = None,
    reverse: bool = False,
) -> tuple[GateSet, NoiseDraw]:
    """Draw random per-gate noise and rescale it so the true AGsI hits ``target_agsi``.

    Each gate gets its own unit draw (probabilities uniform in [0, 1), angles
    uniform in [-1, 1)); a single common scale is then found by root
    bracketing on the gate-set infidelity.
    """
    from .metrics import agsi

    if target_agsi <= 0:
        raise ValidationError("target AGsI must be positive")
    units = {lab: unit_noise_draw(gs.n_qubits, rng) for lab in gs.labels}
    s_max = min(max_unit_scale(gs.n_qubits, u) for u in units.values())

    def noisy_at(s: float) -> GateSet:
        return gateset_with_params(gs, {k: s * u for k, u in units.items()}, spam, reverse)

    def gap(s: float) -> float:
        return agsi(noisy_at(s)) - target_agsi

    if gap(s_max) < 0:
        raise ValidationError(f"target AGsI {target_agsi} not reachable by this noise model")
    s = brentq(gap, 0.0, s_max, xtol=1e-15, rtol=1e-13, maxiter=500)
    params = {k: s * u for k, u in units.items()}
    return noisy_at(s), NoiseDraw(params=params, scale=float(s), target_agsi=target_agsi)


def true_error_vector(gs: GateSet, layout) -> "np.ndarray":
    """Pack the exact error parameters of a noisy gate set into ``layout`` order."""
    if not gs.has_noise:
        raise ValidationError("gate set has no noise attached")
    values = np.zeros(layout.n_columns)
    for em in error_maps(gs):
        values[layout.gate_slice(em.label)] = em.matrix[1:, :].ravel()
    values[layout.prep_slice()] = (gs.spam.rho.coords - gs.spam_ideal.rho.coords)[1:]
    for mu in range(layout.n_outcomes - 1):
        delta = gs.spam.effects[mu].coords - gs.spam_ideal.effects[mu].coords
        values[layout.meas_slice(mu)] = delta
    return values


@dataclass(frozen=True)
class CompletenessReport:
    complete: bool
    reached_rank: int
    depth: int


def completeness_check(gs: GateSet, max_depth: int = 8, rel_tol: float = 1e-8) -> CompletenessReport:
    """Rank of the span of states reachable from the ideal input with words up to ``max_depth``.

    Words are explored breadth first; only states that raise the rank are
    kept as seeds for the next layer, which is enough because the span of a
    layer is generated by the previous layer's span.
    """
    if max_depth < 1:
        raise ValidationError("max_depth must be >= 1")
    d2 = gs.d**2
    mats = [g.matrix for g in gs.ideal]
    rho = gs.spam_ideal.rho.coords
    basis = [rho / np.linalg.norm(rho)]
    frontier = [rho]

    def rank_of(vectors: list[np.ndarray]) -> int:
        sv = np.linalg.svd(np.array(vectors), compute_uv=False)
        return int(np.sum(sv > rel_tol * sv[0]))

    rank = 1
    depth = 0
    for depth in range(1, max_depth + 1):
        new_frontier = []
        for v in frontier:
            for m in mats:
                w = m @ v
                if rank_of(basis + [w]) > rank:
                    basis.append(w)
                    rank += 1
                    new_frontier.append(w)
        if not new_frontier or rank == d2:
            break
        frontier = new_frontier
    return CompletenessReport(complete=rank == d2, reached_rank=rank, depth=depth)
