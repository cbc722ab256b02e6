"""Circuits: random generation, exact simulation and finite-shot sampling."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ValidationError
from .gateset import GateSet

NULL_ID = "null"


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named purpose derived from a master seed.

    Streams are keyed by a hash of ``name``, so e.g. the shots for a circuit
    do not depend on how many other circuits were generated.
    """
    key = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), key]))


@dataclass(frozen=True)
class Circuit:
    """Gate labels in time order: ``gates[0]`` acts first."""

    id: str
    gates: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def validate(self, gs: GateSet) -> None:
        unknown = sorted(set(self.gates) - set(gs.labels))
        if unknown:
            raise ValidationError(f"circuit {self.id!r} uses unknown gates {unknown}")


def null_circuit() -> Circuit:
    return Circuit(NULL_ID, ())


def _unique(candidates: Iterable[tuple[str, ...]]) -> list[tuple[str, ...]]:
    seen: set[tuple[str, ...]] = set()
    out = []
    for c in candidates:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _finish(sequences: list[tuple[str, ...]], include_null: bool) -> list[Circuit]:
    kept = _unique(sequences)
    has_empty = () in kept
    kept = [s for s in kept if s]
    dropped = len(sequences) - len(kept) - int(has_empty)
    if dropped:
        warnings.warn(
            f"discarded {dropped} duplicate circuit(s); {len(kept)} remain", stacklevel=3
        )
    circuits = [Circuit(f"c{i:05d}", s) for i, s in enumerate(kept)]
    if include_null or has_empty:
        circuits.append(null_circuit())
    return circuits


def random_circuits(
    gs: GateSet,
    lengths: Sequence[int],
    count_per_length: int,
    rng_seed: int,
    include_null: bool = True,
) -> list[Circuit]:
    """``count_per_length`` uniform-random circuits for every length, duplicates dropped."""
    if count_per_length < 1:
        raise ValidationError("count_per_length must be >= 1")
    rng = stream(rng_seed, "circuits")
    sequences = []
    for L in lengths:
        if L < 0:
            raise ValidationError(f"negative circuit length {L}")
        draws = rng.integers(0, gs.n_gates, size=(count_per_length, L))
        sequences.extend(tuple(gs.labels[i] for i in row) for row in draws)
    return _finish(sequences, include_null)


def random_circuits_mixed(
    gs: GateSet,
    lengths: Sequence[int],
    n_circuits: int,
    rng_seed: int,
    include_null: bool = False,
) -> list[Circuit]:
    """``n_circuits`` circuits, each with a length drawn uniformly from ``lengths``."""
    if n_circuits < 1:
        raise ValidationError("n_circuits must be >= 1")
    rng = stream(rng_seed, "circuits-mixed")
    chosen = rng.choice(np.asarray(lengths, dtype=int), size=n_circuits)
    sequences = [tuple(gs.labels[i] for i in rng.integers(0, gs.n_gates, size=L)) for L in chosen]
    return _finish(sequences, include_null)


def circuit_state(gs: GateSet, c: Circuit, use_noisy: bool = False) -> np.ndarray:
    """Output state vector of the circuit (before measurement)."""
    c.validate(gs)
    if use_noisy:
        if not gs.has_noise:
            raise ValidationError("gate set has no noise attached")
        mats, rho = gs.noisy_matrices(), gs.spam.rho.coords
    else:
        mats, rho = gs.ideal_matrices(), gs.spam_ideal.rho.coords
    state = np.array(rho)
    for label in c.gates:
        state = mats[label] @ state
    return state


def simulate(gs: GateSet, c: Circuit, use_noisy: bool = False) -> np.ndarray:
    """Exact outcome probabilities, one matrix-vector product per gate."""
    state = circuit_state(gs, c, use_noisy)
    spam = gs.spam if use_noisy else gs.spam_ideal
    return spam.effect_matrix() @ state


def validate_probabilities(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1 or not np.all(np.isfinite(p)):
        raise ValidationError("probabilities must be a finite 1-d vector")
    if p.min() < -1e-12 or abs(p.sum() - 1) > 1e-10:
        raise ValidationError(f"invalid probability vector (min {p.min():.3e}, sum {p.sum():.12f})")
    return p


def sample_counts(p: np.ndarray, shots: int, rng: np.random.Generator | int) -> np.ndarray:
    """One multinomial draw of ``shots`` repetitions."""
    p = validate_probabilities(p)
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    p = np.clip(p, 0.0, None)
    return rng.multinomial(shots, p / p.sum())


def outcome_bitstrings(n_qubits: int) -> list[str]:
    return [format(mu, f"0{n_qubits}b") for mu in range(2**n_qubits)]


@dataclass
class ProbabilityTable:
    """Per-circuit outcome data.

    ``probs`` holds relative frequencies (or exact probabilities when
    ``shots`` is 0, the infinite-shot mode); ``counts`` holds integer counts
    when sampled.
    """

    probs: dict[str, np.ndarray]
    shots: int = 0
    counts: dict[str, np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cid, p in self.probs.items():
            if abs(np.sum(p) - 1) > 1e-10 or np.min(p) < -1e-12:
                raise ValidationError(f"invalid probabilities for circuit {cid!r}")
        if self.counts is not None:
            for cid, n in self.counts.items():
                if int(np.sum(n)) != self.shots:
                    raise ValidationError(f"counts for circuit {cid!r} do not sum to {self.shots}")

    @classmethod
    def from_counts(cls, counts: dict[str, np.ndarray], meta: dict | None = None) -> "ProbabilityTable":
        totals = {int(np.sum(n)) for n in counts.values()}
        if len(totals) != 1:
            raise ValidationError(f"inconsistent shot totals {sorted(totals)}")
        shots = totals.pop()
        counts = {k: np.asarray(v, dtype=np.int64) for k, v in counts.items()}
        probs = {k: v / shots for k, v in counts.items()}
        return cls(probs=probs, shots=shots, counts=counts, meta=dict(meta or {}))

    def __contains__(self, cid: str) -> bool:
        return cid in self.probs


def simulate_table(
    gs: GateSet,
    circuits: Sequence[Circuit],
    shots: int,
    seed: int,
    use_noisy: bool = True,
) -> ProbabilityTable:
    """Exact probabilities for every circuit, then multinomial sampling unless ``shots == 0``."""
    exact = {c.id: simulate(gs, c, use_noisy) for c in circuits}
    meta = {"shots": shots, "seed": seed, "exact": shots == 0}
    if shots == 0:
        return ProbabilityTable(probs=exact, shots=0, meta=meta)
    counts = {cid: sample_counts(p, shots, stream(seed, f"shots:{cid}")) for cid, p in exact.items()}
    return ProbabilityTable.from_counts(counts, meta)


def length_budget_check(
    circuits: Sequence[Circuit], epsilon_estimate: float, threshold: float = 0.1
) -> list[str]:
    """Warnings for circuits whose ``L * epsilon`` exceeds ``threshold``."""
    if epsilon_estimate <= 0:
        raise ValidationError("epsilon_estimate must be positive")
    out = []
    for c in circuits:
        budget = len(c) * epsilon_estimate
        if budget > threshold:
            out.append(
                f"circuit {c.id}: L*eps = {budget:.4g} exceeds {threshold:g}; "
                "linear approximation may be poor"
            )
    return out
