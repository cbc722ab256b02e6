"""Linear-regime design system ``p_measured - p_ideal = C e``.

Column layout of the noise-parameter vector ``e`` (TP and effect-sum
constraints already eliminated):

* for each gate, ``(d^2 - 1) * d^2`` entries ``e[a, b]`` with ``a != 0``,
  row-major over ``(a, b)``;
* ``d^2 - 1`` preparation-error coordinates with ``a != 0``;
* for outcomes ``mu = 0 .. M-2``, ``d^2`` readout-error coordinates each.

Only outcomes ``0 .. M-2`` of each circuit enter as rows; the last outcome
is fixed by normalization.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit, ProbabilityTable, simulate
from .exceptions import ValidationError
from .gateset import GateSet
from .pauli import pauli_label


@dataclass(frozen=True)
class ColumnLayout:
    labels: tuple[str, ...]
    n_qubits: int
    n_outcomes: int

    @classmethod
    def for_gateset(cls, gs: GateSet) -> "ColumnLayout":
        return cls(gs.labels, gs.n_qubits, gs.n_outcomes)

    @property
    def d2(self) -> int:
        return 4**self.n_qubits

    @property
    def gate_block_size(self) -> int:
        return (self.d2 - 1) * self.d2

    @property
    def n_columns(self) -> int:
        return len(self.labels) * self.gate_block_size + (self.d2 - 1) + (self.n_outcomes - 1) * self.d2

    def gate_slice(self, label: str) -> slice:
        try:
            g = self.labels.index(label)
        except ValueError:
            raise ValidationError(f"layout has no gate {label!r}") from None
        start = g * self.gate_block_size
        return slice(start, start + self.gate_block_size)

    def prep_slice(self) -> slice:
        start = len(self.labels) * self.gate_block_size
        return slice(start, start + self.d2 - 1)

    def meas_slice(self, mu: int) -> slice:
        if not 0 <= mu < self.n_outcomes - 1:
            raise ValidationError(f"outcome {mu} has no readout block (eliminated or out of range)")
        start = self.prep_slice().stop + mu * self.d2
        return slice(start, start + self.d2)

    def gate_error(self, values: np.ndarray, label: str) -> np.ndarray:
        """Full ``d^2 x d^2`` error matrix of a gate, first row zero."""
        e = np.zeros((self.d2, self.d2))
        e[1:, :] = np.asarray(values)[self.gate_slice(label)].reshape(self.d2 - 1, self.d2)
        return e

    def column_labels(self) -> list[str]:
        n = self.n_qubits
        out = []
        for lab in self.labels:
            out.extend(
                f"e[{lab};{pauli_label(a, n)},{pauli_label(b, n)}]"
                for a in range(1, self.d2)
                for b in range(self.d2)
            )
        out.extend(f"prep[{pauli_label(a, n)}]" for a in range(1, self.d2))
        for mu in range(self.n_outcomes - 1):
            out.extend(f"meas[{mu};{pauli_label(a, n)}]" for a in range(self.d2))
        return out

    def locate(self, column: int) -> tuple[str, tuple[int, ...]]:
        """Column index -> (symbol, indices); inverse of the packing."""
        if not 0 <= column < self.n_columns:
            raise ValidationError(f"column {column} out of range")
        block = self.gate_block_size
        if column < len(self.labels) * block:
            g, r = divmod(column, block)
            a, b = divmod(r, self.d2)
            return self.labels[g], (a + 1, b)
        r = column - len(self.labels) * block
        if r < self.d2 - 1:
            return "prep", (r + 1,)
        mu, a = divmod(r - (self.d2 - 1), self.d2)
        return "meas", (mu, a)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "n_qubits": self.n_qubits, "n_outcomes": self.n_outcomes}

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnLayout":
        return cls(tuple(data["labels"]), int(data["n_qubits"]), int(data["n_outcomes"]))


def _sweeps(gs: GateSet, c: Circuit) -> tuple[np.ndarray, np.ndarray]:
    """Forward states and backward effects of the ideal circuit.

    ``states[k] = G_k ... G_1 rho`` for ``k = 0..L`` and
    ``effects[k] = E G_L ... G_{k+1}`` (all outcomes as rows), so that the
    error after gate ``k`` enters as ``effects[k] @ e @ states[k]``.
    """
    c.validate(gs)
    mats = gs.ideal_matrices()
    L = len(c)
    d2 = gs.d**2
    states = np.empty((L + 1, d2))
    states[0] = gs.spam_ideal.rho.coords
    for k, label in enumerate(c.gates, start=1):
        states[k] = mats[label] @ states[k - 1]
    effects = np.empty((L + 1, gs.n_outcomes, d2))
    effects[L] = gs.spam_ideal.effect_matrix()
    for k in range(L, 0, -1):
        effects[k - 1] = effects[k] @ mats[c.gates[k - 1]]
    return states, effects


def circuit_rows(gs: GateSet, c: Circuit, layout: ColumnLayout | None = None, outcomes=None) -> np.ndarray:
    """Design rows of one circuit for the given outcomes (default: retained ones).

    Cost is ``O(L d^4)`` per outcome: one forward sweep of states, one
    backward sweep of effects, then one outer-product accumulation per gate
    label.
    """
    layout = layout or ColumnLayout.for_gateset(gs)
    if layout.labels != gs.labels or layout.n_outcomes != gs.n_outcomes:
        raise ValidationError("column layout does not match the gate set")
    if outcomes is None:
        outcomes = range(gs.n_outcomes - 1)
    outcomes = list(outcomes)
    states, effects = _sweeps(gs, c)
    rows = np.zeros((len(outcomes), layout.n_columns))
    gates = np.array(c.gates, dtype=object)
    for label in set(c.gates):
        pos = np.flatnonzero(gates == label) + 1
        eff = effects[pos][:, outcomes, 1:]
        block = np.einsum("kma,kb->mab", eff, states[pos])
        rows[:, layout.gate_slice(label)] = block.reshape(len(outcomes), -1)
    rows[:, layout.prep_slice()] = effects[0][outcomes, 1:]
    final = states[-1]
    for i, mu in enumerate(outcomes):
        if mu < gs.n_outcomes - 1:
            rows[i, layout.meas_slice(mu)] = final
        else:
            # eliminated outcome: its readout error is minus the sum of the others
            for nu in range(gs.n_outcomes - 1):
                rows[i, layout.meas_slice(nu)] = -final
    return rows


def row_coefficients(gs: GateSet, c: Circuit, mu: int, layout: ColumnLayout | None = None) -> np.ndarray:
    """Coefficient vector of outcome ``mu`` of circuit ``c`` over the column layout."""
    if not 0 <= mu < gs.n_outcomes:
        raise ValidationError(f"outcome {mu} out of range")
    return circuit_rows(gs, c, layout, [mu])[0]


def raw_gate_coefficients(gs: GateSet, c: Circuit) -> np.ndarray:
    """Unpacked gate coefficients for every outcome, shape ``(M, n_gates, d^2, d^2)``.

    Includes the ``a = 0`` rows that the layout drops; used for diagnostics.
    """
    states, effects = _sweeps(gs, c)
    d2 = gs.d**2
    out = np.zeros((gs.n_outcomes, gs.n_gates, d2, d2))
    for k, label in enumerate(c.gates, start=1):
        out[:, gs.index(label)] += np.einsum("ma,b->mab", effects[k], states[k])
    return out


@dataclass(frozen=True, eq=False)
class DesignSystem:
    layout: ColumnLayout
    rows: tuple[tuple[str, int], ...]
    C: np.ndarray
    p_ideal: np.ndarray
    p_measured: np.ndarray
    circuits: tuple[Circuit, ...]

    @property
    def residual_data(self) -> np.ndarray:
        return self.p_measured - self.p_ideal

    def permuted(self, order: Sequence[int]) -> "DesignSystem":
        order = np.asarray(order)
        return DesignSystem(
            self.layout,
            tuple(self.rows[i] for i in order),
            self.C[order],
            self.p_ideal[order],
            self.p_measured[order],
            self.circuits,
        )

    def with_measured(self, p_measured: np.ndarray) -> "DesignSystem":
        return DesignSystem(self.layout, self.rows, self.C, self.p_ideal, np.asarray(p_measured, float), self.circuits)

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "row_labels": [f"{cid}:{mu}" for cid, mu in self.rows],
            "column_labels": self.layout.column_labels(),
            "C": self.C.tolist(),
            "p_ideal": self.p_ideal.tolist(),
            "p_measured": self.p_measured.tolist(),
        }


def assemble(
    gs: GateSet,
    circuits: Sequence[Circuit],
    measured: ProbabilityTable | None = None,
    workers: int = 1,
) -> DesignSystem:
    """Stack the design rows of all circuits.

    Rows are ordered by circuit input order, then outcome. When ``measured``
    is None the measured column is left equal to the ideal one.
    """
    layout = ColumnLayout.for_gateset(gs)
    if measured is not None:
        missing = [c.id for c in circuits if c.id not in measured]
        if missing:
            raise ValidationError(f"no measured data for circuits {missing[:5]}{'...' if len(missing) > 5 else ''}")
    if len({c.id for c in circuits}) != len(circuits):
        raise ValidationError("circuit ids must be unique")

    def build(c: Circuit) -> np.ndarray:
        return circuit_rows(gs, c, layout)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(build, circuits))
    else:
        blocks = [build(c) for c in circuits]
    M = gs.n_outcomes
    C = np.vstack(blocks) if blocks else np.zeros((0, layout.n_columns))
    p_ideal = np.concatenate([simulate(gs, c)[: M - 1] for c in circuits]) if circuits else np.zeros(0)
    if measured is None:
        p_measured = p_ideal.copy()
    else:
        p_measured = np.concatenate([np.asarray(measured.probs[c.id])[: M - 1] for c in circuits])
    rows = tuple((c.id, mu) for c in circuits for mu in range(M - 1))
    return DesignSystem(layout, rows, C, p_ideal, p_measured, tuple(circuits))


@dataclass(frozen=True)
class LinearPrediction:
    probs: np.ndarray
    raw: np.ndarray
    clipped: float


def predict_linear(gs: GateSet, c: Circuit, e_hat: np.ndarray, layout: ColumnLayout | None = None) -> LinearPrediction:
    """First-order prediction of all outcome probabilities of ``c``.

    The raw prediction sums to one by construction. If any entry leaves
    [0, 1] it is clipped and the vector renormalized; ``clipped`` reports
    the total amount moved by clipping.
    """
    layout = layout or ColumnLayout.for_gateset(gs)
    e_hat = np.asarray(getattr(e_hat, "values", e_hat), dtype=float)
    if e_hat.shape != (layout.n_columns,):
        raise ValidationError(f"estimate has {e_hat.shape} entries, layout needs {layout.n_columns}")
    M = gs.n_outcomes
    p = simulate(gs, c)
    raw = np.empty(M)
    raw[: M - 1] = p[: M - 1] + circuit_rows(gs, c, layout) @ e_hat
    raw[M - 1] = 1.0 - raw[: M - 1].sum()
    probs = np.clip(raw, 0.0, 1.0)
    clipped = float(np.abs(probs - raw).sum())
    if clipped > 0:
        probs = probs / probs.sum()
    return LinearPrediction(probs=probs, raw=raw, clipped=clipped)
