"""Figures of merit: statistical distance, gate fidelity, AGsI and goodness of fit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import ValidationError
from .pauli import Superop

if TYPE_CHECKING:
    from .design import DesignSystem
    from .estimate import NoiseVector
    from .gateset import GateSet


def stat_distance(p_hat, p) -> float:
    """Half the l1 distance between two outcome distributions."""
    p_hat, p = np.asarray(p_hat, dtype=float), np.asarray(p, dtype=float)
    if p_hat.shape != p.shape:
        raise ValidationError(f"length mismatch: {p_hat.shape} vs {p.shape}")
    return 0.5 * float(np.abs(p_hat - p).sum())


def _matrix(g) -> np.ndarray:
    return g.matrix if isinstance(g, Superop) else np.asarray(g, dtype=float)


def avg_fidelity(g_ideal, g_noisy) -> float:
    """Haar-averaged fidelity ``(tr(g^T g') + d) / (d (d + 1))`` of two transfer matrices."""
    a, b = _matrix(g_ideal), _matrix(g_noisy)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = int(round(np.sqrt(a.shape[0])))
    return (float(np.trace(a.T @ b)) + d) / (d * (d + 1))


def gate_infidelities(gs: "GateSet", estimate: "NoiseVector | None" = None) -> dict[str, float]:
    """``1 - F(g, g~)`` per gate, from the attached noisy gates or from an estimate."""
    out = {}
    if estimate is None:
        if gs.noisy is None:
            raise ValidationError("gate set has no noisy gates attached")
        for lab, g, gt in zip(gs.labels, gs.ideal, gs.noisy):
            out[lab] = 1.0 - avg_fidelity(g, gt)
        return out
    if tuple(estimate.layout.labels) != gs.labels:
        raise ValidationError("estimate layout does not match the gate set")
    eye = np.eye(gs.d**2)
    for lab, g in zip(gs.labels, gs.ideal):
        noisy = (eye + estimate.gate_error(lab)) @ g.matrix
        out[lab] = 1.0 - avg_fidelity(g, noisy)
    return out


def agsi(gs: "GateSet", estimate: "NoiseVector | None" = None) -> float:
    """Average gate-set infidelity. Negative values are possible for non-CP estimates."""
    inf = gate_infidelities(gs, estimate)
    return float(np.mean(list(inf.values())))


def agsi_from_estimate(gs: "GateSet", estimate: "NoiseVector") -> float:
    return agsi(gs, estimate)


@dataclass(frozen=True, eq=False)
class FitReport:
    chi2: float
    dof: int
    n_sigma: float
    residuals: np.ndarray

    def to_dict(self) -> dict:
        return {"chi2": self.chi2, "dof": self.dof, "n_sigma": self.n_sigma}


def n_sigma(chi2: float, dof: int) -> float:
    if dof <= 0:
        raise ValidationError(f"degrees of freedom must be positive, got {dof}")
    return (chi2 - dof) / np.sqrt(2 * dof)


def goodness_of_fit(ds: "DesignSystem", e_hat, rank: int, shots: int) -> FitReport:
    """Chi-squared of the linear fit over all retained (circuit, outcome) rows.

    The binomial standard deviation of each measured frequency is floored at
    the value for ``p = 1 / (2 N_s)`` so rows measured as exactly 0 or 1 stay
    finite. Degrees of freedom are rows minus the rank of the design matrix.
    """
    if shots <= 0:
        raise ValidationError("goodness of fit needs a positive shot count")
    if not 0 <= rank <= ds.C.shape[1]:
        raise ValidationError(f"rank {rank} outside [0, {ds.C.shape[1]}]")
    e = np.asarray(getattr(e_hat, "values", e_hat), dtype=float)
    dof = ds.C.shape[0] - rank
    if dof <= 0:
        raise ValidationError(f"no degrees of freedom left ({ds.C.shape[0]} rows, rank {rank})")
    p = ds.p_measured
    p_hat = ds.p_ideal + ds.C @ e
    p_min = 1.0 / (2 * shots)
    sigma = np.sqrt(np.maximum(p * (1 - p), p_min * (1 - p_min)) / shots)
    z = (p - p_hat) / sigma
    chi2 = float(np.sum(z**2))
    return FitReport(chi2=chi2, dof=dof, n_sigma=float(n_sigma(chi2, dof)), residuals=z)
