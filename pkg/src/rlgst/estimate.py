"""Pseudoinverse estimation, null-space and gauge analysis, bootstrap."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import Circuit, ProbabilityTable, stream
from .design import ColumnLayout, DesignSystem, assemble
from .exceptions import DegenerateSystemError, ValidationError
from .gateset import GateSet, completeness_check
from .metrics import agsi_from_estimate

DEFAULT_SV_TOL = 1e-10
DEFAULT_GAUGE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class NoiseVector:
    layout: ColumnLayout
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (self.layout.n_columns,):
            raise ValidationError(f"noise vector needs {self.layout.n_columns} entries, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("noise vector has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other: "NoiseVector") -> "NoiseVector":
        if other.layout != self.layout:
            raise ValidationError("layout mismatch")
        return NoiseVector(self.layout, self.values + other.values)

    def gate_error(self, label: str) -> np.ndarray:
        return self.layout.gate_error(self.values, label)

    def blocks(self) -> dict:
        lay = self.layout
        d2 = lay.d2
        return {
            "gates": {
                lab: self.values[lay.gate_slice(lab)].reshape(d2 - 1, d2).tolist() for lab in lay.labels
            },
            "prep": self.values[lay.prep_slice()].tolist(),
            "meas": {str(mu): self.values[lay.meas_slice(mu)].tolist() for mu in range(lay.n_outcomes - 1)},
        }

    @classmethod
    def from_blocks(cls, layout: ColumnLayout, blocks: dict) -> "NoiseVector":
        v = np.zeros(layout.n_columns)
        for lab in layout.labels:
            v[layout.gate_slice(lab)] = np.asarray(blocks["gates"][lab], dtype=float).ravel()
        v[layout.prep_slice()] = blocks["prep"]
        for mu in range(layout.n_outcomes - 1):
            v[layout.meas_slice(mu)] = blocks["meas"][str(mu)]
        return cls(layout, v)


@dataclass(frozen=True)
class GaugeResult:
    is_gauge: bool
    residual: float
    Q: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class EstimationReport:
    e_hat: NoiseVector
    singular_values: np.ndarray
    rank: int
    null_basis: np.ndarray
    sv_tol_rel: float
    expected_gauge_dim: int
    gauge_diagnostics: list[GaugeResult] = field(default_factory=list)

    @property
    def null_dim(self) -> int:
        return self.null_basis.shape[1]


def _svd(C: np.ndarray):
    m, n = C.shape
    if m == 0:
        return np.zeros((0, 0)), np.zeros(0), np.zeros((0, n))
    # economy SVD is enough when C is tall; otherwise the full V is needed for the null space
    return np.linalg.svd(C, full_matrices=m < n)


def pseudo_solve(C: np.ndarray, rhs: np.ndarray, sv_tol_rel: float = DEFAULT_SV_TOL):
    """``W D^+ V^T rhs`` with singular values below ``sv_tol_rel * max`` dropped.

    Returns ``(x, singular_values, rank, Vt)``; ``rhs`` may be a matrix of
    several right-hand sides.
    """
    if not 0 < sv_tol_rel < 1:
        raise ValidationError("sv_tol_rel must lie in (0, 1)")
    U, s, Vt = _svd(C)
    if s.size == 0 or s[0] == 0:
        raise DegenerateSystemError("design matrix has no nonzero singular value")
    keep = s >= sv_tol_rel * s[0]
    rank = int(keep.sum())
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    k = s.size
    proj = U[:, :k].T @ rhs
    x = Vt[:k].T @ (inv.reshape((-1,) + (1,) * (np.ndim(rhs) - 1)) * proj)
    return x, s, rank, Vt


def solve(ds: DesignSystem, sv_tol_rel: float = DEFAULT_SV_TOL) -> EstimationReport:
    """Linear-inversion estimate ``e_hat = C^+ (p_measured - p_ideal)``.

    No CP constraint is imposed, so the estimated noise maps need not be
    physical.
    """
    x, s, rank, Vt = pseudo_solve(ds.C, ds.residual_data, sv_tol_rel)
    null_basis = Vt[rank:].T.copy()
    d2 = ds.layout.d2
    return EstimationReport(
        e_hat=NoiseVector(ds.layout, x),
        singular_values=s,
        rank=rank,
        null_basis=null_basis,
        sv_tol_rel=sv_tol_rel,
        expected_gauge_dim=d2 * (d2 - 1),
    )


def pseudoinverse(ds: DesignSystem, sv_tol_rel: float = DEFAULT_SV_TOL) -> tuple[np.ndarray, int]:
    """Explicit pseudoinverse, for re-solving many right-hand sides."""
    U, s, Vt = _svd(ds.C)
    if s.size == 0 or s[0] == 0:
        raise DegenerateSystemError("design matrix has no nonzero singular value")
    keep = s >= sv_tol_rel * s[0]
    k = s.size
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (Vt[:k].T * inv) @ U[:, :k].T, int(keep.sum())


def gauge_vector(gs: GateSet, layout: ColumnLayout, Q: np.ndarray) -> NoiseVector:
    """Noise-vector shift induced by a gauge generator ``Q`` with zero first row.

    Gates shift by ``Q - g Q g^T``, preparation by ``Q rho`` and readout by
    ``-P_mu Q`` (ideal gates are orthogonal, so the adjoint is the transpose).
    """
    Q = np.asarray(Q, dtype=float)
    d2 = layout.d2
    if Q.shape != (d2, d2):
        raise ValidationError(f"gauge generator must be {d2}x{d2}")
    if np.any(Q[0] != 0):
        raise ValidationError("gauge generator must have an exactly zero first row")
    v = np.zeros(layout.n_columns)
    for lab, g in zip(gs.labels, gs.ideal):
        delta = Q - g.matrix @ Q @ g.matrix.T
        if np.max(np.abs(delta[0])) > 1e-12:
            raise ValidationError("gauge shift of a gate has a nonzero first row")
        v[layout.gate_slice(lab)] = delta[1:].ravel()
    prep = Q @ gs.spam_ideal.rho.coords
    v[layout.prep_slice()] = prep[1:]
    effects = gs.spam_ideal.effect_matrix()
    for mu in range(layout.n_outcomes - 1):
        v[layout.meas_slice(mu)] = -effects[mu] @ Q
    return NoiseVector(layout, v)


def gauge_operator(gs: GateSet, layout: ColumnLayout) -> np.ndarray:
    """Matrix of the linear map from ``Q[1:, :]`` (row-major) to its gauge vector."""
    d2 = layout.d2
    cols = []
    for i in range(1, d2):
        for j in range(d2):
            Q = np.zeros((d2, d2))
            Q[i, j] = 1.0
            cols.append(gauge_vector(gs, layout, Q).values)
    return np.array(cols).T


def gauge_membership(
    gs: GateSet,
    layout: ColumnLayout,
    alpha,
    tol: float = DEFAULT_GAUGE_TOL,
    operator: np.ndarray | None = None,
) -> GaugeResult | list[GaugeResult]:
    """Least-squares test whether ``alpha`` is a gauge shift.

    ``alpha`` may be a single vector or a matrix whose columns are tested
    individually. The residual is relative to ``|alpha|``.
    """
    T = gauge_operator(gs, layout) if operator is None else operator
    a = np.asarray(getattr(alpha, "values", alpha), dtype=float)
    single = a.ndim == 1
    A = a[:, None] if single else a
    sol, *_ = np.linalg.lstsq(T, A, rcond=None)
    resid = np.linalg.norm(T @ sol - A, axis=0)
    norms = np.linalg.norm(A, axis=0)
    rel = np.where(norms > 0, resid / np.where(norms > 0, norms, 1.0), 0.0)
    d2 = layout.d2
    out = []
    for k in range(A.shape[1]):
        Q = np.zeros((d2, d2))
        Q[1:] = sol[:, k].reshape(d2 - 1, d2)
        ok = bool(rel[k] < tol)
        out.append(GaugeResult(is_gauge=ok, residual=float(rel[k]), Q=Q if ok else None))
    return out[0] if single else out


def gauge_diagnostics(gs: GateSet, report: EstimationReport, tol: float = DEFAULT_GAUGE_TOL) -> list[GaugeResult]:
    if report.null_dim == 0:
        return []
    return gauge_membership(gs, report.e_hat.layout, report.null_basis, tol)


@dataclass(frozen=True)
class NullSpaceAudit:
    null_dim: int
    complete: bool
    expected_gauge_dim: int | None
    extra_null_dim: int | None
    advice: str


def null_space_audit(report: EstimationReport, gs: GateSet, max_depth: int = 8) -> NullSpaceAudit:
    """Compare the null-space dimension with the gauge dimension ``d^2 (d^2 - 1)``."""
    comp = completeness_check(gs, max_depth)
    if not comp.complete:
        return NullSpaceAudit(
            null_dim=report.null_dim,
            complete=False,
            expected_gauge_dim=None,
            extra_null_dim=None,
            advice=(
                f"gate set is tomographically incomplete (reachable rank {comp.reached_rank}); "
                f"null dimension {report.null_dim} reported without an expectation"
            ),
        )
    extra = report.null_dim - report.expected_gauge_dim
    if extra > 0:
        advice = (
            f"{extra} null direction(s) beyond the gauge freedom: add more random circuits, "
            "including short and null circuits, and re-check"
        )
    elif extra < 0:
        advice = f"null dimension is {-extra} below the gauge dimension; check sv_tol"
    else:
        advice = "null space matches the gauge dimension"
    return NullSpaceAudit(report.null_dim, True, report.expected_gauge_dim, extra, advice)


@dataclass(frozen=True, eq=False)
class BootstrapReplicate:
    index: int
    e_hat: np.ndarray
    agsi: float


def bootstrap(
    gs: GateSet,
    circuits: Sequence[Circuit],
    counts: ProbabilityTable,
    B: int,
    rng_seed: int,
    sv_tol_rel: float = DEFAULT_SV_TOL,
    ds: DesignSystem | None = None,
) -> list[BootstrapReplicate]:
    """Parametric bootstrap: redraw every circuit's counts from its empirical frequencies.

    The design matrix depends only on the circuits, so its pseudoinverse is
    computed once and reused by every replicate.
    """
    if B < 1:
        raise ValidationError("B must be >= 1")
    if counts.shots < 1:
        raise ValidationError("bootstrap needs finite-shot data")
    ds = ds or assemble(gs, circuits, counts)
    pinv, _ = pseudoinverse(ds, sv_tol_rel)
    M = gs.n_outcomes
    out = []
    for b in range(B):
        rng = stream(rng_seed, f"bootstrap:{b}")
        resampled = []
        for c in circuits:
            p = np.clip(counts.probs[c.id], 0.0, None)
            n = rng.multinomial(counts.shots, p / p.sum())
            resampled.append(n[: M - 1] / counts.shots)
        e = pinv @ (np.concatenate(resampled) - ds.p_ideal)
        out.append(BootstrapReplicate(b, e, agsi_from_estimate(gs, NoiseVector(ds.layout, e))))
    return out

