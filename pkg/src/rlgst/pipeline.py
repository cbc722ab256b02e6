"""Experiment configuration and the end-to-end estimation pipeline.

Every function here returns plain JSON-ready dicts (or library objects) so
the command-line layer only parses arguments and writes files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import ideal_spam
from .circuits import (
    Circuit,
    ProbabilityTable,
    length_budget_check,
    outcome_bitstrings,
    random_circuits,
    random_circuits_mixed,
    simulate,
    simulate_table,
    stream,
)
from .design import ColumnLayout, assemble, predict_linear
from .estimate import (
    DEFAULT_SV_TOL,
    NoiseVector,
    bootstrap,
    gauge_diagnostics,
    null_space_audit,
    solve,
)
from .exceptions import SchemaError, ValidationError
from .fileio import SCHEMA_VERSION, read_json
from .gateset import (
    STANDARD_GATESETS,
    GateSet,
    calibrated_noise,
    completeness_check,
    gateset_from_unitaries,
    gateset_with_params,
    offset_spam,
    standard_gateset,
)
from .metrics import agsi, gate_infidelities, goodness_of_fit, stat_distance

NOISE_SAMPLING_NOTE = (
    "true noise parameters: probabilities uniform in [0,1), angles uniform in [-1,1), "
    "one common scale solved so the true AGsI equals the target; this distribution is an "
    "implementation choice, not taken from the method description"
)
DOF_NOTE = "dof = retained (circuit, outcome) rows - rank(C)"
DEFAULT_TEST_LENGTHS = (10, 50, 100, 200, 500, 1000)


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise SchemaError(f"{where}: missing required field {key!r}")
    return data[key]


def _int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


@dataclass(frozen=True)
class CircuitSpec:
    lengths: tuple[int, ...]
    seed: int
    count_per_length: int | None = None
    n_circuits: int | None = None
    include_null: bool = True

    @classmethod
    def from_dict(cls, data: dict, where: str, default_null: bool) -> "CircuitSpec":
        if not isinstance(data, dict):
            raise SchemaError(f"{where} must be an object")
        lengths = tuple(_int(L, f"{where}.lengths entry") for L in _require(data, "lengths", where))
        if not lengths:
            raise ValidationError(f"{where}.lengths is empty")
        per, total = data.get("count_per_length"), data.get("n_circuits")
        if (per is None) == (total is None):
            raise SchemaError(f"{where}: give exactly one of count_per_length, n_circuits")
        return cls(
            lengths=lengths,
            seed=_int(_require(data, "seed", where), f"{where}.seed"),
            count_per_length=None if per is None else _int(per, "count_per_length", 1),
            n_circuits=None if total is None else _int(total, "n_circuits", 1),
            include_null=bool(data.get("include_null", default_null)),
        )

    def to_dict(self) -> dict:
        out: dict = {"lengths": list(self.lengths), "seed": self.seed, "include_null": self.include_null}
        if self.count_per_length is not None:
            out["count_per_length"] = self.count_per_length
        else:
            out["n_circuits"] = self.n_circuits
        return out

    def generate(self, gs: GateSet, seed: int | None = None) -> list[Circuit]:
        seed = self.seed if seed is None else seed
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if self.count_per_length is not None:
                return random_circuits(gs, self.lengths, self.count_per_length, seed, self.include_null)
            return random_circuits_mixed(gs, self.lengths, self.n_circuits, seed, self.include_null)


@dataclass(frozen=True)
class NoiseSpec:
    """Either a calibrated random draw (``target_agsi`` + ``seed``) or explicit ``params``."""

    spam_a: float = 0.01
    target_agsi: float | None = None
    seed: int | None = None
    params: dict[str, tuple[float, ...]] | None = None
    reverse_order: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        if not isinstance(data, dict):
            raise SchemaError("noise must be an object")
        target, params = data.get("target_agsi"), data.get("params")
        if (target is None) == (params is None):
            raise SchemaError("noise: give exactly one of target_agsi, params")
        seed = data.get("seed")
        if target is not None:
            if seed is None:
                raise SchemaError("noise: a seed is required with target_agsi")
            seed = _int(seed, "noise.seed")
            if not float(target) > 0:
                raise ValidationError("noise.target_agsi must be positive")
        if params is not None:
            if not isinstance(params, dict):
                raise SchemaError("noise.params must map gate labels to parameter lists")
            params = {k: tuple(float(x) for x in v) for k, v in params.items()}
        return cls(
            spam_a=float(data.get("spam_a", 0.01)),
            target_agsi=None if target is None else float(target),
            seed=seed,
            params=params,
            reverse_order=bool(data.get("reverse_order", False)),
        )

    def to_dict(self) -> dict:
        out: dict = {"spam_a": self.spam_a, "reverse_order": self.reverse_order}
        if self.params is not None:
            out["params"] = {k: list(v) for k, v in self.params.items()}
        else:
            out["target_agsi"] = self.target_agsi
            out["seed"] = self.seed
        return out


def _parse_unitary(raw, label: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"gate {label!r}: unitary must be nested [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise SchemaError(f"gate {label!r}: unitary must have shape (d, d, 2)")
    return arr[..., 0] + 1j * arr[..., 1]


def build_gateset(spec) -> GateSet:
    """Gate set from a config entry: a standard name or an explicit unitary list."""
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict):
        raise SchemaError("gateset must be a name or an object")
    if "gates" in spec:
        gates = spec["gates"]
        if not isinstance(gates, list) or not gates:
            raise SchemaError("gateset.gates must be a non-empty list")
        unitaries = {}
        for g in gates:
            label = str(_require(g, "label", "gateset.gates entry"))
            unitaries[label] = _parse_unitary(_require(g, "unitary", "gateset.gates entry"), label)
        if len(unitaries) != len(gates):
            raise ValidationError("gate labels must be unique")
        return gateset_from_unitaries(unitaries, name=spec.get("name"))
    name = _require(spec, "name", "gateset")
    if name not in STANDARD_GATESETS:
        raise ValidationError(f"unknown gate set {name!r}; choose from {list(STANDARD_GATESETS)}")
    return standard_gateset(name)


def _gateset_spec(spec) -> dict:
    return {"name": spec} if isinstance(spec, str) else dict(spec)


@dataclass(frozen=True)
class ExperimentConfig:
    gateset: dict
    seed: int
    circuits: CircuitSpec
    noise: NoiseSpec | None = None
    counts_path: str | None = None
    shots: int = 8192
    sv_tol: float = DEFAULT_SV_TOL
    epsilon_estimate: float | None = None
    bootstrap: int = 100
    test_circuits: CircuitSpec | None = None
    base_dir: Path = field(default=Path("."), compare=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise SchemaError("config must be a JSON object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported config schema_version {version}")
        noise, counts = data.get("noise"), data.get("counts")
        if (noise is None) == (counts is None):
            raise SchemaError("config needs exactly one of 'noise' (simulation) or 'counts' (ingestion)")
        sv_tol = float(data.get("sv_tol", DEFAULT_SV_TOL))
        if not 0 < sv_tol < 1:
            raise ValidationError("sv_tol must lie in (0, 1)")
        eps = data.get("epsilon_estimate")
        if eps is not None and not float(eps) > 0:
            raise ValidationError("epsilon_estimate must be positive")
        test = data.get("test_circuits")
        cfg = cls(
            gateset=_gateset_spec(_require(data, "gateset", "config")),
            seed=_int(_require(data, "seed", "config"), "seed"),
            circuits=CircuitSpec.from_dict(_require(data, "circuits", "config"), "circuits", True),
            noise=None if noise is None else NoiseSpec.from_dict(noise),
            counts_path=None if counts is None else str(counts),
            shots=_int(data.get("shots", 8192), "shots"),
            sv_tol=sv_tol,
            epsilon_estimate=None if eps is None else float(eps),
            bootstrap=_int(data.get("bootstrap", 100), "bootstrap"),
            test_circuits=None if test is None else CircuitSpec.from_dict(test, "test_circuits", False),
            base_dir=base_dir or Path("."),
        )
        build_gateset(cfg.gateset)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(read_json(path), base_dir=path.parent)

    def to_dict(self) -> dict:
        out: dict = {"schema_version": SCHEMA_VERSION, "gateset": self.gateset, "seed": self.seed}
        out["circuits"] = self.circuits.to_dict()
        if self.noise is not None:
            out["noise"] = self.noise.to_dict()
        else:
            out["counts"] = self.counts_path
        out.update(shots=self.shots, sv_tol=self.sv_tol, bootstrap=self.bootstrap)
        if self.epsilon_estimate is not None:
            out["epsilon_estimate"] = self.epsilon_estimate
        if self.test_circuits is not None:
            out["test_circuits"] = self.test_circuits.to_dict()
        return out

    def ideal_gateset(self) -> GateSet:
        return build_gateset(self.gateset)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


@dataclass(frozen=True, eq=False)
class TruthModel:
    gateset: GateSet
    params: dict[str, np.ndarray]
    scale: float | None


def true_model(cfg: ExperimentConfig) -> TruthModel:
    """Noisy gate set described by the config's noise spec (deterministic in its seed)."""
    if cfg.noise is None:
        raise ValidationError("config has no true-noise spec; cannot simulate")
    gs = cfg.ideal_gateset()
    spam = offset_spam(gs.n_qubits, cfg.noise.spam_a) if cfg.noise.spam_a else ideal_spam(gs.n_qubits)
    if cfg.noise.params is not None:
        missing = set(gs.labels) - set(cfg.noise.params)
        if missing:
            raise ValidationError(f"noise.params lacks gates {sorted(missing)}")
        params = {k: np.asarray(v) for k, v in cfg.noise.params.items() if k in gs.labels}
        noisy = gateset_with_params(gs, params, spam, cfg.noise.reverse_order)
        return TruthModel(noisy, params, None)
    noisy, draw = calibrated_noise(
        gs, cfg.noise.target_agsi, stream(cfg.noise.seed, "noise"), spam, cfg.noise.reverse_order
    )
    return TruthModel(noisy, draw.params, draw.scale)


def generate_circuits(cfg: ExperimentConfig, test: bool = False, seed: int | None = None) -> list[Circuit]:
    spec = cfg.test_circuits if test else cfg.circuits
    if spec is None:
        raise ValidationError("config has no test_circuits section")
    return spec.generate(cfg.ideal_gateset(), seed)


def simulate_counts(
    cfg: ExperimentConfig,
    circuits: Sequence[Circuit],
    shots: int | None = None,
    seed: int | None = None,
) -> ProbabilityTable:
    truth = true_model(cfg)
    shots = cfg.shots if shots is None else shots
    if shots < 0:
        raise ValidationError("shots must be >= 0")
    return simulate_table(truth.gateset, circuits, shots, cfg.seed if seed is None else seed)


def check_consistency(circuits: Sequence[Circuit], counts: ProbabilityTable, n_outcomes: int) -> None:
    ids = {c.id for c in circuits}
    missing = sorted(ids - set(counts.probs))
    extra = sorted(set(counts.probs) - ids)
    if missing or extra:
        raise ValidationError(
            f"circuit/count ids disagree: {len(missing)} circuits without counts, "
            f"{len(extra)} counts without circuits (e.g. {(missing or extra)[:3]})"
        )
    widths = {np.asarray(p).size for p in counts.probs.values()}
    if widths != {n_outcomes}:
        raise ValidationError(f"counts have {sorted(widths)} outcomes, gate set has {n_outcomes}")


def _circuits_json(circuits: Sequence[Circuit]) -> list[dict]:
    return [{"id": c.id, "gates": list(c.gates)} for c in circuits]


def _floats(values) -> list[float]:
    return [float(x) for x in np.asarray(values, dtype=float)]


def estimate_report(
    cfg: ExperimentConfig,
    circuits: Sequence[Circuit],
    counts: ProbabilityTable,
    sv_tol: float | None = None,
) -> dict:
    """assemble, solve, audit the null space, test gauge membership, score the fit."""
    gs = cfg.ideal_gateset()
    sv_tol = cfg.sv_tol if sv_tol is None else sv_tol
    check_consistency(circuits, counts, gs.n_outcomes)
    ds = assemble(gs, circuits, counts)
    rep = solve(ds, sv_tol)
    audit = null_space_audit(rep, gs)
    diag = gauge_diagnostics(gs, rep)
    comp = completeness_check(gs)
    warn = []
    if cfg.epsilon_estimate is not None:
        warn += length_budget_check(circuits, cfg.epsilon_estimate)
    if counts.shots > 0:
        try:
            fit = goodness_of_fit(ds, rep.e_hat, rep.rank, counts.shots).to_dict()
            fit["convention"] = DOF_NOTE
        except ValidationError as exc:
            fit = {"skipped": str(exc)}
    else:
        fit = {"skipped": "exact probabilities (infinite shots); chi-squared undefined"}
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "kind": "rlgst-estimate",
        "gateset": cfg.gateset,
        "layout": rep.e_hat.layout.to_dict(),
        "n_columns": rep.e_hat.layout.n_columns,
        "n_rows": int(ds.C.shape[0]),
        "shots": counts.shots,
        "sv_tol": sv_tol,
        "seeds": {"circuits": cfg.circuits.seed, "shots": counts.meta.get("seed", cfg.seed)},
        "e_hat": rep.e_hat.blocks(),
        "singular_values": _floats(rep.singular_values),
        "rank": rep.rank,
        "null_dim": rep.null_dim,
        "completeness": {"complete": comp.complete, "reached_rank": comp.reached_rank},
        "expected_gauge_dim": audit.expected_gauge_dim,
        "extra_null_dim": audit.extra_null_dim,
        "advice": audit.advice,
        "gauge": {
            "n_tested": len(diag),
            "n_gauge": sum(r.is_gauge for r in diag),
            "residuals": [r.residual for r in diag],
        },
        "agsi": agsi(gs, rep.e_hat),
        "gate_infidelities": gate_infidelities(gs, rep.e_hat),
        "fit": fit,
        "warnings": warn,
    }
    if cfg.noise is not None:
        truth = true_model(cfg)
        report["seeds"]["noise"] = cfg.noise.seed
        report["truth"] = {
            "agsi": agsi(truth.gateset),
            "gate_infidelities": gate_infidelities(truth.gateset),
            "noise_scale": truth.scale,
            "params": {k: _floats(v) for k, v in truth.params.items()},
            "note": NOISE_SAMPLING_NOTE if truth.scale is not None else "explicit parameters",
        }
    report["circuits"] = _circuits_json(circuits)
    return report


def _report_model(report: dict) -> tuple[GateSet, NoiseVector]:
    if report.get("kind") != "rlgst-estimate":
        raise SchemaError("not an estimate report")
    gs = build_gateset(_require(report, "gateset", "report"))
    layout = ColumnLayout.from_dict(_require(report, "layout", "report"))
    if layout != ColumnLayout.for_gateset(gs):
        raise ValidationError("report layout does not match its gate set")
    try:
        e_hat = NoiseVector.from_blocks(layout, _require(report, "e_hat", "report"))
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"malformed e_hat blocks: {exc}") from exc
    return gs, e_hat


def predictions(
    report: dict,
    test_circuits: Sequence[Circuit],
    reference: ProbabilityTable | None = None,
    truth: GateSet | None = None,
) -> dict:
    """Linear predictions for test circuits; distances when a reference is available.

    ``reference`` (measured counts) takes precedence over ``truth`` (exact
    noisy simulation).
    """
    gs, e_hat = _report_model(report)
    keys = outcome_bitstrings(gs.n_qubits)
    if reference is not None:
        check_consistency(test_circuits, reference, gs.n_outcomes)
    entries, by_len = [], {}
    for c in test_circuits:
        pred = predict_linear(gs, c, e_hat)
        item: dict = {"id": c.id, "length": len(c), "p_hat": dict(zip(keys, _floats(pred.probs)))}
        item["clipped"] = pred.clipped
        ref = None
        if reference is not None:
            ref = reference.probs[c.id]
        elif truth is not None:
            ref = simulate(truth, c, use_noisy=True)
        if ref is not None:
            item["delta"] = stat_distance(pred.probs, ref)
            by_len.setdefault(len(c), []).append(item["delta"])
        entries.append(item)
    summary = [
        {"length": L, "n": len(v), "mean_delta": float(np.mean(v)), "std_delta": float(np.std(v))}
        for L, v in sorted(by_len.items())
    ]
    source = "counts" if reference is not None else ("exact" if truth is not None else None)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "rlgst-predictions",
        "reference": source,
        "by_length": summary,
        "predictions": entries,
    }


def gauge_check(report: dict, tol: float = 1e-8) -> dict:
    """Recompute the null space of the report's design and test each basis vector."""
    gs, _ = _report_model(report)
    circuits = [Circuit(c["id"], tuple(c["gates"])) for c in _require(report, "circuits", "report")]
    ds = assemble(gs, circuits)
    rep = solve(ds, float(report.get("sv_tol", DEFAULT_SV_TOL)))
    diag = gauge_diagnostics(gs, rep, tol)
    audit = null_space_audit(rep, gs)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "rlgst-gauge-check",
        "null_dim": rep.null_dim,
        "expected_gauge_dim": audit.expected_gauge_dim,
        "complete": audit.complete,
        "advice": audit.advice,
        "tolerance": tol,
        "all_gauge": all(r.is_gauge for r in diag),
        "vectors": [{"index": i, "is_gauge": r.is_gauge, "residual": r.residual} for i, r in enumerate(diag)],
    }


def bootstrap_errors(
    cfg: ExperimentConfig,
    circuits: Sequence[Circuit],
    counts: ProbabilityTable,
    B: int,
    seed: int,
    sv_tol: float | None = None,
) -> dict:
    gs = cfg.ideal_gateset()
    sv_tol = cfg.sv_tol if sv_tol is None else sv_tol
    check_consistency(circuits, counts, gs.n_outcomes)
    reps = bootstrap(gs, circuits, counts, B, seed, sv_tol)
    layout = ColumnLayout.for_gateset(gs)
    values = np.array([r.e_hat for r in reps])
    infid = [gate_infidelities(gs, NoiseVector(layout, r.e_hat)) for r in reps]
    agsis = np.array([r.agsi for r in reps])
    std = values.std(axis=0, ddof=1) if B > 1 else np.zeros(layout.n_columns)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "rlgst-bootstrap",
        "B": B,
        "seed": seed,
        "sv_tol": sv_tol,
        "agsi": {
            "mean": float(agsis.mean()),
            "std": float(agsis.std(ddof=1)) if B > 1 else 0.0,
            "replicates": _floats(agsis),
        },
        "gate_infidelities": {
            lab: {
                "mean": float(np.mean([x[lab] for x in infid])),
                "std": float(np.std([x[lab] for x in infid], ddof=1)) if B > 1 else 0.0,
            }
            for lab in gs.labels
        },
        "e_hat_std": NoiseVector(layout, std).blocks(),
    }


def load_counts_for(cfg: ExperimentConfig, gs: GateSet) -> ProbabilityTable:
    from .fileio import read_counts

    if cfg.counts_path is None:
        raise ValidationError("config has no counts path")
    return read_counts(cfg.resolve(cfg.counts_path), gs.n_qubits)
