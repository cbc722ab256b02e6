"""JSON / JSON-lines readers and writers for circuits, counts and reports."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuits import Circuit, ProbabilityTable, outcome_bitstrings
from .exceptions import SchemaError

SCHEMA_VERSION = 1


def _load_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def dumps(obj) -> str:
    """Deterministic JSON text: key order as built, shortest round-trip floats."""
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return data


def _check_version(data: dict, path) -> None:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version {version}")


def write_circuits(path, circuits: Sequence[Circuit]) -> None:
    lines = [json.dumps({"schema_version": SCHEMA_VERSION, "kind": "circuits"})]
    lines += [json.dumps({"id": c.id, "gates": list(c.gates)}) for c in circuits]
    Path(path).write_text("\n".join(lines) + "\n")


def read_circuits(path) -> list[Circuit]:
    """Read a JSON-lines circuit file; a leading header line is optional."""
    circuits = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}:{lineno}: expected an object")
            if "id" not in obj:
                if obj.get("kind") == "circuits":
                    _check_version(obj, path)
                    continue
                raise SchemaError(f"{path}:{lineno}: circuit without 'id'")
            gates = obj.get("gates")
            if not isinstance(gates, list) or not all(isinstance(g, str) for g in gates):
                raise SchemaError(f"{path}:{lineno}: 'gates' must be a list of labels")
            circuits.append(Circuit(str(obj["id"]), tuple(gates)))
    if len({c.id for c in circuits}) != len(circuits):
        raise SchemaError(f"{path}: duplicate circuit ids")
    return circuits


def counts_to_json(table: ProbabilityTable, n_qubits: int, timestamp: str | None = None) -> dict:
    keys = outcome_bitstrings(n_qubits)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "shots": table.shots,
        "seed": table.meta.get("seed"),
        "exact": table.shots == 0,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    out: dict = {"meta": meta}
    source = table.probs if table.shots == 0 else table.counts
    for cid, values in source.items():
        if table.shots == 0:
            out[cid] = {k: float(v) for k, v in zip(keys, values)}
        else:
            out[cid] = {k: int(v) for k, v in zip(keys, values)}
    return out


def write_counts(path, table: ProbabilityTable, n_qubits: int, timestamp: str | None = None) -> None:
    write_json(path, counts_to_json(table, n_qubits, timestamp))


def read_counts(path, n_qubits: int | None = None) -> ProbabilityTable:
    """Counts file -> ProbabilityTable.

    Outcome keys are bitstrings with qubit 1 leftmost. Missing outcomes
    count as zero. With ``meta.shots == 0`` the values are exact
    probabilities.
    """
    data = read_json(path)
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError(f"{path}: 'meta' must be an object")
    _check_version(meta, path)
    entries = {k: v for k, v in data.items() if k != "meta"}
    if not entries:
        raise SchemaError(f"{path}: no circuits")
    widths = {len(key) for v in entries.values() if isinstance(v, dict) for key in v}
    if n_qubits is None:
        if len(widths) != 1:
            raise SchemaError(f"{path}: inconsistent outcome bitstring widths {sorted(widths)}")
        n_qubits = widths.pop()
    keys = outcome_bitstrings(n_qubits)
    rows = {}
    for cid, outcomes in entries.items():
        if not isinstance(outcomes, dict):
            raise SchemaError(f"{path}: entry {cid!r} must map bitstrings to values")
        unknown = set(outcomes) - set(keys)
        if unknown:
            raise SchemaError(f"{path}: circuit {cid!r} has invalid outcome keys {sorted(unknown)}")
        rows[cid] = np.array([outcomes.get(k, 0) for k in keys], dtype=float)
    shots = int(meta.get("shots", 0) or 0)
    if meta.get("exact") or shots == 0:
        return ProbabilityTable(probs=rows, shots=0, meta=dict(meta))
    if any(np.any(r != np.round(r)) or np.any(r < 0) for r in rows.values()):
        raise SchemaError(f"{path}: counts must be non-negative integers")
    table = ProbabilityTable.from_counts({k: v.astype(np.int64) for k, v in rows.items()}, meta)
    if table.shots != shots:
        raise SchemaError(f"{path}: counts sum to {table.shots}, meta says {shots}")
    return table
