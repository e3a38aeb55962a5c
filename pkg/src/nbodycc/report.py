"""Deterministic machine-readable reports.

Reports are JSON documents with sorted keys and every float printed at 17
significant digits, so identical inputs produce byte-identical output; each
report embeds the tool version and a hash of the canonicalized problem.
"""

import hashlib
import json

import numpy as np

TOOL_NAME = "nbodycc"


def _canon(obj) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            raise ValueError("non-finite float in report")
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = (json.dumps(str(k)) + ":" + _canon(v) for k, v in sorted(obj.items()))
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj) -> str:
    return _canon(obj)


def problem_hash(problem: dict) -> str:
    return hashlib.sha256(canonical_json(problem).encode("utf-8")).hexdigest()


def build_report(command: str, version: str, problem: dict | None, payload: dict) -> dict:
    report = {
        "tool": {"name": TOOL_NAME, "version": version},
        "command": command,
    }
    if problem is not None:
        report["problem_sha256"] = problem_hash(problem)
    report.update(payload)
    return report


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def critical_record_payload(rec) -> dict:
    return {
        "configuration": rec.q,
        "lambda": rec.lam,
        "residual": rec.residual,
        "u_value": rec.u_value,
        "distance_signature": rec.distance_signature,
        "isotropy_rank": rec.isotropy_rank,
        "iterations": rec.iterations,
        "multiplicity": rec.multiplicity,
    }


def index_record_payload(rec) -> dict:
    return {
        "morse_index": rec.morse_index,
        "kernel_dim": rec.kernel_dim,
        "fixed_point_index": rec.fixed_point_index,
        "slice_dim": rec.slice_dim,
        "spectrum": rec.spectrum,
        "identity_residual": rec.identity_residual,
    }


def re_record_payload(rec) -> dict:
    return {
        "configuration": rec.q,
        "omega_sq": rec.omega_sq,
        "residual": rec.residual,
        "u_value": rec.u_value,
        "planar": rec.planar,
        "central": rec.central,
        "iterations": rec.iterations,
    }


def census_csv(records, index_records=None) -> str:
    """CSV table of census classes, one row per rotation class."""
    cols = ["class", "u_value", "lambda", "residual", "isotropy_rank", "multiplicity"]
    if index_records is not None:
        cols += ["morse_index", "fixed_point_index", "kernel_dim", "slice_dim", "identity_residual"]
    lines = [",".join(cols)]
    for i, rec in enumerate(records):
        row = [
            str(i),
            fmt(rec.u_value),
            fmt(rec.lam),
            fmt(rec.residual),
            str(rec.isotropy_rank),
            str(rec.multiplicity),
        ]
        if index_records is not None:
            idx = index_records[i]
            if idx is None:
                row += ["", "", "", "", ""]
            else:
                row += [
                    str(idx.morse_index),
                    str(idx.fixed_point_index),
                    str(idx.kernel_dim),
                    str(idx.slice_dim),
                    fmt(idx.identity_residual),
                ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_csv(fields: dict) -> str:
    """Single-row CSV for scalar summaries."""
    keys = list(fields)
    vals = [fmt(v) if isinstance(v, float) else str(v) for v in fields.values()]
    return ",".join(keys) + "\n" + ",".join(vals) + "\n"
