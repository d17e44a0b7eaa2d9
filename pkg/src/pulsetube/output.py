"""Deterministic CSV/JSON writers for run artifacts.

Every writer here produces byte-identical output for identical inputs:
floats are formatted with 17 significant digits (CSV) or native repr
(JSON with sorted keys), and nothing emits timestamps, hostnames, or
other run-environment noise.
"""
from __future__ import annotations

import json
import os
from typing import Iterable, List, Sequence

import numpy as np

from .diagnostics import DiagnosticsRecord, band_check
from .gas import GasParams, to_invariants
from .scheme import Layer

DIAGNOSTICS_SCHEMA = "pulsetube.diagnostics.v1"
SUMMARY_SCHEMA = "pulsetube.summary.v1"
CERTIFICATE_SCHEMA = "pulsetube.certificate.v1"


def fmt(value: float) -> str:
    """Shortest round-trippable decimal form used in all CSV output."""
    return f"{float(value):.17g}"


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def write_layers_csv(path: str, layers: Sequence[Layer], gp: GasParams) -> None:
    """One row per active node per layer: n,j,x,rho,m,z,w,I,lo,hi.

    Band edges come from the layer's own cutoff when it has stepped;
    fresh layers get the edges rebuilt at their level.
    """
    with open(path, "w", newline="") as fh:
        fh.write("n,j,x,rho,m,z,w,I,lo,hi\n")
        for layer in layers:
            idx = layer.indices
            z, w = to_invariants(layer.rho, layer.m, gp)
            if layer.band_lo is not None:
                lo, hi = layer.band_lo, layer.band_hi
            else:
                report = band_check(layer, layer.l_val, gp)
                lo, hi = report.lo, report.hi
            xs = layer.grid.x[idx]
            for k, j in enumerate(idx):
                fh.write(",".join([str(layer.level), str(int(j)), fmt(xs[k]),
                                   fmt(layer.rho[k]), fmt(layer.m[k]),
                                   fmt(z[k]), fmt(w[k]), fmt(layer.i_vals[k]),
                                   fmt(lo[k]), fmt(hi[k])]) + "\n")


def record_to_dict(rec: DiagnosticsRecord) -> dict:
    return {"level": rec.level, "mass": rec.mass, "energy": rec.energy,
            "l_increment": rec.l_increment, "m_n": rec.m_n,
            "band_margin_min": rec.band_margin_min,
            "boundary_ok": [bool(rec.boundary_ok[0]), bool(rec.boundary_ok[1])]}


def write_diagnostics_json(path: str, records: Iterable[DiagnosticsRecord]) -> None:
    payload = {"schema": DIAGNOSTICS_SCHEMA,
               "records": [record_to_dict(r) for r in records]}
    _dump_json(path, payload)


def write_summary_json(path: str, summary: dict) -> None:
    payload = {"schema": SUMMARY_SCHEMA}
    payload.update(summary)
    _dump_json(path, payload)


def write_certificate_json(path: str, certificate: dict) -> None:
    payload = {"schema": CERTIFICATE_SCHEMA}
    payload.update(certificate)
    _dump_json(path, payload)


def write_trace_csv(path: str, rows: Sequence[dict]) -> None:
    cols = ("iteration", "residual", "contraction_factor", "mass", "energy")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join([str(row["iteration"])]
                              + [fmt(row[c]) for c in cols[1:]]) + "\n")


def write_sweep_csv(path: str, rows: Sequence[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("value,residual,mass_drift,min_band_margin,runtime_s\n")
        for value, residual, drift, margin, runtime in rows:
            lead = str(value) if isinstance(value, int) else fmt(value)
            fh.write(",".join([lead, fmt(residual), fmt(drift), fmt(margin),
                               fmt(runtime)]) + "\n")


def _dump_json(path: str, payload: dict) -> None:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return [clean(v) for v in obj.tolist()]
        if isinstance(obj, float) and not np.isfinite(obj):
            return None
        return obj

    with open(path, "w") as fh:
        json.dump(clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
