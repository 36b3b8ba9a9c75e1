"""File formats: LIBSVM text, result CSVs, key=value configs, manifests.

All floating-point output uses Python's shortest round-trip decimal
formatting (repr), so serialize/parse cycles are lossless.
"""

import csv
import json
import math
import time

import numpy as np

from .core import Dataset
from .experiments import CellRecord, OptimalRow, SweepRow

TOOL_VERSION = "0.1.0"

SWEEP_HEADER = ["T", "c", "lambda", "stepsize", "mean_test_error", "std_error", "reps"]
OPTIMAL_HEADER = ["T", "optimal_c", "error_at_optimal_c", "error_at_c1"]
TRAJECTORY_HEADER = ["t", "epoch", "primal_subopt", "dual_subopt", "gap",
                     "loss_term", "norm_term"]
BOUNDS_HEADER = ["c", "sgd_bound", "sgd_lambda", "rv_bound", "rv_lambda"]


class ParseError(ValueError):
    """Malformed input data; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


# ---------------------------------------------------------------------------
# LIBSVM text format
# ---------------------------------------------------------------------------

def parse_libsvm(source, dim=None):
    """Parse LIBSVM-format text into a Dataset.

    Grammar per line: `<label> (<idx>:<val> )*` with 1-based, strictly
    increasing indices.  Labels -1 and 0 map to -1; labels 1 and +1 map
    to +1.  Blank lines and lines starting with '#' are skipped.  File
    indices are shifted to 0-based; dim defaults to the largest index
    seen and can be overridden (e.g. to align train/test files).
    """
    if isinstance(source, str):
        with open(source, "r", encoding="ascii") as handle:
            return parse_libsvm(handle, dim=dim)
    rows = []
    labels = []
    max_index = 0
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise ParseError("unparseable label %r" % tokens[0], lineno)
        if raw_label in (-1.0, 0.0):
            label = -1.0
        elif raw_label == 1.0:
            label = 1.0
        else:
            raise ParseError("label %r outside {-1, 0, +1, 1}" % tokens[0], lineno)
        entries = []
        previous = 0
        for token in tokens[1:]:
            idx_text, _, val_text = token.partition(":")
            try:
                idx = int(idx_text)
                val = float(val_text)
            except ValueError:
                raise ParseError("unparseable feature %r" % token, lineno)
            if idx < 1:
                raise ParseError("feature index %d is not 1-based" % idx, lineno)
            if idx <= previous:
                raise ParseError(
                    "feature indices not strictly increasing (%d after %d)" % (idx, previous),
                    lineno,
                )
            previous = idx
            if val != 0.0:
                entries.append((idx - 1, val))
        max_index = max(max_index, previous)
        rows.append(entries)
        labels.append(label)
    if not rows:
        raise ParseError("no examples found")
    if dim is None:
        dim = max(max_index, 1)
    elif max_index > dim:
        raise ParseError("feature index %d exceeds requested dim %d" % (max_index, dim))
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for k, entries in enumerate(rows):
        indptr[k + 1] = indptr[k] + len(entries)
    indices = np.array([i for entries in rows for i, _ in entries], dtype=np.int64)
    values = np.array([v for entries in rows for _, v in entries], dtype=np.float64)
    return Dataset.from_arrays(indptr, indices, values, np.array(labels), dim)


def write_libsvm(data, destination):
    """Serialize a Dataset in LIBSVM format (1-based indices, repr floats)."""
    if isinstance(destination, str):
        with open(destination, "w", encoding="ascii") as handle:
            write_libsvm(data, handle)
            return
    for i in range(len(data)):
        s, e = data.indptr[i], data.indptr[i + 1]
        label = "+1" if data.labels[i] > 0 else "-1"
        feats = " ".join(
            "%d:%s" % (j + 1, repr(float(v)))
            for j, v in zip(data.indices[s:e], data.values[s:e])
        )
        destination.write(label + (" " + feats if feats else "") + "\n")


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------

def _format(value):
    if value is None:
        return "N/A"
    if isinstance(value, float):
        return "N/A" if math.isnan(value) else repr(value)
    return str(value)


def _parse_float(text):
    return math.nan if text == "N/A" else float(text)


def _open_for_write(destination):
    if isinstance(destination, str):
        return open(destination, "w", newline="", encoding="ascii"), True
    return destination, False


def companion_optimal_path(destination):
    """The optimal-c companion CSV path for a given sweep CSV path."""
    stem, dot, ext = destination.rpartition(".")
    if not dot:
        return destination + "_optimal_c"
    return "%s_optimal_c.%s" % (stem, ext)


def write_sweep_csv(result, destination):
    """Write per-(T,c) sweep rows; when given a path, also write the
    companion `*_optimal_c.csv` with the per-budget argmin summary."""
    handle, owned = _open_for_write(destination)
    try:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            writer.writerow([
                row.T, _format(row.c), _format(row.lam), _format(row.stepsize),
                _format(row.mean_test_error), _format(row.std_error), row.reps,
            ])
    finally:
        if owned:
            handle.close()
    if isinstance(destination, str):
        write_optimal_csv(result, companion_optimal_path(destination))


def write_optimal_csv(result, destination):
    handle, owned = _open_for_write(destination)
    try:
        writer = csv.writer(handle)
        writer.writerow(OPTIMAL_HEADER)
        for row in result.optimal:
            writer.writerow([
                row.T, _format(row.optimal_c),
                _format(row.error_at_optimal_c), _format(row.error_at_c1),
            ])
    finally:
        if owned:
            handle.close()


def read_sweep_csv(source):
    """Read sweep rows back into SweepRow objects (numerically lossless)."""
    rows = []
    for record in _read_csv(source, SWEEP_HEADER):
        rows.append(SweepRow(
            int(record["T"]), _parse_float(record["c"]), _parse_float(record["lambda"]),
            _parse_float(record["stepsize"]), _parse_float(record["mean_test_error"]),
            _parse_float(record["std_error"]), int(record["reps"]),
        ))
    return rows


def read_optimal_csv(source):
    return [
        OptimalRow(int(r["T"]), _parse_float(r["optimal_c"]),
                   _parse_float(r["error_at_optimal_c"]), _parse_float(r["error_at_c1"]))
        for r in _read_csv(source, OPTIMAL_HEADER)
    ]


def _read_csv(source, expected_header):
    if isinstance(source, str):
        with open(source, "r", newline="", encoding="ascii") as handle:
            yield from _read_csv(handle, expected_header)
            return
    reader = csv.reader(source)
    header = next(reader, None)
    if header != expected_header:
        raise ParseError("unexpected header %r" % (header,))
    for row in reader:
        yield dict(zip(expected_header, row))


def write_trajectory_csv(record, destination):
    """Trajectory rows in increasing t; NaN columns rendered as N/A."""
    handle, owned = _open_for_write(destination)
    try:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_HEADER)
        for k in range(len(record)):
            writer.writerow([
                int(record.t[k]), int(record.epoch[k]),
                _format(float(record.primal_subopt[k])),
                _format(float(record.dual_subopt[k])),
                _format(float(record.gap[k])),
                _format(float(record.loss_term[k])),
                _format(float(record.norm_term[k])),
            ])
    finally:
        if owned:
            handle.close()


def read_trajectory_csv(source):
    """Trajectory rows as a dict of numpy arrays keyed by column name."""
    rows = list(_read_csv(source, TRAJECTORY_HEADER))
    out = {}
    for key in TRAJECTORY_HEADER:
        if key in ("t", "epoch"):
            out[key] = np.array([int(r[key]) for r in rows], dtype=np.int64)
        else:
            out[key] = np.array([_parse_float(r[key]) for r in rows])
    return out


def write_alpha_snapshots_csv(record, destination):
    """Per-epoch dual variables (epoch, index, alpha), one row per entry."""
    handle, owned = _open_for_write(destination)
    try:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "index", "alpha"])
        for epoch, alpha in record.alpha_snapshots:
            for i, a in enumerate(alpha):
                writer.writerow([epoch, i, repr(float(a))])
    finally:
        if owned:
            handle.close()


def write_bounds_csv(sgd_curve, rv_curve, destination):
    """Both bound curves side by side over a shared c grid."""
    if not np.array_equal(sgd_curve.c_values, rv_curve.c_values):
        raise ValueError("bound curves use different c grids")
    handle, owned = _open_for_write(destination)
    try:
        writer = csv.writer(handle)
        writer.writerow(BOUNDS_HEADER)
        for k, c in enumerate(sgd_curve.c_values):
            writer.writerow([
                repr(float(c)),
                repr(float(sgd_curve.values[k])), repr(float(sgd_curve.lambdas[k])),
                repr(float(rv_curve.values[k])), repr(float(rv_curve.lambdas[k])),
            ])
    finally:
        if owned:
            handle.close()


# ---------------------------------------------------------------------------
# key=value config files
# ---------------------------------------------------------------------------

def read_config(source):
    """Flat `key = value` lines; '#' starts a comment; later keys win."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as handle:
            return read_config(handle)
    out = {}
    for lineno, line in enumerate(source, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ParseError("expected key = value", lineno)
        out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# run manifests
# ---------------------------------------------------------------------------

def write_manifest(result, destination, data_path=None):
    """JSON manifest from which any sweep cell can be re-run bit-exactly."""
    payload = {
        "tool": "recycle-opt",
        "version": TOOL_VERSION,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "base_seed": result.config.base_seed,
        "data": data_path,
        "config": result.config.to_mapping(),
        "cells": [
            {
                "T": r.T, "c": r.c, "lambda": r.lam,
                "stepsize_mult": r.stepsize_mult, "stepsize": r.stepsize,
                "rep": r.rep, "seed": r.seed, "n_train": r.n_train,
                "test_error": r.test_error,
            }
            for r in result.runs
        ],
    }
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=1)
    else:
        json.dump(payload, destination, indent=1)
    return payload


def read_manifest(source):
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as handle:
            return json.load(handle)
    return json.load(source)


def manifest_cell(manifest, index):
    """One manifest cell as the CellRecord accepted by rerun_cell."""
    cell = manifest["cells"][index]
    return CellRecord(
        T=int(cell["T"]), c=float(cell["c"]), lam=float(cell["lambda"]),
        stepsize_mult=cell["stepsize_mult"], stepsize=cell["stepsize"],
        rep=int(cell["rep"]), seed=int(cell["seed"]), n_train=int(cell["n_train"]),
        test_error=float(cell["test_error"]),
    )
