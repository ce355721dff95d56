"""Lossless state / tangent snapshots and CSV helpers.

Snapshot files are CSV with a short ``#``-comment header.  All reals are
written as shortest round-trip decimals (Python's float repr), so
load(save(s)) reproduces every bit.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..model import EnsembleState
from ..tangent import TangentState

FORMAT_VERSION = 1


class SnapshotError(RuntimeError):
    pass


def fmt(v) -> str:
    """Shortest round-trip decimal for reals, plain digits for ints."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(float(v))


def write_csv(path, header, rows):
    """Write rows (iterables of values) atomically; returns the row count."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    count = 0
    with open(tmp, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")
            count += 1
    os.replace(tmp, path)
    return count


def save(state: EnsembleState, tangent: TangentState | None, path):
    """Write a snapshot; the tangent (with its bookkeeping) is optional."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    n = state.n
    with open(tmp, "w") as f:
        f.write(f"# ils-lab snapshot v{FORMAT_VERSION}\n")
        f.write(f"# n = {n}\n")
        f.write(f"# t = {fmt(state.t)}\n")
        if tangent is not None:
            if tangent.n != n:
                raise SnapshotError("tangent size does not match state")
            f.write(f"# log_accum = {fmt(tangent.log_accum)}\n")
            f.write(f"# t0 = {fmt(tangent.t0)}\n")
            f.write(f"# initial_full_norm = {fmt(tangent.initial_full_norm)}\n")
            f.write(f"# tangent_t = {fmt(tangent.t)}\n")
            f.write("i,x,y,z,xi_x,xi_y,xi_z\n")
            for i in range(n):
                f.write(",".join([str(i + 1), fmt(state.x[i]), fmt(state.y[i]),
                                  fmt(state.z[i]), fmt(tangent.xi[i, 0]),
                                  fmt(tangent.xi[i, 1]), fmt(tangent.xi[i, 2])]) + "\n")
        else:
            f.write("i,x,y,z\n")
            for i in range(n):
                f.write(",".join([str(i + 1), fmt(state.x[i]), fmt(state.y[i]),
                                  fmt(state.z[i])]) + "\n")
    os.replace(tmp, path)


def load(path, expected_n: int | None = None):
    """Read a snapshot back; returns (EnsembleState, TangentState | None).

    Raises SnapshotError on version mismatch, truncation, or (when
    expected_n is given) a ring-size mismatch.
    """
    path = Path(path)
    meta = {}
    header = None
    rows = []
    with open(path) as f:
        first = f.readline().rstrip("\n")
        if not first.startswith("# ils-lab snapshot v"):
            raise SnapshotError(f"{path}: not a snapshot file")
        version = first.rsplit("v", 1)[-1]
        if version != str(FORMAT_VERSION):
            raise SnapshotError(f"{path}: unsupported snapshot version {version}")
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            elif header is None:
                header = line
            elif line:
                rows.append(line.split(","))
    if "n" not in meta or "t" not in meta or header is None:
        raise SnapshotError(f"{path}: missing snapshot metadata")
    n = int(meta["n"])
    if expected_n is not None and n != expected_n:
        raise SnapshotError(f"{path}: snapshot holds N={n}, expected N={expected_n}")
    if len(rows) != n:
        raise SnapshotError(f"{path}: truncated snapshot ({len(rows)} of {n} rows)")

    has_tangent = header.endswith("xi_x,xi_y,xi_z")
    width = 7 if has_tangent else 4
    data = np.empty((n, width - 1))
    for r, row in enumerate(rows):
        if len(row) != width:
            raise SnapshotError(f"{path}: malformed row {r + 1}")
        data[r] = [float(v) for v in row[1:]]
    state = EnsembleState(float(meta["t"]), data[:, 0].copy(), data[:, 1].copy(),
                          data[:, 2].copy())
    tangent = None
    if has_tangent:
        tangent = TangentState(data[:, 3:6].copy(), float(meta["log_accum"]),
                               float(meta["t0"]), float(meta["initial_full_norm"]),
                               float(meta["tangent_t"]))
    return state, tangent
