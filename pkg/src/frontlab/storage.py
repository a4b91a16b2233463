"""Artifact readers and writers.

Text goes out as CSV with '#'-prefixed comment lines (the config hash
rides along there); fields go out as flat little-endian float64 binary,
x-major, with a JSON sidecar describing the layout.  All writers are
deterministic: fixed float formatting, sorted JSON keys, no timestamps.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError

_FMT = "%.17g"


def _comment_lines(config_hash, extra=()):
    lines = []
    if config_hash:
        lines.append(f"# config_hash={config_hash}")
    lines.extend(f"# {e}" for e in extra)
    return lines


def write_csv(path, header: str, columns, config_hash: str | None = None, extra=()):
    """Write named columns (sequence of 1-D arrays) as CSV."""
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    body = "\n".join(",".join(_FMT % v for v in row) for row in data)
    text = "\n".join(_comment_lines(config_hash, extra) + [header, body]) + "\n"
    path.write_text(text)
    return path


def read_csv(path):
    """(header, data) with comment lines skipped; also returns the hash."""
    path = Path(path)
    header = None
    hash_found = None
    rows = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            if "config_hash=" in line:
                hash_found = line.split("config_hash=", 1)[1].strip()
            continue
        if header is None:
            header = line.strip()
            continue
        rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValidationError(f"no header row in {path}")
    return header, np.asarray(rows), hash_found


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return Path(path)


def read_json(path):
    return json.loads(Path(path).read_text())


# ---- spectral basis ------------------------------------------------

def spectral_basis_to_csv(basis, path, config_hash: str | None = None):
    """First data row: eigenvalues; following rows: eigenvectors by node."""
    path = Path(path)
    rows = [",".join(_FMT % v for v in basis.eigenvalues)]
    for j in range(basis.grid.n_points):
        rows.append(",".join(_FMT % v for v in basis.eigenvectors[:, j]))
    extra = (f"rows: eigenvalues then {basis.grid.n_points} node rows",
             f"alpha={basis.alpha!r} bc={basis.bc} diffusion={basis.diffusion}")
    text = "\n".join(_comment_lines(config_hash, extra) + rows) + "\n"
    path.write_text(text)
    return path


def read_spectral_csv(path):
    """(eigenvalues, eigenvectors) back from the CSV layout above."""
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        rows.append([float(v) for v in line.split(",")])
    data = np.asarray(rows)
    return data[0], data[1:].T.copy()


# ---- fields and trajectories ---------------------------------------

def write_field_binary(path, u: np.ndarray, sidecar: dict, config_hash: str | None = None):
    """Flat float64 row-major (x-major) binary plus JSON sidecar."""
    path = Path(path)
    arr = np.ascontiguousarray(u, dtype="<f8")
    path.write_bytes(arr.tobytes())
    meta = dict(sidecar)
    if config_hash:
        meta["config_hash"] = config_hash
    write_json(path.with_suffix(path.suffix + ".json"), meta)
    return path


def read_field_binary(path):
    path = Path(path)
    meta = read_json(path.with_suffix(path.suffix + ".json"))
    u = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(meta["n_x"], meta["n_y"])
    return u, meta


def diagnostics_to_csv(trajectory, path, config_hash: str | None = None):
    d = trajectory.diag
    n_modes = d["modes"].shape[1] if d["modes"].ndim == 2 else 0
    header = "t,sup_u,max_b,front_pos_theta" + "".join(f",mode_{i}" for i in range(n_modes))
    cols = [d["t"], d["sup_u"], d["max_b"], d["front_plus"]]
    cols.extend(d["modes"][:, i] for i in range(n_modes))
    return write_csv(path, header, cols, config_hash)


def trace_to_csv(trace, path, config_hash: str | None = None):
    return write_csv(path, "t,x_minus,x_plus", [trace.times, trace.x_minus, trace.x_plus],
                     config_hash, extra=(f"theta={trace.theta!r} policy={trace.policy}",))


def read_trace_csv(path):
    from .tracker import FrontTrace
    header, data, _ = read_csv(path)
    if data.size == 0:
        return FrontTrace(np.zeros(0), np.zeros(0), np.zeros(0))
    return FrontTrace(data[:, 0], data[:, 1], data[:, 2])


def profile_to_csv(profile, path, config_hash: str | None = None):
    return write_csv(path, "x,v", [profile.grid.nodes, profile.v], config_hash)


# ---- consistency ----------------------------------------------------

def collect_hashes(directory):
    """Map artifact file -> embedded config hash, for every recognized file."""
    directory = Path(directory)
    found = {}
    for p in sorted(directory.glob("*")):
        if p.suffix == ".json" and not p.name.endswith(".bin.json"):
            try:
                payload = read_json(p)
            except (json.JSONDecodeError, UnicodeDecodeError):
                continue
            if isinstance(payload, dict) and "config_hash" in payload:
                found[p.name] = payload["config_hash"]
        elif p.name.endswith(".bin.json"):
            payload = read_json(p)
            if "config_hash" in payload:
                found[p.name] = payload["config_hash"]
        elif p.suffix == ".csv":
            try:
                _, _, h = read_csv(p)
            except (ValidationError, ValueError):
                continue
            if h:
                found[p.name] = h
    return found


def check_run_consistency(directory):
    """Return the set of mismatched files (empty = consistent)."""
    hashes = collect_hashes(directory)
    if not hashes:
        return {}
    values = list(hashes.values())
    majority = max(set(values), key=values.count)
    return {name: h for name, h in hashes.items() if h != majority}
