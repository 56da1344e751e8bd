"""Deterministic writers (and readers where round trips are tested) for run artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
TRAJECTORY_MAGIC = f"# netfhn trajectory schema_version={SCHEMA_VERSION}"
TRAJECTORY_HEADER = ["t", "dof_kind", "id", "x", "value"]


def _g(v):
    return format(float(v), ".17g")


def trajectory_rows(mesh, times, states):
    """Long-format rows: edge interior nodes first, then vertices, per record time."""
    xs = mesh.nodes[1:-1]
    m, n_int = mesh.graph.n_edges, mesh.points_per_edge - 1
    for t, state in zip(times, states):
        ts = _g(t)
        for j in range(m):
            block = state[j * n_int:(j + 1) * n_int]
            for x, v in zip(xs, block):
                yield [ts, "edge", str(j + 1), _g(x), _g(v)]
        for i, v in enumerate(mesh.vertex_values(state)):
            yield [ts, "vertex", str(i + 1), "", _g(v)]


def write_trajectory_csv(path, mesh, times, states):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(TRAJECTORY_MAGIC + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        w.writerows(trajectory_rows(mesh, times, states))


def read_trajectory_csv(path, mesh):
    """Inverse of :func:`write_trajectory_csv`; returns ``(times, states)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != TRAJECTORY_MAGIC:
            raise ValueError(f"unrecognized trajectory header line: {first!r}")
        reader = csv.reader(fh)
        if next(reader) != TRAJECTORY_HEADER:
            raise ValueError("unexpected trajectory column header")
        n_int = mesh.points_per_edge - 1
        times, states = [], {}
        for t, kind, ident, _, value in reader:
            t = float(t)
            if t not in states:
                times.append(t)
                states[t] = []
            states[t].append((kind, int(ident), float(value)))
    out = np.empty((len(times), mesh.n_dofs))
    for r, t in enumerate(times):
        counters = {}
        for kind, ident, value in states[t]:
            if kind == "edge":
                k = counters.get(ident, 0)
                out[r, (ident - 1) * n_int + k] = value
                counters[ident] = k + 1
            else:
                out[r, mesh.n_interior + ident - 1] = value
    return np.array(times), out


def write_jumps_ndjson(path, jump_log):
    with open(path, "w", encoding="utf-8") as fh:
        for t, mark, amp in jump_log:
            rec = {"t": float(t), "mark": [float(v) for v in mark],
                   "amplitudes": [float(v) for v in amp]}
            fh.write(json.dumps(rec) + "\n")


def read_jumps_ndjson(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_spectrum_csv(path, eigenvalues):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "lambda"])
        for k, lam in enumerate(eigenvalues, start=1):
            w.writerow([k, _g(lam)])


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_report(out_dir, reports):
    """``report.json`` plus a plain-text ``report.txt`` with one line per check."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "passed": all(r.passed for r in reports),
        "checks": [r.to_dict() for r in reports],
    }
    write_json(out_dir / "report.json", payload)
    (out_dir / "report.txt").write_text("".join(r.summary() + "\n" for r in reports), encoding="utf-8")
    return payload
