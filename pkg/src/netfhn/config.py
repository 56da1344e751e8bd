"""JSON run configuration.

Vertex and edge indices in the file are 1-based.  Everything not given falls
back to :data:`DEFAULTS`; see the README for a commented example.  Parsing
collects every violation before failing, and each message names the
modelling condition it enforces.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from netfhn.discretization import (DiscretizationError, EdgeCoefficients, PiecewisePolynomial,
                                   VertexParams, assemble_generator, build_mesh)
from netfhn.graph import GraphError, NetworkGraph, build_network, vertex_star
from netfhn.integrator import DRIFT_MODES, QUADRATURES, ProblemSpec, SchemeConfig
from netfhn.levy import AtomMarks, Band, BallMarks, GaussianMarks, LevyMeasureSpec
from netfhn.nonlinearity import DRIFT_KINDS, FhnParams, monotone_shift
from netfhn.spectral import decompose

SCHEMA_VERSION = 1

DEFAULTS = {
    "edge": {"c": 1.0, "mu": 1.0, "a": 0.5},
    "vertex": {"b": 1.0, "sigma": 1.0},
    "noise": {"variant": "compound_poisson",
              "bands": [{"rate": 2.0, "marks": {"type": "gaussian", "std": 0.5}}]},
    "initial": {"constant": 0.0},
    "mesh": {"points_per_edge": 16},
    "drift": {"kind": "fhn", "clip_radius": 3.0},
    "scheme": {"dt": 0.01, "drift_mode": "explicit_exponential", "yosida_lambda": None,
               "record_every": 10, "drift_quadrature": "left"},
    "horizon": 1.0,
    "seed": 0,
    "require_invertible": True,
    "verify": {"paths": 2000, "pairs": 20, "dt_list": [4e-3, 2e-3, 1e-3],
               "lambda_list": [1e-1, 1e-2, 1e-3], "convergence_paths": 4,
               "explosion_guard": 1e6},
    "output": {"trajectory": "trajectory.csv", "jumps": "jumps.ndjson"},
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class SimulationConfig:
    raw: dict
    graph: NetworkGraph
    coefficients: EdgeCoefficients
    vertex_params: VertexParams
    fhn: FhnParams
    noise: LevyMeasureSpec
    initial_edges: list          # one callable per edge
    points_per_edge: int
    scheme: SchemeConfig
    horizon: float
    seed: int
    verify: dict
    output: dict

    def build_mesh(self):
        return build_mesh(self.graph, self.points_per_edge)

    def build_generator(self):
        return assemble_generator(self.build_mesh(), self.coefficients, self.vertex_params)

    def build_problem(self) -> ProblemSpec:
        gen = self.build_generator()
        dec = decompose(gen)
        x0 = gen.mesh.interpolate(self.initial_edges)
        shift = None if self.fhn.kind == "linear" else monotone_shift(self.fhn)
        return ProblemSpec(dec, self.fhn, shift, self.vertex_params.sigma, self.noise, x0, self.horizon)


def _merged(section, given):
    out = copy.deepcopy(DEFAULTS[section])
    if given is not None:
        if not isinstance(given, dict):
            raise TypeError(f"'{section}' must be an object")
        out.update(given)
    return out


def _number(value, where, errors, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{where}: expected a number, got {value!r}")
        return None
    value = float(value)
    if not np.isfinite(value):
        errors.append(f"{where}: must be finite")
        return None
    if positive and value <= 0:
        errors.append(f"{where} = {value}: must be positive")
        return None
    if nonneg and value < 0:
        errors.append(f"{where} = {value}: must be nonnegative")
        return None
    return value


def _polynomial(spec, where, errors):
    """A coefficient spec: number, ascending coefficient list, or piecewise table."""
    try:
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return PiecewisePolynomial.constant(spec)
        if isinstance(spec, list):
            return PiecewisePolynomial([spec])
        if isinstance(spec, dict):
            return PiecewisePolynomial(spec["pieces"], spec.get("breaks", []))
    except (DiscretizationError, KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
        return None
    errors.append(f"{where}: expected a number, a coefficient list or {{breaks, pieces}}")
    return None


def _parse_graph(raw, errors):
    g = raw.get("graph")
    if not isinstance(g, dict) or "n_vertices" not in g or "edges" not in g:
        errors.append("graph: need an object with n_vertices and edges")
        return None
    try:
        edges = [(int(t) - 1, int(h) - 1) for t, h in g["edges"]]
        return build_network(int(g["n_vertices"]), edges)
    except (GraphError, TypeError, ValueError) as exc:
        errors.append(f"graph [network structure]: {exc} (indices are 1-based)")
        return None


def _parse_edges(raw, m, mesh_n, errors):
    entries = raw.get("edges")
    if entries is None:
        entries = [{} for _ in range(m)]
    if not isinstance(entries, list) or len(entries) != m:
        errors.append(f"edges: need a list with one entry per edge ({m})")
        return None, None, None
    cs, mus, as_ = [], [], []
    for j, entry in enumerate(entries):
        e = _merged("edge", entry)
        where = f"edges[{j + 1}]"
        c = _polynomial(e["c"], f"{where}.c", errors)
        if c is not None:
            if c.degree > 3:
                errors.append(f"{where}.c [diffusion regularity]: degree {c.degree} exceeds 3")
            val_jump, der_jump = c.jumps_at_breaks()
            if val_jump > 1e-9 or der_jump > 1e-9:
                errors.append(f"{where}.c [diffusion regularity]: c_j must be continuously "
                              f"differentiable on [0, 1]; mismatch at breakpoints "
                              f"(value {val_jump:.3g}, slope {der_jump:.3g})")
            probe = np.linspace(0.0, 1.0, 8 * max(mesh_n, 2) + 1)
            if np.min(c(probe)) <= 0:
                errors.append(f"{where}.c [positive diffusion]: c_j(x) must be > 0 on [0, 1], "
                              f"min sampled value {np.min(c(probe)):.6g}")
        cs.append(c)
        mu = _number(e["mu"], f"{where}.mu", errors)
        if mu is not None and mu <= 0:
            errors.append(f"{where}.mu = {mu} [positive weights]: postsynaptic weights mu_j must be > 0")
        mus.append(mu)
        a = _number(e["a"], f"{where}.a", errors)
        if a is not None and not 0 < a < 1:
            errors.append(f"{where}.a = {a} [FitzHugh-Nagumo threshold]: a_j must lie in (0, 1)")
        as_.append(a)
    return cs, mus, as_


def _parse_vertices(raw, n, require_invertible, errors):
    entries = raw.get("vertices")
    if entries is None:
        entries = [{} for _ in range(n)]
    if not isinstance(entries, list) or len(entries) != n:
        errors.append(f"vertices: need a list with one entry per vertex ({n})")
        return None, None
    bs, sigmas = [], []
    for i, entry in enumerate(entries):
        v = _merged("vertex", entry)
        where = f"vertices[{i + 1}]"
        b = _number(v["b"], f"{where}.b", errors)
        if b is not None and b < 0:
            errors.append(f"{where}.b = {b} [leak condition]: leak rates b_i must be >= 0")
        bs.append(b)
        s = _number(v["sigma"], f"{where}.sigma", errors)
        if s is not None and s <= 0:
            errors.append(f"{where}.sigma = {s} [noise amplitude]: sigma_i must be > 0")
        sigmas.append(s)
    if require_invertible and all(b is not None for b in bs) and not any(b > 0 for b in bs):
        errors.append("vertices [leak condition]: at least one b_i must be > 0 for an invertible "
                      "generator (set require_invertible to false to allow b = 0)")
    return bs, sigmas


def _parse_marks(spec, n, where, errors):
    kind = spec.get("type") if isinstance(spec, dict) else None
    try:
        if kind == "atoms":
            if "points" in spec:
                pts = np.asarray(spec["points"], dtype=float)
                if pts.ndim == 1 and n == 1:
                    pts = pts[:, None]
            else:
                node = int(spec["node"]) - 1
                if not 0 <= node < n:
                    raise ValueError(f"node {node + 1} out of range")
                vals = np.asarray(spec["values"], dtype=float)
                pts = np.zeros((vals.size, n))
                pts[:, node] = vals
            if pts.ndim != 2 or pts.shape[1] != n:
                raise ValueError(f"atom points must be vectors of length {n}")
            return AtomMarks(pts, spec.get("probs"))
        if kind == "gaussian":
            return GaussianMarks(float(spec["std"]), n, spec.get("mean"))
        if kind == "ball":
            return BallMarks(float(spec["radius"]), n)
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
        return None
    errors.append(f"{where}: mark type must be one of atoms, gaussian, ball")
    return None


def _parse_noise(raw, n, errors):
    spec = _merged("noise", raw.get("noise"))
    bands = []
    if not isinstance(spec.get("bands"), list) or not spec["bands"]:
        errors.append("noise: need a non-empty list of bands")
        return None
    for k, b in enumerate(spec["bands"]):
        where = f"noise.bands[{k + 1}]"
        if not isinstance(b, dict):
            errors.append(f"{where}: expected an object")
            continue
        rate = _number(b.get("rate"), f"{where}.rate", errors)
        if rate is not None and rate < 0:
            errors.append(f"{where}.rate = {rate}: jump intensity must be >= 0")
            rate = None
        marks = _parse_marks(b.get("marks"), n, f"{where}.marks", errors)
        if marks is not None:
            m2 = float(np.trace(marks.second_moment_matrix()))
            if not np.isfinite(m2):
                errors.append(f"{where} [finite second moment]: marks must be square integrable")
        if rate is not None and marks is not None:
            bands.append(Band(rate, marks))
    if len(bands) != len(spec["bands"]):
        return None
    try:
        return LevyMeasureSpec(tuple(bands), spec.get("variant", "compound_poisson"))
    except ValueError as exc:
        errors.append(f"noise: {exc}")
        return None


def _parse_initial(raw, g, errors):
    spec = _merged("initial", raw.get("initial"))
    m = g.n_edges
    if "edges" in spec:
        entries = spec["edges"]
        if not isinstance(entries, list) or len(entries) != m:
            errors.append(f"initial.edges: need one polynomial per edge ({m})")
            return None
        coefs = []
        for j, c in enumerate(entries):
            c = [c] if isinstance(c, (int, float)) and not isinstance(c, bool) else c
            try:
                coefs.append(np.asarray(c, dtype=float).ravel())
            except (TypeError, ValueError):
                errors.append(f"initial.edges[{j + 1}]: expected a number or coefficient list")
                return None
    else:
        value = _number(spec.get("constant"), "initial.constant", errors)
        if value is None:
            return None
        coefs = [np.array([value]) for _ in range(m)]
    for i in range(g.n_vertices):
        vals = [(j, P.polyval(float(end), coefs[j])) for j, end in vertex_star(g, i)]
        spread = max(v for _, v in vals) - min(v for _, v in vals)
        if spread > 1e-9 * max(1.0, max(abs(v) for _, v in vals)):
            detail = ", ".join(f"edge {j + 1} gives {v:.6g}" for j, v in vals)
            errors.append(f"initial [node continuity]: initial data must agree at shared vertex "
                          f"{i + 1} ({detail})")
    return [(lambda x, c=c: P.polyval(x, c)) for c in coefs]


def _parse_scheme(raw, errors):
    s = _merged("scheme", raw.get("scheme"))
    dt = _number(s["dt"], "scheme.dt", errors, positive=True)
    if s["drift_mode"] not in DRIFT_MODES:
        errors.append(f"scheme.drift_mode: expected one of {DRIFT_MODES}")
    if s["drift_quadrature"] not in QUADRATURES:
        errors.append(f"scheme.drift_quadrature: expected one of {QUADRATURES}")
    lam = s.get("yosida_lambda")
    if lam is not None:
        lam = _number(lam, "scheme.yosida_lambda", errors, positive=True)
    if s["drift_mode"] == "yosida_semi_implicit" and lam is None:
        errors.append("scheme.yosida_lambda: required (and positive) for yosida_semi_implicit")
    every = s["record_every"]
    if isinstance(every, bool) or not isinstance(every, int) or every < 1:
        errors.append("scheme.record_every: must be a positive integer")
    if errors:
        return None
    try:
        return SchemeConfig(dt=dt, drift_mode=s["drift_mode"], yosida_lambda=lam,
                            record_every=every, drift_quadrature=s["drift_quadrature"])
    except ValueError as exc:
        errors.append(f"scheme: {exc}")
        return None


def _check_verify(v, errors):
    for key in ("paths", "pairs", "convergence_paths"):
        if isinstance(v[key], bool) or not isinstance(v[key], int) or v[key] < 1:
            errors.append(f"verify.{key}: must be a positive integer")
    for key in ("dt_list", "lambda_list"):
        vals = v[key]
        if (not isinstance(vals, list) or len(vals) < 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in vals)
                or any(b >= a for a, b in zip(vals, vals[1:]))):
            errors.append(f"verify.{key}: need at least two positive, strictly decreasing values")
    _number(v["explosion_guard"], "verify.explosion_guard", errors, positive=True)


def parse_config(text: str) -> SimulationConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    errors = []
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version {version} not supported (expected {SCHEMA_VERSION})")

    g = _parse_graph(raw, errors)
    mesh_cfg = _merged("mesh", raw.get("mesh"))
    ppe = mesh_cfg["points_per_edge"]
    if isinstance(ppe, bool) or not isinstance(ppe, int) or ppe < 2:
        errors.append(f"mesh.points_per_edge = {ppe!r}: must be an integer >= 2")
        ppe = 2
    require_invertible = bool(raw.get("require_invertible", DEFAULTS["require_invertible"]))

    drift = _merged("drift", raw.get("drift"))
    if drift["kind"] not in DRIFT_KINDS:
        errors.append(f"drift.kind: expected one of {DRIFT_KINDS}")
    clip = _number(drift["clip_radius"], "drift.clip_radius", errors, positive=True)

    horizon = _number(raw.get("horizon", DEFAULTS["horizon"]), "horizon", errors, positive=True)
    seed = raw.get("seed", DEFAULTS["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append("seed: must be a nonnegative integer")
    scheme_errors = []
    scheme = _parse_scheme(raw, scheme_errors)
    errors.extend(scheme_errors)

    verify = _merged("verify", raw.get("verify"))
    _check_verify(verify, errors)
    output = _merged("output", raw.get("output"))

    if g is None:
        raise ConfigError(errors)
    cs, mus, as_ = _parse_edges(raw, g.n_edges, ppe, errors)
    bs, sigmas = _parse_vertices(raw, g.n_vertices, require_invertible, errors)
    noise = _parse_noise(raw, g.n_vertices, errors)
    initial = _parse_initial(raw, g, errors)
    if require_invertible and bs is not None and not g.is_connected():
        errors.append("graph [leak condition]: an invertible generator needs a connected network "
                      "with a leak in every component")
    if errors:
        raise ConfigError(errors)

    return SimulationConfig(
        raw=raw,
        graph=g,
        coefficients=EdgeCoefficients(tuple(cs), np.array(mus)),
        vertex_params=VertexParams(np.array(bs), np.array(sigmas)),
        fhn=FhnParams(np.array(as_), kind=drift["kind"], clip_radius=clip),
        noise=noise,
        initial_edges=initial,
        points_per_edge=ppe,
        scheme=scheme,
        horizon=horizon,
        seed=seed,
        verify=verify,
        output=output,
    )


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
