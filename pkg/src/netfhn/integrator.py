"""Jump-adapted exponential time stepping of the mild formulation.

On a cell ``[t, t + d]`` free of jumps the state is advanced as

    X(t + d) = T(d) (X(t) + d D(X(t))) + d phi1(d A) Sigma c

where ``D`` is the (possibly Yosida-regularized) reaction term, ``c`` the
compensator drift of the noise and ``phi1(z) = (e^z - 1)/z``.  With
``drift_quadrature="phi1"`` the drift is weighted like the compensator,
i.e. integrated exactly against the semigroup while frozen at ``X(t)``.

Everything linear is evaluated in the eigenbasis of the generator and is
therefore exact; jumps are injected at their exact times, which are merged
into the time grid.  The only time-discretization error is the frozen drift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from netfhn.levy import LevyMeasureSpec, NoisePath
from netfhn.nonlinearity import FhnParams, MonotoneShift, reaction, resolvent_many
from netfhn.spectral import SpectralDecomposition, phi1

DRIFT_MODES = ("explicit_exponential", "yosida_semi_implicit")
QUADRATURES = ("phi1", "left")


@dataclass(frozen=True)
class ProblemSpec:
    decomposition: SpectralDecomposition
    drift: FhnParams
    shift: MonotoneShift | None
    sigma: np.ndarray
    noise: LevyMeasureSpec
    x0: np.ndarray
    horizon: float

    def __post_init__(self):
        n = self.mesh.graph.n_vertices
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (n,):
            raise ValueError(f"sigma must have length {n}")
        if self.noise.dim != n:
            raise ValueError(f"noise dimension {self.noise.dim} != number of vertices {n}")
        if self.drift.a.size != self.mesh.graph.n_edges:
            raise ValueError("need one threshold a_j per edge")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.mesh.n_dofs,):
            raise ValueError(f"initial state must have length {self.mesh.n_dofs}")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "x0", x0)

    @property
    def generator(self):
        return self.decomposition.generator

    @property
    def mesh(self):
        return self.decomposition.generator.mesh

    def replace(self, **changes):
        fields = {k: getattr(self, k) for k in
                  ("decomposition", "drift", "shift", "sigma", "noise", "x0", "horizon")}
        fields.update(changes)
        return ProblemSpec(**fields)


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    drift_mode: str = "explicit_exponential"
    yosida_lambda: float | None = None
    record_every: int = 1
    drift_quadrature: str = "left"
    explosion_guard: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.drift_mode not in DRIFT_MODES:
            raise ValueError(f"unknown drift mode {self.drift_mode!r}")
        if self.drift_mode == "yosida_semi_implicit" and not (self.yosida_lambda or 0) > 0:
            raise ValueError("yosida_semi_implicit needs a positive yosida_lambda")
        if self.drift_quadrature not in QUADRATURES:
            raise ValueError(f"unknown drift quadrature {self.drift_quadrature!r}")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be >= 1")

    def replace(self, **changes):
        fields = dict(dt=self.dt, drift_mode=self.drift_mode, yosida_lambda=self.yosida_lambda,
                      record_every=self.record_every, drift_quadrature=self.drift_quadrature,
                      explosion_guard=self.explosion_guard)
        fields.update(changes)
        return SchemeConfig(**fields)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # (n_records, n_dofs)
    jump_log: list                # (t, mark, vertex increment) per injected jump
    left_limits: np.ndarray       # state just before each injected jump
    terminal: np.ndarray
    sup_norm_sq: float            # sup over the time grid of ||X(t)||_M^2
    exploded: bool = False
    metadata: dict = field(default_factory=dict)


class Stepper:
    """Precomputed spectral data for advancing states (columns) over one cell."""

    def __init__(self, problem: ProblemSpec, scheme: SchemeConfig):
        dec = problem.decomposition
        mesh = problem.mesh
        self.problem = problem
        self.scheme = scheme
        self.lam = dec.eigenvalues
        self.V = dec.eigenvectors
        self.W = dec.to_modal
        self.n_interior = mesh.n_interior
        self.a_interior = problem.drift.a[mesh.interior_edge_index]
        self.linear = problem.drift.kind == "linear"
        # modal image of a unit vertex impulse, scaled by sigma
        self.jump_modal = vertex_injection_modal(dec, problem.sigma)
        self._cache = {}

    def _weights(self, delta):
        w = self._cache.get(delta)
        if w is None:
            z = self.lam * delta
            w = (np.exp(z), delta * phi1(z))
            if len(self._cache) < 8:
                self._cache[delta] = w
        return w

    def drift(self, x, delta):
        """Nodal drift rate used on a cell of length ``delta``."""
        d = np.zeros_like(x)
        if self.linear:
            return d
        ni = self.n_interior
        a = self.a_interior.reshape((-1,) + (1,) * (x.ndim - 1))
        u = x[:ni]
        if self.scheme.drift_mode == "explicit_exponential":
            d[:ni] = reaction(self.problem.drift, a, u)
        else:
            # backward Euler for the Yosida-regularized monotone part, explicit
            # linear growth term: u_new + delta*phi_lam(u_new) = u + delta*eta*u
            lam = self.scheme.yosida_lambda
            shift = self.problem.shift
            y = u + delta * shift.eta_star * u
            j = resolvent_many(shift, lam + delta, a, y)
            u_new = (lam * y + delta * j) / (lam + delta)
            d[:ni] = (u_new - u) / delta
        return d

    def advance(self, xhat, x, delta, comp_hat=None):
        """Advance modal ``xhat`` / nodal ``x`` over a jump-free cell."""
        e, w = self._weights(delta)
        if xhat.ndim > 1:
            e, w = e[:, None], w[:, None]
        if self.linear:
            xhat = e * xhat
        else:
            dhat = self.W @ self.drift(x, delta)
            if self.scheme.drift_quadrature == "phi1":
                xhat = e * xhat + w * dhat
            else:
                xhat = e * (xhat + delta * dhat)
        if comp_hat is not None:
            xhat = xhat + (w * comp_hat if xhat.ndim == 1 else w * comp_hat[:, None])
        return xhat, self.V @ xhat

    def inject(self, xhat, mark):
        inc = self.jump_modal @ mark
        if xhat.ndim > 1:
            inc = inc[:, None]
        xhat = xhat + inc
        return xhat, self.V @ xhat


def time_grid(T, dt, jump_times=()):
    """Union of the uniform grid of step ``dt`` on [0, T] and the jump times."""
    n = max(int(math.ceil(T / dt - 1e-9)), 1)
    grid = np.arange(n + 1) * dt
    grid[-1] = T
    jt = np.asarray(jump_times, dtype=float)
    jt = jt[(jt > 0) & (jt <= T)]
    return np.union1d(grid, jt)


def vertex_injection_modal(dec: SpectralDecomposition, sigma) -> np.ndarray:
    """Modal coordinates of ``(0, sigma * e_i)`` for every vertex ``i``, shape (dofs, n)."""
    mesh = dec.generator.mesh
    return dec.to_modal[:, mesh.vertex_dofs] * np.asarray(sigma, dtype=float)


def convolution_modal(dec: SpectralDecomposition, J, path: NoisePath, t: float) -> np.ndarray:
    lam = dec.eigenvalues
    k = np.searchsorted(path.jump_times, t, side="right")
    zhat = np.zeros(lam.size)
    if k:
        decay = np.exp(np.outer(lam, t - path.jump_times[:k]))
        zhat += np.sum(decay * (J @ path.jump_marks[:k].T), axis=1)
    if np.any(path.compensator_drift != 0):
        zhat += t * phi1(lam * t) * (J @ path.compensator_drift)
    return zhat


def stochastic_convolution(dec: SpectralDecomposition, sigma, path: NoisePath, t: float) -> np.ndarray:
    """``Z(t) = sum_{s_k <= t} T(t - s_k)(0, sigma x_k) + int_0^t T(t - s)(0, sigma c) ds``.

    Exact given the spectral decomposition.
    """
    if not 0 <= t <= path.horizon:
        raise ValueError(f"t={t} outside [0, {path.horizon}]")
    J = vertex_injection_modal(dec, sigma)
    return dec.eigenvectors @ convolution_modal(dec, J, path, t)


def _jumps_at(path, t_prev, t_now):
    lo = np.searchsorted(path.jump_times, t_prev, side="right")
    hi = np.searchsorted(path.jump_times, t_now, side="right")
    return range(lo, hi)


def _run(problem: ProblemSpec, scheme: SchemeConfig, path: NoisePath, X0):
    T = problem.horizon
    if path.horizon < T:
        raise ValueError(f"noise path horizon {path.horizon} shorter than problem horizon {T}")
    if path.dim != problem.mesh.graph.n_vertices:
        raise ValueError("noise path dimension does not match the number of vertices")
    stepper = Stepper(problem, scheme)
    grid = time_grid(T, scheme.dt, path.jump_times)
    comp_hat = None
    if np.any(path.compensator_drift != 0):
        comp_hat = stepper.jump_modal @ path.compensator_drift

    x = np.array(X0, dtype=float)
    xhat = stepper.W @ x
    rec_t, rec_x = [0.0], [x.copy()]
    jump_log, left = [], []
    sup = np.sum(xhat**2, axis=0)
    guard = scheme.explosion_guard
    exploded = False
    every = int(scheme.record_every)

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, grid.size):
            t_prev, t_now = grid[n - 1], grid[n]
            xhat, x = stepper.advance(xhat, x, t_now - t_prev, comp_hat)
            for k in _jumps_at(path, t_prev, t_now):
                mark = path.jump_marks[k]
                left.append(x.copy())
                xhat, x = stepper.inject(xhat, mark)
                jump_log.append((float(path.jump_times[k]), mark.copy(), problem.sigma * mark))
            nrm = np.sum(xhat**2, axis=0)
            sup = np.maximum(sup, nrm)
            if n % every == 0 or n == grid.size - 1:
                rec_t.append(float(t_now))
                rec_x.append(x.copy())
            if guard is not None and (not np.all(np.isfinite(nrm)) or np.any(sup > guard)):
                exploded = True
                if rec_t[-1] != t_now:
                    rec_t.append(float(t_now))
                    rec_x.append(x.copy())
                break
    left_arr = np.array(left) if left else np.empty((0,) + x.shape)
    meta = {
        "dt": scheme.dt,
        "drift_mode": scheme.drift_mode,
        "drift_quadrature": scheme.drift_quadrature,
        "yosida_lambda": scheme.yosida_lambda,
        "drift_kind": problem.drift.kind,
        "n_cells": int(grid.size - 1),
        "n_jumps": len(jump_log),
        "horizon": T,
    }
    return np.array(rec_t), np.array(rec_x), jump_log, left_arr, x, sup, exploded, meta


def simulate(problem: ProblemSpec, scheme: SchemeConfig, path: NoisePath, x0=None) -> Trajectory:
    X0 = problem.x0 if x0 is None else np.asarray(x0, dtype=float)
    t, xs, log, left, term, sup, exploded, meta = _run(problem, scheme, path, X0)
    return Trajectory(t, xs, log, left, term, float(sup), exploded, meta)


def coupled_simulate(problem: ProblemSpec, scheme: SchemeConfig, x0, y0, path: NoisePath):
    """Two solutions driven by the same noise path, stepped on the same grid."""
    X0 = np.column_stack([np.asarray(x0, dtype=float), np.asarray(y0, dtype=float)])
    t, xs, log, left, term, sup, exploded, meta = _run(problem, scheme, path, X0)
    out = []
    for c in range(2):
        out.append(Trajectory(t, xs[:, :, c], log, left[..., c] if left.size else left.reshape(0, X0.shape[0]),
                              term[:, c].copy(), float(sup[c]), exploded, dict(meta)))
    return out[0], out[1]


def step(problem: ProblemSpec, scheme: SchemeConfig, state, t: float, dt_effective: float,
         jumps_in_step=(), compensator_drift=None) -> np.ndarray:
    """Advance ``state`` from ``t`` to ``t + dt_effective``.

    ``jumps_in_step`` is a sorted sequence of ``(time, mark)`` with
    ``t < time <= t + dt_effective``; the cell is split at every jump time.
    """
    if not dt_effective > 0:
        raise ValueError("dt_effective must be positive")
    stepper = Stepper(problem, scheme)
    comp_hat = None
    if compensator_drift is not None and np.any(np.asarray(compensator_drift) != 0):
        comp_hat = stepper.jump_modal @ np.asarray(compensator_drift, dtype=float)
    x = np.array(state, dtype=float)
    xhat = stepper.W @ x
    t_cur, t_end = t, t + dt_effective
    for s, mark in jumps_in_step:
        if not t_cur <= s <= t_end:
            raise ValueError(f"jump time {s} outside the step or not sorted")
        if s > t_cur:
            xhat, x = stepper.advance(xhat, x, s - t_cur, comp_hat)
            t_cur = s
        xhat, x = stepper.inject(xhat, np.asarray(mark, dtype=float))
    if t_end > t_cur:
        xhat, x = stepper.advance(xhat, x, t_end - t_cur, comp_hat)
    return x
