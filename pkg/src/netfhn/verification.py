"""Executable checks of the structural properties of the discrete model.

Each check returns a :class:`CheckReport` holding every number needed to
recompute its verdict.  Statistical checks use 3-standard-error bands and
counter-based seeds, so a ``(problem, seed)`` pair fixes the report exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from netfhn.discretization import DiscreteGenerator, apply_generator
from netfhn.integrator import (ProblemSpec, SchemeConfig, convolution_modal, coupled_simulate,
                               simulate, vertex_injection_modal)
from netfhn.levy import LevyMeasureSpec, sample_jumps
from netfhn.nonlinearity import eta_star
from netfhn.spectral import SpectralDecomposition, decompose, phi1

Z_BAND = 3.0


@dataclass
class CheckReport:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    sample_sizes: dict = field(default_factory=dict)
    standard_errors: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": _plain(self.measured),
            "tolerance": _plain(self.tolerance),
            "sample_sizes": _plain(self.sample_sizes),
            "standard_errors": _plain(self.standard_errors),
            "notes": list(self.notes),
        }

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        items = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items()
                          if not isinstance(v, (list, tuple, np.ndarray)))
        line = f"{status} {self.name}: {items}"
        if self.notes:
            line += " | " + "; ".join(self.notes)
        return line


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _integral_exp2(lam, t):
    """``int_0^t exp(2 lam r) dr`` elementwise."""
    return t * phi1(2.0 * lam * t)


def _mode_weights(dec: SpectralDecomposition, sigma, noise: LevyMeasureSpec):
    """``int <(0, sigma x), v_i>_M^2 nu(dx)`` for every eigenvector ``v_i``."""
    J = vertex_injection_modal(dec, sigma)
    return np.einsum("ia,ab,ib->i", J, noise.second_moment_matrix(), J)


def convolution_second_moment(dec: SpectralDecomposition, sigma, noise: LevyMeasureSpec, t: float) -> float:
    """Closed-form ``E||Z(t)||_M^2 = int_0^t int ||T(s)(0, sigma x)||_M^2 nu(dx) ds``."""
    q = _mode_weights(dec, sigma, noise)
    return float(np.sum(q * _integral_exp2(dec.eigenvalues, t)))


def convolution_increment_moment(dec, sigma, noise, s: float, t: float) -> float:
    """Closed-form ``E||Z(t) - Z(s)||_M^2`` for ``0 <= s <= t``."""
    q = _mode_weights(dec, sigma, noise)
    lam = dec.eigenvalues
    g = t - s
    old = (np.expm1(lam * g)) ** 2 * _integral_exp2(lam, s)
    new = _integral_exp2(lam, g)
    return float(np.sum(q * (old + new)))


def check_dissipativity(gen: DiscreteGenerator, n_samples: int = 100, seed: int = 0,
                        sym_tol: float = 1e-10, diss_tol: float = 1e-12,
                        kernel_tol: float = 1e-10) -> CheckReport:
    """Self-adjointness and dissipativity of ``A_h`` in the ``M`` inner product."""
    rng = np.random.default_rng([seed, 0xD155])
    mesh = gen.mesh
    n = gen.n_dofs
    notes = []

    K = gen.K
    kscale = float(np.max(np.abs(K)))
    asym = np.abs(K - K.T)
    i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
    k_asym = float(asym[i, j] / kscale)
    if k_asym > 1e-12:
        notes.append(f"stiffness asymmetry {k_asym:.3g} at ({mesh.describe_dof(i)}, {mesh.describe_dof(j)})")

    X = rng.standard_normal((n, n_samples))
    X[:, 0] = 1.0  # constants probe the kernel
    Y = rng.standard_normal((n, n_samples))
    AX = apply_generator(gen, X)
    AY = apply_generator(gen, Y)
    MX, MY = gen.M @ X, gen.M @ Y
    nx = np.sqrt(np.einsum("ij,ij->j", X, MX))
    ny = np.sqrt(np.einsum("ij,ij->j", Y, MY))
    lhs = np.einsum("ij,ij->j", AX, MY)
    rhs = np.einsum("ij,ij->j", MX, AY)
    sym_err = np.abs(lhs - rhs) / (nx * ny)
    worst_sym = float(np.max(sym_err))
    if worst_sym > sym_tol:
        notes.append(f"M-symmetry violated on sample {int(np.argmax(sym_err))}")
    diss = np.einsum("ij,ij->j", AX, MX) / nx**2
    worst_diss = float(np.max(diss))
    if worst_diss > diss_tol:
        notes.append(f"dissipativity violated on sample {int(np.argmax(diss))}")

    dec = decompose(gen)
    lam = dec.eigenvalues
    bound = float(lam[0])
    radius = float(abs(lam[-1]))
    kernel_dim = int(np.sum(np.abs(lam) <= 1e-8 * max(1.0, radius)))
    connected = mesh.graph.is_connected()
    leak = bool(np.any(gen.vertex_params.b > 0))
    kernel_ok = True
    if connected and not leak:
        kernel_ok = kernel_dim == 1 and abs(bound) <= kernel_tol
        v = dec.eigenvectors[:, 0]
        const_dev = float(np.ptp(v) / np.max(np.abs(v)))
        kernel_ok = kernel_ok and const_dev <= 1e-8
        if not kernel_ok:
            notes.append(f"expected a one-dimensional constant kernel, got dim {kernel_dim}, "
                         f"bound {bound:.3g}, constant deviation {const_dev:.3g}")
    elif connected and leak:
        kernel_ok = kernel_dim == 0 and bound < 0
        if not kernel_ok:
            notes.append(f"leak present but spectral bound {bound:.3g} is not negative")

    passed = k_asym <= 1e-12 and worst_sym <= sym_tol and worst_diss <= diss_tol and kernel_ok
    return CheckReport(
        "dissipativity", passed,
        measured={"stiffness_asymmetry": k_asym, "m_symmetry_error": worst_sym,
                  "max_rayleigh_quotient": worst_diss, "spectral_bound": bound,
                  "kernel_dimension": kernel_dim, "connected": connected, "leak": leak},
        tolerance={"stiffness_asymmetry": 1e-12, "m_symmetry": sym_tol, "dissipativity": diss_tol,
                   "spectral_bound_zero": kernel_tol},
        sample_sizes={"random_states": n_samples},
        notes=notes,
    )


def check_isometry(problem: ProblemSpec, n_paths: int = 10_000, seed: int = 0,
                   n_refinements: int = 6) -> CheckReport:
    """Monte Carlo ``E||Z(T)||_M^2`` against its closed-form eigen-quadrature.

    Also estimates ``E||Z(T) - Z(T - T/2^k)||_M^2`` for ``k = 1..n_refinements``
    on the same paths and requires a strictly decreasing trend.
    """
    if n_paths < 1000:
        raise ValueError("isometry check needs at least 1000 paths")
    dec = problem.decomposition
    T = problem.horizon
    J = vertex_injection_modal(dec, problem.sigma)
    expected = convolution_second_moment(dec, problem.sigma, problem.noise, T)

    gaps = T / 2.0 ** np.arange(1, n_refinements + 1)
    sq = np.empty(n_paths)
    inc = np.empty((n_paths, gaps.size))
    for p in range(n_paths):
        path = sample_jumps(problem.noise, T, seed, p)
        zT = convolution_modal(dec, J, path, T)
        sq[p] = zT @ zT
        for k, g in enumerate(gaps):
            d = zT - convolution_modal(dec, J, path, T - g)
            inc[p, k] = d @ d
    mean = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(n_paths))
    if se == 0.0:
        z = 0.0 if mean == expected else math.inf
    else:
        z = (mean - expected) / se
    inc_mean = inc.mean(axis=0)
    inc_expected = [convolution_increment_moment(dec, problem.sigma, problem.noise, T - g, T) for g in gaps]
    trivial = bool(np.all(inc_mean == 0))
    trend_ok = trivial or bool(np.all(np.diff(inc_mean) < 0))
    notes = []
    if not trend_ok:
        notes.append("mean-square increments do not shrink along the dyadic refinement")
    passed = abs(z) <= Z_BAND and trend_ok
    return CheckReport(
        "isometry", passed,
        measured={"mc_mean": mean, "closed_form": expected, "z_score": z,
                  "gaps": gaps, "increment_mc": inc_mean, "increment_closed_form": inc_expected},
        tolerance={"z_band": Z_BAND},
        sample_sizes={"paths": n_paths},
        standard_errors={"mc_mean": se,
                         "increment_mc": inc.std(axis=0, ddof=1) / math.sqrt(n_paths)},
        notes=notes,
    )


def _growth_rate(problem: ProblemSpec) -> float:
    if problem.shift is not None:
        return problem.shift.eta_star
    return eta_star(problem.drift)


def check_contraction(problem: ProblemSpec, scheme: SchemeConfig, n_pairs: int = 100, seed: int = 0,
                      margin: float = 0.05, init_range=(-0.5, 1.5), pairs=None) -> CheckReport:
    """Common-noise pairs must satisfy ``||dX(T)|| <= exp(eta* T) ||dx0|| (1 + margin)``.

    Initial pairs are drawn uniformly from ``init_range`` per dof unless
    ``pairs`` supplies them explicitly.
    """
    gen = problem.generator
    T = problem.horizon
    eta = _growth_rate(problem)
    bound = math.exp(eta * T) * (1.0 + margin)
    ms_bound = math.exp(2.0 * eta * T) * (1.0 + margin)
    if pairs is None:
        pairs = []
        for p in range(n_pairs):
            rng = np.random.default_rng([seed, p, 1])
            pairs.append((rng.uniform(*init_range, gen.n_dofs), rng.uniform(*init_range, gen.n_dofs)))
    ratios, d0_sq, dT_sq = [], [], []
    exploded = False
    for p, (x0, y0) in enumerate(pairs):
        path = sample_jumps(problem.noise, T, seed, p)
        tx, ty = coupled_simulate(problem, scheme, x0, y0, path)
        exploded |= tx.exploded
        d0 = gen.m_norm(np.asarray(x0) - np.asarray(y0))
        dT = gen.m_norm(tx.terminal - ty.terminal)
        d0_sq.append(d0**2)
        dT_sq.append(dT**2)
        ratios.append(0.0 if d0 == 0 else dT / d0)
    ratios = np.array(ratios)
    worst = float(ratios.max())
    ms_ratio = float(np.mean(dT_sq) / np.mean(d0_sq)) if np.mean(d0_sq) > 0 else 0.0
    passed = (not exploded) and worst <= bound and ms_ratio <= ms_bound
    notes = []
    if worst > bound:
        notes.append(f"pair {int(np.argmax(ratios))} exceeds the pathwise bound")
    return CheckReport(
        "contraction", passed,
        measured={"eta_star": eta, "worst_ratio": worst, "mean_ratio": float(ratios.mean()),
                  "mean_square_ratio": ms_ratio},
        tolerance={"pathwise_bound": bound, "mean_square_bound": ms_bound, "margin": margin},
        sample_sizes={"pairs": len(pairs)},
        notes=notes,
    )


def check_sup_moment(problem: ProblemSpec, scheme: SchemeConfig, n_paths: int = 2000, seed: int = 0,
                     explosion_guard: float = 1e6) -> CheckReport:
    """Stability of the Monte Carlo estimate of ``E sup_t ||X(t)||_M^2``.

    The estimate over the first half of the paths and over all paths must
    agree within 3 combined standard errors, and no path may exceed the
    explosion guard.
    """
    guarded = scheme.replace(explosion_guard=explosion_guard, record_every=10**9)
    sups = np.empty(n_paths)
    tripped = []
    for p in range(n_paths):
        path = sample_jumps(problem.noise, problem.horizon, seed, p)
        tr = simulate(problem, guarded, path)
        sups[p] = tr.sup_norm_sq
        if tr.exploded or not np.isfinite(tr.sup_norm_sq) or tr.sup_norm_sq > explosion_guard:
            tripped.append(p)
            if len(tripped) >= 5:
                break
    notes = []
    if tripped:
        notes.append(f"explosion guard tripped on paths {tripped}")
        return CheckReport("sup_moment", False,
                           measured={"exploded_paths": tripped},
                           tolerance={"explosion_guard": explosion_guard},
                           sample_sizes={"paths": n_paths}, notes=notes)
    half = n_paths // 2
    est_h, est_f = float(sups[:half].mean()), float(sups.mean())
    se_h = float(sups[:half].std(ddof=1) / math.sqrt(half))
    se_f = float(sups.std(ddof=1) / math.sqrt(n_paths))
    combined = math.sqrt(se_h**2 + se_f**2)
    diff = abs(est_f - est_h)
    passed = diff <= Z_BAND * combined
    return CheckReport(
        "sup_moment", passed,
        measured={"estimate_half": est_h, "estimate_full": est_f, "difference": diff,
                  "max_path_sup": float(sups.max())},
        tolerance={"combined_se_band": Z_BAND * combined, "explosion_guard": explosion_guard},
        sample_sizes={"half": half, "full": n_paths},
        standard_errors={"estimate_half": se_h, "estimate_full": se_f},
        notes=notes,
    )


def convergence_study(problem: ProblemSpec, scheme: SchemeConfig, dt_list, lambda_list, seed: int = 0,
                      n_paths: int = 4, ref_factor: int = 8, min_ratio: float = 1.8) -> CheckReport:
    """Self-convergence in ``dt`` and convergence of the Yosida approximations.

    (i) RMS terminal errors over ``n_paths`` common noise paths against a
    reference run at ``min(dt_list) / ref_factor``; successive ratios must be
    at least ``min_ratio``.  (ii) On noise path 0 at the scheme's ``dt``,
    terminal errors of the ``yosida_semi_implicit`` runs against a reference
    at ``min(lambda_list) / 10`` must strictly decrease.  A linear drift is
    exact, so both parts then reduce to a round-off test.
    """
    dt_list = [float(d) for d in dt_list]
    lambda_list = [float(v) for v in lambda_list]
    if any(b >= a for a, b in zip(dt_list, dt_list[1:])):
        raise ValueError("dt_list must be strictly decreasing")
    if any(b >= a for a, b in zip(lambda_list, lambda_list[1:])):
        raise ValueError("lambda_list must be strictly decreasing")
    gen = problem.generator
    T = problem.horizon
    linear = problem.drift.kind == "linear"
    base = scheme.replace(record_every=10**9, explosion_guard=None)

    dt_ref = dt_list[-1] / ref_factor
    errs = np.zeros((n_paths, len(dt_list)))
    scale = 0.0
    for p in range(n_paths):
        path = sample_jumps(problem.noise, T, seed, p)
        ref = simulate(problem, base.replace(dt=dt_ref), path).terminal
        scale = max(scale, gen.m_norm(ref))
        for k, dt in enumerate(dt_list):
            errs[p, k] = gen.m_norm(simulate(problem, base.replace(dt=dt), path).terminal - ref)
    rms = np.sqrt(np.mean(errs**2, axis=0))
    ratios = rms[:-1] / np.where(rms[1:] > 0, rms[1:], np.nan)
    roundoff = 1e-10 * max(1.0, scale)
    notes = []
    if linear or np.all(rms <= roundoff):
        dt_ok = bool(np.all(rms <= roundoff))
        notes.append("linear drift: dt errors tested against round-off")
    else:
        dt_ok = bool(np.all(ratios >= min_ratio))
    refinement = np.array(dt_list[:-1]) / np.array(dt_list[1:])
    with np.errstate(invalid="ignore", divide="ignore"):
        orders = np.log(ratios) / np.log(refinement)
    finite = ratios[np.isfinite(ratios)]

    yos_errs = []
    yos_ok = True
    if problem.shift is not None and not linear:
        path = sample_jumps(problem.noise, T, seed, 0)
        ys = base.replace(drift_mode="yosida_semi_implicit", yosida_lambda=lambda_list[0])
        ref = simulate(problem, ys.replace(yosida_lambda=lambda_list[-1] / 10), path).terminal
        for lam in lambda_list:
            yos_errs.append(gen.m_norm(simulate(problem, ys.replace(yosida_lambda=lam), path).terminal - ref))
        yos_ok = bool(np.all(np.diff(yos_errs) < 0))
    else:
        notes.append("no monotone drift part: Yosida sweep skipped")
    if not dt_ok:
        notes.append("dt error ratios below threshold")
    if not yos_ok:
        notes.append("Yosida errors not strictly decreasing")
    return CheckReport(
        "convergence", dt_ok and yos_ok,
        measured={"dt_list": dt_list, "dt_reference": dt_ref, "dt_errors": rms, "dt_ratios": ratios,
                  "empirical_orders": orders, "min_dt_ratio": float(finite.min()) if finite.size else None,
                  "lambda_list": lambda_list, "yosida_errors": yos_errs},
        tolerance={"min_ratio": min_ratio, "roundoff": roundoff},
        sample_sizes={"paths": n_paths},
        notes=notes,
    )


def run_all(problem: ProblemSpec, scheme: SchemeConfig, seed: int = 0, paths: int = 2000, pairs: int = 20,
            dt_list=(4e-3, 2e-3, 1e-3), lambda_list=(1e-1, 1e-2, 1e-3), convergence_paths: int = 4,
            explosion_guard: float = 1e6) -> list:
    """Every check in a fixed order; the isometry check uses at least 1000 paths."""
    return [
        check_dissipativity(problem.generator, seed=seed),
        check_isometry(problem, n_paths=max(int(paths), 1000), seed=seed),
        check_contraction(problem, scheme, n_pairs=pairs, seed=seed),
        check_sup_moment(problem, scheme, n_paths=paths, seed=seed, explosion_guard=explosion_guard),
        convergence_study(problem, scheme, dt_list, lambda_list, seed=seed, n_paths=convergence_paths),
    ]
