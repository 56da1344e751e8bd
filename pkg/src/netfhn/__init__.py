"""Stochastic FitzHugh-Nagumo dynamics on metric graphs driven by vertex Levy noise."""

__version__ = "0.1.0"

from netfhn.graph import GraphError, NetworkGraph, build_network, vertex_star
from netfhn.discretization import (EdgeCoefficients, Mesh, PiecewisePolynomial, StateVector, VertexParams,
                                   apply_generator, assemble_generator, build_mesh, kirchhoff_flux, trace)
from netfhn.spectral import SpectralDecomposition, decompose, phi1, semigroup_apply, spectral_bound
from netfhn.nonlinearity import FhnParams, drift_apply, eta_star, fhn_eval, monotone_shift, resolvent, yosida_eval
from netfhn.levy import (AtomMarks, BallMarks, Band, GaussianMarks, LevyMeasureSpec, NoisePath,
                         sample_jumps, second_moment)
from netfhn.integrator import ProblemSpec, SchemeConfig, Trajectory, coupled_simulate, simulate, step
from netfhn.verification import (CheckReport, check_contraction, check_dissipativity, check_isometry,
                                 check_sup_moment, convergence_study, run_all)
from netfhn.config import ConfigError, SimulationConfig, load_config, parse_config

__all__ = [
    "GraphError", "NetworkGraph", "build_network", "vertex_star",
    "EdgeCoefficients", "Mesh", "PiecewisePolynomial", "StateVector", "VertexParams",
    "apply_generator", "assemble_generator", "build_mesh", "kirchhoff_flux", "trace",
    "SpectralDecomposition", "decompose", "phi1", "semigroup_apply", "spectral_bound",
    "FhnParams", "drift_apply", "eta_star", "fhn_eval", "monotone_shift", "resolvent", "yosida_eval",
    "AtomMarks", "BallMarks", "Band", "GaussianMarks", "LevyMeasureSpec", "NoisePath",
    "sample_jumps", "second_moment",
    "ProblemSpec", "SchemeConfig", "Trajectory", "coupled_simulate", "simulate", "step",
    "CheckReport", "check_contraction", "check_dissipativity", "check_isometry",
    "check_sup_moment", "convergence_study", "run_all",
    "ConfigError", "SimulationConfig", "load_config", "parse_config",
]
