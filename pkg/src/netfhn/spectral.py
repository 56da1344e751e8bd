"""Spectral decomposition of the discrete generator and the semigroup it generates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from netfhn.discretization import DiscreteGenerator


@dataclass(frozen=True)
class SpectralDecomposition:
    """``A_h V = V diag(eigenvalues)`` with ``V^T M V = I``.

    Eigenvalues are sorted in decreasing order, so ``eigenvalues[0]`` is the
    spectral bound.  ``to_modal = V^T M`` maps nodal states to modal
    coordinates; since ``V`` is ``M``-orthonormal the ``M``-norm of a state
    equals the Euclidean norm of its modal coordinates.
    """

    generator: DiscreteGenerator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    to_modal: np.ndarray = field(repr=False)

    @property
    def n_dofs(self):
        return self.eigenvalues.size

    def modal(self, x):
        return self.to_modal @ x

    def nodal(self, xhat):
        return self.eigenvectors @ xhat


def decompose(gen: DiscreteGenerator) -> SpectralDecomposition:
    try:
        w, V = scipy.linalg.eigh(gen.K, gen.M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"generalized eigensolver failed: {exc}") from exc
    # eigh returns ascending K-eigenvalues, so -w is already decreasing
    lam = -w
    V = V.copy()
    # fix the sign of each eigenvector so results do not depend on LAPACK internals
    pivot = np.argmax(np.abs(V), axis=0)
    V *= np.sign(V[pivot, np.arange(V.shape[1])])
    W = V.T @ gen.M
    for arr in (lam, V, W):
        arr.setflags(write=False)
    return SpectralDecomposition(gen, lam, V, W)


def spectral_bound(dec: SpectralDecomposition) -> float:
    return float(dec.eigenvalues[0])


def semigroup_apply(dec: SpectralDecomposition, t: float, x) -> np.ndarray:
    """``T_h(t) x = V exp(Lambda t) V^T M x``; ``x`` may carry extra trailing columns."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    x = np.asarray(x, dtype=float)
    decay = np.exp(dec.eigenvalues * t)
    xhat = dec.to_modal @ x
    return dec.eigenvectors @ (decay.reshape((-1,) + (1,) * (x.ndim - 1)) * xhat)


def phi1(z):
    """``(exp(z) - 1) / z`` with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out
