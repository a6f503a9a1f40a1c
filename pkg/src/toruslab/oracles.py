"""Closed-form spectra used as independent references.

Nothing here touches the discretized operator: these are lattice-point
counts and trigonometric eigenvalue lists.
"""

from __future__ import annotations

import itertools

import numpy as np

from .grid import Lattice


def dual_lattice_norms(lattice: Lattice, radius: float) -> np.ndarray:
    """Sorted ``|xi|^2`` over dual-lattice frequencies with ``|xi| <= radius``."""
    D = lattice.dual()
    # shortest dual row sets the search box
    smin = np.min(np.linalg.svd(D, compute_uv=False))
    m = int(np.ceil(radius / smin)) + 1
    out = []
    for i, j in itertools.product(range(-m, m + 1), repeat=2):
        xi = i * D[0] + j * D[1]
        q = float(xi @ xi)
        if q <= radius**2 * (1 + 1e-12):
            out.append(q)
    return np.sort(np.array(out))


def clifford_eigenvalues(count: int = 60) -> np.ndarray:
    """Lowest stability eigenvalues ``2(m^2 + k^2) - 4`` of the Clifford torus in ``S^3``."""
    r = int(np.sqrt(count)) + 2
    vals = [2 * (m * m + k * k) - 4 for m in range(-r, r + 1) for k in range(-r, r + 1)]
    return np.sort(np.array(vals, dtype=float))[:count]


def padding_count(lattice: Lattice, e2rho: float, bound: float = 2.0) -> int:
    """Number of eigenvalues ``< bound`` of the surface Laplacian ``e^{-2rho}|xi|^2``
    on a flat torus: the negative modes each constant normal direction adds."""
    norms = dual_lattice_norms(lattice, np.sqrt(bound * e2rho))
    return int(np.sum(norms / e2rho < bound - 1e-12))


def padding_nullity(lattice: Lattice, e2rho: float, bound: float = 2.0) -> int:
    norms = dual_lattice_norms(lattice, np.sqrt(bound * e2rho) * 1.01)
    return int(np.sum(np.abs(norms / e2rho - bound) <= 1e-9))
