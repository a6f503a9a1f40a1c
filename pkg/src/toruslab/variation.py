"""Finite-difference checks of the second variation and conformal deformations.

Every family here is evaluated by sampling the deformed surface on the
grid of the base geometry and recomputing its area from scratch with
spectral derivatives, so nothing below reuses the Jacobi operator except
for the prediction it is compared against.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .geometry import GeometryData, dot, require_normal
from .grid import Grid, Lattice, deriv, integrate
from .jacobi import quadratic_form
from .sections import ambient_projection


class VariationError(ValueError):
    pass


def _unit(samples: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    r = np.linalg.norm(samples, axis=-1, keepdims=True)
    if np.min(r) < floor:
        raise VariationError(f"radial projection undefined: min |x| = {np.min(r):.2e}")
    return samples / r


def normal_variation(g: GeometryData, V: np.ndarray, t: float) -> np.ndarray:
    """``f_t = (f + tV)/|f + tV|``."""
    require_normal(g, V)
    if abs(t) * float(np.max(np.linalg.norm(V, axis=-1))) >= 1.0:
        raise VariationError("step too large: |t| sup|V| must stay below 1")
    return _unit(g.f + t * V)


def normal_displacement(g: GeometryData, V: np.ndarray, t: float) -> np.ndarray:
    """``f_t - f`` evaluated without cancellation (its size is ``O(t)``, not ``O(1)``)."""
    q = t * t * dot(V, V)
    r = np.sqrt(1 + q)
    return (t * V - (q / (1 + r))[..., None] * g.f) / r[..., None]


def area_change(base: np.ndarray, delta: np.ndarray, grid: Grid) -> float:
    """``A(base + delta) - A(base)``, expanded so that rounding scales with ``delta``."""
    xu, xv = deriv(base, grid, "u"), deriv(base, grid, "v")
    du, dv = deriv(delta, grid, "u"), deriv(delta, grid, "v")
    E, F, G = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    dE = 2 * dot(xu, du) + dot(du, du)
    dF = dot(xu, dv) + dot(du, xv) + dot(du, dv)
    dG = 2 * dot(xv, dv) + dot(dv, dv)
    det = E * G - F * F
    ddet = E * dG + dE * G + dE * dG - 2 * F * dF - dF * dF
    new = det + ddet
    if np.min(new) <= 1e-14 * max(float(np.max(new)), 1e-300):
        raise VariationError("degenerate induced metric")
    return float(integrate(ddet / (np.sqrt(new) + np.sqrt(det)), grid))


def area_of_samples(samples: np.ndarray, lattice: Lattice | Grid) -> float:
    """Area of a sampled periodic surface from its induced metric."""
    grid = lattice if isinstance(lattice, Grid) else Grid(lattice, samples.shape[:2])
    xu = deriv(samples, grid, "u")
    xv = deriv(samples, grid, "v")
    E, F, G = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    det = E * G - F * F
    if np.min(det) <= 1e-14 * max(float(np.max(det)), 1e-300):
        raise VariationError("degenerate induced metric")
    return float(integrate(np.sqrt(det), grid))


@dataclass(frozen=True)
class VariationReport:
    direction: str
    step: float
    fd: float  # Richardson value of A''(0)
    fd_coarse: float
    fd_fine: float
    prediction: float  # -Q(V, V)
    norm2: float
    mismatch: float
    mismatch_coarse: float
    mismatch_fine: float
    order: int = 4

    @property
    def normalized(self) -> float:
        """``A''(0) / ||V||^2``, the stability eigenvalue for eigensections (negated)."""
        return self.fd / self.norm2

    @property
    def monotone(self) -> bool:
        return self.mismatch <= self.mismatch_fine <= self.mismatch_coarse

    def to_dict(self) -> dict:
        d = asdict(self)
        d["monotone"] = self.monotone
        return d


def second_variation_fd(
    g: GeometryData, V: np.ndarray, h: float = 1e-3, direction: str = "custom", normalize: bool = True, noise: float = 1e-8
) -> VariationReport:
    """Central second difference of the area along ``f_t`` against ``-Q(V, V)``.

    Area differences ``A(t) - A(0)`` are accumulated pointwise from the
    displacement, which keeps the cancellation floor near ``eps / h``.

    ``V`` is rescaled to unit L2 norm first (unless ``normalize=False``).
    Values at ``h`` and ``h/2`` are combined by one Richardson step.
    """
    require_normal(g, V)
    norm2 = g.inner(V, V)
    if norm2 <= 0:
        raise VariationError("zero direction")
    if normalize:
        V = V / np.sqrt(norm2)
        norm2 = 1.0
    grid = g.grid
    normal_variation(g, V, h)  # step-size guard

    def change(t):
        return area_change(g.f, normal_displacement(g, V, t), grid)

    d1 = (change(h) + change(-h)) / h**2
    d2 = (change(h / 2) + change(-h / 2)) / (h / 2) ** 2
    rich = (4 * d2 - d1) / 3
    pred = -quadratic_form(g, V)
    scale = max(abs(pred), 1e-300)
    m1, m2, mr = abs(d1 - pred) / scale, abs(d2 - pred) / scale, abs(rich - pred) / scale
    # above the rounding floor, halving h or extrapolating must not make things worse
    if (m2 > m1 and m2 > noise) or (mr > m2 and mr > noise):
        raise VariationError(
            f"step {h:g} too small: mismatches {m1:.2e}, {m2:.2e}, {mr:.2e} are not decreasing (cancellation)"
        )
    return VariationReport(direction, h, rich, d1, d2, pred, norm2, mr, m1, m2)


def _phi(x: np.ndarray, Z: np.ndarray) -> np.ndarray:
    y = x + Z
    return Z + ((1 - Z @ Z) / dot(y, y))[..., None] * y


def centered_dilation(g: GeometryData, Z) -> np.ndarray:
    """Conformal map ``Phi(Z)`` of the sphere applied to ``f``."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (g.immersion.dim,):
        raise VariationError(f"Z must have {g.immersion.dim} components")
    if Z @ Z >= 1.0:
        raise VariationError("centered dilation needs |Z| < 1")
    return _phi(g.f, Z)


def family_phi(g: GeometryData, t: float, Z, hopf_tol: float = 1e-9, floor: float = 1e-6) -> np.ndarray:
    """``(Phi(Z) cos t + Omega_1 sin t)`` pushed back to the sphere; needs Hopf constant 1."""
    if abs(g.a - 1) > hopf_tol:
        raise VariationError(f"family needs Hopf constant 1, got {g.a:.3g}; normalize first")
    base = centered_dilation(g, Z)
    return _unit(base * np.cos(t) + g.omega1 * np.sin(t), floor)


def deformation_profile(g: GeometryData, samples_at, ts=(0.01, 0.02), h: float = 1e-3) -> dict:
    """Areas at ``ts`` and a Richardson first derivative at ``t = 0``.

    ``samples_at(t)`` returns the deformed surface sampled on ``g.grid``.
    """
    def change(t):
        return area_change(g.f, samples_at(t) - g.f, g.grid)

    a0 = area_of_samples(g.f, g.grid)
    d_h = (change(h) - change(-h)) / (2 * h)
    d_h2 = (change(h / 2) - change(-h / 2)) / h
    deltas = [change(t) for t in ts]
    return {
        "area0": a0,
        "ts": list(ts),
        "areas": [a0 + d for d in deltas],
        "decrease": [-d for d in deltas],
        "first_derivative": (4 * d_h2 - d_h) / 3,
    }


def seeded_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` seeded unit vectors in ``R^dim``."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((count, dim))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def dilation_check(g: GeometryData, Z, ts=(0.01, 0.02), h: float = 1e-3) -> dict:
    """Area along ``t -> Phi(tZ)``; its variation field is ``2 Z^perp``."""
    Z = np.asarray(Z, dtype=float)
    return deformation_profile(g, lambda t: centered_dilation(g, t * Z), ts, h)


def family_check(g: GeometryData, Z, ts=(0.01, 0.02), h: float = 1e-3) -> dict:
    """Area along ``t -> Phi(t, tZ)``, which starts at ``f``."""
    Z = np.asarray(Z, dtype=float)
    return deformation_profile(g, lambda t: family_phi(g, t, t * Z), ts, h)


def named_direction(g: GeometryData, name: str, seed: int = 0) -> np.ndarray:
    """Normal directions addressable from the CLI."""
    from .geometry import random_normal_sections

    if name == "omega1":
        V = g.omega1
    elif name == "omega2":
        V = g.omega2
    elif name == "zperp":
        Z = seeded_directions(g.immersion.dim, 1, seed)[0]
        V = ambient_projection(g, Z)
    elif name == "random":
        V = random_normal_sections(g, 1, seed)[0]
    else:
        raise VariationError(f"unknown direction {name!r}")
    if np.max(np.abs(V)) < 1e-12:
        raise VariationError(f"direction {name} vanishes on this surface")
    return V
