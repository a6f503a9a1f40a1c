"""Flat tori: period lattices, uniform grids, Fourier differentiation, quadrature.

All fields are plain numpy arrays whose two leading axes are the grid axes
``(N1, N2)``; any trailing axes (ambient components, frame indices) are
carried along untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class DegenerateLatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Rank-2 period lattice spanned by ``v1`` and ``v2`` (``det[v1 v2] > 0``)."""

    v1: tuple[float, float]
    v2: tuple[float, float]

    @property
    def matrix(self) -> np.ndarray:
        """Generators as columns, so ``x = matrix @ (s, t)``."""
        return np.array([self.v1, self.v2], dtype=float).T

    @property
    def covolume(self) -> float:
        return float(abs(np.linalg.det(self.matrix)))

    def dual(self) -> np.ndarray:
        """Rows ``xi`` with ``xi . v_j = 2 pi delta_ij`` (the Fourier frequencies)."""
        return TWO_PI * np.linalg.inv(self.matrix)

    def scaled(self, c: complex) -> "Lattice":
        """Image of the lattice under ``z -> c z`` (complex multiplication)."""
        w1 = c * complex(*self.v1)
        w2 = c * complex(*self.v2)
        return make_lattice((w1.real, w1.imag), (w2.real, w2.imag))


def make_lattice(v1, v2) -> Lattice:
    """Build a lattice, swapping generators if needed so that ``det > 0``.

    Raises DegenerateLatticeError for (numerically) dependent generators.
    """
    a = np.asarray(v1, dtype=float).reshape(2)
    b = np.asarray(v2, dtype=float).reshape(2)
    det = a[0] * b[1] - a[1] * b[0]
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if scale == 0.0 or abs(det) <= 1e-12 * scale:
        raise DegenerateLatticeError(f"degenerate lattice generators {a}, {b}")
    if det < 0:
        a, b = b, a
    return Lattice((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))


def gauss_reduce(lattice: Lattice) -> Lattice:
    """Lagrange-Gauss reduction: shortest, most orthogonal generators."""
    a = np.array(lattice.v1)
    b = np.array(lattice.v2)
    if a @ a > b @ b:
        a, b = b, a
    while True:
        mu = round(float(a @ b) / float(a @ a))
        b = b - mu * a
        if b @ b >= a @ a - 1e-12 * (a @ a):
            break
        a, b = b, a
    return make_lattice(a, b)


@dataclass(frozen=True)
class Grid:
    """Uniform ``N1 x N2`` sampling of the fundamental domain in lattice coordinates."""

    lattice: Lattice
    shape: tuple[int, int] = (64, 64)

    def __post_init__(self):
        n1, n2 = self.shape
        if n1 <= 0 or n2 <= 0 or n1 % 2 or n2 % 2:
            raise ValueError(f"grid shape must be positive even integers, got {self.shape}")

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]

    @cached_property
    def lattice_coords(self) -> tuple[np.ndarray, np.ndarray]:
        n1, n2 = self.shape
        s = np.arange(n1) / n1
        t = np.arange(n2) / n2
        return np.meshgrid(s, t, indexing="ij")

    @cached_property
    def points(self) -> np.ndarray:
        """Sample points ``x(s, t) = s v1 + t v2``, shape ``(N1, N2, 2)``."""
        s, t = self.lattice_coords
        return s[..., None] * np.array(self.lattice.v1) + t[..., None] * np.array(self.lattice.v2)

    @cached_property
    def _symbols(self) -> dict[str, np.ndarray]:
        # Odd-order symbols drop the Nyquist wavenumber so that real fields
        # stay real and first-derivative matrices stay antisymmetric.
        n1, n2 = self.shape
        k1 = np.fft.fftfreq(n1, 1.0 / n1)
        k2 = np.fft.fftfreq(n2, 1.0 / n2)
        k1_odd = k1.copy()
        k1_odd[n1 // 2] = 0.0
        k2_odd = k2.copy()
        k2_odd[n2 // 2] = 0.0
        K1, K2 = np.meshgrid(k1, k2, indexing="ij")
        K1o, K2o = np.meshgrid(k1_odd, k2_odd, indexing="ij")
        # grad_x = J grad_(s,t) with J = A^{-T}
        J = np.linalg.inv(self.lattice.matrix).T
        ds, dt = TWO_PI * 1j * K1o, TWO_PI * 1j * K2o
        dss, dtt = -(TWO_PI * K1) ** 2, -(TWO_PI * K2) ** 2
        dst = ds * dt
        sym = {
            "u": J[0, 0] * ds + J[0, 1] * dt,
            "v": J[1, 0] * ds + J[1, 1] * dt,
            "uu": J[0, 0] ** 2 * dss + 2 * J[0, 0] * J[0, 1] * dst + J[0, 1] ** 2 * dtt,
            "vv": J[1, 0] ** 2 * dss + 2 * J[1, 0] * J[1, 1] * dst + J[1, 1] ** 2 * dtt,
            "uv": J[0, 0] * J[1, 0] * dss
            + (J[0, 0] * J[1, 1] + J[0, 1] * J[1, 0]) * dst
            + J[0, 1] * J[1, 1] * dtt,
        }
        sym["lap"] = sym["uu"] + sym["vv"]
        sym["z"] = 0.5 * (sym["u"] - 1j * sym["v"])
        sym["zbar"] = 0.5 * (sym["u"] + 1j * sym["v"])
        sym["zz"] = 0.25 * (sym["uu"] - sym["vv"] - 2j * sym["uv"])
        sym["zzbar"] = 0.25 * sym["lap"]
        return sym

    def symbol(self, which: str) -> np.ndarray:
        return self._symbols[_ALIASES.get(which, which)]

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Physical frequencies ``xi`` of each FFT mode, shape ``(N1, N2, 2)``."""
        n1, n2 = self.shape
        k1 = np.fft.fftfreq(n1, 1.0 / n1)
        k2 = np.fft.fftfreq(n2, 1.0 / n2)
        K = np.stack(np.meshgrid(k1, k2, indexing="ij"), axis=-1)
        return K @ self.lattice.dual()


_ALIASES = {"z̄": "zbar", "zz̄": "zzbar", "laplacian": "lap"}
_REAL_OPS = {"u", "v", "uu", "uv", "vv", "lap", "zzbar"}


def deriv(field: np.ndarray, grid: Grid, which: str) -> np.ndarray:
    """Spectral derivative of a doubly periodic field.

    ``which`` is one of ``u, v, uu, uv, vv, lap, z, zbar, zz, zzbar``, where
    ``d/dz = (d/du - i d/dv)/2``. Real input with a real operator gives a
    real result.
    """
    field = np.asarray(field)
    if field.shape[:2] != grid.shape:
        raise ValueError(f"field shape {field.shape[:2]} does not match grid {grid.shape}")
    sym = grid.symbol(which)
    sym = sym.reshape(sym.shape + (1,) * (field.ndim - 2))
    out = np.fft.ifft2(sym * np.fft.fft2(field, axes=(0, 1)), axes=(0, 1))
    if np.isrealobj(field) and _ALIASES.get(which, which) in _REAL_OPS:
        return out.real
    return out


def solve_shifted_laplacian(field: np.ndarray, grid: Grid, shift: float) -> np.ndarray:
    """Solve ``(-lap + shift) g = field`` by FFT; used as a preconditioner."""
    sym = -grid.symbol("lap") + shift
    sym = sym.reshape(sym.shape + (1,) * (field.ndim - 2))
    out = np.fft.ifft2(np.fft.fft2(field, axes=(0, 1)) / sym, axes=(0, 1))
    return out.real if np.isrealobj(field) else out


def integrate(scalar: np.ndarray, grid: Grid, weight: np.ndarray | float = 1.0) -> float:
    """Trapezoidal quadrature over the fundamental domain.

    Exact for band-limited integrands. ``weight`` is typically the conformal
    factor ``e^{2 rho}`` so that the result is an integral against ``dM``.
    """
    scalar = np.asarray(scalar)
    if scalar.shape != grid.shape:
        raise ValueError(f"integrand shape {scalar.shape} does not match grid {grid.shape}")
    if np.ndim(weight) and np.shape(weight) != scalar.shape:
        raise ValueError(f"weight shape {np.shape(weight)} does not match {scalar.shape}")
    # numpy reduces contiguous arrays pairwise, so the result is order-stable
    total = np.sum(np.ascontiguousarray(scalar * weight).ravel())
    return grid.lattice.covolume / grid.size * total


def l2_inner(a: np.ndarray, b: np.ndarray, grid: Grid, weight: np.ndarray | float = 1.0) -> float:
    """Area-weighted L2 pairing of two ambient-vector fields."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return integrate(np.einsum("...k,...k->...", a, b), grid, weight)


def derivative_matrix_1d(n: int, order: int) -> np.ndarray:
    """Dense unit-period spectral derivative matrix (Nyquist dropped for odd order)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    if order % 2:
        k[n // 2] = 0.0
    sym = (TWO_PI * 1j * k) ** order
    eye = np.eye(n)
    return np.fft.ifft(sym[:, None] * np.fft.fft(eye, axis=0), axis=0).real
