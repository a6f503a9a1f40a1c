"""Immersions of flat tori into round spheres and their pointwise geometry.

The complex coordinate is ``z = u + i v`` on the universal cover, the
metric is ``e^{2 rho} |dz|^2`` and ``Omega`` is the normal part of
``f_zz``.  The pairing ``<., .>`` on complexified vectors is the bilinear
extension of the Euclidean dot product; squared norms of complex vectors
are hermitian, ``|Omega|^2 = <Omega, conj(Omega)>``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .grid import Grid, Lattice, deriv, integrate


class GeometryError(ValueError):
    """An immersion violates a structural invariant on the given grid."""


class NotNormalError(ValueError):
    pass


@dataclass(frozen=True)
class Immersion:
    """A closed-form doubly periodic map into ``S^n``.

    ``mapping`` takes points in the base coordinate (shape ``(..., 2)``) and
    returns unit vectors of length ``<= n + 1``; missing trailing
    coordinates are zero, which is how padding into larger spheres works.
    ``scale`` is the coordinate change ``w = scale * z`` used to normalize the
    Hopf differential; the lattice and all derivatives follow it.
    """

    family: str
    ambient: int
    base_lattice: Lattice
    mapping: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    params: dict = field(default_factory=dict, compare=False)
    scale: complex = 1.0
    frame_candidates: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if self.ambient < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {self.ambient}")

    @property
    def dim(self) -> int:
        """Dimension of the ambient Euclidean space, ``n + 1``."""
        return self.ambient + 1

    @property
    def lattice(self) -> Lattice:
        if self.scale == 1.0:
            return self.base_lattice
        return self.base_lattice.scaled(self.scale)

    def grid(self, shape=(64, 64)) -> Grid:
        return Grid(self.lattice, tuple(shape))

    def _base_points(self, grid: Grid) -> np.ndarray:
        x = grid.points
        if self.scale == 1.0:
            return x
        w = (x[..., 0] + 1j * x[..., 1]) / self.scale
        return np.stack([w.real, w.imag], axis=-1)

    def sample(self, grid: Grid) -> np.ndarray:
        """Values of ``f`` on the grid, shape ``(N1, N2, n + 1)``."""
        vals = np.asarray(self.mapping(self._base_points(grid)), dtype=float)
        return _pad_last(vals, self.dim)

    def candidate_fields(self, grid: Grid) -> np.ndarray:
        """Smooth ambient fields whose normal projections span the normal bundle.

        Family-specific candidates (if any) come first, followed by the
        constant basis vectors; shape ``(N1, N2, K, n + 1)``.
        """
        parts = []
        if self.frame_candidates is not None:
            c = np.asarray(self.frame_candidates(self._base_points(grid)), dtype=float)
            parts.append(_pad_last(c, self.dim))
            first_pad = c.shape[-1]
        else:
            first_pad = 0
        const = np.broadcast_to(np.eye(self.dim), grid.shape + (self.dim, self.dim))
        # padding directions first: they are exactly normal and parallel
        order = list(range(first_pad, self.dim)) + list(range(first_pad))
        parts.append(const[..., order, :])
        return np.concatenate(parts, axis=-2)

    def check_lattice(self, grid: Grid) -> None:
        if not (
            np.allclose(grid.lattice.matrix, self.lattice.matrix, rtol=1e-12, atol=1e-12)
        ):
            raise GeometryError("grid lattice does not match the immersion lattice")


def _pad_last(vals: np.ndarray, dim: int) -> np.ndarray:
    extra = dim - vals.shape[-1]
    if extra < 0:
        raise ValueError("mapping produces more coordinates than the ambient space")
    if extra == 0:
        return vals
    pad = [(0, 0)] * (vals.ndim - 1) + [(0, extra)]
    return np.pad(vals, pad)


def pad(imm: Immersion, n: int) -> Immersion:
    """View ``imm`` inside the larger sphere ``S^n`` (zero extra coordinates)."""
    if n < imm.ambient:
        raise ValueError(f"cannot pad S^{imm.ambient} immersion down to S^{n}")
    return replace(imm, ambient=n)


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise bilinear pairing of ambient fields."""
    return np.einsum("...k,...k->...", a, b)


def apply_pointwise(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", P, V)


def hodge_complement(rows: np.ndarray) -> np.ndarray:
    """Generalized cross product of ``k`` vectors in ``R^{k+1}``.

    Returns ``w`` with ``w_i = det[rows; e_i]``, which is orthogonal to the
    rows and positively oriented; unit length when the rows are orthonormal.
    """
    k, d = rows.shape[-2:]
    if d != k + 1:
        raise ValueError("need k vectors in R^(k+1)")
    out = np.empty(rows.shape[:-2] + (d,))
    for i in range(d):
        minor = np.delete(rows, i, axis=-1)
        out[..., i] = (-1) ** (k + i) * np.linalg.det(minor)
    return out


@dataclass(frozen=True, eq=False)
class GeometryData:
    """Pointwise geometry of an immersion sampled on a grid."""

    immersion: Immersion
    grid: Grid
    f: np.ndarray
    f_u: np.ndarray
    f_v: np.ndarray
    f_uu: np.ndarray
    f_uv: np.ndarray
    f_vv: np.ndarray
    f_z: np.ndarray
    f_zz: np.ndarray
    f_zzbar: np.ndarray
    e2rho: np.ndarray
    rho: np.ndarray
    tangent_frame: np.ndarray  # orthonormal (f, e1, e2) per point
    P_tan: np.ndarray
    P_nor: np.ndarray
    omega: np.ndarray
    hopf_field: np.ndarray
    a: complex
    K: np.ndarray
    S: np.ndarray

    @property
    def n(self) -> int:
        return self.immersion.ambient

    @property
    def normal_rank(self) -> int:
        return self.immersion.ambient - 2

    @property
    def f_zbar(self) -> np.ndarray:
        return self.f_z.conj()

    @property
    def omega1(self) -> np.ndarray:
        return self.omega.real

    @property
    def omega2(self) -> np.ndarray:
        return self.omega.imag

    @property
    def area(self) -> float:
        return float(integrate(np.ones(self.grid.shape), self.grid, self.e2rho))

    def project_normal(self, V: np.ndarray) -> np.ndarray:
        return apply_pointwise(self.P_nor, V)

    def integrate(self, scalar: np.ndarray) -> float:
        """Integral against the induced area form ``dM = e^{2 rho} du dv``."""
        return integrate(scalar, self.grid, self.e2rho)

    def inner(self, V: np.ndarray, W: np.ndarray) -> float:
        return float(self.integrate(dot(V, W)))


def evaluate_geometry(
    imm: Immersion, grid: Grid | None = None, shape=(64, 64), check: bool = True
) -> GeometryData:
    """Sample ``imm`` and compute derivatives, frames, ``Omega`` and curvature.

    With ``check=True`` the unit-sphere, conformality and minimality
    invariants are enforced and a GeometryError names the offending residual.
    """
    grid = imm.grid(shape) if grid is None else grid
    imm.check_lattice(grid)
    f = imm.sample(grid)
    d = {w: deriv(f, grid, w) for w in ("u", "v", "uu", "uv", "vv")}
    f_z = 0.5 * (d["u"] - 1j * d["v"])
    f_zz = 0.25 * (d["uu"] - d["vv"] - 2j * d["uv"])
    f_zzbar = 0.25 * (d["uu"] + d["vv"])

    e2rho = 0.5 * (dot(d["u"], d["u"]) + dot(d["v"], d["v"]))
    if np.min(e2rho) <= 1e-14:
        raise GeometryError("degenerate metric: e^{2 rho} vanishes")
    if check:
        _check(imm, f, f_z, f_zzbar, e2rho)
    rho = 0.5 * np.log(e2rho)

    e0 = f / np.linalg.norm(f, axis=-1, keepdims=True)
    t1 = d["u"] - dot(d["u"], e0)[..., None] * e0
    e1 = t1 / np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = d["v"] - dot(d["v"], e0)[..., None] * e0 - dot(d["v"], e1)[..., None] * e1
    e2 = t2 / np.linalg.norm(t2, axis=-1, keepdims=True)
    frame = np.stack([e0, e1, e2], axis=-2)
    gram = np.einsum("...ik,...jk->...ij", frame, frame)
    if np.max(np.abs(gram - np.eye(3))) > 1e-13:
        raise GeometryError("tangent Gram-Schmidt lost orthonormality")
    P_tan = np.einsum("...i,...j->...ij", e1, e1) + np.einsum("...i,...j->...ij", e2, e2)
    P_nor = np.eye(imm.dim) - np.einsum("...i,...j->...ij", e0, e0) - P_tan

    omega = apply_pointwise(P_nor, f_zz)
    hopf = dot(omega, omega)
    a = complex(np.mean(hopf))

    K = -deriv(rho, grid, "lap") / e2rho
    h_uu = apply_pointwise(P_nor, d["uu"])
    h_uv = apply_pointwise(P_nor, d["uv"])
    h_vv = apply_pointwise(P_nor, d["vv"])
    S = (dot(h_uu, h_uu) + 2 * dot(h_uv, h_uv) + dot(h_vv, h_vv)) / e2rho**2

    return GeometryData(
        immersion=imm,
        grid=grid,
        f=f,
        f_u=d["u"],
        f_v=d["v"],
        f_uu=d["uu"],
        f_uv=d["uv"],
        f_vv=d["vv"],
        f_z=f_z,
        f_zz=f_zz,
        f_zzbar=f_zzbar,
        e2rho=e2rho,
        rho=rho,
        tangent_frame=frame,
        P_tan=P_tan,
        P_nor=P_nor,
        omega=omega,
        hopf_field=hopf,
        a=a,
        K=K,
        S=S,
    )


def _check(imm, f, f_z, f_zzbar, e2rho):
    unit = np.max(np.abs(np.linalg.norm(f, axis=-1) - 1.0))
    if unit > 1e-12:
        raise GeometryError(f"{imm.family}: |f| - 1 = {unit:.3e} exceeds 1e-12")
    conformal = np.max(np.abs(dot(f_z, f_z)))
    if conformal > 1e-10:
        raise GeometryError(f"{imm.family}: not conformal, |<f_z, f_z>| = {conformal:.3e}")
    minimal = np.max(np.abs(f_zzbar + 0.5 * e2rho[..., None] * f))
    if minimal > 1e-10:
        raise GeometryError(f"{imm.family}: not minimal, |f_zzbar + e^2rho f / 2| = {minimal:.3e}")


def random_normal_sections(g: GeometryData, count: int, seed: int = 0, degree: int = 3) -> np.ndarray:
    """Seeded band-limited ambient fields projected onto the normal bundle.

    Shape ``(count, N1, N2, n + 1)``.
    """
    rng = np.random.default_rng(seed)
    s, t = g.grid.lattice_coords
    ks = range(-degree, degree + 1)
    out = np.zeros((count,) + g.grid.shape + (g.immersion.dim,))
    for m in range(count):
        V = np.zeros(g.grid.shape + (g.immersion.dim,))
        for k in ks:
            for l in ks:
                phase = 2 * np.pi * (k * s + l * t)
                c1, c2 = rng.standard_normal((2, g.immersion.dim)) / (1 + k * k + l * l)
                V += np.cos(phase)[..., None] * c1 + np.sin(phase)[..., None] * c2
        out[m] = g.project_normal(V)
    return out


def require_normal(g: GeometryData, V: np.ndarray, tol: float = 1e-10) -> None:
    scale = max(1.0, float(np.max(np.abs(V))))
    off = np.einsum("...ik,...k->...i", g.tangent_frame, V)
    err = float(np.max(np.abs(off)))
    if err > tol * scale:
        raise NotNormalError(f"section is not normal: tangential/radial part {err:.3e}")


def nabla(g: GeometryData, V: np.ndarray, which: str) -> np.ndarray:
    """Normal connection ``nabla^perp_which V = P_nor(dV/d which)``."""
    return apply_pointwise(g.P_nor, deriv(V, g.grid, which))


def laplacian_normal(g: GeometryData, V: np.ndarray, check: bool = True) -> np.ndarray:
    """Normal Laplacian ``2 e^{-2rho}(nabla_zbar nabla_z + nabla_z nabla_zbar) V``."""
    if check:
        require_normal(g, V)
    inner = nabla(g, nabla(g, V, "z"), "zbar") + nabla(g, nabla(g, V, "zbar"), "z")
    out = 2.0 * inner / g.e2rho[..., None]
    return out.real if np.isrealobj(V) else out


def structure_residuals(g: GeometryData, seed: int = 0, samples: int = 3) -> tuple[float, float, float]:
    """Sup-norm residuals of the three moving-frame equations for ``f_zz``,
    ``f_zzbar`` and ``psi_z`` (the last on seeded random normal sections)."""
    rho_z = deriv(g.rho, g.grid, "z")
    r1 = np.max(np.abs(g.f_zz - 2 * rho_z[..., None] * g.f_z - g.omega))
    r2 = np.max(np.abs(g.f_zzbar + 0.5 * g.e2rho[..., None] * g.f))
    r3 = 0.0
    for psi in random_normal_sections(g, samples, seed):
        psi_z = deriv(psi, g.grid, "z")
        coef = 2 * dot(psi, g.omega) / g.e2rho
        res = psi_z - apply_pointwise(g.P_nor, psi_z) + coef[..., None] * g.f_zbar
        r3 = max(r3, float(np.max(np.abs(res))))
    return float(r1), float(r2), r3


def codazzi_ricci_residuals(g: GeometryData, seed: int = 0, samples: int = 3) -> tuple[float, float]:
    """Sup norms of ``nabla_zbar Omega`` and of the normal-curvature identity."""
    codazzi = float(np.max(np.abs(nabla(g, g.omega, "zbar"))))
    ricci = 0.0
    om, omb = g.omega, g.omega.conj()
    for psi in random_normal_sections(g, samples, seed + 1):
        lhs = nabla(g, nabla(g, psi, "z"), "zbar") - nabla(g, nabla(g, psi, "zbar"), "z")
        rhs = (2 / g.e2rho)[..., None] * (dot(psi, om)[..., None] * omb - dot(psi, omb)[..., None] * om)
        ricci = max(ricci, float(np.max(np.abs(lhs - rhs))))
    return codazzi, ricci


def gauss_residual(g: GeometryData) -> float:
    """``-K + 1 - S/2`` with ``K`` from the conformal factor alone."""
    return float(np.max(np.abs(-g.K + 1 - g.S / 2)))


def hopf_variation(g: GeometryData) -> float:
    """Relative spread of ``<Omega, Omega>`` over the grid (zero on a torus)."""
    spread = np.max(np.abs(g.hopf_field - g.a))
    return float(spread / max(abs(g.a), np.max(np.abs(g.omega)) ** 2, 1e-300))


def hopf_root(a: complex, root: int = 0) -> complex:
    """Fourth root of ``a``: principal root times ``i**root``."""
    return cmath.exp(cmath.log(a) / 4) * (1j**root)


def normalize_hopf(
    imm: Immersion, geometry: GeometryData | None = None, shape=(64, 64), root: int = 0, zero_tol: float = 1e-10
) -> Immersion:
    """Rescale the coordinate by ``w = c z``, ``c^4 = a``, so the Hopf constant becomes 1.

    Superminimal immersions (``|a| < zero_tol``) are returned unchanged.
    """
    g = evaluate_geometry(imm, shape=shape) if geometry is None else geometry
    if abs(g.a) < zero_tol:
        return imm
    c = hopf_root(g.a, root)
    return replace(imm, scale=complex(imm.scale) * c)
