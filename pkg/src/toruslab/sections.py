"""Explicit normal sections and their eigen-identities.

Constant-vector projections ``Z^perp``, the real and imaginary parts of
``Omega``, the ``(theta, psi3, psi4)`` frame of a codimension-two torus with
Hopf constant 1, the complex structure ``J`` it defines, Gram ranks of
section families, and the integral ``int <L Omega2, (L - 2) Omega2> dA``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryData, dot, hodge_complement, laplacian_normal, nabla, require_normal
from .grid import deriv
from .jacobi import apply_jacobi, quadratic_form


class SectionError(ValueError):
    pass


def ambient_projection(g: GeometryData, Z) -> np.ndarray:
    """``Z^perp = Z - <Z, f> f - 2 e^{-2rho}(<Z, f_z> f_zbar + <Z, f_zbar> f_z)``."""
    Z = np.asarray(Z)
    E = np.broadcast_to(Z, g.f.shape)
    c0 = dot(E, g.f)[..., None]
    cz = dot(E, g.f_z)[..., None]
    czb = dot(E, g.f_zbar)[..., None]
    w = (2.0 / g.e2rho)[..., None]
    out = E - c0 * g.f - w * (cz * g.f_zbar + czb * g.f_z)
    return out.real if np.isrealobj(Z) else out


def eperp_derivative_residual(g: GeometryData, E) -> float:
    """Sup norm of ``(E^perp)_z + 2e^{-2rho}(<E, Omega> f_zbar + <E, f_zbar> Omega)``."""
    E = np.asarray(E)
    Ep = ambient_projection(g, E)
    lhs = deriv(Ep, g.grid, "z")
    Eb = np.broadcast_to(E, g.f.shape)
    w = (2.0 / g.e2rho)[..., None]
    rhs = -w * (dot(Eb, g.omega)[..., None] * g.f_zbar + dot(Eb, g.f_zbar)[..., None] * g.omega)
    return float(np.max(np.abs(lhs - rhs)))


def rayleigh(g: GeometryData, V: np.ndarray) -> float:
    """Rayleigh quotient ``-Q(V, V) / ||V||^2`` in the stability convention."""
    norm2 = g.inner(V, V)
    if norm2 <= 0:
        raise SectionError("Rayleigh quotient of the zero section")
    return -quadratic_form(g, V) / norm2


def lemma_eigenfield_residual(g: GeometryData, Z) -> float:
    """``sup |L Z^perp - 2 Z^perp|``."""
    Zp = ambient_projection(g, Z)
    return float(np.max(np.abs(apply_jacobi(g, Zp) - 2 * Zp)))


def omega_eigen_identities(g: GeometryData) -> dict[str, float]:
    """Residuals of the Omega identities: Lap Omega, Lap Omega_j and L Omega_j."""
    e4 = 1.0 / g.e2rho**2
    om, omb = g.omega, g.omega.conj()
    o1, o2 = g.omega1, g.omega2
    n1, n2 = dot(o1, o1), dot(o2, o2)
    lap_om = laplacian_normal(g, om, check=False)
    rhs = (4 * e4)[..., None] * (dot(om, om)[..., None] * omb - dot(om, omb)[..., None] * om)
    lap1 = laplacian_normal(g, o1)
    lap2 = laplacian_normal(g, o2)
    diff = n1 - n2
    L1 = apply_jacobi(g, o1)
    L2 = apply_jacobi(g, o2)

    def sup(x):
        return float(np.max(np.abs(x)))

    return {
        "laplacian_omega": sup(lap_om - rhs),
        "laplacian_omega1": sup(lap1 + (8 * e4 * n2)[..., None] * o1),
        "laplacian_omega2": sup(lap2 + (8 * e4 * n1)[..., None] * o2),
        "jacobi_omega1": sup(L1 - (2 * (1 + 4 * e4 * diff))[..., None] * o1),
        "jacobi_omega2": sup(L2 - (2 * (1 - 4 * e4 * diff))[..., None] * o2),
        "omega_orthogonality": sup(dot(o1, o2)),
    }


@dataclass(frozen=True, eq=False)
class ThetaFrame:
    """``Omega1 = cosh(theta) psi3`` and ``Omega2 = sinh(theta) psi4``."""

    geometry: GeometryData
    theta: np.ndarray
    psi3: np.ndarray
    psi4: np.ndarray

    def residuals(self) -> dict[str, float]:
        g = self.geometry
        th_z = deriv(self.theta, g.grid, "z")
        conn = nabla(g, self.psi3, "z") - (1j * th_z)[..., None] * self.psi4
        return {
            "hyperbolic": float(np.max(np.abs(np.cosh(self.theta) ** 2 - np.sinh(self.theta) ** 2 - (dot(g.omega1, g.omega1) - dot(g.omega2, g.omega2))))),
            "orthonormal": float(
                max(
                    np.max(np.abs(dot(self.psi3, self.psi4))),
                    np.max(np.abs(dot(self.psi3, self.psi3) - 1)),
                    np.max(np.abs(dot(self.psi4, self.psi4) - 1)),
                )
            ),
            "decomposition": float(
                max(
                    np.max(np.abs(g.omega1 - np.cosh(self.theta)[..., None] * self.psi3)),
                    np.max(np.abs(g.omega2 - np.sinh(self.theta)[..., None] * self.psi4)),
                )
            ),
            "psi3_connection": float(np.max(np.abs(conn))),
        }


def theta_frame(g: GeometryData, hopf_tol: float = 1e-9) -> ThetaFrame:
    """Frame of a torus in ``S^4`` with Hopf constant 1.

    ``psi4`` is the positively oriented unit normal orthogonal to ``psi3``;
    when ``Omega2`` vanishes it is the constant normal of the ``S^3`` that
    contains the surface.
    """
    if g.n != 4:
        raise SectionError(f"theta frame needs a torus in S^4, got S^{g.n}")
    if abs(g.a - 1) > hopf_tol:
        raise SectionError(f"theta frame needs Hopf constant 1, got {g.a:.3g}; normalize first")
    o1 = g.omega1
    psi3 = o1 / np.linalg.norm(o1, axis=-1, keepdims=True)
    rows = np.concatenate([g.tangent_frame, psi3[..., None, :]], axis=-2)
    psi4 = hodge_complement(rows)
    psi4 /= np.linalg.norm(psi4, axis=-1, keepdims=True)
    theta = np.arcsinh(dot(g.omega2, psi4))
    return ThetaFrame(g, theta, psi3, psi4)


def apply_J(frame: ThetaFrame, V: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """``J psi3 = psi4``, ``J psi4 = -psi3`` on the rank-two normal bundle."""
    require_normal(frame.geometry, V)
    x = dot(V, frame.psi3)
    y = dot(V, frame.psi4)
    rest = V - x[..., None] * frame.psi3 - y[..., None] * frame.psi4
    if np.max(np.abs(rest)) > tol * max(1.0, float(np.max(np.abs(V)))):
        raise SectionError("section is not in the span of psi3, psi4")
    return x[..., None] * frame.psi4 - y[..., None] * frame.psi3


def j_commutation_residual(frame: ThetaFrame, V: np.ndarray) -> float:
    """``sup |nabla(J V) - J nabla V|`` over the u and v directions."""
    g = frame.geometry
    JV = apply_J(frame, V)
    worst = 0.0
    for which in ("u", "v"):
        lhs = nabla(g, JV, which)
        rhs = apply_J(frame, nabla(g, V, which))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def j_omega_sections(frame: ThetaFrame) -> tuple[np.ndarray, np.ndarray]:
    g = frame.geometry
    return apply_J(frame, g.omega1), apply_J(frame, g.omega2)


@dataclass(frozen=True, eq=False)
class SectionBasis:
    labels: list[str]
    sections: np.ndarray  # (k, N1, N2, n+1)
    gram: np.ndarray
    rank: int
    singular_values: np.ndarray
    rank_tol: float
    rank_stable: bool

    def to_csv(self, path, grid) -> None:
        """One row per (section, grid point): label, i, j, components."""
        k, n1, n2, d = self.sections.shape
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "i", "j"] + [f"c{m}" for m in range(d)])
            for lab, sec in zip(self.labels, self.sections):
                for i in range(n1):
                    for j in range(n2):
                        w.writerow([lab, i, j] + [f"{x:.17g}" for x in sec[i, j]])


def section_basis(g: GeometryData, labels, sections, rank_tol: float = 1e-7) -> SectionBasis:
    sections = np.asarray(sections)
    k = len(sections)
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            gram[i, j] = gram[j, i] = g.inner(sections[i], sections[j])
    sv = np.linalg.svd(gram, compute_uv=False)

    def rank_at(tol):
        return int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0

    rank = rank_at(rank_tol)
    stable = rank_at(rank_tol * 10) == rank == rank_at(rank_tol / 10)
    return SectionBasis(list(labels), sections, gram, rank, sv, rank_tol, stable)


def gram_rank(basis: SectionBasis) -> int:
    if not basis.labels:
        raise SectionError("empty section basis")
    return basis.rank


def coordinate_projections(g: GeometryData) -> tuple[list[str], np.ndarray]:
    d = g.immersion.dim
    return [f"e{j}_perp" for j in range(d)], np.stack([ambient_projection(g, np.eye(d)[j]) for j in range(d)])


def willmore_integral(g: GeometryData, hopf_tol: float = 1e-9) -> dict:
    """Both sides of ``int <L W, (L-2) W> dA = -4 int q (1 - q) |W|^2 dA`` with
    ``W = Omega2`` and ``q = 4 e^{-4 rho}``, in the coordinate with Hopf constant 1."""
    if abs(g.a - 1) > hopf_tol:
        raise SectionError(f"needs Hopf constant 1, got {g.a:.3g}; normalize first")
    o2 = g.omega2
    L2 = apply_jacobi(g, o2)
    lhs = g.integrate(dot(L2, L2 - 2 * o2))
    q = 4.0 / g.e2rho**2
    I = g.integrate(q * (1 - q) * dot(o2, o2))
    return {
        "lhs": float(lhs),
        "rhs": float(-4 * I),
        "I": float(I),
        "difference": float(abs(lhs + 4 * I)),
        "conjecture_sign_ok": bool(I >= 0),
        "normalization": "coordinate with <Omega, Omega> = 1",
    }
