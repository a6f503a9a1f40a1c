"""Jacobi operator on normal sections, its discretization and its spectrum.

Reported eigenvalues follow the stability convention: ``mu`` with
``-L V = mu V``, so negative values are area-decreasing directions and the
Morse index counts them.

Two discretizations are available.  In ``frame`` mode the unknowns are grid
values of the coefficients of ``V`` in a smooth orthonormal normal frame; in
``penalty`` mode the unknowns are ambient vector fields and the
tangential/radial components carry the eigenvalue ``sigma``.  Both produce a
symmetric pencil ``(K, M)`` with diagonal ``M = e^{2 rho}`` and
``K = e^{2 rho} (-L)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, lobpcg

from .geometry import (
    GeometryData,
    apply_pointwise,
    dot,
    evaluate_geometry,
    hodge_complement,
    laplacian_normal,
    nabla,
    require_normal,
)
from .grid import Grid, deriv, derivative_matrix_1d, integrate, solve_shifted_laplacian


class FrameError(RuntimeError):
    """No smooth global normal frame could be built."""


class SolverError(RuntimeError):
    pass


class WindowTooSmall(SolverError):
    """The requested eigenvalue window ends at or below zero."""


# --- field-level operator ---------------------------------------------------


def shape_term(g: GeometryData, V: np.ndarray, check: bool = True) -> np.ndarray:
    """``A~(V) = 8 e^{-4 rho} (<V, Omega1> Omega1 + <V, Omega2> Omega2)``."""
    if check:
        require_normal(g, V)
    w = 8.0 / g.e2rho**2
    o1, o2 = g.omega1, g.omega2
    return w[..., None] * (dot(V, o1)[..., None] * o1 + dot(V, o2)[..., None] * o2)


def shape_matrix(g: GeometryData) -> np.ndarray:
    """Pointwise ambient matrix of ``A~``, shape ``(N1, N2, n+1, n+1)``."""
    o1, o2 = g.omega1, g.omega2
    outer = np.einsum("...i,...j->...ij", o1, o1) + np.einsum("...i,...j->...ij", o2, o2)
    return (8.0 / g.e2rho**2)[..., None, None] * outer


def apply_jacobi(g: GeometryData, V: np.ndarray, check: bool = True) -> np.ndarray:
    """``L V = Lap^perp V + 2 V + A~(V)``."""
    if check:
        require_normal(g, V)
    return laplacian_normal(g, V, check=False) + 2 * V + shape_term(g, V, check=False)


def quadratic_form(g: GeometryData, V: np.ndarray, W: np.ndarray | None = None, check: bool = True) -> float:
    """``Q(V, W) = int <L V, W> dM``, evaluated in first-derivative form."""
    W = V if W is None else W
    if check:
        require_normal(g, V)
        require_normal(g, W)
    grad = 0.0
    for which in ("u", "v"):
        grad = grad + dot(nabla(g, V, which), nabla(g, W, which))
    # |grad|^2 dM is conformally invariant, so the flat measure applies
    potential = 2 * dot(V, W) + dot(shape_term(g, V, check=False), W)
    return float(-integrate(grad, g.grid) + g.integrate(potential))


# --- frames -------------------------------------------------------------------


def normal_frame(g: GeometryData, degeneracy_tol: float = 1e-6) -> tuple[np.ndarray, str]:
    """Smooth orthonormal frame of the normal bundle, shape ``(N1, N2, r, n+1)``.

    Codimension one uses the oriented unit normal; codimension two with
    Hopf constant 1 uses the ``psi3, psi4`` frame; otherwise the family's
    candidate fields (then constant vectors) are projected and
    Gram-Schmidt-ed greedily.  Raises FrameError on degeneracy.
    """
    r = g.normal_rank
    if r == 1:
        N = hodge_complement(g.tangent_frame)
        return N[..., None, :], "unit-normal"
    if r == 2 and abs(g.a - 1) < 1e-9:
        from .sections import theta_frame

        tf = theta_frame(g)
        return np.stack([tf.psi3, tf.psi4], axis=-2), "theta-frame"
    cands = np.einsum("...ij,...kj->...ki", g.P_nor, g.immersion.candidate_fields(g.grid))
    chosen: list[np.ndarray] = []
    remaining = list(range(cands.shape[-2]))
    while len(chosen) < r:
        best, best_norm, best_vec = None, -1.0, None
        for idx in remaining:
            v = cands[..., idx, :].copy()
            for e in chosen:
                v -= dot(v, e)[..., None] * e
            nmin = float(np.min(np.linalg.norm(v, axis=-1)))
            if nmin > best_norm:
                best, best_norm, best_vec = idx, nmin, v
        if best is None or best_norm <= degeneracy_tol:
            raise FrameError(
                f"candidate normal frame degenerates (min norm {best_norm:.2e} after {len(chosen)} fields)"
            )
        remaining.remove(best)
        chosen.append(best_vec / np.linalg.norm(best_vec, axis=-1, keepdims=True))
    return np.stack(chosen, axis=-2), "projected-candidates"


# --- assembly -----------------------------------------------------------------


@dataclass(eq=False)
class Assembled:
    """Symmetric pencil ``K x = mu M x`` for the stability operator ``-L``.

    Vectors are flattened point-major from arrays of shape
    ``(N1, N2, components)``.
    """

    geometry: GeometryData
    representation: str
    components: int
    mass: np.ndarray
    matvec: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dense_builder: Callable[[], np.ndarray] = field(repr=False)
    to_ambient: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    precondition: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    info: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.geometry.grid

    @property
    def dim(self) -> int:
        return self.grid.size * self.components

    def dense(self) -> np.ndarray:
        return self.dense_builder()


def _flat_ops(grid: Grid):
    n1, n2 = grid.shape
    d1a, d2a = derivative_matrix_1d(n1, 1), derivative_matrix_1d(n1, 2)
    d1b, d2b = derivative_matrix_1d(n2, 1), derivative_matrix_1d(n2, 2)
    Ia, Ib = np.eye(n1), np.eye(n2)
    Ds, Dt = np.kron(d1a, Ib), np.kron(Ia, d1b)
    J = np.linalg.inv(grid.lattice.matrix).T
    Du = J[0, 0] * Ds + J[0, 1] * Dt
    Dv = J[1, 0] * Ds + J[1, 1] * Dt
    Gi = J.T @ J
    lap = Gi[0, 0] * np.kron(d2a, Ib) + Gi[1, 1] * np.kron(Ia, d2b) + 2 * Gi[0, 1] * (Ds @ Dt)
    return Du, Dv, lap


def _pointwise_block(mat: np.ndarray) -> np.ndarray:
    """Dense block-diagonal matrix from pointwise ``(N1, N2, c, c)`` blocks."""
    npts = mat.shape[0] * mat.shape[1]
    c = mat.shape[-1]
    blocks = mat.reshape(npts, c, c)
    out = np.zeros((npts, c, npts, c))
    idx = np.arange(npts)
    out[idx, :, idx, :] = blocks
    return out.reshape(npts * c, npts * c)


def _frame_pencil(g: GeometryData, frame: np.ndarray):
    grid = g.grid
    r = frame.shape[-2]
    conn = []
    for which in ("u", "v"):
        dnu = deriv(frame, grid, which)
        w = np.einsum("...bk,...ak->...ab", dnu, frame)  # <d nu_b, nu_a>
        conn.append(0.5 * (w - np.swapaxes(w, -1, -2)))
    wsq = sum(np.einsum("...ab,...bc->...ac", w, w) for w in conn)
    A_frame = np.einsum("...ai,...ij,...bj->...ab", frame, shape_matrix(g), frame)
    pot = g.e2rho[..., None, None] * (2 * np.eye(r) + A_frame) + wsq
    shape3 = grid.shape + (r,)

    def matvec(x):
        X = x.reshape(shape3 + (-1,))
        out = -deriv(X, grid, "lap")
        for which, w in zip(("u", "v"), conn):
            out -= deriv(np.einsum("...ab,...bk->...ak", w, X), grid, which)
            out -= np.einsum("...ab,...bk->...ak", w, deriv(X, grid, which))
        out -= np.einsum("...ab,...bk->...ak", pot, X)
        return out.reshape(x.shape)

    def dense():
        Du, Dv, lap = _flat_ops(grid)
        N = grid.size
        K = np.kron(-lap, np.eye(r))
        for D, w in zip((Du, Dv), conn):
            wb = w.reshape(N, r, r)
            K -= np.einsum("pq,qab->paqb", D, wb).reshape(N * r, N * r)
            K -= np.einsum("pab,pq->paqb", wb, D).reshape(N * r, N * r)
        K -= _pointwise_block(pot)
        return 0.5 * (K + K.T)

    def to_ambient(x):
        X = x.reshape(shape3 + (-1,))
        return np.moveaxis(np.einsum("...ak,...ai->...ki", X, frame), -2, 0)

    return matvec, dense, to_ambient


def _penalty_pencil(g: GeometryData, sigma: float):
    grid = g.grid
    d = g.immersion.dim
    P = g.P_nor
    Q = np.eye(d) - P
    dP2 = 0.0
    for which in ("u", "v"):
        dP = deriv(P, grid, which)
        dP2 = dP2 + np.einsum("...ij,...jk->...ik", dP, dP)
    pot = g.e2rho[..., None, None] * (2 * np.eye(d) + shape_matrix(g)) + dP2
    pot = np.einsum("...ij,...jk,...kl->...il", P, pot, P)
    pot -= sigma * g.e2rho[..., None, None] * Q
    shape3 = grid.shape + (d,)

    def proj(M, X):
        return np.einsum("...ij,...jk->...ik", M, X)

    def matvec(x):
        X = x.reshape(shape3 + (-1,))
        out = -proj(P, deriv(proj(P, X), grid, "lap"))
        out -= proj(pot, X)
        return out.reshape(x.shape)

    def dense():
        _, _, lap = _flat_ops(grid)
        N = grid.size
        Pb = P.reshape(N, d, d)
        K = -np.einsum("pik,pq,qkj->piqj", Pb, lap, Pb).reshape(N * d, N * d)
        K -= _pointwise_block(pot)
        return 0.5 * (K + K.T)

    def to_ambient(x):
        X = x.reshape(shape3 + (-1,))
        return np.moveaxis(proj(P, X), -1, 0)

    return matvec, dense, to_ambient


def assemble(
    g: GeometryData,
    representation: str = "frame",
    sigma: float = 1e4,
    degeneracy_tol: float = 1e-6,
) -> Assembled:
    """Discretize ``-L`` on ``g``'s grid.  ``representation`` is ``frame``,
    ``penalty`` or ``auto`` (frame, falling back to penalty)."""
    if representation == "auto":
        try:
            return assemble(g, "frame", sigma, degeneracy_tol)
        except FrameError:
            return assemble(g, "penalty", sigma, degeneracy_tol)
    mass_pt = g.e2rho
    shift = 10.0 * float(np.mean(mass_pt))
    if representation == "frame":
        frame, method = normal_frame(g, degeneracy_tol)
        comps = frame.shape[-2]
        matvec, dense, to_ambient = _frame_pencil(g, frame)
        info = {"frame": method}
    elif representation == "penalty":
        comps = g.immersion.dim
        matvec, dense, to_ambient = _penalty_pencil(g, sigma)
        info = {"sigma": sigma}
    else:
        raise ValueError(f"unknown representation {representation!r}")
    shape3 = g.grid.shape + (comps,)
    mass = np.repeat(mass_pt.ravel(), comps)

    def precondition(x):
        X = x.reshape(shape3 + (-1,))
        return solve_shifted_laplacian(X, g.grid, shift).reshape(x.shape)

    return Assembled(g, representation, comps, mass, matvec, dense, to_ambient, precondition, info)


# --- spectrum -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    multiplicities: list[tuple[float, int]]
    index: int
    nullity: int
    null_tol: float
    representation: str
    grid_shape: tuple[int, int]
    max_residual: float
    solver: str
    tol_robust: bool
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    def multiplicity(self, value: float, tol: float = 1e-6) -> int:
        return int(np.sum(np.abs(self.eigenvalues - value) <= tol))

    def summary(self) -> dict:
        return {
            "index": self.index,
            "nullity": self.nullity,
            "lambda1": self.lambda1,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "multiplicities": [[float(v), int(m)] for v, m in self.multiplicities],
            "null_tol": self.null_tol,
            "representation": self.representation,
            "grid": list(self.grid_shape),
            "max_residual": self.max_residual,
            "solver": self.solver,
            "tol_robust": self.tol_robust,
        }


def cluster(values: np.ndarray, tol: float = 1e-6) -> list[tuple[float, int]]:
    out: list[list] = []
    for v in np.sort(values):
        if out and abs(v - out[-1][2]) <= tol * max(1.0, abs(v)):
            out[-1][1] += 1
            out[-1][2] = v
            out[-1][3].append(v)
        else:
            out.append([v, 1, v, [v]])
    return [(float(np.mean(c[3])), c[1]) for c in out]


def _counts(mu: np.ndarray, tol: float) -> tuple[int, int]:
    return int(np.sum(mu < -tol)), int(np.sum(np.abs(mu) <= tol))


def _dense_solve(asm: Assembled, k: int):
    K = asm.dense()
    s = 1.0 / np.sqrt(asm.mass)
    K *= s[:, None]
    K *= s[None, :]
    k = min(k, asm.dim)
    w, y = scipy.linalg.eigh(K, subset_by_index=(0, k - 1), driver="evr", overwrite_a=True)
    return w, y * s[:, None]


def _iterative_solve(asm: Assembled, k: int, seed: int, tol: float, maxiter: int):
    # standard form y = M^{1/2} x keeps scipy's LOBPCG off its B-orthonormalization path
    n = asm.dim
    s = 1.0 / np.sqrt(asm.mass)

    def op(Y):
        return (s * asm.matvec((s * Y.T).T).T).T

    def prec(Y):
        return ((1 / s) * asm.precondition(((1 / s) * Y.T).T).T).T

    A = LinearOperator((n, n), matvec=op, matmat=op, dtype=float)
    T = LinearOperator((n, n), matvec=prec, matmat=prec, dtype=float)
    rng = np.random.default_rng(seed)
    block = k + max(4, k // 4)
    Y0 = prec(rng.standard_normal((n, block)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        w, y = lobpcg(A, Y0, M=T, tol=tol, maxiter=maxiter, largest=False)
    order = np.argsort(w)[:k]
    return w[order], s[:, None] * y[:, order]


def spectrum(
    asm: Assembled,
    k: int = 40,
    null_tol: float = 1e-6,
    solver: str = "auto",
    dense_max_dim: int = 4096,
    seed: int = 0,
    iter_tol: float = 1e-8,
    maxiter: int = 1000,
    keep_vectors: bool = True,
) -> SpectrumResult:
    """Lowest ``k`` stability eigenvalues with index, nullity and residuals.

    Raises SolverError if the iterative solver does not converge or if all
    ``k`` computed eigenvalues are ``<= null_tol`` (the window cannot certify
    the index and nullity).
    """
    if solver == "auto":
        solver = "dense" if asm.dim <= dense_max_dim else "lobpcg"
    if solver == "dense":
        w, vecs = _dense_solve(asm, k)
    elif solver == "lobpcg":
        w, vecs = _iterative_solve(asm, k, seed, iter_tol, maxiter)
    else:
        raise ValueError(f"unknown solver {solver!r}")

    Kv = asm.matvec(vecs)
    Mv = asm.mass[:, None] * vecs
    res = np.linalg.norm(Kv - w[None, :] * Mv, axis=0) / np.linalg.norm(Mv, axis=0)
    max_res = float(np.max(res))
    if solver == "lobpcg" and max_res > 1e-6:
        raise SolverError(f"LOBPCG did not converge: max relative residual {max_res:.2e}")
    if w[-1] <= null_tol:
        raise WindowTooSmall(f"window of {k} eigenvalues does not reach past zero; increase k")

    index, nullity = _counts(w, null_tol)
    robust = all(_counts(w, t) == (index, nullity) for t in (null_tol / 10, null_tol * 10))
    return SpectrumResult(
        eigenvalues=w,
        multiplicities=cluster(w),
        index=index,
        nullity=nullity,
        null_tol=null_tol,
        representation=asm.representation,
        grid_shape=asm.grid.shape,
        max_residual=max_res,
        solver=solver,
        tol_robust=robust,
        vectors=asm.to_ambient(vecs) if keep_vectors else None,
    )


def spectrum_auto(asm: Assembled, k: int = 40, max_k: int = 400, **kwargs) -> SpectrumResult:
    """``spectrum`` with the window doubled until it reaches past zero."""
    while True:
        try:
            return spectrum(asm, k=k, **kwargs)
        except WindowTooSmall:
            if k >= min(max_k, asm.dim):
                raise
            k = min(2 * k, max_k, asm.dim)


def morse_data(imm, shape=(64, 64), representation: str = "auto", k: int = 40, **kwargs) -> SpectrumResult:
    """Convenience wrapper: geometry, assembly and spectrum in one call."""
    g = evaluate_geometry(imm, shape=shape)
    sigma = kwargs.pop("sigma", 1e4)
    return spectrum(assemble(g, representation, sigma=sigma), k=k, **kwargs)


def convergence_study(imm, grids, k: int = 40, representation: str = "auto", **kwargs) -> dict:
    """Index, nullity and ``lambda_1`` across grids; flags non-stabilization."""
    rows = []
    for shape in grids:
        res = morse_data(imm, tuple(shape), representation, k, keep_vectors=False, **kwargs)
        rows.append(
            {"grid": list(shape), "index": res.index, "nullity": res.nullity, "lambda1": res.lambda1, "tol_robust": res.tol_robust}
        )
    stable = True
    if len(rows) >= 2:
        a, b = rows[-2], rows[-1]
        stable = a["index"] == b["index"] and a["nullity"] == b["nullity"] and abs(a["lambda1"] - b["lambda1"]) < 1e-7
    return {"rows": rows, "stable": stable}


def export_triplets(asm: Assembled, path, drop_tol: float = 0.0) -> int:
    """Write stiffness and mass in the triplet text format; returns the entry count.

    Format: ``#``-comment header lines (``format``, ``representation``,
    ``dim``, ``grid``, ``components``) then one ``matrix row col value``
    record per line, ``matrix`` being ``K`` or ``M``, zero-based indices,
    point-major ordering.
    """
    K = asm.dense()
    rows, cols = np.nonzero(np.abs(K) > drop_tol)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# format toruslab-triplet 1\n")
        fh.write(f"# representation {asm.representation}\n")
        fh.write(f"# dim {asm.dim}\n")
        fh.write(f"# grid {asm.grid.shape[0]} {asm.grid.shape[1]}\n")
        fh.write(f"# components {asm.components}\n")
        for i, j in zip(rows, cols):
            fh.write(f"K {i} {j} {K[i, j]:.17g}\n")
        for i, m in enumerate(asm.mass):
            fh.write(f"M {i} {i} {m:.17g}\n")
    return len(rows) + asm.dim


def read_triplets(path):
    """Inverse of export_triplets: returns ``(K, M, header)`` as dense arrays."""
    header = {}
    entries = {"K": [], "M": []}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(" ")
                header[key] = val
                continue
            name, i, j, v = line.split()
            entries[name].append((int(i), int(j), float(v)))
    n = int(header["dim"])
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for mat, name in ((K, "K"), (M, "M")):
        for i, j, v in entries[name]:
            mat[i, j] = v
    return K, M, header
