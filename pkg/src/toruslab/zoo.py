"""Closed-form minimal tori: Clifford, exponential-circle (homogeneous) tori, BIMR.

A homogeneous torus is ``f(x) = (r_1 e^{i a_1.x}, ..., r_m e^{i a_m.x})`` read
as a point of ``S^{2m-1} in C^m = R^{2m}``.  It is harmonic into the sphere
iff all ``|a_k|^2`` agree, conformal iff ``sum r_k^2 a_k a_k^T`` is a multiple
of the identity, and doubly periodic iff the ``a_k`` span a rank-2
Z-module.  The period lattice is computed from the frequencies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import Immersion, pad
from .grid import Lattice, gauss_reduce, make_lattice


class ZooError(ValueError):
    pass


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class HomogeneousSpec:
    radii: tuple[float, ...]
    freqs: tuple[tuple[float, float], ...]

    @property
    def m(self) -> int:
        return len(self.radii)

    @property
    def ambient(self) -> int:
        return 2 * self.m - 1

    def hopf_ratio(self) -> complex:
        """``sum r_k^2 u_k^2`` with ``u_k = (â_k / |â_k|)^2``; zero iff superminimal."""
        a = np.array([complex(*q) for q in self.freqs])
        u = (a / np.abs(a)) ** 2
        return complex(np.sum(np.asarray(self.radii) ** 2 * u**2))


def validate_spec(spec: HomogeneousSpec, tol: float = 1e-12) -> Lattice:
    """Check the homogeneous-torus conditions and return the period lattice."""
    r = np.asarray(spec.radii, dtype=float)
    a = np.asarray(spec.freqs, dtype=float)
    if r.ndim != 1 or a.shape != (r.size, 2) or r.size < 2:
        raise ZooError("need m >= 2 radii and one plane frequency per radius")
    if np.any(r <= 0):
        raise ZooError("radii must be positive")
    if abs(np.sum(r**2) - 1) > tol:
        raise ZooError(f"radii do not lie on the unit sphere: sum r^2 = {np.sum(r**2)!r}")
    norms = np.sum(a**2, axis=1)
    if np.max(norms) - np.min(norms) > tol * np.max(norms):
        raise ZooError(f"non-minimal: frequency lengths differ ({norms})")
    frame = np.einsum("k,ki,kj->ij", r**2, a, a)
    if np.max(np.abs(frame - 0.5 * norms[0] * np.eye(2))) > tol * norms[0]:
        raise ZooError("non-conformal: sum r_k^2 a_k a_k^T is not a multiple of the identity")
    return period_lattice(a)


def period_lattice(freqs, max_denominator: int = 10_000) -> Lattice:
    """Lattice ``{x : a_k . x in 2 pi Z for all k}``, Gauss-reduced.

    Raises ZooError if the frequencies do not generate a rank-2 module.
    """
    a = np.asarray(freqs, dtype=float)
    pairs = list(itertools.combinations(range(len(a)), 2))
    i, j = max(pairs, key=lambda p: abs(np.linalg.det(a[list(p)])))
    C = a[[i, j]]
    if abs(np.linalg.det(C)) < 1e-12 * np.sum(C**2):
        raise ZooError("frequencies do not span the plane")
    coeffs = a @ np.linalg.inv(C)
    fracs = []
    for x in coeffs.ravel():
        q = Fraction(float(x)).limit_denominator(max_denominator)
        if abs(float(q) - x) > 1e-9:
            raise ZooError(f"irrational frequency relation (coefficient {x!r}): no period lattice")
        fracs.append(q)
    den = math.lcm(*(q.denominator for q in fracs))
    rows = np.array([int(q * den) for q in fracs]).reshape(coeffs.shape)
    L = np.array(_integer_row_basis(rows), dtype=float) / den
    dual = np.linalg.inv(L).T
    gens = 2 * np.pi * (np.linalg.inv(C) @ dual.T).T
    return gauss_reduce(make_lattice(gens[0], gens[1]))


def _integer_row_basis(rows) -> list[list[int]]:
    """Basis of the Z-span of integer vectors in Z^2 (column-wise Euclid)."""
    rows = [[int(x) for x in r] for r in rows if any(r)]
    basis = []
    for col in range(2):
        while sum(1 for r in rows if r[col]) > 1:
            p = min((r for r in rows if r[col]), key=lambda r: abs(r[col]))
            reduced = [p]
            for r in rows:
                if r is p:
                    continue
                if r[col]:
                    q = r[col] // p[col]
                    r = [r[0] - q * p[0], r[1] - q * p[1]]
                if any(r):
                    reduced.append(r)
            rows = reduced
        pivot = next((r for r in rows if r[col]), None)
        if pivot is None:
            raise ZooError("frequencies generate a module of rank < 2")
        basis.append(pivot)
        rows = [r for r in rows if r is not pivot]
    return basis


def _exponential_circles(r: np.ndarray, a: np.ndarray):
    def mapping(x):
        phase = x @ a.T
        out = np.empty(x.shape[:-1] + (2 * len(r),))
        out[..., 0::2] = r * np.cos(phase)
        out[..., 1::2] = r * np.sin(phase)
        return out

    def rotating_frame(x):
        # (cos, sin) and (-sin, cos) in each complex coordinate
        phase = x @ a.T
        m = len(r)
        out = np.zeros(x.shape[:-1] + (2 * m, 2 * m))
        for k in range(m):
            c, s = np.cos(phase[..., k]), np.sin(phase[..., k])
            out[..., 2 * k, 2 * k], out[..., 2 * k, 2 * k + 1] = c, s
            out[..., 2 * k + 1, 2 * k], out[..., 2 * k + 1, 2 * k + 1] = -s, c
        return out

    return mapping, rotating_frame


def homogeneous_torus(spec: HomogeneousSpec, n: int | None = None, family: str = "homogeneous") -> Immersion:
    lattice = validate_spec(spec)
    n = spec.ambient if n is None else n
    if n < spec.ambient:
        raise ZooError(f"homogeneous torus with m={spec.m} needs n >= {spec.ambient}")
    r = np.asarray(spec.radii, dtype=float)
    a = np.asarray(spec.freqs, dtype=float)
    mapping, frame = _exponential_circles(r, a)
    params = {"radii": list(spec.radii), "freqs": [list(q) for q in spec.freqs]}
    return Immersion(family, n, lattice, mapping, params=params, frame_candidates=frame)


CLIFFORD_SPEC = HomogeneousSpec((1 / math.sqrt(2), 1 / math.sqrt(2)), ((1.0, 0.0), (0.0, 1.0)))


def clifford(n: int = 3) -> Immersion:
    """``(cos u, sin u, cos v, sin v)/sqrt 2`` on the square ``2 pi`` lattice."""
    if n < 3:
        raise ZooError("the Clifford torus needs n >= 3")
    return homogeneous_torus(CLIFFORD_SPEC, n, family="clifford")


def bimr_spec() -> HomogeneousSpec:
    ang = [2 * math.pi * k / 3 for k in range(3)]
    freqs = tuple((math.sqrt(2) * math.cos(t), math.sqrt(2) * math.sin(t)) for t in ang)
    return HomogeneousSpec((1 / math.sqrt(3),) * 3, freqs)


def bimr(n: int = 5) -> Immersion:
    """The equilateral (Bryant-Itoh-Montiel-Ros) torus in ``S^5``, ``e^{2 rho} = 1``."""
    return homogeneous_torus(bimr_spec(), n, family="bimr")


def check_nonisotropic(spec: HomogeneousSpec, min_hopf: float = 1e-6) -> None:
    if abs(spec.hopf_ratio()) <= min_hopf:
        raise ZooError("isotropic spec: the Hopf differential vanishes")
    freqs = np.asarray(spec.freqs)
    for i, j in itertools.combinations(range(spec.m), 2):
        if np.allclose(freqs[i], freqs[j]) or np.allclose(freqs[i], -freqs[j]):
            raise ZooError("frequency vectors must be pairwise distinct up to sign")


def _equal_norm_vectors(q: int) -> list[tuple[int, int]]:
    """Integer vectors of squared length ``q``, one per direction up to sign."""
    out = []
    b = math.isqrt(q)
    for x in range(-b, b + 1):
        y2 = q - x * x
        y = math.isqrt(y2)
        if y * y != y2:
            continue
        for yy in {y, -y}:
            if yy > 0 or (yy == 0 and x > 0):
                out.append((x, yy))
    return sorted(out)


def _barycentric_weights(unit: np.ndarray) -> np.ndarray | None:
    A = np.vstack([unit.real, unit.imag, np.ones(len(unit))])
    if abs(np.linalg.det(A)) < 1e-12:
        return None
    return np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))


def _grid_cost(spec: HomogeneousSpec) -> float:
    lat = period_lattice(spec.freqs)
    a = np.asarray(spec.freqs)
    lattice_freqs = np.abs(a @ lat.matrix) / (2 * np.pi)
    lengths = np.linalg.norm(lat.matrix, axis=0)
    return float(np.max(lattice_freqs) * max(lengths) / min(lengths))


def find_homogeneous_nonisotropic(m: int = 3, seed: int = 0, max_norm: int = 50, budget: int = 5000) -> HomogeneousSpec:
    """Search for a full, non-superminimal homogeneous torus in ``S^5``.

    Frequencies are equal-length integer vectors (scaled to ``|a|^2 = 2``), so
    the period relations are exact; the radii are the unique barycentric
    weights making the torus conformal.  Among valid triples the most
    grid-friendly ones are preferred, ties broken by the seeded shuffle.
    """
    if m != 3:
        raise ValueError("only m = 3 (tori in S^5) is supported")
    rng = np.random.default_rng(seed)
    found = []
    examined = 0
    for q in range(1, max_norm + 1):
        vecs = _equal_norm_vectors(q)
        if len(vecs) < 3 or math.gcd(*itertools.chain.from_iterable(vecs)) != 1:
            continue
        for triple in itertools.combinations(vecs, 3):
            examined += 1
            if examined > budget:
                break
            z = np.array([complex(*v) for v in triple])
            w = _barycentric_weights((z / abs(z)) ** 2)
            if w is None or np.min(w) <= 1e-3:
                continue
            scale = math.sqrt(2.0 / q)
            spec = HomogeneousSpec(
                tuple(float(math.sqrt(x)) for x in w),
                tuple((scale * v[0], scale * v[1]) for v in triple),
            )
            try:
                check_nonisotropic(spec)
                validate_spec(spec, tol=1e-12)
            except ZooError:
                continue
            found.append(spec)
    if not found:
        raise SearchError(f"no non-isotropic homogeneous torus found within budget {budget}")
    order = rng.permutation(len(found))
    ranked = sorted((found[i] for i in order), key=lambda s: round(_grid_cost(s), 6))
    return ranked[0]


def nonisotropic(n: int = 5, seed: int = 0) -> Immersion:
    spec = find_homogeneous_nonisotropic(seed=seed)
    imm = homogeneous_torus(spec, n, family="nonisotropic")
    imm.params["seed"] = seed
    return imm


def perturb(imm: Immersion, eps: float = 0.01, direction=None) -> Immersion:
    """``(f + eps c)/|f + eps c|`` for a constant ``c``; no longer minimal."""
    c = np.zeros(imm.dim)
    c[0] = 1.0
    if direction is not None:
        c = np.asarray(direction, dtype=float)
    base = imm.mapping
    dim = imm.dim

    def mapping(x):
        y = base(x)
        y = np.pad(y, [(0, 0)] * (y.ndim - 1) + [(0, dim - y.shape[-1])]) + eps * c
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    return Immersion(f"perturbed-{imm.family}", imm.ambient, imm.base_lattice, mapping, params={"eps": eps})


SURFACES = {
    "clifford": (clifford, 3, "Clifford torus (cos u, sin u, cos v, sin v)/sqrt 2"),
    "bimr": (bimr, 5, "equilateral Bryant-Itoh-Montiel-Ros torus, superminimal"),
    "nonisotropic": (nonisotropic, 5, "searched homogeneous torus in S^5 with nonzero Hopf differential"),
    "homogeneous": (None, None, "exponential-circles torus from radii=...;freqs=x,y,x,y,..."),
}


def parse_params(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    out = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise ZooError(f"malformed parameter {item!r}, expected key=value")
        out[key.strip()] = val.strip()
    return out


def build(name: str, params: str | None = None, ambient: int | None = None) -> Immersion:
    """Construct a zoo surface by name, e.g. ``build("nonisotropic", "seed=2", 6)``."""
    if name not in SURFACES:
        raise ZooError(f"unknown surface {name!r}; choose from {sorted(SURFACES)}")
    p = parse_params(params)
    if name == "homogeneous":
        try:
            radii = tuple(float(x) for x in p["radii"].split(","))
            flat = [float(x) for x in p["freqs"].split(",")]
        except (KeyError, ValueError) as exc:
            raise ZooError("homogeneous needs radii=r1,r2,... and freqs=x1,y1,x2,y2,...") from exc
        spec = HomogeneousSpec(radii, tuple(zip(flat[0::2], flat[1::2])))
        return homogeneous_torus(spec, ambient)
    ctor, default_n, _ = SURFACES[name]
    if name == "nonisotropic":
        imm = ctor(seed=int(p.get("seed", 0)))
    else:
        imm = ctor()
    return pad(imm, ambient or default_n)


__all__ = [
    "HomogeneousSpec",
    "ZooError",
    "SearchError",
    "bimr",
    "bimr_spec",
    "build",
    "check_nonisotropic",
    "clifford",
    "find_homogeneous_nonisotropic",
    "homogeneous_torus",
    "nonisotropic",
    "pad",
    "period_lattice",
    "perturb",
    "validate_spec",
]
