"""Verification suites: named residual checks with their limits.

Each suite evaluates one group of identities on a geometry already
normalized so that its Hopf constant is 0 or 1, and returns a SuiteResult
whose checks carry the measured value, the limit and the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import jacobi as jac
from . import sections as sec
from . import variation as var
from .config import DEFAULTS, steps


@dataclass
class Check:
    name: str
    value: float
    limit: float | None
    passed: bool
    relation: str = "<"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _plain(self.value), "limit": _plain(self.limit),
                "relation": self.relation, "passed": bool(self.passed)}


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def below(self, name, value, limit):
        self.checks.append(Check(name, float(value), float(limit), bool(value < limit), "<"))

    def equal(self, name, value, target):
        self.checks.append(Check(name, value, target, bool(value == target), "=="))

    def above(self, name, value, bound):
        self.checks.append(Check(name, float(value), float(bound), bool(value > bound), ">"))

    def at_least(self, name, value, bound):
        self.checks.append(Check(name, value, bound, bool(value >= bound), ">="))

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "info": _plain(self.info)}


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def normalized_geometry(imm, shape=(64, 64)) -> geo.GeometryData:
    """Geometry in the coordinate where the Hopf constant is 0 or 1."""
    g = geo.evaluate_geometry(imm, shape=shape)
    if abs(g.a) < 1e-10:
        return g
    return geo.evaluate_geometry(geo.normalize_hopf(imm, g), shape=shape)


def _sup(x) -> float:
    return float(np.max(np.abs(x)))


def structure_suite(g, cfg=DEFAULTS) -> SuiteResult:
    tol = cfg["residual_tol"]
    out = SuiteResult("structure")
    r1, r2, r3 = geo.structure_residuals(g, seed=cfg["seed"])
    out.below("f_zz equation", r1, tol)
    out.below("f_zzbar equation", r2, tol)
    out.below("psi_z equation", r3, tol)
    codazzi, ricci = geo.codazzi_ricci_residuals(g, seed=cfg["seed"])
    out.below("codazzi", codazzi, tol)
    out.below("ricci", ricci, tol)
    out.below("gauss", geo.gauss_residual(g), tol)
    out.below("hopf constancy", geo.hopf_variation(g), 1e-9)
    o1, o2 = g.omega1, g.omega2
    out.below("omega1 . omega2", _sup(geo.dot(o1, o2)), 1e-9)
    diff = geo.dot(o1, o1) - geo.dot(o2, o2)
    out.below("|omega1|^2 - |omega2|^2 spread", float(np.ptp(diff)), 1e-9)
    om2 = geo.dot(o1, o1) + geo.dot(o2, o2)
    out.below("S = 8 e^{-4rho} |omega|^2", _sup(g.S - 8 * om2 / g.e2rho**2), 1e-9)
    out.below("laplacian of omega", sec.omega_eigen_identities(g)["laplacian_omega"], tol)
    out.info = {"hopf_constant": g.a, "area": g.area, "e2rho_range": [float(g.e2rho.min()), float(g.e2rho.max())]}
    return out


def _solve(g, cfg, representation="auto", num_eigs=None):
    asm = jac.assemble(g, representation, sigma=cfg["sigma"], degeneracy_tol=cfg["frame_tol"])
    return jac.spectrum_auto(
        asm,
        k=num_eigs or cfg["num_eigs"],
        null_tol=cfg["null_tol"],
        dense_max_dim=cfg["dense_max_dim"],
        seed=cfg["seed"],
        iter_tol=cfg["iter_tol"],
        maxiter=cfg["maxiter"],
        keep_vectors=False,
    )


def jacobi_suite(g, cfg=DEFAULTS, representation="auto", num_eigs=None, result=None) -> SuiteResult:
    tol = cfg["residual_tol"]
    out = SuiteResult("jacobi")
    V, W = geo.random_normal_sections(g, 2, seed=cfg["seed"])
    LV, LW = jac.apply_jacobi(g, V), jac.apply_jacobi(g, W)
    scale = max(1.0, abs(g.inner(LV, W)))
    out.below("self-adjointness", abs(g.inner(LV, W) - g.inner(V, LW)) / scale, tol)
    out.below("divergence form", abs(jac.quadratic_form(g, V, W) - g.inner(LV, W)) / scale, tol)
    trace = np.einsum("...ii->...", jac.shape_matrix(g))
    out.below("trace of shape term = S", _sup(trace - g.S), 1e-9)
    Zs = var.seeded_directions(g.immersion.dim, 10, cfg["seed"])
    out.below("L Z^perp = 2 Z^perp", max(sec.lemma_eigenfield_residual(g, Z) for Z in Zs), tol)

    res = result if result is not None else _solve(g, cfg, representation, num_eigs)
    n = g.n
    superminimal = abs(g.a) < 1e-9
    out.at_least("index lower bound", res.index, n + 3 if superminimal else n + 2)
    out.at_least("-2 multiplicity", res.multiplicity(-2.0, 1e-6), n + 1)
    if not superminimal:
        out.below("lambda1 < -2", res.lambda1, -2.0)
    out.equal("index/nullity robust to null_tol x10", res.tol_robust, True)
    out.info = res.summary()
    return out


def sections_suite(g, cfg=DEFAULTS) -> SuiteResult:
    tol = cfg["residual_tol"]
    out = SuiteResult("sections")
    d = g.immersion.dim
    Zs = var.seeded_directions(d, 10, cfg["seed"])
    E = list(np.eye(d)) + list(Zs)
    out.below("(E^perp)_z identity", max(sec.eperp_derivative_residual(g, e) for e in E), tol)
    for name, val in sec.omega_eigen_identities(g).items():
        out.below(name, val, tol if name != "omega_orthogonality" else 1e-9)
    labels, eperp = sec.coordinate_projections(g)
    basis = sec.section_basis(g, labels, eperp, cfg["rank_tol"])
    out.equal("rank {e_j^perp}", sec.gram_rank(basis), d)
    out.equal("rank stable", basis.rank_stable, True)
    out.below("Rayleigh(Z^perp) + 2", max(abs(sec.rayleigh(g, sec.ambient_projection(g, Z)) + 2) for Z in Zs), tol)
    info: dict = {"rank_eperp": basis.rank}

    superminimal = abs(g.a) < 1e-9
    if superminimal:
        b = sec.section_basis(g, ["omega1", "omega2"] + labels, np.concatenate([[g.omega1, g.omega2], eperp]),
                              cfg["rank_tol"])
        out.equal("rank {omega1, omega2, e_j^perp}", b.rank, g.n + 3)
        info["rank_omega_eperp"] = b.rank
    else:
        out.below("Rayleigh(omega1) < -2", sec.rayleigh(g, g.omega1), -2.0)
        w = sec.willmore_integral(g)
        out.below("willmore sides agree", w["difference"] / max(1.0, abs(w["lhs"])), 1e-7)
        info["willmore"] = w
    if g.n == 4 and not superminimal:
        frame = sec.theta_frame(g)
        for name, val in frame.residuals().items():
            out.below(f"theta frame {name}", val, 1e-8)
        J1, J2 = sec.j_omega_sections(frame)
        out.below("nabla J = J nabla", sec.j_commutation_residual(frame, g.omega1), tol)
        out.below("Rayleigh(J omega1) + 2", abs(sec.rayleigh(g, J1) + 2), tol)
        out.below("L J omega1 = 2 J omega1", _sup(jac.apply_jacobi(g, J1) - 2 * J1), tol)
        if np.max(np.abs(J2)) > 1e-10:
            out.below("L J omega2 = 2 J omega2", _sup(jac.apply_jacobi(g, J2) - 2 * J2), tol)
        bj = sec.section_basis(g, ["J omega1"] + labels, np.concatenate([[J1], eperp]), cfg["rank_tol"])
        info["rank_Jomega1_eperp"] = bj.rank
    out.info = info
    return out


def variation_suite(g, cfg=DEFAULTS) -> SuiteResult:
    out = SuiteResult("variation")
    h = cfg["fd_step"]
    reports = [var.second_variation_fd(g, V, h, f"random[{i}]")
               for i, V in enumerate(geo.random_normal_sections(g, cfg["fd_directions"], seed=cfg["seed"]))]
    out.below("FD vs -Q relative mismatch", max(r.mismatch for r in reports), cfg["fd_tol"])
    out.equal("Richardson shrinks mismatch", all(r.monotone for r in reports), True)
    Zs = var.seeded_directions(g.immersion.dim, cfg["dilation_samples"], cfg["seed"])
    zp = var.second_variation_fd(g, sec.ambient_projection(g, Zs[0]), h, "zperp")
    out.below("FD along Z^perp (negative)", zp.fd, 0.0)
    ts = steps(cfg)
    dil = [var.dilation_check(g, Z, ts, h) for Z in Zs]
    out.above("dilation area decrease (min)", min(min(p["decrease"]) for p in dil), 0.0)
    out.below("dilation first derivative", max(abs(p["first_derivative"]) for p in dil), cfg["derivative_tol"])
    info = {"fd": [r.to_dict() for r in reports], "zperp": zp.to_dict()}
    if abs(g.a - 1) < 1e-9:
        fam = [var.family_check(g, Z, ts, h) for Z in Zs]
        out.above("family area decrease (min)", min(min(p["decrease"]) for p in fam), 0.0)
        out.below("family first derivative", max(abs(p["first_derivative"]) for p in fam), cfg["derivative_tol"])
    else:
        info["family"] = "not applicable: Hopf constant is 0, no Omega_1 normalization"
    out.info = info
    return out


SUITES = {
    "structure": structure_suite,
    "jacobi": jacobi_suite,
    "sections": sections_suite,
    "variation": variation_suite,
}


def run_suites(g, names, cfg=DEFAULTS, **jacobi_kwargs) -> list[SuiteResult]:
    if names == ["all"] or names == "all":
        names = list(SUITES)
    out = []
    for name in names:
        fn = SUITES[name]
        out.append(fn(g, cfg, **jacobi_kwargs) if name == "jacobi" else fn(g, cfg))
    return out
