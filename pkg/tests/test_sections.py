import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruslab import zoo
from toruslab.geometry import NotNormalError, dot, evaluate_geometry, hodge_complement
from toruslab.jacobi import apply_jacobi
from toruslab.sections import (
    SectionError,
    ambient_projection,
    apply_J,
    coordinate_projections,
    eperp_derivative_residual,
    gram_rank,
    j_commutation_residual,
    j_omega_sections,
    lemma_eigenfield_residual,
    omega_eigen_identities,
    rayleigh,
    section_basis,
    theta_frame,
    willmore_integral,
)

from conftest import SURFACES, geometry


def test_padding_direction_projects_to_itself():
    g = geometry("clifford4")
    e4 = np.eye(5)[4]
    assert np.max(np.abs(ambient_projection(g, e4) - e4)) < 1e-14


def test_projection_is_normal(surface_name):
    g = geometry(surface_name)
    Z = np.random.default_rng(0).standard_normal(g.immersion.dim)
    V = ambient_projection(g, Z)
    assert np.max(np.abs(np.einsum("...ik,...k->...i", g.tangent_frame, V))) < 1e-12


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(sorted(SURFACES)))
def test_constant_projections_have_eigenvalue_minus_two(seed, name):
    g = geometry(name, (32, 32))
    Z = np.random.default_rng(seed).standard_normal(g.immersion.dim)
    assert rayleigh(g, ambient_projection(g, Z)) == pytest.approx(-2, abs=1e-8)
    assert lemma_eigenfield_residual(g, Z) < 1e-8


def test_projection_of_surface_point_is_eigenfield():
    g = geometry("bimr5")
    Z = g.f[3, 5]
    assert lemma_eigenfield_residual(g, Z) < 1e-8


def test_eperp_derivative_identity():
    assert eperp_derivative_residual(geometry("clifford4"), np.eye(5)[0]) < 1e-9
    assert eperp_derivative_residual(geometry("clifford4"), np.zeros(5)) == 0
    Z = np.random.default_rng(2).standard_normal(6)
    assert eperp_derivative_residual(geometry("bimr5"), Z) < 1e-9


def test_omega_identities_all_surfaces(surface_name):
    g = geometry(surface_name, normalized=True)
    for name, value in omega_eigen_identities(g).items():
        assert value < 1e-8, name


def test_clifford_omega1_eigenvalue_after_normalization():
    g = geometry("clifford3", normalized=True)
    assert np.max(np.abs(apply_jacobi(g, g.omega1) - 4 * g.omega1)) < 1e-8


def test_bimr_omega_eigenvalues():
    g = geometry("bimr5")
    for W in (g.omega1, g.omega2):
        assert np.max(np.abs(apply_jacobi(g, W) - 2 * W)) < 1e-8


def test_nonisotropic_omega_eigenvalues():
    g = geometry("nonisotropic5", normalized=True)
    q = 4 / g.e2rho**2
    assert np.ptp(q) < 1e-12
    q = float(q.mean())
    assert rayleigh(g, g.omega1) == pytest.approx(-2 * (1 + q), abs=1e-9)
    assert rayleigh(g, g.omega2) == pytest.approx(-2 * (1 - q), abs=1e-9)
    assert -2 < -2 * (1 - q) < 0


def test_theta_frame_on_clifford4():
    g = geometry("clifford4", normalized=True)
    tf = theta_frame(g)
    assert np.max(np.abs(tf.theta)) < 1e-12
    assert np.max(np.abs(tf.psi3 - g.omega1)) < 1e-12
    assert np.max(np.abs(np.abs(tf.psi4[..., 4]) - 1)) < 1e-12
    for name, val in tf.residuals().items():
        assert val < 1e-9, name


def test_theta_frame_preconditions():
    with pytest.raises(SectionError):
        theta_frame(geometry("bimr5"))
    with pytest.raises(SectionError):
        theta_frame(evaluate_geometry(zoo.clifford(5), shape=(16, 16)))
    with pytest.raises(SectionError):
        theta_frame(geometry("clifford4"))


def test_J_squares_to_minus_one():
    g = geometry("clifford4", normalized=True)
    tf = theta_frame(g)
    from toruslab.geometry import random_normal_sections

    V = random_normal_sections(g, 1, seed=7)[0]
    assert np.max(np.abs(apply_J(tf, apply_J(tf, V)) + V)) < 1e-12


def test_J_omega_on_clifford4():
    g = geometry("clifford4", normalized=True)
    tf = theta_frame(g)
    J1, J2 = j_omega_sections(tf)
    assert np.max(np.abs(J1 - tf.psi4)) < 1e-12
    assert np.max(np.abs(J2)) < 1e-12
    assert rayleigh(g, J1) == pytest.approx(-2, abs=1e-8)
    assert np.max(np.abs(apply_jacobi(g, J1) - 2 * J1)) < 1e-8
    assert j_commutation_residual(tf, g.omega1) < 1e-8


def test_J_rejects_non_normal():
    g = geometry("clifford4", normalized=True)
    with pytest.raises(NotNormalError):
        apply_J(theta_frame(g), g.f_u.copy())


def test_gram_ranks():
    g3 = geometry("clifford3")
    labels, E = coordinate_projections(g3)
    b = section_basis(g3, labels, E)
    assert gram_rank(b) == 4 and b.rank_stable

    g4 = geometry("clifford4", normalized=True)
    labels, E = coordinate_projections(g4)
    J1, _ = j_omega_sections(theta_frame(g4))
    b = section_basis(g4, ["J omega1"] + labels, np.concatenate([[J1], E]))
    # J omega1 = e4^perp here, so it adds nothing to the n + 1 = 5 projections
    assert gram_rank(b) == 5 and b.rank_stable

    g = geometry("bimr5")
    labels, E = coordinate_projections(g)
    b = section_basis(g, ["omega1", "omega2"] + labels, np.concatenate([[g.omega1, g.omega2], E]))
    assert gram_rank(b) == 8 and b.rank_stable


def test_rank_of_coordinate_projections(surface_name):
    g = geometry(surface_name)
    labels, E = coordinate_projections(g)
    b = section_basis(g, labels, E)
    assert b.rank == g.n + 1
    w = np.linalg.eigvalsh(b.gram)
    assert np.min(w) > -1e-10 and np.allclose(b.gram, b.gram.T)


def test_gram_rank_empty_basis():
    g = geometry("clifford3", (8, 8))
    with pytest.raises(SectionError):
        gram_rank(section_basis(g, [], np.zeros((0,) + g.f.shape)))


def test_section_basis_csv(tmp_path):
    g = geometry("clifford3", (4, 4))
    labels, E = coordinate_projections(g)
    b = section_basis(g, labels, E)
    p = tmp_path / "basis.csv"
    b.to_csv(p, g.grid)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["label", "i", "j", "c0", "c1", "c2", "c3"]
    assert len(rows) == 1 + 4 * 16
    assert float(rows[1][3]) == pytest.approx(E[0, 0, 0, 0], abs=1e-16)


def test_willmore_integral_clifford4_vanishes():
    w = willmore_integral(geometry("clifford4", normalized=True))
    assert abs(w["I"]) < 1e-12 and abs(w["lhs"]) < 1e-9


@pytest.mark.parametrize("name", ["clifford3", "nonisotropic5"])
def test_willmore_sides_agree(name):
    w = willmore_integral(geometry(name, normalized=True))
    assert w["difference"] < 1e-7 * max(1.0, abs(w["lhs"]))
    assert isinstance(w["conjecture_sign_ok"], bool)


def test_willmore_needs_normalization():
    with pytest.raises(SectionError):
        willmore_integral(geometry("clifford3"))
    with pytest.raises(SectionError):
        willmore_integral(geometry("bimr5"))


def test_rayleigh_examples():
    g = geometry("clifford3")
    N = hodge_complement(g.tangent_frame)
    assert rayleigh(g, N) == pytest.approx(-4, abs=1e-10)
    gn = geometry("clifford4", normalized=True)
    assert rayleigh(gn, gn.omega1) < -2
    with pytest.raises(SectionError):
        rayleigh(g, np.zeros_like(g.f))
