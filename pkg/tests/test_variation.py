import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruslab import zoo
from toruslab.geometry import evaluate_geometry, hodge_complement, random_normal_sections
from toruslab.grid import Grid
from toruslab.jacobi import assemble, spectrum
from toruslab.sections import ambient_projection
from toruslab.variation import (
    VariationError,
    area_of_samples,
    centered_dilation,
    dilation_check,
    family_check,
    family_phi,
    named_direction,
    normal_variation,
    second_variation_fd,
    seeded_directions,
)

from conftest import SURFACES, geometry


def test_normal_variation_trivial_cases():
    g = geometry("bimr5", (32, 32))
    V = random_normal_sections(g, 1, seed=0)[0]
    np.testing.assert_array_equal(normal_variation(g, V, 0.0), g.f / np.linalg.norm(g.f, axis=-1, keepdims=True))
    assert np.max(np.abs(normal_variation(g, np.zeros_like(V), 0.3) - g.f)) < 1e-15
    ft = normal_variation(g, V, 0.01)
    assert np.max(np.abs(np.linalg.norm(ft, axis=-1) - 1)) < 1e-14
    with pytest.raises(VariationError):
        normal_variation(g, V, 10.0 / np.max(np.abs(V)))


def test_area_of_samples_examples():
    g = geometry("clifford3", (32, 32))
    assert area_of_samples(g.f, g.grid) == pytest.approx(2 * np.pi**2, rel=1e-10)
    b = geometry("bimr5", (32, 32))
    assert area_of_samples(b.f, b.immersion.lattice) == pytest.approx(b.immersion.lattice.covolume, rel=1e-10)


def test_area_invariant_under_reparametrization_shift():
    imm = zoo.nonisotropic()
    grid = imm.grid((32, 32))
    shifted = imm.mapping(grid.points + np.array([0.37, -1.1]))
    assert area_of_samples(shifted, grid) == pytest.approx(area_of_samples(imm.sample(grid), grid), rel=1e-12)


def test_area_rejects_degenerate_metric():
    grid = Grid(zoo.clifford().lattice, (8, 8))
    with pytest.raises(VariationError):
        area_of_samples(np.ones(grid.shape + (4,)), grid)


def test_clifford_normal_direction_is_unstable():
    g = geometry("clifford3")
    N = hodge_complement(g.tangent_frame)
    r = second_variation_fd(g, N, normalize=False)
    assert r.fd == pytest.approx(-4 * g.area, rel=1e-6)
    assert r.mismatch < 1e-8


def test_zperp_second_variation(surface_name):
    g = geometry(surface_name)
    V = ambient_projection(g, seeded_directions(g.immersion.dim, 1, 5)[0])
    r = second_variation_fd(g, V)
    assert r.normalized == pytest.approx(-2, abs=1e-6)


def test_omega2_direction_in_gap():
    g = geometry("nonisotropic5", normalized=True)
    r = second_variation_fd(g, g.omega2, direction="omega2")
    assert -2 < r.normalized < 0
    assert r.mismatch < 1e-4


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(sorted(SURFACES)))
def test_fd_matches_quadratic_form(seed, name):
    g = geometry(name)
    V = random_normal_sections(g, 1, seed=seed)[0]
    r = second_variation_fd(g, V)
    assert r.mismatch < 1e-4
    assert r.mismatch <= r.mismatch_fine <= r.mismatch_coarse


def test_richardson_gains_second_order():
    g = geometry("clifford4")
    r = second_variation_fd(g, random_normal_sections(g, 1, seed=1)[0])
    assert r.mismatch_coarse / r.mismatch_fine > 3.5
    assert r.monotone


def test_too_small_step_detected():
    g = geometry("bimr5")
    V = random_normal_sections(g, 1, seed=0)[0]
    with pytest.raises(VariationError, match="too small"):
        second_variation_fd(g, V, h=1e-12)


def test_positive_eigenvector_has_positive_second_variation():
    g = geometry("clifford3", (32, 32))
    res = spectrum(assemble(g, "frame"), k=20)
    i = int(np.argmax(res.eigenvalues > 1))
    V = res.vectors[i]
    r = second_variation_fd(g, V)
    assert r.fd > 0
    # A''(0) = -Q(V, V) = mu ||V||^2 for eigenvectors
    assert r.normalized == pytest.approx(res.eigenvalues[i], rel=1e-6)


def test_centered_dilation_basics():
    g = geometry("clifford4", (32, 32))
    np.testing.assert_allclose(centered_dilation(g, np.zeros(5)), g.f, atol=1e-15)
    Z = 0.3 * seeded_directions(5, 1, 0)[0]
    x = centered_dilation(g, Z)
    assert np.max(np.abs(np.linalg.norm(x, axis=-1) - 1)) < 1e-12
    with pytest.raises(VariationError):
        centered_dilation(g, np.eye(5)[0])


@pytest.mark.parametrize("name", sorted(SURFACES))
def test_dilation_decreases_area(name):
    g = geometry(name, (32, 32))
    for Z in seeded_directions(g.immersion.dim, 4, 11):
        p = dilation_check(g, Z, ts=(0.01, 0.05))
        assert min(p["decrease"]) > 0
        assert abs(p["first_derivative"]) < 1e-6


def test_family_basics():
    g = geometry("clifford4", (32, 32), normalized=True)
    d = g.immersion.dim
    np.testing.assert_allclose(family_phi(g, 0.0, np.zeros(d)), g.f, atol=1e-15)
    a0 = area_of_samples(g.f, g.grid)
    assert area_of_samples(family_phi(g, 0.02, np.zeros(d)), g.grid) < a0
    p = family_check(g, np.zeros(d))
    assert abs(p["first_derivative"]) < 1e-6
    with pytest.raises(VariationError):
        family_phi(geometry("clifford4", (32, 32)), 0.01, np.zeros(d))
    with pytest.raises(VariationError):
        family_phi(g, 0.01, np.zeros(d), floor=10.0)


def test_named_directions():
    g = geometry("clifford3", (16, 16), normalized=True)
    for name in ("omega1", "zperp", "random"):
        assert named_direction(g, name).shape == g.f.shape
    with pytest.raises(VariationError):
        named_direction(g, "omega2")
    with pytest.raises(VariationError):
        named_direction(g, "sideways")
