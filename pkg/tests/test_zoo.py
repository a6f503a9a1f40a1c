import math

import numpy as np
import pytest

from toruslab import zoo
from toruslab.geometry import dot, evaluate_geometry, pad
from toruslab.jacobi import morse_data
from toruslab.zoo import HomogeneousSpec, SearchError, ZooError

from conftest import SURFACES, geometry


def test_clifford_area_and_flatness():
    g = geometry("clifford3")
    assert g.area == pytest.approx(2 * math.pi**2, rel=1e-13)
    assert np.max(np.abs(g.K)) < 1e-9


def test_clifford_padding_adds_normal_rank():
    assert geometry("clifford4").normal_rank == 2
    g3, g4 = geometry("clifford3"), geometry("clifford4")
    np.testing.assert_allclose(g4.e2rho, g3.e2rho, atol=1e-15)
    np.testing.assert_allclose(g4.f[..., :4], g3.f, atol=1e-15)


def test_clifford_needs_three_sphere():
    with pytest.raises(ZooError):
        zoo.clifford(2)


def test_rotated_clifford_spec_is_congruent():
    s = 1 / math.sqrt(2)
    spec = HomogeneousSpec((s, s), ((1.0, 1.0), (1.0, -1.0)))
    imm = zoo.homogeneous_torus(spec)
    g = evaluate_geometry(imm, shape=(32, 32))
    assert g.area == pytest.approx(2 * math.pi**2, rel=1e-12)
    a = morse_data(imm, (32, 32), "frame", k=30)
    b = morse_data(zoo.clifford(3), (32, 32), "frame", k=30)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-7)


def test_bimr_constants():
    g = geometry("bimr5")
    assert np.max(np.abs(g.e2rho - 1)) < 1e-13
    assert np.max(np.abs(g.K)) < 1e-9
    assert abs(g.a) < 1e-10
    lat = g.immersion.lattice
    assert g.area == pytest.approx(lat.covolume, rel=1e-13)
    assert lat.covolume == pytest.approx(4 * math.pi**2 / math.sqrt(3), rel=1e-12)


def test_bimr_spec_frequencies_sum_to_zero():
    a = np.array(zoo.bimr_spec().freqs)
    assert np.max(np.abs(a.sum(axis=0))) < 1e-15


@pytest.mark.parametrize("name", sorted(SURFACES))
def test_homogeneous_constants(name):
    g = geometry(name)
    assert np.ptp(g.rho) < 1e-10
    assert np.ptp(np.sqrt(dot(g.omega1, g.omega1))) < 1e-10
    assert np.ptp(np.sqrt(dot(g.omega2, g.omega2))) < 1e-10


def test_unequal_frequency_lengths_rejected():
    s = 1 / math.sqrt(2)
    with pytest.raises(ZooError, match="non-minimal"):
        zoo.homogeneous_torus(HomogeneousSpec((s, s), ((1.0, 0.0), (0.0, 2.0))))


def test_non_tight_frame_rejected():
    with pytest.raises(ZooError, match="non-conformal"):
        zoo.homogeneous_torus(HomogeneousSpec((math.sqrt(0.8), math.sqrt(0.2)), ((1.0, 0.0), (0.0, 1.0))))


def test_irrational_relation_rejected():
    r = 1 / math.sqrt(3)
    t = math.sqrt(2)  # a direction with irrational slope
    c, s = math.cos(t), math.sin(t)
    freqs = ((1.0, 0.0), (0.0, 1.0), (c, s))
    with pytest.raises(ZooError):
        zoo.validate_spec(HomogeneousSpec((r, r, r), freqs))
    with pytest.raises(ZooError, match="irrational"):
        zoo.period_lattice(freqs)


def test_radii_must_be_unit():
    with pytest.raises(ZooError):
        zoo.homogeneous_torus(HomogeneousSpec((0.5, 0.5), ((1.0, 0.0), (0.0, 1.0))))


def test_search_postconditions():
    spec = zoo.find_homogeneous_nonisotropic(seed=0)
    zoo.validate_spec(spec)
    zoo.check_nonisotropic(spec)
    a = np.array(spec.freqs)
    assert len({tuple(np.round(x, 12)) for x in a}) == 3
    g = evaluate_geometry(zoo.homogeneous_torus(spec), shape=(32, 32))
    assert abs(g.a) > 1e-6
    o2 = np.sqrt(dot(g.omega2, g.omega2)) if abs(g.a.imag) < 1e-12 else None
    assert o2 is not None and np.min(o2) > 0 and np.ptp(o2) < 1e-10


def test_search_is_deterministic_per_seed():
    assert zoo.find_homogeneous_nonisotropic(seed=3) == zoo.find_homogeneous_nonisotropic(seed=3)


def test_search_failure_is_reported():
    with pytest.raises(SearchError):
        zoo.find_homogeneous_nonisotropic(max_norm=4)


def test_equilateral_equal_radii_rejected():
    with pytest.raises(ZooError, match="isotropic"):
        zoo.check_nonisotropic(zoo.bimr_spec())


def test_pad_examples():
    imm = pad(zoo.clifford(3), 4)
    assert imm.ambient == 4
    assert pad(zoo.bimr(), 6).dim == 7
    with pytest.raises(ValueError):
        pad(zoo.clifford(4), 3)


def test_build_by_name():
    assert zoo.build("clifford", None, 5).ambient == 5
    assert zoo.build("bimr").ambient == 5
    imm = zoo.build("homogeneous", "radii=0.7071067811865476,0.7071067811865476;freqs=1,0,0,1")
    assert imm.ambient == 3
    with pytest.raises(ZooError):
        zoo.build("nosuch")
    with pytest.raises(ZooError):
        zoo.build("homogeneous", "radii=1")
    with pytest.raises(ZooError):
        zoo.parse_params("novalue")
