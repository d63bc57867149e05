import numpy as np
import pytest
from numpy.testing import assert_allclose

from conegauge import cones, decomposition, maps
from conegauge.errors import ConvergenceError, VerificationError
from conegauge.maps import ConeMap, Linear, OrthantInverse, ProductMap, PsdInverse

from conftest import power_map


@pytest.fixture(scope="module")
def mixed():
    o2, l3 = cones.orthant(2), cones.lorentz(3)
    cone = cones.product(o2, l3)
    first = ConeMap((Linear(np.diag([2.0, 0.5])),), o2, o2)
    phi = maps.make_map([ProductMap((first, maps.vinberg_star(l3)))], cone, cone)
    return cone, phi


class TestProjections:
    def test_identity(self):
        cone = cones.orthant(3)
        z = np.array([1.0, 2.0, 3.0])
        proj = decomposition.projections(cone, maps.identity_map(cone), z)
        assert_allclose(proj.P1, z)
        assert_allclose(proj.P2, 0.0, atol=1e-10)

    def test_orthant_inverse(self):
        cone = cones.orthant(3)
        z = np.array([1.0, 2.0, 3.0])
        phi = maps.make_map([OrthantInverse()], cone, cone)
        proj = decomposition.projections(cone, phi, z)
        assert_allclose(proj.P1, 0.0, atol=1e-10)
        assert_allclose(proj.P2, z)

    def test_mixed_projections_split_factors(self, mixed):
        cone, phi = mixed
        z = np.array([1.0, 2.0, 3.0, 1.0, 0.5])
        proj = decomposition.projections(cone, phi, z)
        assert_allclose(proj.P1, [1.0, 2.0, 0.0, 0.0, 0.0], atol=1e-9)
        assert_allclose(proj.P2, [0.0, 0.0, 3.0, 1.0, 0.5], atol=1e-9)

    def test_power_map_does_not_converge(self):
        with pytest.raises(ConvergenceError):
            decomposition.projections(cones.orthant(3), power_map(cones.orthant(3)), [1.0, 2.0, 3.0])


class TestPartition:
    def test_mixed_partition(self, mixed):
        cone, phi = mixed
        F = decomposition.dual_functionals(cone)
        assert_allclose(F @ cones.base_point(cone), 1.0)
        F1, F2 = decomposition.partition_singletons(cone, phi)
        assert F1 and F2
        # orthant functionals live in the first two coordinates
        assert all(np.linalg.norm(F[j, 2:]) == 0.0 for j in F1)
        assert all(np.linalg.norm(F[j, :2]) == 0.0 for j in F2)

    def test_ambiguous_degree(self):
        with pytest.raises(VerificationError):
            decomposition.partition_singletons(cones.orthant(3), power_map(cones.orthant(3)))


class TestDecompose:
    def test_mixed_isometry(self, mixed):
        cone, phi = mixed
        result = decomposition.decompose(cone, cone, phi, samples=60)
        assert result.ok, result.failures
        assert tuple(result.dims) == (2, 3)
        assert result.residual <= decomposition.RESIDUAL_TOL
        assert result.phi1_report.gauge_preserving.passed
        assert result.phi2_report.gauge_reversing.passed
        assert result.phi2_degree == pytest.approx(-1.0, abs=decomposition.ANTI_DEGREE_TOL)
        x1 = np.array([1.0, 3.0, 0.0, 0.0, 0.0])
        x2 = np.array([0.0, 0.0, 2.0, 1.0, 0.5])
        assert_allclose(result.phi1(x1) + result.phi2(x2), phi(x1 + x2), rtol=1e-7)

    @pytest.mark.parametrize("phi, dims", [
        (maps.make_map([Linear(np.diag([1.0, 2.0, 4.0]))], cones.orthant(3), cones.orthant(3)), (3, 0)),
        (maps.make_map([PsdInverse(2)], cones.psd(2), cones.psd(2)), (0, 3)),
    ], ids=["linear", "psd-inverse"])
    def test_degenerate_splits(self, phi, dims):
        result = decomposition.decompose(phi.source, phi.target, phi, samples=60)
        assert result.ok, result.failures
        assert tuple(result.dims) == dims

    def test_failures_are_collected(self):
        cone = cones.orthant(3)
        result = decomposition.decompose(cone, cone, power_map(cone), samples=20)
        assert not result.ok
        assert any("degree" in f for f in result.failures)
