import numpy as np
import pytest
from numpy.testing import assert_allclose

from conegauge import cones, maps
from conegauge.errors import (
    MembershipError,
    PreconditionError,
    SingularMapError,
    UnsupportedConeError,
    VerificationError,
)
from conegauge.maps import (
    ConeMap,
    Embedding,
    FunctionMap,
    Linear,
    OrthantInverse,
    ProductMap,
    PsdInverse,
    Restriction,
    Scale,
)

from conftest import interior_points, power_map

SYMMETRIC = [cones.orthant(3), cones.lorentz(3), cones.lorentz(5), cones.psd(2), cones.psd(3),
             cones.product(cones.orthant(2), cones.lorentz(3))]


class TestPrimitives:
    def test_orthant_star(self):
        star = maps.vinberg_star(cones.orthant(3))
        assert_allclose(star([1.0, 2.0, 4.0]), [1.0, 0.5, 0.25])

    def test_lorentz_star(self):
        star = maps.vinberg_star(cones.lorentz(3))
        # q = 4 - 1 - 0 = 3
        assert_allclose(star([2.0, 1.0, 0.0]), [2.0 / 3.0, -1.0 / 3.0, 0.0])

    @pytest.mark.parametrize("cone", SYMMETRIC, ids=str)
    def test_star_fixes_base_point_and_is_involutive(self, cone):
        star = maps.vinberg_star(cone)
        b = cones.base_point(cone)
        assert_allclose(star(b), b, atol=1e-12)
        for x in interior_points(cone, 10, 5):
            assert_allclose(star(star(x)), x, rtol=1e-9)

    def test_simplicial_polyhedral_star(self):
        cone = cones.poly_h([[1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
        star = maps.vinberg_star(cone)
        assert_allclose(star(cones.base_point(cone)), cones.base_point(cone), atol=1e-12)
        assert maps.classify(star, samples=40).gauge_reversing.passed

    def test_square_has_no_star(self, square):
        with pytest.raises(UnsupportedConeError):
            maps.vinberg_star(square)

    def test_invalid_primitives(self):
        with pytest.raises(PreconditionError):
            Scale(0.0)
        with pytest.raises(SingularMapError):
            Linear(np.zeros((2, 2))).inverse()
        with pytest.raises(SingularMapError):
            FunctionMap(np.sqrt).inverse()

    def test_embedding_and_restriction(self):
        fill = np.array([1.0, 2.0, 3.0, 4.0])
        embed = maps.Embedding(1, 3, fill)
        assert_allclose(embed.apply(np.array([7.0, 8.0])), [1.0, 7.0, 8.0, 4.0])
        assert_allclose(embed.inverse().apply(np.array([1.0, 7.0, 8.0, 4.0])), [7.0, 8.0])

    def test_congruence_matrix(self, rng):
        P = rng.normal(size=(3, 3))
        X = rng.normal(size=(3, 3))
        X = X + X.T
        assert_allclose(maps.congruence_matrix(P) @ cones.svec(X), cones.svec(P @ X @ P.T), atol=1e-12)

    def test_lorentz_boost_preserves_form(self):
        B = maps.lorentz_boost(4, 0.8, axis=3)
        J = np.diag([1.0, -1.0, -1.0, -1.0])
        assert_allclose(B.T @ J @ B, J, atol=1e-12)


class TestPipelines:
    def test_make_map_checks_target(self):
        cone = cones.orthant(2)
        with pytest.raises(PreconditionError):
            maps.make_map([Linear(-np.eye(2))], cone, cone)

    def test_evaluate_requires_interior(self):
        star = maps.vinberg_star(cones.orthant(2))
        with pytest.raises(MembershipError):
            maps.evaluate(star, [1.0, 0.0])

    def test_compose_and_invert(self):
        cone = cones.orthant(3)
        A = maps.make_map([Linear(np.diag([1.0, 2.0, 3.0]))], cone, cone)
        phi = maps.compose(maps.vinberg_star(cone), A)
        x = np.array([1.0, 1.0, 2.0])
        assert_allclose(phi(x), [1.0, 0.5, 1.0 / 6.0])
        assert_allclose(maps.invert(phi)(phi(x)), x)
        assert_allclose(maps.identity_map(cone)(x), x)

    def test_product_map_round_trip_through_dict(self):
        o2, l3 = cones.orthant(2), cones.lorentz(3)
        cone = cones.product(o2, l3)
        phi = ConeMap((ProductMap((maps.vinberg_star(o2), maps.vinberg_star(l3))),), cone, cone)
        data = phi.to_dict()
        assert data["pipeline"][0]["op"] == "product"
        assert data["pipeline"][0]["factors"][1]["pipeline"] == [{"op": "lorentz_star"}]


class TestClassification:
    def test_star_on_psd3_is_gauge_reversing(self):
        report = maps.classify(maps.vinberg_star(cones.psd(3)), samples=60)
        assert report.gauge_reversing.passed
        assert report.antitone.passed
        assert report.thompson_isometry.passed
        assert not report.gauge_preserving.passed
        assert report.homogeneity_degree == pytest.approx(-1.0, abs=1e-6)

    def test_automorphism_is_gauge_preserving_and_linear(self):
        cone = cones.psd(2)
        C = maps.congruence_matrix(np.array([[2.0, 1.0], [0.0, 1.0]]))
        report = maps.classify(maps.make_map([Linear(C)], cone, cone), samples=60)
        assert report.gauge_preserving.passed
        assert report.isotone.passed
        assert report.homogeneity_degree == pytest.approx(1.0, abs=1e-6)
        assert report.linear_fit is not None
        assert_allclose(np.array(report.linear_fit.matrix), C, atol=1e-8)

    def test_power_map_is_rejected(self):
        report = maps.classify(power_map(cones.orthant(3)), samples=60)
        assert not report.gauge_preserving.passed
        assert not report.gauge_reversing.passed
        assert not report.thompson_isometry.passed
        assert report.isotone.passed
        assert report.homogeneity_degree == pytest.approx(0.5, abs=1e-6)

    def test_composition_of_reversing_maps_is_linear(self):
        cone = cones.lorentz(4)
        star = maps.vinberg_star(cone)
        A = maps.lorentz_boost(4, 0.6, axis=2)
        conjugated = ConeMap((Linear(np.linalg.inv(A)),) + star.pipeline + (Linear(A),), cone, cone)
        _, residual = maps.fit_linear(maps.compose(star, conjugated))
        assert residual <= 1e-8

    def test_classification_is_deterministic(self):
        phi = maps.vinberg_star(cones.lorentz(3))
        assert maps.classify(phi, samples=30, seed=3) == maps.classify(phi, samples=30, seed=3)


class TestDerivatives:
    def test_derivative_of_linear_map(self):
        A = np.array([[2.0, 1.0], [0.5, 3.0]])
        assert_allclose(maps.derivative(Linear(A).apply, [1.0, 2.0]), A, atol=1e-8)

    def test_make_involution_fixes_point(self):
        cone = cones.orthant(3)
        phi = maps.make_map([OrthantInverse(), Scale(2.0)], cone, cone)
        b = cones.base_point(cone)
        involution = maps.make_involution(phi, b)
        assert_allclose(involution(b), b, atol=1e-8)
        x = np.array([1.0, 2.0, 4.0])
        assert_allclose(involution(involution(x)), x, rtol=1e-7)

    def test_make_involution_requires_interior_point(self):
        phi = maps.vinberg_star(cones.orthant(2))
        with pytest.raises(MembershipError):
            maps.make_involution(phi, [1.0, 0.0])

    def test_make_involution_lorentz_star_off_base_point(self):
        x = np.array([2.0, 1.0, 0.0])
        involution = maps.make_involution(maps.vinberg_star(cones.lorentz(3)), x)
        assert np.linalg.norm(involution(x) - x) <= 1e-6 * np.linalg.norm(x)

    def test_make_involution_rejects_wrong_degree(self):
        with pytest.raises(PreconditionError, match="degree"):
            maps.make_involution(power_map(cones.orthant(3)), [1.0, 2.0, 4.0])

    def test_make_involution_rejects_unfixed_point(self, monkeypatch):
        cone = cones.orthant(3)
        phi = maps.make_map([OrthantInverse()], cone, cone)
        monkeypatch.setattr(maps, "derivative", lambda cmap, x, h: -2.0 * np.eye(3))
        with pytest.raises(VerificationError):
            maps.make_involution(phi, [1.0, 1.0, 1.0])

    def test_factor_map(self):
        o2, p2 = cones.orthant(2), cones.psd(2)
        cone = cones.product(o2, p2)
        first = maps.make_map([Linear(np.diag([2.0, 3.0]))], o2, o2)
        second = ConeMap((PsdInverse(2),), p2, p2)
        phi = maps.make_map([ProductMap((first, second))], cone, cone)
        assert_allclose(maps.factor_map(phi, 0)([1.0, 1.0]), [2.0, 3.0])
        x2 = cones.svec(np.array([[2.0, 0.5], [0.5, 1.0]]))
        assert_allclose(maps.factor_map(phi, 1)(x2), second(x2))
        with pytest.raises(UnsupportedConeError):
            maps.factor_map(first, 0)


class TestBlocks:
    def test_restriction_and_embedding_round_trip(self):
        o2, l3 = cones.orthant(2), cones.lorentz(3)
        cone = cones.product(o2, l3)
        fill = cones.base_point(cone)
        restrict = Restriction(2, 5, fill)
        x = np.array([1.0, 2.0, 3.0, 1.0, 0.5])
        assert_allclose(restrict.apply(x), [3.0, 1.0, 0.5])
        embed = restrict.inverse()
        assert isinstance(embed, Embedding)
        assert_allclose(embed.apply([3.0, 1.0, 0.5]), np.concatenate([fill[:2], [3.0, 1.0, 0.5]]))
        assert embed.inverse().to_dict() == restrict.to_dict()

        cmap = ConeMap((restrict,), cone, l3)
        back = maps.invert(cmap)
        assert back.source == l3 and back.target == cone
        assert_allclose(cmap(back([2.0, 1.0, 1.0])), [2.0, 1.0, 1.0])
        assert restrict.to_dict() == {"op": "restrict", "start": 2, "stop": 5, "fill": fill.tolist()}
