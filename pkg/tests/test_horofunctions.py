import math

import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from conegauge import cones, gauges, horofunctions as hf, maps
from conegauge.errors import InvalidPayloadError, MembershipError, PreconditionError, UnsupportedConeError
from conegauge.horofunctions import (
    INF,
    Combined,
    FunkSingleton,
    ProductHoro,
    PushForward,
    ReverseFunk,
    ThompsonInteriorF,
    ThompsonInteriorR,
)
from conegauge.maps import Linear

from conftest import interior_points, seeds

O3 = cones.orthant(3)
E1, E2, E3 = (tuple(e) for e in np.eye(3))


class TestArithmetic:
    def test_absorbing_sum(self):
        assert hf.absorbing_sum(1.0, 2.0) == 3.0
        assert hf.absorbing_sum(INF, -INF) == -INF
        assert hf.absorbing_sum(INF, 1.0) == INF

    @pytest.mark.parametrize("c, expected", [(0.5, 1.5), (-0.5, 2.0), (INF, 1.0), (-INF, 2.0), (0.0, 2.0)])
    def test_combine(self, c, expected):
        assert hf.combine(1.0, 2.0, c) == expected


class TestPayloads:
    def test_reverse_funk_validation(self):
        with pytest.raises(InvalidPayloadError):
            ReverseFunk(O3, (1.0, 1.0, 1.0))
        with pytest.raises(InvalidPayloadError):
            ReverseFunk(O3, (1.0, -1.0, 0.0))
        with pytest.raises(InvalidPayloadError):
            ReverseFunk(O3, (0.0, 0.0, 0.0))

    def test_reverse_funk_vanishes_at_base_point(self):
        r = ReverseFunk(O3, (1.0, 1.0, 0.0))
        assert r.evaluate(cones.base_point(O3)) == pytest.approx(0.0, abs=1e-15)
        # log M((1,1,0)/(1,2,4)) - log M((1,1,0)/b)
        assert r.evaluate([1.0, 2.0, 4.0]) == pytest.approx(0.0)
        assert r.evaluate([0.5, 2.0, 4.0]) == pytest.approx(math.log(2.0))

    def test_funk_singleton_is_normalized(self):
        f = FunkSingleton(O3, (2.0, 0.0, 0.0))
        assert f.functional == (1.0, 0.0, 0.0)
        assert f.evaluate([3.0, 1.0, 1.0]) == pytest.approx(math.log(3.0))
        with pytest.raises(InvalidPayloadError):
            FunkSingleton(O3, (1.0, 1.0, 0.0))
        with pytest.raises(InvalidPayloadError):
            FunkSingleton(O3, (-1.0, 0.0, 0.0))

    def test_interior_payloads_need_open_cone(self):
        with pytest.raises(InvalidPayloadError):
            ThompsonInteriorR(O3, (1.0, 0.0, 1.0))
        with pytest.raises(InvalidPayloadError):
            ThompsonInteriorF(O3, (1.0, 0.0, 1.0))

    def test_combined_validation(self):
        with pytest.raises(InvalidPayloadError):
            Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E1), 0.0)
        with pytest.raises(InvalidPayloadError):
            Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), math.nan)
        with pytest.raises(InvalidPayloadError):
            Combined(ReverseFunk(O3, E1), FunkSingleton(cones.lorentz(3), (1.0, 1.0, 0.0)), 0.0)

    def test_product_validation(self):
        o2 = cones.orthant(2)
        cone = cones.product(o2, o2)
        with pytest.raises(InvalidPayloadError):
            ProductHoro(cone, ReverseFunk(o2, (1.0, 0.0)), FunkSingleton(o2, (1.0, 0.0)), 0.0)
        with pytest.raises(InvalidPayloadError):
            ProductHoro(O3, ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0)), 0.0)

    def test_evaluate_requires_interior(self):
        with pytest.raises(MembershipError):
            hf.evaluate(ReverseFunk(O3, E1), [1.0, 0.0, 1.0])

    def test_to_dict(self):
        h = Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), -INF)
        assert h.to_dict() == {
            "tag": "combined",
            "first": {"tag": "reverse_funk", "x": [1.0, 0.0, 0.0]},
            "second": {"tag": "funk_singleton", "functional": [0.0, 1.0, 0.0]},
            "c": -INF,
        }


class TestDetours:
    @pytest.mark.parametrize("eps", [-1.0, -0.25, 0.25, 1.0])
    def test_product_shift_detour(self, eps):
        o2 = cones.orthant(2)
        cone = cones.product(o2, o2)
        r1, r2 = ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0))
        value = hf.detour_formula(ProductHoro(cone, r1, r2, 0.0), ProductHoro(cone, r1, r2, eps))
        assert value.delta == pytest.approx(abs(eps), abs=1e-12)

    def test_reverse_funk_cost(self):
        xi = ReverseFunk(O3, (1.0, 1.0, 0.0))
        assert hf.reverse_funk_cost(xi, xi) == pytest.approx(0.0, abs=1e-15)
        # leaves the face of (1, 0, 0)
        assert hf.reverse_funk_cost(ReverseFunk(O3, E1), xi) == INF
        assert hf.reverse_funk_cost(xi, ReverseFunk(O3, E1)) == pytest.approx(0.0, abs=1e-15)

    def test_face_gauge(self):
        assert hf.face_gauge(O3, [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == pytest.approx(2.0)
        assert hf.face_gauge(O3, [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]) == INF
        lorentz = cones.lorentz(3)
        assert hf.face_gauge(lorentz, [3.0, 3.0, 0.0], [1.0, 1.0, 0.0]) == pytest.approx(3.0)
        assert hf.face_gauge(lorentz, [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]) == INF

    def test_funk_singleton_detour(self):
        f2, f3 = FunkSingleton(O3, E2), FunkSingleton(O3, E3)
        assert hf.detour_formula(f2, f2).delta == 0.0
        assert hf.detour_formula(f2, f3).delta == INF

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_thompson_interior_detour_is_hilbert(self, seed):
        for cone in (O3, cones.lorentz(3)):
            x, y = interior_points(cone, 2, seed)
            for cls in (ThompsonInteriorR, ThompsonInteriorF):
                xi, eta = cls(cone, tuple(x)), cls(cone, tuple(y))
                total = hf.absorbing_sum(hf.thompson_cost(xi, eta), hf.thompson_cost(eta, xi))
                assert total == pytest.approx(gauges.hilbert(cone, x, y), abs=1e-9)
                assert hf.detour_formula(xi, eta).delta == pytest.approx(gauges.hilbert(cone, x, y), abs=1e-9)

    def test_cross_type_detour_is_infinite(self):
        xi = ThompsonInteriorR(O3, (1.0, 2.0, 3.0))
        eta = ThompsonInteriorF(O3, (1.0, 2.0, 3.0))
        assert hf.detour_formula(xi, eta).delta == INF
        combined = Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), 0.0)
        assert hf.detour_formula(xi, combined).delta == INF

    def test_combined_detour(self):
        first, second = ReverseFunk(O3, E1), FunkSingleton(O3, E2)
        xi = Combined(first, second, 0.0)
        eta = Combined(first, second, 0.5)
        assert hf.detour_formula(xi, eta).delta == pytest.approx(0.5)
        assert hf.detour_formula(xi, xi).delta == pytest.approx(0.0, abs=1e-15)

    def test_no_formula_for_mixed_metrics(self):
        with pytest.raises(InvalidPayloadError):
            hf.detour_formula(ReverseFunk(O3, E1), FunkSingleton(O3, E2))

    def test_empirical_is_a_lower_bound(self):
        o2 = cones.orthant(2)
        cone = cones.product(o2, o2)
        xi = ProductHoro(cone, ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0)), 0.0)
        eta = ProductHoro(cone, ReverseFunk(o2, (2.0, 0.0)), ReverseFunk(o2, (0.0, 0.5)), 0.4)
        formula = hf.detour_formula(xi, eta).H
        assert hf.detour_empirical(cone, xi, eta, count=2_000, seed=3) <= formula + 1e-9

    @pytest.mark.slow
    def test_empirical_approaches_formula(self):
        o2 = cones.orthant(2)
        cone = cones.product(o2, o2)
        xi = ProductHoro(cone, ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0)), 0.0)
        eta = ProductHoro(cone, ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0)), 0.5)
        formula = hf.detour_formula(xi, eta).H
        empirical = hf.detour_empirical(cone, xi, eta, count=100_000, seed=3)
        assert formula - 0.05 <= empirical <= formula + 1e-9


class TestSingletons:
    @pytest.mark.parametrize("h, expected", [
        (Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), INF), True),
        (Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), -INF), True),
        (Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E3), 0.5), False),
        (Combined(ReverseFunk(O3, (1.0, 1.0, 0.0)), FunkSingleton(O3, E3), INF), False),
        (Combined(ReverseFunk(O3, (1.0, 1.0, 0.0)), FunkSingleton(O3, E3), -INF), True),
        (ThompsonInteriorR(O3, (1.0, 2.0, 3.0)), False),
        (FunkSingleton(O3, E3), True),
        (ReverseFunk(O3, E1), True),
    ], ids=lambda v: str(v) if isinstance(v, bool) else v.tag)
    def test_singleton_table(self, h, expected):
        assert hf.is_singleton(h) is expected

    def test_push_forward_keeps_singleton_status(self):
        phi = maps.make_map([Linear(np.diag([2.0, 3.0, 4.0]))], O3, O3)
        assert hf.is_singleton(hf.push_forward(ReverseFunk(O3, E1), phi))
        assert not hf.is_singleton(hf.push_forward(ReverseFunk(O3, (1.0, 1.0, 0.0)), phi))


class TestSequences:
    def test_scaled_sequence_converges_to_thompson_r(self):
        x = np.array([1.0, 2.0, 3.0])
        probes = interior_points(O3, 10, 4)
        seq = [np.exp(k) * x for k in range(21)]
        table = hf.horofunction_from_sequence(O3, "thompson", seq, probes)
        assert table.converged
        h = ThompsonInteriorR(O3, tuple(x))
        assert_allclose(table.limit, [h.evaluate(p) for p in probes], atol=1e-9)

    def test_radial_sequence_converges_to_reverse_funk(self):
        p = np.array([1.0, 0.5, 0.0])
        b = cones.base_point(O3)
        probes = interior_points(O3, 10, 5)
        seq = [p + np.exp(-k) * b for k in range(21)]
        table = hf.horofunction_from_sequence(O3, "rfunk", seq, probes)
        h = ReverseFunk(O3, tuple(p))
        assert_allclose(table.limit, [h.evaluate(q) for q in probes], atol=1e-6)

    @pytest.mark.parametrize("c", [0.0, 0.5, -0.7])
    def test_busemann_sequence_converges_to_combined(self, c):
        seq = hf.thompson_busemann_sequence(O3, E1, E2, c, steps=16)
        probes = interior_points(O3, 10, 9)
        table = hf.horofunction_from_sequence(O3, "thompson", seq, probes, tol=1e-5)
        h = Combined(ReverseFunk(O3, E1), FunkSingleton(O3, E2), c)
        assert table.converged
        assert_allclose(table.limit, [h.evaluate(p) for p in probes], atol=1e-5)

    def test_thompson_ray_is_almost_geodesic(self):
        x = np.array([1.0, 2.0, 3.0])
        ts = np.linspace(0.0, 5.0, 11)
        points = [np.exp(t) * x for t in ts]
        assert hf.is_almost_geodesic(O3, "thompson", ts, points, eps=1e-9)
        assert hf.is_epsilon_almost_geodesic(O3, "thompson", points, eps=1e-9)

    def test_backtracking_is_not_almost_geodesic(self):
        x = np.array([1.0, 2.0, 3.0])
        points = [x, 2.0 * x, x]
        assert not hf.is_epsilon_almost_geodesic(O3, "thompson", points, eps=0.1)
        assert not hf.is_almost_geodesic(O3, "thompson", [0.0, 1.0, 2.0], points, eps=0.1)

    def test_path_grid_must_increase(self):
        x = np.ones(3)
        with pytest.raises(PreconditionError):
            hf.is_almost_geodesic(O3, "thompson", [0.0, 1.0, 1.0], [x, x, x], eps=0.1)
        with pytest.raises(PreconditionError):
            hf.is_almost_geodesic(O3, "thompson", [1.0, 2.0], [x, x], eps=0.1)

    @pytest.mark.parametrize("c, expected", [(1.0, [3.0, 2.0]), (-1.0, [2.0, 3.0]), (INF, [3.0, 0.0]),
                                             (-INF, [0.0, 3.0])])
    def test_product_busemann_path(self, c, expected):
        path = hf.product_busemann_path(lambda s: np.array([s]), lambda s: np.array([s]), c)
        assert_allclose(path(3.0), expected)


class TestPushForwardAndSup:
    def test_push_forward_through_diagonal_map(self):
        A = np.diag([2.0, 3.0, 4.0])
        phi = maps.make_map([Linear(A)], O3, O3)
        x = np.array([1.0, 1.0, 0.0])
        pushed = hf.push_forward(ReverseFunk(O3, tuple(x)), phi)
        direct = ReverseFunk(O3, tuple(A @ x))
        assert pushed.evaluate(cones.base_point(O3)) == pytest.approx(0.0, abs=1e-12)
        for y in interior_points(O3, 10, 6):
            assert pushed.evaluate(y) == pytest.approx(direct.evaluate(y), abs=1e-12)

    def test_push_forward_round_trip(self):
        phi = maps.make_map([Linear(np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]))], O3, O3)
        inner = ReverseFunk(O3, (1.0, 1.0, 0.0))
        pushed = PushForward(inner, phi)
        assert pushed.metric == inner.metric and pushed.cone == O3
        back = PushForward(pushed, maps.invert(phi))
        b = cones.base_point(O3)
        for y in interior_points(O3, 10, 9):
            assert back.evaluate(y) == pytest.approx(inner.evaluate(y) - inner.evaluate(b), abs=1e-12)
        data = pushed.to_dict()
        assert data["tag"] == "push_forward"
        assert data["inner"] == inner.to_dict()
        assert data["map"]["pipeline"][0]["op"] == "linear"

    def test_push_forward_source_must_match(self):
        phi = maps.vinberg_star(cones.lorentz(3))
        with pytest.raises(InvalidPayloadError):
            hf.push_forward(ReverseFunk(O3, E1), phi)

    def test_funk_distance_is_sup_over_facet_singletons(self, square):
        for x, y in zip(interior_points(square, 20, 7), interior_points(square, 20, 8)):
            assert hf.distance_from_busemann_sup(square, x, y) == pytest.approx(
                gauges.funk(square, x, y), abs=1e-12)

    def test_sup_needs_polyhedral_cone(self):
        with pytest.raises(UnsupportedConeError):
            hf.distance_from_busemann_sup(cones.lorentz(3), [1.0, 0.0, 0.0], [2.0, 0.5, 0.0])
