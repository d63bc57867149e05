import numpy as np
import pytest
from hypothesis import strategies as st

from conegauge import cones, maps
from conegauge.maps import FunctionMap
from conegauge.sampling import make_rng, sample_interior

SQUARE_NORMALS = [[1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 0.0, -1.0]]
SQUARE_RAYS = [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [1.0, -1.0, -1.0]]

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)


def catalog():
    return [
        cones.orthant(3),
        cones.lorentz(3),
        cones.lorentz(4),
        cones.psd(2),
        cones.psd(3),
        cones.poly_h(SQUARE_NORMALS),
        cones.poly_v(SQUARE_RAYS),
        cones.product(cones.orthant(2), cones.lorentz(3)),
    ]


def cone_id(cone):
    return str(cone)


def power_map(cone, p=0.5):
    return maps.make_map([FunctionMap(lambda x: x ** p, lambda y: y ** (1.0 / p), "power")], cone, cone)


def interior_points(cone, count, seed):
    return sample_interior(cone, count, make_rng(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def square():
    return cones.poly_h(SQUARE_NORMALS)


@pytest.fixture
def square_v():
    return cones.poly_v(SQUARE_RAYS)
