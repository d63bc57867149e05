"""Seeded samplers for interior points and boundary-approaching grids."""
import logging
from typing import Optional

import numpy as np

from . import config
from .cones import (
    ConeSpec,
    base_point,
    extremal_generators,
    margin,
    svec,
)
from .errors import FaceEnumerationError

logger = logging.getLogger(__name__)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)


def _generator_mix(cone: ConeSpec, count: int, rng: np.random.Generator,
                   concentration: float) -> Optional[np.ndarray]:
    try:
        G = extremal_generators(cone, seed=int(rng.integers(1 << 30)))
    except FaceEnumerationError:
        return None
    G = G / np.linalg.norm(G, axis=1, keepdims=True)
    weights = rng.dirichlet(np.full(G.shape[0], concentration), size=count)
    return weights @ G


def _section_sample(cone: ConeSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    if cone.kind == "orthant":
        return np.exp(rng.normal(0.0, 0.7, size=(count, cone.n)))
    if cone.kind == "lorentz":
        if cone.n == 2:
            u = rng.choice([-1.0, 1.0], size=(count, 1))
        else:
            u = rng.normal(size=(count, cone.n - 1))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = 0.9 * np.sqrt(rng.uniform(0.0, 1.0, size=(count, 1)))
        return np.hstack([np.ones((count, 1)), r * u])
    if cone.kind == "psd":
        A = rng.normal(size=(count, cone.n, cone.n))
        return np.array([svec(a @ a.T / cone.n + 0.2 * np.eye(cone.n)) for a in A])
    if cone.kind in ("poly_h", "poly_v"):
        mixed = _generator_mix(cone, count, rng, concentration=2.0)
        if mixed is not None:
            return mixed
        # ball around the Chebyshev-style base point
        b = base_point(cone)
        radius = 0.9 * margin(cone, b)
        u = rng.normal(size=(count, cone.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return b + radius * rng.uniform(0.0, 1.0, size=(count, 1)) * u
    return np.hstack([_section_sample(f, count, rng) for f in cone.factors])


def sample_interior(cone: ConeSpec, count: int = config.DEFAULT_SAMPLES,
                    rng: Optional[np.random.Generator] = None, spread: float = 1.0) -> np.ndarray:
    """Interior points as rows: log-uniform radial scale times a section sample."""
    rng = make_rng() if rng is None else rng
    points = _section_sample(cone, count, rng)
    scale = np.exp(rng.uniform(-spread, spread, size=(count, 1)))
    return points * scale


def _approach_sample(cone: ConeSpec, count: int, rng: np.random.Generator, depth: float) -> np.ndarray:
    if cone.kind == "orthant":
        return np.exp(rng.uniform(-depth, depth, size=(count, cone.n)))
    if cone.kind == "product":
        return np.hstack([_approach_sample(f, count, rng, depth) for f in cone.factors])
    b = base_point(cone)
    mixed = _generator_mix(cone, count, rng, concentration=0.3)
    if mixed is None:
        mixed = _section_sample(cone, count, rng)
    t = np.exp(-rng.uniform(0.0, depth, size=(count, 1)))
    points = t * b + (1.0 - t) * mixed
    return points * np.exp(rng.uniform(-depth, depth, size=(count, 1)))


def log_grid(cone: ConeSpec, count: int, rng: Optional[np.random.Generator] = None,
             depth: float = 6.0) -> np.ndarray:
    """Interior grid that reaches toward the boundary and toward 0 and infinity.

    Used for empirical sup formulas, which are attained only in limits.
    """
    rng = make_rng() if rng is None else rng
    logger.debug("building %d-point log grid on %s (depth %.1f)", count, cone, depth)
    return _approach_sample(cone, count, rng, depth)
