"""Bilinear form induced by a gauge-reversing involution, with its certificate.

For an extremal generator x the map y -> M(x, phi(y)) is linear on the cone;
extending bilinearly over a basis of extremal generators gives B(y, x).
On a symmetric cone with the star map, B is a positive-definite inner product
for which the cone is self-dual.
"""
import logging
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, PrivateAttr

from . import config
from .cones import (
    ConeSpec,
    base_point,
    check_point,
    contains,
    extremal_generators,
    is_extremal,
    margin,
    minimizing_generator,
)
from .errors import PreconditionError
from .gauges import raw_gauge
from .maps import ConeMap, classify
from .sampling import make_rng, sample_interior

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-9
EIGENVALUE_MARGIN = 1e-10
FIXED_POINT_TOL = 1e-8


class BilinearFormCertificate(BaseModel):
    matrix: List[List[float]]
    base_point: List[float]
    generator_basis: List[List[float]]
    symmetry_error: float
    symmetry_pairs: int
    min_eigenvalue: float
    positivity_samples: float
    extremal_diag_error: float
    linearity_error: float
    basis_drift: float
    self_duality: bool
    seed: int

    _cone: Any = PrivateAttr(default=None)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix)

    @property
    def positive_definite(self) -> bool:
        scale = float(np.abs(self.array).max())
        return self.min_eigenvalue > EIGENVALUE_MARGIN * scale

    def passed(self, tol: float = 1e-8) -> bool:
        return (self.symmetry_error <= SYMMETRY_TOL and self.positive_definite
                and self.extremal_diag_error <= tol and self.basis_drift <= tol
                and self.self_duality)


def greedy_basis(generators: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """First generators (in order) that raise the rank; rows."""
    chosen: List[np.ndarray] = []
    for g in generators:
        trial = np.array(chosen + [g])
        if np.linalg.matrix_rank(trial, tol=tol) == len(chosen) + 1:
            chosen.append(g)
        if len(chosen) == generators.shape[1]:
            break
    return np.array(chosen)


def _form_matrix(cone: ConeSpec, phi: ConeMap, basis: np.ndarray,
                 rng: np.random.Generator) -> tuple:
    """Assemble B with B(y, x) = y^T B x, plus the worst linearity residual."""
    dim = cone.ambient_dim
    ys = sample_interior(cone, 2 * dim, rng)
    checks = sample_interior(cone, dim, rng)
    images = np.array([phi(y) for y in ys])
    check_images = np.array([phi(y) for y in checks])
    L = np.zeros((dim, dim))
    linearity = 0.0
    for j, x in enumerate(basis):
        values = np.array([raw_gauge(cone, x, u) for u in images])
        ell, *_ = np.linalg.lstsq(ys, values, rcond=None)
        L[:, j] = ell
        expected = np.array([raw_gauge(cone, x, u) for u in check_images])
        linearity = max(linearity, float(np.max(np.abs(checks @ ell - expected) / np.abs(expected))))
    # B(y, x) = sum_j c_j ell_j(y) with x = sum_j c_j x_j
    return L @ np.linalg.inv(basis.T), linearity


def _select_basis(cone: ConeSpec, seed: int) -> np.ndarray:
    basis = greedy_basis(extremal_generators(cone, seed=seed))
    if basis.shape[0] < cone.ambient_dim:
        raise PreconditionError("extremal generators do not contain a basis")
    return basis


def _alternate_basis(cone: ConeSpec, basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A second extremal basis: reshuffled sampled generators or rescaled rows."""
    if cone.kind in ("lorentz", "psd") or any(f.kind in ("lorentz", "psd") for f in cone.factors):
        return _select_basis(cone, seed=int(rng.integers(1 << 30)))
    scales = np.exp(rng.uniform(-1.0, 1.0, size=(basis.shape[0], 1)))
    return (basis * scales)[rng.permutation(basis.shape[0])]


def _symmetry_pool(cone: ConeSpec, seed: int) -> np.ndarray:
    """Positively rescaled extremal generators, enough for 2 dim^2 unordered pairs."""
    dim = cone.ambient_dim
    size = int(np.ceil((1.0 + np.sqrt(1.0 + 16.0 * dim ** 2)) / 2.0))
    G = np.resize(extremal_generators(cone, seed=seed + 1), (size, dim))
    scales = np.exp(make_rng(seed + 3).uniform(-1.0, 1.0, size=(size, 1)))
    return G * scales


def _symmetry_error(cone: ConeSpec, phi: ConeMap, pool: np.ndarray, b: np.ndarray,
                    scale: float) -> tuple:
    """Worst |B(g_i, g_j) - B(g_j, g_i)| from gauge values, with the pair count.

    B(g, h) = M(h, phi(g + b)) - M(h, b), since y -> M(h, phi(y)) is linear on the cone.
    """
    shifted = [phi(g + b) for g in pool]
    offsets = np.array([raw_gauge(cone, h, b) for h in pool])
    table = np.array([[raw_gauge(cone, h, u) for h in pool] for u in shifted]) - offsets
    norms = np.linalg.norm(pool, axis=1)
    upper = np.triu_indices(pool.shape[0], k=1)
    defects = np.abs(table - table.T)[upper] / (np.outer(norms, norms)[upper] * scale)
    return float(defects.max()), int(defects.size)


def self_duality_check(cone: ConeSpec, B: np.ndarray, rng: np.random.Generator,
                       samples: int) -> bool:
    """Compare the cone with its B-dual on sampled vectors, both directions."""
    ys = sample_interior(cone, samples, rng)
    G = extremal_generators(cone, seed=int(rng.integers(1 << 30)))
    # every y in C is B-positive against the closed cone
    if np.min(ys @ B @ G.T) <= 0.0:
        return False
    # every B-positive vector lies in the closure
    for v in rng.normal(size=(samples, cone.ambient_dim)):
        size = float(np.linalg.norm(v))
        w = B.T @ v
        g = minimizing_generator(cone, w)
        lowest = float(w @ g) / np.linalg.norm(g)
        if abs(lowest) <= 1e-7 * size * np.linalg.norm(B) or abs(margin(cone, v)) <= 1e-7 * size:
            continue
        if (lowest > 0) != contains(cone, v, strict=False, tol=0.0):
            return False
    return True


def build_form(cone: ConeSpec, phi: ConeMap, basis: Optional[np.ndarray] = None,
               samples: int = config.DEFAULT_SAMPLES, seed: int = config.DEFAULT_SEED,
               gate_tol: float = 1e-6) -> BilinearFormCertificate:
    """Build the form B(y, x) = M(x, phi(y)) and evaluate every certificate check."""
    report = classify(phi, samples=min(samples, 100), seed=seed, tol=gate_tol)
    if not report.gauge_reversing.passed:
        raise PreconditionError(
            f"map is not gauge-reversing (worst relative error {report.gauge_reversing.worst:.3g})"
        )
    b = base_point(cone)
    if np.linalg.norm(phi(b) - b) > FIXED_POINT_TOL * np.linalg.norm(b):
        raise PreconditionError("map does not fix the base point; normalize it with make_involution first")

    rng = make_rng(seed)
    if basis is None:
        basis = _select_basis(cone, seed)
    else:
        basis = np.array([check_point(cone, g) for g in basis])
        if basis.shape[0] != cone.ambient_dim or np.linalg.matrix_rank(basis) < cone.ambient_dim:
            raise PreconditionError("supplied basis is rank-deficient")
        if not all(is_extremal(cone, g) for g in basis):
            raise PreconditionError("supplied basis vectors must be extremal generators")

    B, linearity = _form_matrix(cone, phi, basis, rng)
    scale = float(np.abs(B).max())

    symmetry, symmetry_pairs = _symmetry_error(cone, phi, _symmetry_pool(cone, seed), b, scale)

    min_eig = float(np.linalg.eigvalsh(0.5 * (B + B.T)).min())

    ys = sample_interior(cone, config.POSITIVITY_PAIRS, rng)
    zs = sample_interior(cone, config.POSITIVITY_PAIRS, rng)
    norms = np.linalg.norm(ys, axis=1) * np.linalg.norm(zs, axis=1)
    positivity = float(np.min(np.einsum("ij,jk,ik->i", ys, B, zs) / norms))

    diag = [abs(float(g @ B @ g) - raw_gauge(cone, g, b) ** 2) for g in extremal_generators(cone, seed=seed + 2)]
    extremal_diag = float(max(diag))

    B_alt, _ = _form_matrix(cone, phi, _alternate_basis(cone, basis, rng), rng)
    drift = float(np.abs(B_alt - B).max()) / scale

    dual_ok = self_duality_check(cone, B, rng, samples)

    cert = BilinearFormCertificate(
        matrix=B.tolist(),
        base_point=b.tolist(),
        generator_basis=basis.tolist(),
        symmetry_error=symmetry,
        symmetry_pairs=symmetry_pairs,
        min_eigenvalue=min_eig,
        positivity_samples=positivity,
        extremal_diag_error=extremal_diag,
        linearity_error=linearity,
        basis_drift=drift,
        self_duality=dual_ok,
        seed=seed,
    )
    cert._cone = cone
    logger.info("form on %s: symmetry %.2e, min eigenvalue %.4g, drift %.2e, self-dual %s",
                cone, symmetry, min_eig, drift, dual_ok)
    return cert


def koecher_closure_test(cert: BilinearFormCertificate, x, samples: int = 100,
                         seed: int = config.DEFAULT_SEED, tol: float = 1e-9) -> bool:
    """Whether 'B(x, y) >= 0 for all y in C' agrees with closure membership of x."""
    cone: ConeSpec = cert._cone
    if cone is None:
        raise PreconditionError("certificate was not built by build_form")
    x = check_point(cone, x)
    B = cert.array
    ys = sample_interior(cone, samples, make_rng(seed))
    lowest = float(np.min((ys @ (B.T @ x)) / np.linalg.norm(ys, axis=1)))
    g = minimizing_generator(cone, B.T @ x)
    lowest = min(lowest, float((B.T @ x) @ g) / float(np.linalg.norm(g)))
    positive = lowest >= -tol * max(1.0, float(np.linalg.norm(x)))
    return positive == contains(cone, x, strict=False, tol=tol)


def fixed_between_error(cone: ConeSpec, phi: ConeMap, samples: int = config.DEFAULT_SAMPLES,
                        seed: int = config.DEFAULT_SEED) -> float:
    """Worst relative defect of M(z, b) M(b, phi z) = M(z, phi z)."""
    b = base_point(cone)
    worst = 0.0
    for z in sample_interior(cone, samples, make_rng(seed)):
        pz = phi(z)
        lhs = raw_gauge(cone, z, b) * raw_gauge(cone, b, pz)
        rhs = raw_gauge(cone, z, pz)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst
