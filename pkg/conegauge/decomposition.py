"""Split a Thompson isometry into a gauge-preserving and a gauge-reversing factor.

The dual extremal functionals f are sorted by the homogeneity degree of
f o phi^-1 (+1 or -1). The projections onto the two factor cones are the
alpha-limits of phi^-1(alpha phi z) / alpha and phi^-1(phi z / alpha) / alpha.
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, PrivateAttr

from . import config
from .cones import ConeSpec, base_point, dual_cone, extremal_generators, margin
from .errors import ConeGaugeError, ConvergenceError, VerificationError
from .gauges import raw_gauge
from .maps import ClassificationReport, ConeMap, classify_pairs, fit_degree
from .sampling import make_rng, sample_interior

logger = logging.getLogger(__name__)

RANK_TOL = 1e-6
IDENTITY_TOL = 1e-8
RESIDUAL_TOL = 1e-7
ANTI_DEGREE_TOL = 0.01


class Projection(BaseModel):
    P1: List[float]
    P2: List[float]
    defect1: float
    defect2: float


class DecompositionResult(BaseModel):
    ok: bool
    failures: List[str] = []
    functionals: List[List[float]] = []
    F1_indices: List[int] = []
    F2_indices: List[int] = []
    dims: Tuple[int, int] = (0, 0)
    C1_basis: List[List[float]] = []
    C2_basis: List[List[float]] = []
    C1_prime_basis: List[List[float]] = []
    C2_prime_basis: List[List[float]] = []
    projection_defect: float = 0.0
    sum_error: float = 0.0
    coordinate_error: float = 0.0
    product_law_error: float = 0.0
    phi1_report: Optional[ClassificationReport] = None
    phi2_report: Optional[ClassificationReport] = None
    phi2_degree: Optional[float] = None
    residual: float = 0.0
    samples: int = 0
    seed: int = config.DEFAULT_SEED

    _phi1: Optional[Callable] = PrivateAttr(default=None)
    _phi2: Optional[Callable] = PrivateAttr(default=None)

    @property
    def phi1(self) -> Optional[Callable]:
        return self._phi1

    @property
    def phi2(self) -> Optional[Callable]:
        return self._phi2


def dual_functionals(cone: ConeSpec, seed: int = config.DEFAULT_SEED) -> np.ndarray:
    """Dual extremal generators as rows, normalized so f(b) = 1."""
    F = extremal_generators(dual_cone(cone), seed=seed)
    return F / (F @ base_point(cone))[:, None]


def _degrees(phi_inv: Callable, points: np.ndarray, F: np.ndarray,
             lambdas: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Per-functional slope of log f(phi^-1(lam w)) against log lam."""
    log_lam = np.log(np.asarray(lambdas))
    values = np.array([[F @ phi_inv(lam * w) for lam in lambdas] for w in points])
    # values[point, lambda, functional]
    logs = np.log(np.maximum(values, 1e-300))
    slopes = np.array([[np.polyfit(log_lam, logs[p, :, j], 1)[0] for j in range(F.shape[0])]
                       for p in range(points.shape[0])])
    degree = slopes.mean(axis=0)
    return degree, np.abs(slopes - degree).max(axis=0)


def _indecomposable_blocks(cone: ConeSpec) -> List[slice]:
    blocks = cone.blocks() if cone.kind == "product" else [(slice(0, cone.ambient_dim), cone)]
    return [s for s, f in blocks
            if (f.kind == "lorentz" and f.n >= 3) or (f.kind == "psd" and f.n >= 2)]


def partition_singletons(cone: ConeSpec, phi: ConeMap, samples: int = 6,
                         seed: int = config.DEFAULT_SEED,
                         tol: float = config.DEGREE_TOL) -> Tuple[List[int], List[int]]:
    """Indices into dual_functionals(cone, seed) whose push-forward has degree +1 and -1."""
    F = dual_functionals(cone, seed)
    points = sample_interior(phi.target, samples, make_rng(seed))
    degree, spread = _degrees(phi.inverse(), points, F, config.LAMBDA_GRID)
    F1, F2 = [], []
    for j, (d, s) in enumerate(zip(degree, spread)):
        if abs(d - 1.0) <= tol and s <= tol:
            F1.append(j)
        elif abs(d + 1.0) <= tol and s <= tol:
            F2.append(j)
        else:
            raise VerificationError(f"functional {j} has ambiguous push-forward degree {d:.4f}")
    for block in _indecomposable_blocks(cone):
        inside = {j for j in range(F.shape[0]) if np.linalg.norm(F[j, block]) > 0.0}
        if inside & set(F1) and inside & set(F2):
            raise VerificationError("an indecomposable factor received both verdicts")
    logger.info("singleton partition on %s: %d homogeneous, %d anti-homogeneous", cone, len(F1), len(F2))
    return F1, F2


def _limit(fn: Callable[[float], np.ndarray], alpha_grid: Sequence[float], scale: float) -> Tuple[np.ndarray, float]:
    previous = fn(alpha_grid[0])
    defect = np.inf
    for alpha in alpha_grid[1:]:
        current = fn(alpha)
        defect = float(np.linalg.norm(current - previous)) / scale
        previous = current
    return previous, defect


def projections(cone: ConeSpec, phi: ConeMap, z, alpha_grid: Sequence[float] = config.ALPHA_GRID,
                tol: float = config.CAUCHY_TOL) -> Projection:
    """alpha-limits of phi^-1(alpha phi z)/alpha and phi^-1(phi z/alpha)/alpha."""
    z = np.asarray(z, dtype=float)
    inverse = phi.inverse()
    w = phi(z)
    scale = max(float(np.linalg.norm(z)), 1e-300)
    p1, d1 = _limit(lambda a: inverse(a * w) / a, alpha_grid, scale)
    p2, d2 = _limit(lambda a: inverse(w / a) / a, alpha_grid, scale)
    worst = max(d1, d2)
    if worst > tol:
        raise ConvergenceError("projection limits are not Cauchy on the alpha grid", defect=worst)
    return Projection(P1=p1.tolist(), P2=p2.tolist(), defect1=d1, defect2=d2)


def _span(rows: np.ndarray, dim: int, scale: float) -> np.ndarray:
    """Orthonormal basis (columns) of the span of sampled rows; scale is the size of the inputs."""
    if rows.size == 0:
        return np.zeros((dim, 0))
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * scale))
    return vt[:rank].T


def _project_all(cone: ConeSpec, phi: ConeMap, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    P1, P2, defect = [], [], 0.0
    for z in points:
        proj = projections(cone, phi, z)
        P1.append(proj.P1)
        P2.append(proj.P2)
        defect = max(defect, proj.defect1, proj.defect2)
    return np.array(P1), np.array(P2), defect


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _factor_report(fn: Callable, cone: ConeSpec, cone_prime: ConeSpec, xs: np.ndarray, ys: np.ndarray,
                   fill: np.ndarray, fill_prime: np.ndarray, basis: np.ndarray, basis_prime: np.ndarray,
                   functionals: np.ndarray, rng: np.random.Generator, seed: int) -> ClassificationReport:
    """Classify a factor map using gauges of the faces, M_C(x, y + fill)."""
    pairs = []
    for x in xs[:min(len(xs), 50)]:
        step = ys[int(rng.integers(len(ys)))]
        pairs.append((x, x + np.exp(rng.uniform(-2.0, 1.0)) * step))
    return classify_pairs(
        fn, xs, ys,
        lambda a, b: raw_gauge(cone, a, b + fill),
        lambda a, b: raw_gauge(cone_prime, a, b + fill_prime),
        ordered_pairs=pairs,
        target_margin=lambda v: margin(cone_prime, v),
        functionals=functionals,
        fit_points=xs,
        seed=seed,
        coords_in=basis,
        coords_out=basis_prime,
    )


def decompose(cone: ConeSpec, cone_prime: ConeSpec, phi: ConeMap, samples: int = config.DEFAULT_SAMPLES,
              seed: int = config.DEFAULT_SEED) -> DecompositionResult:
    """Recover C = C1 + C2 and the factors phi1, phi2 of a Thompson isometry.

    The target base point is taken to be phi(b), so no rescaling is applied.
    Verification failures are collected in the result instead of raised.
    """
    result = DecompositionResult(ok=False, samples=samples, seed=seed)
    failures: List[str] = []
    try:
        F = dual_functionals(cone, seed)
        F1, F2 = partition_singletons(cone, phi, seed=seed)
        result.functionals = F.tolist()
        result.F1_indices, result.F2_indices = F1, F2

        rng = make_rng(seed)
        dim, dim_prime = cone.ambient_dim, cone_prime.ambient_dim
        zs = sample_interior(cone, samples, rng)
        P1, P2, defect = _project_all(cone, phi, zs)
        inverse = phi.inverse()
        ws = sample_interior(cone_prime, samples, rng)
        Q1, Q2, defect_prime = _project_all(cone_prime, inverse, ws)
        result.projection_defect = max(defect, defect_prime)

        scale, scale_prime = np.linalg.norm(zs, 2), np.linalg.norm(ws, 2)
        U1, U2 = _span(P1, dim, scale), _span(P2, dim, scale)
        V1, V2 = _span(Q1, dim_prime, scale_prime), _span(Q2, dim_prime, scale_prime)
        result.C1_basis, result.C2_basis = U1.T.tolist(), U2.T.tolist()
        result.C1_prime_basis, result.C2_prime_basis = V1.T.tolist(), V2.T.tolist()
        result.dims = (U1.shape[1], U2.shape[1])
        if np.linalg.matrix_rank(np.hstack([U1, U2]), tol=RANK_TOL) != dim or U1.shape[1] + U2.shape[1] != dim:
            failures.append("factor spans do not form a direct sum of the ambient space")
        if (V1.shape[1], V2.shape[1]) != result.dims:
            failures.append("source and target factor dimensions differ")

        result.sum_error = max(_relative(p1 + p2, z) for p1, p2, z in zip(P1, P2, zs))
        coordinate = 0.0
        for p1, p2, z in zip(P1, P2, zs):
            fz, f1, f2 = F @ z, F @ p1, F @ p2
            coordinate = max(coordinate,
                             float(np.abs(f1[F1] - fz[F1]).max(initial=0.0) / fz.max()),
                             float(np.abs(f1[F2]).max(initial=0.0) / fz.max()),
                             float(np.abs(f2[F2] - fz[F2]).max(initial=0.0) / fz.max()),
                             float(np.abs(f2[F1]).max(initial=0.0) / fz.max()))
        result.coordinate_error = coordinate
        if result.sum_error > IDENTITY_TOL:
            failures.append(f"P1 + P2 differs from the identity by {result.sum_error:.3g}")
        if coordinate > IDENTITY_TOL:
            failures.append(f"projection coordinates are off by {coordinate:.3g}")

        b = base_point(cone)
        proj_b = projections(cone, phi, b)
        e1, e2 = np.array(proj_b.P1), np.array(proj_b.P2)
        proj_image = projections(cone_prime, inverse, phi(b))
        e1_prime, e2_prime = np.array(proj_image.P1), np.array(proj_image.P2)

        def phi1(x1):
            return phi(np.asarray(x1, dtype=float) + e2) - e2_prime

        def phi2(x2):
            return phi(e1 + np.asarray(x2, dtype=float)) - e1_prime

        result._phi1, result._phi2 = phi1, phi2

        result.residual = max(_relative(phi1(p1) + phi2(p2), phi(z)) for p1, p2, z in zip(P1, P2, zs))
        if result.residual > RESIDUAL_TOL:
            failures.append(f"reassembled map differs from phi by {result.residual:.3g}")

        law = 0.0
        for i in range(len(zs) - 1):
            x1, x2, y1, y2 = P1[i], P2[i], P1[i + 1], P2[i + 1]
            whole = max(np.log(raw_gauge(cone, zs[i], zs[i + 1])), np.log(raw_gauge(cone, zs[i + 1], zs[i])))
            parts = []
            if U1.shape[1]:
                parts.append(max(np.log(raw_gauge(cone, x1, y1 + e2)), np.log(raw_gauge(cone, y1, x1 + e2))))
            if U2.shape[1]:
                parts.append(max(np.log(raw_gauge(cone, x2, y2 + e1)), np.log(raw_gauge(cone, y2, x2 + e1))))
            law = max(law, abs(whole - max(parts)))
        result.product_law_error = float(law)
        if law > IDENTITY_TOL:
            failures.append(f"Thompson product law fails by {law:.3g}")

        probes = dual_functionals(cone_prime, seed)
        G1, G2 = partition_singletons(cone_prime, inverse, seed=seed)
        if U1.shape[1]:
            report = _factor_report(phi1, cone, cone_prime, P1[: samples // 2], P1[samples // 2:],
                                    e2, e2_prime, U1, V1, probes[G1], rng, seed)
            result.phi1_report = report
            if not report.gauge_preserving.passed:
                failures.append("homogeneous factor is not gauge-preserving")
        if U2.shape[1]:
            report = _factor_report(phi2, cone, cone_prime, P2[: samples // 2], P2[samples // 2:],
                                    e1, e1_prime, U2, V2, probes[G2], rng, seed)
            result.phi2_report = report
            degree, _ = fit_degree(phi2, P2[:4], probes[G2])
            result.phi2_degree = degree
            if not report.gauge_reversing.passed:
                failures.append("anti-homogeneous factor is not gauge-reversing")
            if abs(degree + 1.0) > ANTI_DEGREE_TOL:
                failures.append(f"anti-homogeneous factor has degree {degree:.4f}")
    except (VerificationError, ConvergenceError) as e:
        failures.append(e.detail)
    except ConeGaugeError as e:
        logger.warning("decomposition aborted: %s", e.detail)
        failures.append(f"{type(e).__name__}: {e.detail}")

    result.failures = failures
    result.ok = not failures
    logger.info("decomposition on %s: dims %s, ok=%s", cone, result.dims, result.ok)
    return result
