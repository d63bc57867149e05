"""Gauge M(x/y), the four distances built from it, and straight-line Hilbert geometry."""
import logging
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import nnls

from . import config
from .cones import (
    ConeSpec,
    CrossSection,
    check_point,
    contains,
    face_directions,
    is_polyhedral,
    lp_extreme_shift,
    margin,
    minimal_face,
    smat,
    unit_normals,
)
from .errors import (
    ConeGaugeError,
    ConvergenceError,
    MembershipError,
    PreconditionError,
    UnsupportedConeError,
)

logger = logging.getLogger(__name__)


def _pencil(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of L^-1 X L^-T where Y = L L^T."""
    L = cholesky(Y, lower=True)
    Z = solve_triangular(L, X, lower=True)
    W = solve_triangular(L, Z.T, lower=True)
    eig, vecs = np.linalg.eigh(0.5 * (W + W.T))
    return eig, solve_triangular(L.T, vecs, lower=False)


def raw_gauge(cone: ConeSpec, x: np.ndarray, y: np.ndarray) -> float:
    """inf{lam : lam*y - x in the closed cone} for interior y and arbitrary x.

    Unlike ``gauge`` the value may be negative; no validation is done.
    """
    if cone.kind == "orthant":
        return float(np.max(x / y))
    if cone.kind == "poly_h":
        A = unit_normals(cone)
        return float(np.max((A @ x) / (A @ y)))
    if cone.kind == "lorentz":
        qy = y[0] ** 2 - y[1:] @ y[1:]
        qx = x[0] ** 2 - x[1:] @ x[1:]
        p = y[0] * x[0] - y[1:] @ x[1:]
        # p^2 - qy*qx written with 2x2 minors, exact zero for parallel x, y
        w = y[0] * x[1:] - x[0] * y[1:]
        wedge = np.outer(x[1:], y[1:])
        disc = w @ w - 0.5 * np.sum((wedge - wedge.T) ** 2)
        root = np.sqrt(max(disc, 0.0))
        if p >= 0:
            return float((p + root) / qy)
        # product of the roots is qx/qy; avoids cancellation
        denom = p - root
        return float(qx / denom) if denom != 0 else 0.0
    if cone.kind == "psd":
        eig, _ = _pencil(smat(x, cone.n), smat(y, cone.n))
        return float(eig[-1])
    if cone.kind == "poly_v":
        return lp_extreme_shift(cone.matrix, -x, -y, maximize=False)
    return max(raw_gauge(f, x[s], y[s]) for s, f in cone.blocks())


def gauge(cone: ConeSpec, x, y, tol: float = config.MEMBERSHIP_TOL) -> float:
    """M_C(x/y) for x in the closed cone and y in the open cone."""
    x = check_point(cone, x)
    y = check_point(cone, y)
    if not contains(cone, y, strict=True, tol=0.0):
        raise MembershipError("second gauge argument must lie in the open cone")
    if not contains(cone, x, strict=False, tol=tol * max(1.0, float(np.linalg.norm(x)))):
        raise MembershipError("first gauge argument must lie in the closed cone")
    return max(raw_gauge(cone, x, y), 0.0)


def gauge_oracle(cone: ConeSpec, x, y, tol: float = config.BISECTION_TOL,
                 max_iter: int = config.BISECTION_MAX_ITER) -> float:
    """Reference gauge by bisection on closure membership of lam*y - x."""
    x = check_point(cone, x)
    y = check_point(cone, y)

    def feasible(lam: float) -> bool:
        return contains(cone, lam * y - x, strict=False, tol=0.0)

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(100):
        if feasible(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("gauge oracle could not bracket the gauge", defect=hi)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def gauge_witness(cone: ConeSpec, x, y) -> dict:
    """Data realizing the gauge: active facet, eigenvector, boundary point or factor."""
    x = check_point(cone, x)
    y = check_point(cone, y)
    value = max(raw_gauge(cone, x, y), 0.0)
    witness: Dict[str, object] = {"gauge": value}
    if cone.kind == "orthant":
        witness["index"] = int(np.argmax(x / y))
    elif cone.kind == "poly_h":
        A = unit_normals(cone)
        index = int(np.argmax((A @ x) / (A @ y)))
        witness["facet"] = index
        witness["normal"] = [float(v) for v in cone.vectors[index]]
    elif cone.kind == "lorentz":
        witness["boundary_point"] = [float(v) for v in value * y - x]
    elif cone.kind == "psd":
        _, vecs = _pencil(smat(x, cone.n), smat(y, cone.n))
        v = vecs[:, -1]
        witness["eigenvector"] = [float(c) for c in v / np.linalg.norm(v)]
    elif cone.kind == "poly_v":
        weights, _ = nnls(cone.matrix.T, value * y - x)
        witness["support"] = [int(i) for i in np.flatnonzero(weights > 1e-9)]
    else:
        values = [raw_gauge(f, x[s], y[s]) for s, f in cone.blocks()]
        index = int(np.argmax(values))
        block, factor = cone.blocks()[index]
        witness["factor"] = index
        witness["witness"] = gauge_witness(factor, x[block], y[block])
    return witness


# ---------------------------------------------------------------------------
# Distances

def funk(cone: ConeSpec, x, y) -> float:
    """F(x, y) = log M(x/y); x may lie on the boundary."""
    value = gauge(cone, x, y)
    return float(np.log(value)) if value > 0 else -np.inf


def rfunk(cone: ConeSpec, x, y) -> float:
    """R(x, y) = F(y, x)."""
    return funk(cone, y, x)


def hilbert(cone: ConeSpec, x, y) -> float:
    return funk(cone, x, y) + funk(cone, y, x)


def thompson(cone: ConeSpec, x, y) -> float:
    return max(funk(cone, x, y), funk(cone, y, x))


METRICS: Dict[str, Callable[[ConeSpec, np.ndarray, np.ndarray], float]] = {
    "funk": funk,
    "rfunk": rfunk,
    "hilbert": hilbert,
    "thompson": thompson,
}


def metric_function(name: str) -> Callable[[ConeSpec, np.ndarray, np.ndarray], float]:
    try:
        return METRICS[name]
    except KeyError:
        raise PreconditionError(f"unknown metric '{name}', expected one of {sorted(METRICS)}") from None


def _fast_hilbert(cone: ConeSpec, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.log(raw_gauge(cone, x, y)) + np.log(raw_gauge(cone, y, x)))


# ---------------------------------------------------------------------------
# Straight lines in a cross-section

def _refine_exit(cone: ConeSpec, p: np.ndarray, d: np.ndarray, s: float) -> float:
    """Bisect the exit parameter until the boundary margin is below BISECTION_TOL."""
    if abs(margin(cone, p + s * d)) <= config.BISECTION_TOL:
        return s
    lo, hi, step = s, s, 1e-9
    for _ in range(60):
        if margin(cone, p + lo * d) >= 0:
            break
        lo = s * (1.0 - step)
        step *= 2.0
    step = 1e-9
    for _ in range(60):
        if margin(cone, p + hi * d) <= 0:
            break
        hi = s * (1.0 + step)
        step *= 2.0
    for _ in range(config.BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        value = margin(cone, p + mid * d)
        if abs(value) <= config.BISECTION_TOL or hi - lo <= 1e-16 * hi:
            return mid
        if value > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exit_parameter(cone: ConeSpec, p: np.ndarray, d: np.ndarray, refine: bool = True) -> float:
    """sup{s >= 0 : p + s*d in the closed cone} for interior p."""
    lam = raw_gauge(cone, -d, p)
    if not lam > 0:
        raise ConeGaugeError("line does not leave the cone; the cone is not proper")
    s = 1.0 / lam
    return _refine_exit(cone, p, d, s) if refine else s


def _on_section(cone: ConeSpec, section: CrossSection, x: np.ndarray) -> np.ndarray:
    x = check_point(cone, x)
    if abs(float(section.vector @ x) - section.level) > 1e-9 * max(1.0, float(np.linalg.norm(x))):
        raise MembershipError("point does not lie on the cross-section")
    if not contains(cone, x, strict=True, tol=0.0):
        raise MembershipError("point must lie in the open cone")
    return x


def boundary_intersections(cone: ConeSpec, section: CrossSection, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary points w, z of the line through x, y, in line order w, x, y, z."""
    x = _on_section(cone, section, x)
    y = _on_section(cone, section, y)
    d = y - x
    if np.linalg.norm(d) <= config.BISECTION_TOL:
        raise PreconditionError("x and y coincide")
    z = y + exit_parameter(cone, y, d) * d
    w = x - exit_parameter(cone, x, -d) * d
    return w, z


def funk_on_section(w, x, y, z) -> float:
    """F(x, y) = log |xz| / |yz|."""
    z = np.asarray(z, dtype=float)
    return float(np.log(np.linalg.norm(np.asarray(x) - z) / np.linalg.norm(np.asarray(y) - z)))


def rfunk_on_section(w, x, y, z) -> float:
    """R(x, y) = log |wy| / |wx|."""
    w = np.asarray(w, dtype=float)
    return float(np.log(np.linalg.norm(w - np.asarray(y)) / np.linalg.norm(w - np.asarray(x))))


def hilbert_cross_ratio(w, x, y, z) -> float:
    """Hilbert distance as the log cross-ratio of four collinear points."""
    return funk_on_section(w, x, y, z) + rfunk_on_section(w, x, y, z)


def hilbert_geodesic_point(cone: ConeSpec, section: CrossSection, x, y, t: float) -> np.ndarray:
    """Point p on the segment [x, y] with d_H(x, p) = t."""
    x = _on_section(cone, section, x)
    y = _on_section(cone, section, y)
    total = hilbert(cone, x, y)
    if t < -config.BISECTION_TOL or t > total + config.BISECTION_TOL:
        raise PreconditionError(f"t={t} outside [0, {total}]")
    if t <= 0.0:
        return x.copy()
    if t >= total:
        return y.copy()
    lo, hi = 0.0, 1.0
    for _ in range(config.BISECTION_MAX_ITER):
        if hi - lo <= config.BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _fast_hilbert(cone, x, x + mid * (y - x)) < t:
            lo = mid
        else:
            hi = mid
    return x + 0.5 * (lo + hi) * (y - x)


def hilbert_ball_boundary(cone: ConeSpec, section: CrossSection, center, radius: float,
                          directions) -> np.ndarray:
    """Points at Hilbert distance ``radius`` from ``center`` along section directions."""
    c = _on_section(cone, section, center)
    f = section.vector
    points = []
    for u in np.atleast_2d(np.asarray(directions, dtype=float)):
        u = u - (f @ u) / (f @ c) * c
        s_exit = exit_parameter(cone, c, u, refine=False)
        lo, hi = 0.0, s_exit
        for _ in range(config.BISECTION_MAX_ITER):
            if hi - lo <= config.BISECTION_TOL * s_exit:
                break
            mid = 0.5 * (lo + hi)
            p = c + mid * u
            if margin(cone, p) > 0 and _fast_hilbert(cone, c, p) < radius:
                lo = mid
            else:
                hi = mid
        points.append(c + lo * u)
    return np.array(points)


def is_unique_geodesic_line(cone: ConeSpec, section: CrossSection, w, z, tol: float = 1e-7) -> bool:
    """Whether the chord (w, z) is the only geodesic between its points.

    Fails exactly when relatively open boundary segments through w and z
    span a two-dimensional affine plane together.
    """
    w = check_point(cone, w)
    z = check_point(cone, z)
    if cone.kind == "psd" or not (cone.kind == "lorentz" or is_polyhedral(cone)):
        raise UnsupportedConeError(f"unique-geodesic test is not available for {cone}")
    if not contains(cone, 0.5 * (w + z), strict=True, tol=0.0):
        raise PreconditionError("open segment (w, z) does not lie in the interior")
    if cone.kind == "lorentz":
        return True
    for p in (w, z):
        if abs(margin(cone, p)) > tol * max(1.0, float(np.linalg.norm(p))):
            raise PreconditionError("chord endpoints must lie on the boundary")
    L_w = face_directions(cone, minimal_face(cone, w, tol), section)
    L_z = face_directions(cone, minimal_face(cone, z, tol), section)
    chord = (z - w) / np.linalg.norm(z - w)
    span = np.hstack([chord[:, None], L_w])
    rank_span = np.linalg.matrix_rank(span, tol=1e-9)
    rank_all = np.linalg.matrix_rank(np.hstack([span, L_z]), tol=1e-9)
    shared = L_z.shape[1] + rank_span - rank_all
    logger.debug("face dims %d/%d, shared dimension %d", L_w.shape[1], L_z.shape[1], shared)
    return shared == 0
