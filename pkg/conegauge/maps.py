"""Maps between cones: primitives, pipelines, star maps and classification."""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from . import config
from .cones import (
    ConeSpec,
    base_point,
    canonical_section,
    check_point,
    contains,
    dual_cone,
    extremal_generators,
    margin,
    smat,
    svec,
)
from .errors import (
    MembershipError,
    PreconditionError,
    SingularMapError,
    UnsupportedConeError,
    VerificationError,
)
from .gauges import raw_gauge
from .sampling import make_rng, sample_interior

logger = logging.getLogger(__name__)

SINGULAR_COND = 1e12


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# Primitives

class Primitive:
    """One step of a map pipeline."""

    label = "primitive"

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Primitive":
        raise SingularMapError(f"{self.label} has no inverse")

    def to_dict(self) -> dict:
        return {"op": self.label}


@dataclass(frozen=True, eq=False)
class Linear(Primitive):
    matrix: np.ndarray
    label = "linear"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    def apply(self, x):
        return self.matrix @ x

    def inverse(self):
        M = self.matrix
        if M.shape[0] != M.shape[1] or not np.linalg.cond(M) < SINGULAR_COND:
            raise SingularMapError("linear primitive is singular")
        return Linear(np.linalg.inv(M))

    def to_dict(self):
        return {"op": "linear", "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class Scale(Primitive):
    alpha: float
    label = "scale"

    def __post_init__(self):
        if not self.alpha > 0:
            raise PreconditionError(f"scale factor must be positive, got {self.alpha}")

    def apply(self, x):
        return self.alpha * x

    def inverse(self):
        return Scale(1.0 / self.alpha)

    def to_dict(self):
        return {"op": "scale", "alpha": self.alpha}


@dataclass(frozen=True)
class OrthantInverse(Primitive):
    label = "orthant_inverse"

    def apply(self, x):
        return 1.0 / x

    def inverse(self):
        return self


@dataclass(frozen=True)
class LorentzStar(Primitive):
    """(t, v) -> (t, -v) / (t^2 - |v|^2)."""

    label = "lorentz_star"

    def apply(self, x):
        q = x[0] ** 2 - x[1:] @ x[1:]
        return np.concatenate([[x[0]], -x[1:]]) / q

    def inverse(self):
        return self


@dataclass(frozen=True)
class PsdInverse(Primitive):
    n: int
    label = "psd_inverse"

    def apply(self, x):
        return svec(np.linalg.inv(smat(x, self.n)))

    def inverse(self):
        return self

    def to_dict(self):
        return {"op": "psd_inverse", "n": self.n}


@dataclass(frozen=True, eq=False)
class Restriction(Primitive):
    """Keep the coordinates [start, stop); ``fill`` remembers the rest."""

    start: int
    stop: int
    fill: np.ndarray
    label = "restrict"

    def __post_init__(self):
        object.__setattr__(self, "fill", _frozen(self.fill))

    def apply(self, x):
        return x[self.start:self.stop]

    def inverse(self):
        return Embedding(self.start, self.stop, self.fill)

    def to_dict(self):
        return {"op": "restrict", "start": self.start, "stop": self.stop, "fill": self.fill.tolist()}


@dataclass(frozen=True, eq=False)
class Embedding(Primitive):
    """Place a block into [start, stop) of ``fill``."""

    start: int
    stop: int
    fill: np.ndarray
    label = "embed"

    def __post_init__(self):
        object.__setattr__(self, "fill", _frozen(self.fill))

    def apply(self, x):
        out = np.array(self.fill)
        out[self.start:self.stop] = x
        return out

    def inverse(self):
        return Restriction(self.start, self.stop, self.fill)

    def to_dict(self):
        return {"op": "embed", "start": self.start, "stop": self.stop, "fill": self.fill.tolist()}


@dataclass(frozen=True, eq=False)
class FunctionMap(Primitive):
    """Python callable wrapped as a primitive."""

    fn: Callable[[np.ndarray], np.ndarray]
    inverse_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "function"

    def apply(self, x):
        return np.asarray(self.fn(x), dtype=float)

    def inverse(self):
        if self.inverse_fn is None:
            raise SingularMapError(f"function map '{self.label}' has no inverse")
        return FunctionMap(self.inverse_fn, self.fn, f"inverse({self.label})")

    def to_dict(self):
        return {"op": "function", "label": self.label}


@dataclass(frozen=True, eq=False)
class ProductMap(Primitive):
    """Apply one map per factor block."""

    factors: Tuple["ConeMap", ...]
    label = "product"

    def apply(self, x):
        parts, start = [], 0
        for factor in self.factors:
            stop = start + factor.source.ambient_dim
            parts.append(factor(x[start:stop]))
            start = stop
        return np.concatenate(parts)

    def inverse(self):
        return ProductMap(tuple(f.inverse() for f in self.factors))

    def to_dict(self):
        return {"op": "product", "factors": [f.to_dict() for f in self.factors]}


# ---------------------------------------------------------------------------
# Pipelines

@dataclass(frozen=True, eq=False)
class ConeMap:
    """Pipeline of primitives applied in order, from ``source`` into ``target``."""

    pipeline: Tuple[Primitive, ...]
    source: ConeSpec
    target: ConeSpec

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for step in self.pipeline:
            x = step.apply(x)
        return x

    def inverse(self) -> "ConeMap":
        return ConeMap(tuple(step.inverse() for step in reversed(self.pipeline)),
                       self.target, self.source)

    def then(self, other: "ConeMap") -> "ConeMap":
        """self followed by other."""
        return ConeMap(self.pipeline + other.pipeline, self.source, other.target)

    def to_dict(self) -> dict:
        return {
            "pipeline": [step.to_dict() for step in self.pipeline],
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
        }


def make_map(pipeline: Sequence[Primitive], source: ConeSpec, target: Optional[ConeSpec] = None,
             check: bool = True, samples: int = 8, seed: int = config.DEFAULT_SEED) -> ConeMap:
    """Build a map and spot-check that it sends source samples into the target."""
    cmap = ConeMap(tuple(pipeline), source, target or source)
    if check:
        for x in sample_interior(source, samples, make_rng(seed)):
            image = cmap(x)
            if image.shape != (cmap.target.ambient_dim,) or not contains(cmap.target, image, strict=True, tol=0.0):
                raise PreconditionError("map does not send the source cone into the target cone")
    return cmap


def evaluate(cmap: ConeMap, x) -> np.ndarray:
    x = check_point(cmap.source, x)
    if not contains(cmap.source, x, strict=True, tol=0.0):
        raise MembershipError("point lies outside the source cone")
    return cmap(x)


def compose(outer: ConeMap, inner: ConeMap) -> ConeMap:
    """outer after inner."""
    return inner.then(outer)


def invert(cmap: ConeMap) -> ConeMap:
    return cmap.inverse()


def identity_map(cone: ConeSpec) -> ConeMap:
    return ConeMap((), cone, cone)


# ---------------------------------------------------------------------------
# Automorphisms used to build examples

def congruence_matrix(P: np.ndarray) -> np.ndarray:
    """Matrix of X -> P X P^T in svec coordinates."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    dim = n * (n + 1) // 2
    columns = [svec(P @ smat(e, n) @ P.T) for e in np.eye(dim)]
    return np.array(columns).T


def lorentz_boost(n: int, rapidity: float, axis: int = 1) -> np.ndarray:
    """Hyperbolic rotation of the (t, v_axis) plane; an automorphism of lorentz(n)."""
    M = np.eye(n)
    M[0, 0] = M[axis, axis] = np.cosh(rapidity)
    M[0, axis] = M[axis, 0] = np.sinh(rapidity)
    return M


def vinberg_star(cone: ConeSpec) -> ConeMap:
    """Closed-form star map, normalized to fix the base point."""
    if cone.kind == "orthant":
        return ConeMap((OrthantInverse(),), cone, cone)
    if cone.kind == "lorentz":
        return ConeMap((LorentzStar(),), cone, cone)
    if cone.kind == "psd":
        return ConeMap((PsdInverse(cone.n),), cone, cone)
    if cone.kind == "product":
        return ConeMap((ProductMap(tuple(vinberg_star(f) for f in cone.factors)),), cone, cone)
    G = extremal_generators(cone)
    if G.shape[0] != cone.n:
        raise UnsupportedConeError(f"{cone} is not a linear image of an orthant; no star map")
    G = G.T
    G = G * np.linalg.solve(G, base_point(cone))
    return ConeMap((Linear(np.linalg.inv(G)), OrthantInverse(), Linear(G)), cone, cone)


# ---------------------------------------------------------------------------
# Classification

class Verdict(BaseModel):
    passed: bool
    worst: float


class LinearFit(BaseModel):
    matrix: List[List[float]]
    residual: float


class ClassificationReport(BaseModel):
    isotone: Verdict
    antitone: Verdict
    homogeneity_degree: float
    homogeneity_residual: float
    thompson_isometry: Verdict
    gauge_preserving: Verdict
    gauge_reversing: Verdict
    linear_fit: Optional[LinearFit] = None
    sample_count: int
    seed: int
    tol: float


def _verdict(values: Sequence[float], tol: float) -> Verdict:
    worst = float(max(values)) if len(values) else 0.0
    return Verdict(passed=bool(worst <= tol), worst=worst)


def fit_degree(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, functionals: np.ndarray,
               lambdas: Sequence[float] = config.LAMBDA_GRID) -> Tuple[float, float]:
    """Regress log f(fn(lam x)) on log lam; returns (mean slope, worst deviation)."""
    log_lam = np.log(np.asarray(lambdas))
    slopes = []
    for x in points:
        images = np.array([fn(lam * x) for lam in lambdas])
        for f in functionals:
            values = images @ f
            if np.any(values <= 1e-12 * np.linalg.norm(images, axis=1)):
                continue
            slope, _ = np.polyfit(log_lam, np.log(values), 1)
            slopes.append(slope)
    if not slopes:
        return float("nan"), float("nan")
    slopes = np.array(slopes)
    degree = float(slopes.mean())
    return degree, float(np.abs(slopes - degree).max())


def fit_linear_points(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray,
                      coords_in: Optional[np.ndarray] = None,
                      coords_out: Optional[np.ndarray] = None) -> Tuple[np.ndarray, float]:
    """Least-squares linear fit of fn on points, optionally in intrinsic coordinates."""
    X = np.asarray(points, dtype=float)
    Y = np.array([fn(x) for x in X])
    if coords_in is not None:
        X = X @ coords_in
    if coords_out is not None:
        Y = Y @ coords_out
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularMapError("sample matrix is rank-deficient")
    coeffs, *_ = np.linalg.lstsq(X, Y, rcond=None)
    residual = np.linalg.norm(Y - X @ coeffs, axis=1) / np.linalg.norm(Y, axis=1)
    return coeffs.T, float(residual.max())


def fit_linear(cmap: ConeMap, cone: Optional[ConeSpec] = None, samples: Optional[int] = None,
               seed: int = config.DEFAULT_SEED) -> Tuple[np.ndarray, float]:
    """Fit phi(x) ~ A x on at least 2*dim^2 interior samples."""
    cone = cone or cmap.source
    dim = cone.ambient_dim
    count = max(samples or 0, 2 * dim * dim, dim + 1)
    return fit_linear_points(cmap, sample_interior(cone, count, make_rng(seed)))


def classify_pairs(fn: Callable[[np.ndarray], np.ndarray], xs: np.ndarray, ys: np.ndarray,
                   source_gauge: Callable, target_gauge: Callable, *,
                   ordered_pairs: Sequence[Tuple[np.ndarray, np.ndarray]],
                   target_margin: Callable[[np.ndarray], float],
                   functionals: np.ndarray, fit_points: np.ndarray,
                   tol: float = config.CLASSIFY_TOL, seed: int = config.DEFAULT_SEED,
                   coords_in: Optional[np.ndarray] = None,
                   coords_out: Optional[np.ndarray] = None) -> ClassificationReport:
    """Classification core; gauges are passed in so factor cones can be classified too."""
    preserving, reversing, thompson_err = [], [], []
    for x, y in zip(xs, ys):
        u, v = fn(x), fn(y)
        m_xy, m_yx = source_gauge(x, y), source_gauge(y, x)
        n_uv, n_vu = target_gauge(u, v), target_gauge(v, u)
        preserving.append(max(abs(n_uv - m_xy) / m_xy, abs(n_vu - m_yx) / m_yx))
        reversing.append(max(abs(n_uv - m_yx) / m_yx, abs(n_vu - m_xy) / m_xy))
        thompson_err.append(abs(np.log(max(n_uv, n_vu)) - np.log(max(m_xy, m_yx))))

    isotone, antitone = [], []
    for x, x_up in ordered_pairs:
        diff = fn(x_up) - fn(x)
        size = max(float(np.linalg.norm(diff)), 1e-300)
        isotone.append(max(0.0, -target_margin(diff)) / size)
        antitone.append(max(0.0, -target_margin(-diff)) / size)

    degree, degree_residual = fit_degree(fn, xs[:4], functionals)
    try:
        matrix, residual = fit_linear_points(fn, fit_points, coords_in, coords_out)
        linear = LinearFit(matrix=matrix.tolist(), residual=residual)
    except SingularMapError as e:
        logger.info("linear fit skipped: %s", e.detail)
        linear = None

    report = ClassificationReport(
        isotone=_verdict(isotone, tol),
        antitone=_verdict(antitone, tol),
        homogeneity_degree=degree,
        homogeneity_residual=degree_residual,
        thompson_isometry=_verdict(thompson_err, tol),
        gauge_preserving=_verdict(preserving, tol),
        gauge_reversing=_verdict(reversing, tol),
        linear_fit=linear,
        sample_count=len(xs),
        seed=seed,
        tol=tol,
    )
    logger.info("classified %d pairs: preserving=%s reversing=%s thompson=%s degree=%.4f",
                len(xs), report.gauge_preserving.passed, report.gauge_reversing.passed,
                report.thompson_isometry.passed, degree)
    return report


def _probe_functionals(cone: ConeSpec, rng: np.random.Generator, count: int = 8) -> np.ndarray:
    F = extremal_generators(dual_cone(cone), seed=int(rng.integers(1 << 30)))
    if F.shape[0] > count:
        F = F[np.sort(rng.choice(F.shape[0], size=count, replace=False))]
    return F


def ordered_pairs(cone: ConeSpec, xs: np.ndarray, rng: np.random.Generator) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Order-comparable pairs (x, x + mu*g) along extremal directions g."""
    G = extremal_generators(cone, seed=int(rng.integers(1 << 30)))
    pairs = []
    for x in xs:
        g = G[rng.integers(G.shape[0])]
        mu = np.exp(rng.uniform(-2.0, 1.0)) * np.linalg.norm(x) / np.linalg.norm(g)
        pairs.append((x, x + mu * g))
    return pairs


def classify(cmap: ConeMap, samples: int = config.DEFAULT_SAMPLES, seed: int = config.DEFAULT_SEED,
             tol: float = config.CLASSIFY_TOL) -> ClassificationReport:
    """Sampled evidence for isotone/antitone, homogeneity, and gauge and Thompson behaviour."""
    source, target = cmap.source, cmap.target
    rng = make_rng(seed)
    xs = sample_interior(source, samples, rng)
    ys = sample_interior(source, samples, rng)
    dim = source.ambient_dim
    return classify_pairs(
        cmap, xs, ys,
        lambda a, b: raw_gauge(source, a, b),
        lambda a, b: raw_gauge(target, a, b),
        ordered_pairs=ordered_pairs(source, xs[:min(samples, 50)], rng),
        target_margin=lambda v: margin(target, v),
        functionals=_probe_functionals(target, rng),
        fit_points=sample_interior(source, max(2 * dim * dim, dim + 1), rng),
        tol=tol,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Derivatives and involutions

def derivative(cmap: Callable[[np.ndarray], np.ndarray], x, h: float = config.FD_STEP) -> np.ndarray:
    """Central finite-difference Jacobian with step h*|x| per coordinate."""
    x = np.asarray(x, dtype=float)
    step = h * max(float(np.linalg.norm(x)), 1e-300)
    columns = []
    for e in np.eye(x.shape[0]):
        columns.append((cmap(x + step * e) - cmap(x - step * e)) / (2.0 * step))
    return np.array(columns).T


def make_involution(cmap: ConeMap, x, h: float = config.FD_STEP) -> ConeMap:
    """Normalize a gauge-reversing map to (-D_x phi)^-1 o phi, which fixes x."""
    x = check_point(cmap.source, x)
    if not contains(cmap.source, x, strict=True, tol=0.0):
        raise MembershipError("normalization point must lie in the open cone")
    degree, _ = fit_degree(cmap, x[None, :], canonical_section(cmap.target).vector[None, :])
    if not abs(degree + 1.0) <= config.DEGREE_TOL:
        raise PreconditionError(f"map has degree {degree:.3g} at x; gauge-reversing maps have degree -1")
    D = derivative(cmap, x, h)
    if D.shape[0] != D.shape[1]:
        raise SingularMapError("derivative is not square")
    cond = np.linalg.cond(D)
    if not np.isfinite(cond) or cond > config.FD_CONDITION_LIMIT:
        raise SingularMapError(f"derivative is numerically singular (condition {cond:.3g})")
    result = ConeMap(cmap.pipeline + (Linear(np.linalg.inv(-D)),), cmap.source, cmap.source)
    defect = float(np.linalg.norm(result(x) - x) / np.linalg.norm(x))
    logger.info("involution normalization at x: fixed-point defect %.3g", defect)
    if defect > config.TOL_FD:
        raise VerificationError(f"normalized map moves x by {defect:.3g} (tolerance {config.TOL_FD:g})")
    return result


def factor_map(cmap: ConeMap, index: int) -> ConeMap:
    """Block ``index`` of a block-diagonal map between product cones."""
    if cmap.source.kind != "product" or cmap.target.kind != "product":
        raise UnsupportedConeError("factor maps need product source and target cones")
    s_block, s_factor = cmap.source.blocks()[index]
    t_block, t_factor = cmap.target.blocks()[index]
    fill_in = base_point(cmap.source)
    fill_out = cmap(fill_in)
    pipeline = (
        (Embedding(s_block.start, s_block.stop, fill_in),)
        + cmap.pipeline
        + (Restriction(t_block.start, t_block.stop, fill_out),)
    )
    return ConeMap(pipeline, s_factor, t_factor)
