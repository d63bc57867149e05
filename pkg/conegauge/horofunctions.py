"""Horofunctions of the Funk, reverse-Funk, Thompson and product geometries.

Every horofunction is an immutable value with ``evaluate(y)``, normalized to
vanish at the cone's base point, and a ``metric`` naming the geometry whose
boundary it lives in. Detour costs come either from closed formulas
(``detour_formula``) or from a sampled supremum (``detour_empirical``),
which is a lower bound for the true cost.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from . import config
from .cones import (
    ConeSpec,
    base_point,
    check_point,
    contains,
    dual_cone,
    exposed_face_point,
    facet_normals,
    is_extremal,
    is_polyhedral,
    margin,
)
from .errors import (
    InvalidPayloadError,
    MembershipError,
    PreconditionError,
    UnsupportedConeError,
)
from .gauges import hilbert, metric_function, raw_gauge
from .maps import ConeMap
from .sampling import log_grid, make_rng

logger = logging.getLogger(__name__)

INF = math.inf
PAYLOAD_TOL = 1e-9


def _tuple(x: np.ndarray) -> Tuple[float, ...]:
    return tuple(float(v) for v in x)


def plus(c: float) -> float:
    return max(c, 0.0)


def minus(c: float) -> float:
    return min(c, 0.0)


def absorbing_sum(*terms: float) -> float:
    """Sum in which -inf absorbs +inf."""
    if any(t == -INF for t in terms):
        return -INF
    return float(sum(terms))


def combine(f1: float, f2: float, c: float) -> float:
    """[f1, f2, c] = (f1 + c^-) v (f2 - c^+)."""
    return max(absorbing_sum(f1, minus(c)), absorbing_sum(f2, -plus(c)))


# ---------------------------------------------------------------------------
# Payload types

class Horofunction:
    tag = "horofunction"
    metric = "funk"
    cone: ConeSpec

    def evaluate(self, y) -> float:
        raise NotImplementedError

    def __call__(self, y) -> float:
        return self.evaluate(y)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ReverseFunk(Horofunction):
    """r_x(y) = log(M(x, y) / M(x, b)) for x on the boundary."""

    cone: ConeSpec
    x: Tuple[float, ...]

    tag = "reverse_funk"
    metric = "rfunk"

    def __post_init__(self):
        x = check_point(self.cone, self.x)
        scale = max(1.0, float(np.linalg.norm(x)))
        if np.linalg.norm(x) <= PAYLOAD_TOL:
            raise InvalidPayloadError("reverse-Funk payload must be nonzero")
        if not contains(self.cone, x, strict=False, tol=PAYLOAD_TOL * scale):
            raise InvalidPayloadError("reverse-Funk payload lies outside the closed cone")
        if contains(self.cone, x, strict=True, tol=PAYLOAD_TOL * scale):
            raise InvalidPayloadError("reverse-Funk payload must lie on the boundary")
        object.__setattr__(self, "x", _tuple(x))

    @property
    def point(self) -> np.ndarray:
        return np.array(self.x)

    def evaluate(self, y) -> float:
        y = check_point(self.cone, y)
        x = self.point
        return float(np.log(raw_gauge(self.cone, x, y)) - np.log(raw_gauge(self.cone, x, base_point(self.cone))))

    def to_dict(self) -> dict:
        return {"tag": self.tag, "x": list(self.x)}


@dataclass(frozen=True)
class FunkSingleton(Horofunction):
    """y -> log(<y*, y> / <y*, b>) for a dual extremal generator y*."""

    cone: ConeSpec
    functional: Tuple[float, ...]

    tag = "funk_singleton"
    metric = "funk"

    def __post_init__(self):
        f = check_point(self.cone, self.functional)
        dual = dual_cone(self.cone)
        scale = max(1.0, float(np.linalg.norm(f)))
        if not contains(dual, f, strict=False, tol=PAYLOAD_TOL * scale) or np.linalg.norm(f) <= PAYLOAD_TOL:
            raise InvalidPayloadError("Funk singleton functional must be a nonzero element of the dual cone")
        if not is_extremal(dual, f):
            raise InvalidPayloadError("Funk singleton functional must be an extremal generator of the dual cone")
        object.__setattr__(self, "functional", _tuple(f / float(f @ base_point(self.cone))))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.functional)

    def evaluate(self, y) -> float:
        value = float(self.vector @ check_point(self.cone, y))
        return float(np.log(value)) if value > 0 else -INF

    def to_dict(self) -> dict:
        return {"tag": self.tag, "functional": list(self.functional)}


@dataclass(frozen=True)
class _InteriorPayload(Horofunction):
    cone: ConeSpec
    x: Tuple[float, ...]

    metric = "thompson"

    def __post_init__(self):
        x = check_point(self.cone, self.x)
        if not contains(self.cone, x, strict=True, tol=0.0):
            raise InvalidPayloadError(f"{self.tag} payload must lie in the open cone")
        object.__setattr__(self, "x", _tuple(x))

    @property
    def point(self) -> np.ndarray:
        return np.array(self.x)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "x": list(self.x)}


@dataclass(frozen=True)
class ThompsonInteriorR(_InteriorPayload):
    """Limit of d_T(., lam x) - d_T(b, lam x) as lam grows."""

    tag = "thompson_r"

    def evaluate(self, y) -> float:
        y = check_point(self.cone, y)
        x = self.point
        return float(np.log(raw_gauge(self.cone, x, y)) - np.log(raw_gauge(self.cone, x, base_point(self.cone))))


@dataclass(frozen=True)
class ThompsonInteriorF(_InteriorPayload):
    """Limit of d_T(., x / lam) - d_T(b, x / lam) as lam grows."""

    tag = "thompson_f"

    def evaluate(self, y) -> float:
        y = check_point(self.cone, y)
        x = self.point
        return float(np.log(raw_gauge(self.cone, y, x)) - np.log(raw_gauge(self.cone, base_point(self.cone), x)))


def _check_shift(c: float) -> float:
    c = float(c)
    if math.isnan(c):
        raise InvalidPayloadError("combinator shift must not be NaN")
    return c


@dataclass(frozen=True)
class Combined(Horofunction):
    """Thompson horofunction [first, second, c] over a single cone."""

    first: Horofunction
    second: Horofunction
    c: float

    tag = "combined"
    metric = "thompson"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_shift(self.c))
        if self.first.cone != self.second.cone:
            raise InvalidPayloadError("combined components must live on the same cone")
        if isinstance(self.first, ReverseFunk) and isinstance(self.second, FunkSingleton):
            x, f = self.first.point, self.second.vector
            if abs(float(f @ x)) > PAYLOAD_TOL * max(1.0, float(np.linalg.norm(x))):
                raise InvalidPayloadError("Funk component must vanish at the reverse-Funk point")

    @property
    def cone(self) -> ConeSpec:
        return self.first.cone

    def evaluate(self, y) -> float:
        return combine(self.first.evaluate(y), self.second.evaluate(y), self.c)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "first": self.first.to_dict(), "second": self.second.to_dict(), "c": self.c}


@dataclass(frozen=True)
class ProductHoro(Horofunction):
    """[first, second, c] on a two-factor product; the product metric is the max."""

    cone: ConeSpec
    first: Horofunction
    second: Horofunction
    c: float

    tag = "product"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_shift(self.c))
        if self.cone.kind != "product" or len(self.cone.factors) != 2:
            raise InvalidPayloadError("product horofunctions need a two-factor product cone")
        if (self.first.cone, self.second.cone) != tuple(self.cone.factors):
            raise InvalidPayloadError("component horofunctions must live on the product's factors")
        if self.first.metric != self.second.metric:
            raise InvalidPayloadError("component horofunctions must share a metric")

    @property
    def metric(self) -> str:
        return self.first.metric

    def evaluate(self, y) -> float:
        y = check_point(self.cone, y)
        (s1, _), (s2, _) = self.cone.blocks()
        return combine(self.first.evaluate(y[s1]), self.second.evaluate(y[s2]), self.c)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "first": self.first.to_dict(), "second": self.second.to_dict(), "c": self.c}


@dataclass(frozen=True, eq=False)
class PushForward(Horofunction):
    """(phi . xi)(y) = xi(phi^-1 y) - xi(phi^-1 b') for an isometry phi."""

    inner: Horofunction
    phi: ConeMap
    metric: str = ""

    tag = "push_forward"

    def __post_init__(self):
        if self.phi.source != self.inner.cone:
            raise InvalidPayloadError("map source does not match the horofunction's cone")
        if not self.metric:
            object.__setattr__(self, "metric", self.inner.metric)
        object.__setattr__(self, "_offset", self.inner.evaluate(self.phi.inverse()(base_point(self.phi.target))))

    @property
    def cone(self) -> ConeSpec:
        return self.phi.target

    def evaluate(self, y) -> float:
        y = check_point(self.cone, y)
        return absorbing_sum(self.inner.evaluate(self.phi.inverse()(y)), -self._offset)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "inner": self.inner.to_dict(), "map": self.phi.to_dict(), "metric": self.metric}


def push_forward(h: Horofunction, phi: ConeMap, metric: Optional[str] = None) -> PushForward:
    return PushForward(h, phi, metric or "")


def evaluate(h: Horofunction, y) -> float:
    y = check_point(h.cone, y)
    if not contains(h.cone, y, strict=True, tol=0.0):
        raise MembershipError("horofunctions are evaluated at interior points")
    return h.evaluate(y)


# ---------------------------------------------------------------------------
# Sequences and almost-geodesics

class SequenceTable(BaseModel):
    metric: str
    values: List[List[float]]
    limit: List[float]
    defect: float
    converged: bool


def horofunction_from_sequence(cone: ConeSpec, metric: str, seq: Sequence, probes: Sequence,
                               tol: float = 1e-6) -> SequenceTable:
    """Table of d(p, z_n) - d(b, z_n); converged when the last two rows agree to tol."""
    d = metric_function(metric)
    b = base_point(cone)
    probes = [check_point(cone, p) for p in probes]
    values = []
    for z in seq:
        z = check_point(cone, z)
        offset = d(cone, b, z)
        values.append([d(cone, p, z) - offset for p in probes])
    table = np.array(values)
    defect = float(np.abs(table[-1] - table[-2]).max()) if len(values) > 1 else INF
    logger.debug("sequence of %d points in %s: tail defect %.3g", len(values), metric, defect)
    return SequenceTable(
        metric=metric,
        values=table.tolist(),
        limit=table[-1].tolist(),
        defect=defect,
        converged=bool(defect <= tol),
    )


def _increasing(ts: np.ndarray) -> None:
    if ts.ndim != 1 or ts.shape[0] < 2 or np.any(np.diff(ts) <= 0):
        raise PreconditionError("path grid must be strictly increasing")


def is_almost_geodesic(cone: ConeSpec, metric: str, ts: Sequence[float], points: Sequence,
                       eps: float, burn_in: int = 0) -> bool:
    """Both almost-geodesic conditions on every sampled pair s <= t past the burn-in.

    The grid may be bounded, as for finite-length reverse-Funk paths.
    """
    ts = np.asarray(ts, dtype=float)
    _increasing(ts)
    if ts[0] != 0.0:
        raise PreconditionError("path grid must start at 0")
    d = metric_function(metric)
    points = [check_point(cone, p) for p in points]
    start = points[0]
    for i in range(burn_in, len(ts)):
        if abs(d(cone, start, points[i]) - ts[i]) >= eps:
            return False
        for j in range(i + 1, len(ts)):
            if abs(d(cone, points[i], points[j]) - ts[j] + ts[i]) >= eps:
                return False
    return True


def is_epsilon_almost_geodesic(cone: ConeSpec, metric: str, points: Sequence, eps: float) -> bool:
    """d(x0, x1) + ... + d(xm, xm+1) <= d(x0, xm+1) + eps for every m."""
    d = metric_function(metric)
    points = [check_point(cone, p) for p in points]
    travelled = 0.0
    for m in range(1, len(points)):
        travelled += d(cone, points[m - 1], points[m])
        if travelled > d(cone, points[0], points[m]) + eps:
            return False
    return True


def thompson_busemann_sequence(cone: ConeSpec, x, functional, c: float, steps: int = 12) -> np.ndarray:
    """Points converging to [r_x, f, c] in the Thompson geometry, f the singleton of functional."""
    x = check_point(cone, x)
    p = exposed_face_point(cone, functional)
    b = base_point(cone)
    rows = []
    for n in range(1, steps + 1):
        xn = x + np.exp(-n) * p + np.exp(-2 * n) * b
        if math.isinf(c):
            rows.append(xn * np.exp(3 * n if c > 0 else -3 * n))
            continue
        s = np.sqrt(np.exp(c) * raw_gauge(cone, b, xn) / raw_gauge(cone, xn, b))
        rows.append(s * xn)
    return np.array(rows)


def product_busemann_path(g1: Callable[[float], np.ndarray], g2: Callable[[float], np.ndarray],
                          c: float) -> Callable[[float], np.ndarray]:
    """t -> (g1((t + c^-)^+), g2((t - c^+)^+)), converging to [xi1, xi2, c]."""

    def path(t: float) -> np.ndarray:
        t1 = max(t + minus(c), 0.0) if not c == -INF else 0.0
        t2 = max(t - plus(c), 0.0) if not c == INF else 0.0
        return np.concatenate([g1(t1), g2(t2)])

    return path


# ---------------------------------------------------------------------------
# Detour costs

class DetourValue(BaseModel):
    H: float
    delta: float


def face_gauge(cone: ConeSpec, x_prime, x) -> float:
    """M(x'/x) with x possibly on the boundary; inf when x' leaves the face of x."""
    x_prime = check_point(cone, x_prime)
    x = check_point(cone, x)
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(x_prime)))
    if cone.kind == "product":
        return max(face_gauge(f, x_prime[s], x[s]) for s, f in cone.blocks())
    if contains(cone, x, strict=True, tol=0.0):
        return max(raw_gauge(cone, x_prime, x), 0.0)
    if is_polyhedral(cone):
        A = facet_normals(cone)
        ax, axp = A @ x, A @ x_prime
        zero = ax <= PAYLOAD_TOL * scale
        if np.any(axp[zero] > PAYLOAD_TOL * scale):
            return INF
        return max(float(np.max(axp[~zero] / ax[~zero])), 0.0) if np.any(~zero) else 0.0
    if cone.kind == "lorentz":
        if np.linalg.norm(x_prime) <= PAYLOAD_TOL * scale:
            return 0.0
        ratio = x_prime[0] / x[0]
        if np.linalg.norm(x_prime - ratio * x) > 1e-7 * scale or ratio < 0:
            return INF
        return float(ratio)
    raise UnsupportedConeError(f"face gauges are not available on {cone.kind} cones")


def reverse_funk_cost(xi: ReverseFunk, eta: ReverseFunk) -> float:
    """H(r_x, r_x') = log M(x'/x) + log M(x/b) - log M(x'/b)."""
    cone = xi.cone
    b = base_point(cone)
    ratio = face_gauge(cone, eta.point, xi.point)
    if ratio == INF:
        return INF
    return float(np.log(ratio) + np.log(raw_gauge(cone, xi.point, b)) - np.log(raw_gauge(cone, eta.point, b)))


def funk_singleton_cost(xi: FunkSingleton, eta: FunkSingleton) -> float:
    return 0.0 if np.allclose(xi.vector, eta.vector, atol=1e-9, rtol=0.0) else INF


def _interior_cost(xi: _InteriorPayload, eta: _InteriorPayload) -> float:
    cone = xi.cone
    b = base_point(cone)
    x, y = xi.point, eta.point
    if isinstance(xi, ThompsonInteriorR):
        # R(x, y) - R(b, y) + R(b, x)
        return float(np.log(raw_gauge(cone, y, x)) - np.log(raw_gauge(cone, y, b)) + np.log(raw_gauge(cone, x, b)))
    return float(np.log(raw_gauge(cone, x, y)) - np.log(raw_gauge(cone, b, y)) + np.log(raw_gauge(cone, b, x)))


def _combined_cost(xi: Combined, eta: Combined) -> float:
    c, c_prime = xi.c, eta.c
    h_r = absorbing_sum(reverse_funk_cost(xi.first, eta.first), minus(c_prime), -minus(c))
    h_f = absorbing_sum(funk_singleton_cost(xi.second, eta.second), -plus(c_prime), plus(c))
    return max(h_r, h_f)


def _is_busemann_combined(h: Horofunction) -> bool:
    return isinstance(h, Combined) and isinstance(h.first, ReverseFunk) and isinstance(h.second, FunkSingleton)


def thompson_cost(xi: Horofunction, eta: Horofunction) -> float:
    if xi.cone != eta.cone:
        raise InvalidPayloadError("horofunctions live on different cones")
    if type(xi) is type(eta) and isinstance(xi, _InteriorPayload):
        return _interior_cost(xi, eta)
    if _is_busemann_combined(xi) and _is_busemann_combined(eta):
        return _combined_cost(xi, eta)
    for h in (xi, eta):
        if not (isinstance(h, _InteriorPayload) or _is_busemann_combined(h)):
            raise InvalidPayloadError(f"{h.tag} is not a Thompson Busemann payload")
    return INF


def detour_thompson(xi: Horofunction, eta: Horofunction) -> DetourValue:
    """Detour cost and metric between Thompson Busemann points."""
    forward = thompson_cost(xi, eta)
    backward = thompson_cost(eta, xi)
    if type(xi) is type(eta) and isinstance(xi, _InteriorPayload):
        return DetourValue(H=forward, delta=hilbert(xi.cone, xi.point, eta.point))
    return DetourValue(H=forward, delta=absorbing_sum(forward, backward))


def detour_product(xi: ProductHoro, eta: ProductHoro, h1: float, h2: float,
                   h1_rev: Optional[float] = None, h2_rev: Optional[float] = None) -> DetourValue:
    """max(H1 - u^- + v^-, H2 + u^+ - v^+) from component costs, -inf absorbing."""
    u, v = xi.c, eta.c
    forward = max(absorbing_sum(h1, -minus(u), minus(v)), absorbing_sum(h2, plus(u), -plus(v)))
    if h1_rev is None:
        h1_rev = _cost(eta.first, xi.first)
    if h2_rev is None:
        h2_rev = _cost(eta.second, xi.second)
    backward = max(absorbing_sum(h1_rev, -minus(v), minus(u)), absorbing_sum(h2_rev, plus(v), -plus(u)))
    return DetourValue(H=forward, delta=absorbing_sum(forward, backward))


def _cost(xi: Horofunction, eta: Horofunction) -> float:
    return detour_formula(xi, eta).H


def detour_formula(xi: Horofunction, eta: Horofunction) -> DetourValue:
    """Closed-form detour cost, dispatched on the payload types."""
    if isinstance(xi, ProductHoro) and isinstance(eta, ProductHoro):
        if xi.cone != eta.cone:
            raise InvalidPayloadError("horofunctions live on different cones")
        return detour_product(xi, eta, _cost(xi.first, eta.first), _cost(xi.second, eta.second))
    if isinstance(xi, ReverseFunk) and isinstance(eta, ReverseFunk):
        forward, backward = reverse_funk_cost(xi, eta), reverse_funk_cost(eta, xi)
        return DetourValue(H=forward, delta=absorbing_sum(forward, backward))
    if isinstance(xi, FunkSingleton) and isinstance(eta, FunkSingleton):
        forward = funk_singleton_cost(xi, eta)
        return DetourValue(H=forward, delta=2.0 * forward)
    if xi.metric == "thompson" and eta.metric == "thompson":
        return detour_thompson(xi, eta)
    raise InvalidPayloadError(f"no detour formula for {xi.tag} and {eta.tag}")


def detour_empirical(cone: ConeSpec, xi: Horofunction, eta: Horofunction,
                     grid: Optional[np.ndarray] = None, count: int = 10_000,
                     seed: int = config.DEFAULT_SEED, depth: float = 6.0) -> float:
    """max over a grid of eta(x) - xi(x); a lower bound on H(xi, eta)."""
    if grid is None:
        grid = log_grid(cone, count, make_rng(seed), depth)
    best = -INF
    for x in grid:
        best = max(best, absorbing_sum(eta.evaluate(x), -xi.evaluate(x)))
    logger.debug("empirical detour over %d points: %.6g", len(grid), best)
    return best


# ---------------------------------------------------------------------------
# Singletons and the sup formula

def is_singleton(xi: Horofunction) -> bool:
    """Whether the part of the boundary containing xi is {xi}."""
    if isinstance(xi, PushForward):
        return is_singleton(xi.inner)
    if isinstance(xi, FunkSingleton):
        return True
    if isinstance(xi, ReverseFunk):
        return is_extremal(xi.cone, xi.point)
    if isinstance(xi, _InteriorPayload):
        return False
    if isinstance(xi, (Combined, ProductHoro)):
        if math.isfinite(xi.c):
            return False
        return is_singleton(xi.first if xi.c > 0 else xi.second)
    raise UnsupportedConeError(f"singleton test is not available for {xi.tag}")


def distance_from_busemann_sup(cone: ConeSpec, x, y) -> float:
    """Funk distance as the max of xi(x) - xi(y) over the facet singletons."""
    if not is_polyhedral(cone):
        raise UnsupportedConeError("the facet-singleton sup needs a polyhedral cone")
    x = check_point(cone, x)
    y = check_point(cone, y)
    if margin(cone, x) <= 0 or margin(cone, y) <= 0:
        raise MembershipError("points must lie in the open cone")
    singletons = [FunkSingleton(cone, _tuple(a)) for a in facet_normals(cone)]
    return max(h.evaluate(x) - h.evaluate(y) for h in singletons)
