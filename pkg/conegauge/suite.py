"""Acceptance battery run by ``conegauge suite``.

Each criterion returns (passed, worst, detail); ``worst`` is the largest
observed error measured against that criterion's tolerance.
"""
import csv
import io
import logging
import math
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, PrivateAttr

from . import config
from .cones import ConeSpec, base_point, lorentz, orthant, poly_h, poly_v, product, psd
from .decomposition import decompose
from .duality import build_form, fixed_between_error
from .errors import ConeGaugeError
from .gauges import funk, gauge, gauge_oracle, hilbert, raw_gauge, thompson
from .horofunctions import (
    INF,
    Combined,
    FunkSingleton,
    ProductHoro,
    ReverseFunk,
    ThompsonInteriorF,
    ThompsonInteriorR,
    absorbing_sum,
    detour_empirical,
    detour_formula,
    distance_from_busemann_sup,
    horofunction_from_sequence,
    is_singleton,
    thompson_cost,
)
from .maps import (
    ConeMap,
    FunctionMap,
    Linear,
    ProductMap,
    PsdInverse,
    Scale,
    classify,
    compose,
    congruence_matrix,
    fit_linear,
    lorentz_boost,
    make_map,
    vinberg_star,
)
from .sampling import make_rng, sample_interior

logger = logging.getLogger(__name__)

GAUGE_TOL = 1e-9
TRIANGLE_SLACK = 1e-9
SYMMETRY_TOL = 1e-12
HOMOGENEITY_TOL = 1e-12
# gauges of poly_v cones come from an LP solve
LP_TOL = 1e-8
STAR_TOL = 1e-9
FORM_TOL = 1e-8
ORTHANT_FORM_TOL = 1e-10
LINEAR_TOL = 1e-8
DETOUR_TOL = 1e-12
EMPIRICAL_GAP = 0.05
SEQUENCE_TOL = 1e-6
SUP_TOL = 1e-12

FULL_PAIRS = 1000
QUICK_PAIRS = 200


class CriterionResult(BaseModel):
    criterion: int
    name: str
    passed: bool
    worst: float
    detail: str = ""


class SuiteReport(BaseModel):
    quick: bool
    seed: int
    passed: bool
    criteria: List[CriterionResult]
    # wall-clock seconds per criterion; banner only, never serialized
    _timings: Dict[int, float] = PrivateAttr(default_factory=dict)


@dataclass
class SuiteContext:
    seed: int = config.DEFAULT_SEED
    quick: bool = True

    @property
    def pairs(self) -> int:
        return QUICK_PAIRS if self.quick else FULL_PAIRS

    def rng(self, offset: int) -> np.random.Generator:
        return make_rng(self.seed + offset)


# ---------------------------------------------------------------------------
# Catalog

def random_polyhedral(kind: str, dim: int, count: int, rng: np.random.Generator) -> ConeSpec:
    """A random proper polyhedral cone over a perturbed cube or cross-polytope section."""
    rows = [np.concatenate([[1.0], s * e]) for e in np.eye(dim - 1) for s in (1.0, -1.0)]
    while len(rows) < count:
        u = rng.normal(size=dim - 1)
        u /= np.linalg.norm(u)
        radius = rng.uniform(0.3, 1.0) if kind == "poly_h" else rng.uniform(0.8, 1.4)
        rows.append(np.concatenate([[1.0], radius * u]))
    return poly_h(rows) if kind == "poly_h" else poly_v(rows)


def symmetric_catalog() -> List[ConeSpec]:
    return ([orthant(n) for n in range(2, 7)]
            + [lorentz(n) for n in range(3, 7)]
            + [psd(n) for n in range(2, 5)]
            + [product(orthant(2), lorentz(3))])


def catalog(rng: np.random.Generator) -> List[ConeSpec]:
    polyhedral = [random_polyhedral(kind, dim, count, rng)
                  for kind in ("poly_h", "poly_v") for dim, count in ((3, 7), (4, 12))]
    return (symmetric_catalog()[:-1] + polyhedral
            + [product(orthant(2), lorentz(3)), product(psd(2), polyhedral[0])])


def _has_lp(cone: ConeSpec) -> bool:
    return cone.kind == "poly_v" or any(_has_lp(f) for f in cone.factors)


def _tol(cone: ConeSpec, tol: float) -> float:
    return max(tol, LP_TOL) if _has_lp(cone) else tol


# ---------------------------------------------------------------------------
# Criteria

def check_gauge_oracle(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(1)
    passed, worst, failing = True, 0.0, []
    for cone in catalog(rng):
        xs = sample_interior(cone, ctx.pairs, rng)
        ys = sample_interior(cone, ctx.pairs, rng)
        errors = []
        for x, y in zip(xs, ys):
            exact, reference = gauge(cone, x, y), gauge_oracle(cone, x, y)
            errors.append(abs(exact - reference) / reference)
        cone_worst = max(errors)
        worst = max(worst, cone_worst)
        if cone_worst > _tol(cone, GAUGE_TOL):
            passed = False
            failing.append(str(cone))
    return passed, worst, ", ".join(failing)


def check_metric_axioms(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(2)
    passed, worst, failing = True, 0.0, []
    for cone in catalog(rng):
        xs, ys, zs = (sample_interior(cone, ctx.pairs, rng) for _ in range(3))
        lams = np.exp(rng.uniform(-3.0, 3.0, size=ctx.pairs))
        triangle = symmetry = homogeneity = 0.0
        for x, y, z, lam in zip(xs, ys, zs, lams):
            for d in (thompson, hilbert):
                direct = d(cone, x, z)
                triangle = max(triangle, (direct - d(cone, x, y) - d(cone, y, z)) / max(1.0, direct))
                symmetry = max(symmetry, abs(d(cone, x, y) - d(cone, y, x)))
            homogeneity = max(homogeneity, abs(hilbert(cone, x, lam * x)),
                              abs(thompson(cone, x, lam * x) - abs(math.log(lam))))
        worst = max(worst, triangle, symmetry, homogeneity)
        if (triangle > _tol(cone, TRIANGLE_SLACK) or symmetry > SYMMETRY_TOL
                or homogeneity > _tol(cone, HOMOGENEITY_TOL)):
            passed = False
            failing.append(f"{cone} (triangle {triangle:.2g}, symmetry {symmetry:.2g}, lambda {homogeneity:.2g})")
    return passed, worst, ", ".join(failing)


def check_star_reversal(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(3)
    worst, failing = 0.0, []
    for cone in symmetric_catalog():
        star = vinberg_star(cone)
        xs = sample_interior(cone, ctx.pairs, rng)
        ys = sample_interior(cone, ctx.pairs, rng)
        reversal = max(abs(raw_gauge(cone, star(y), star(x)) - raw_gauge(cone, x, y)) / raw_gauge(cone, x, y)
                       for x, y in zip(xs, ys))
        A, residual = fit_linear(compose(star, star), seed=ctx.seed)
        involution = max(float(np.abs(A - np.eye(cone.ambient_dim)).max()), residual)
        worst = max(worst, reversal, involution)
        if reversal > STAR_TOL or involution > STAR_TOL:
            failing.append(str(cone))
    return not failing, worst, ", ".join(failing)


def check_fixed_between(ctx: SuiteContext) -> Tuple[bool, float, str]:
    worst, failing = 0.0, []
    for cone in symmetric_catalog():
        error = fixed_between_error(cone, vinberg_star(cone), samples=ctx.pairs, seed=ctx.seed)
        worst = max(worst, error)
        if error > STAR_TOL:
            failing.append(str(cone))
    return not failing, worst, ", ".join(failing)


def check_bilinear_form(ctx: SuiteContext) -> Tuple[bool, float, str]:
    cones = symmetric_catalog()
    if ctx.quick:
        cones = [orthant(3), lorentz(3), lorentz(4), psd(2), psd(3)]
    worst, failing = 0.0, []
    for cone in cones:
        cert = build_form(cone, vinberg_star(cone), samples=100 if ctx.quick else 500, seed=ctx.seed)
        errors = [cert.symmetry_error, cert.extremal_diag_error, cert.basis_drift]
        ok = cert.passed(FORM_TOL)
        if cone.kind == "orthant":
            identity = float(np.abs(cert.array - np.eye(cone.ambient_dim)).max())
            errors.append(identity)
            ok = ok and identity <= ORTHANT_FORM_TOL
        worst = max(worst, *errors)
        if not ok:
            failing.append(str(cone))
    return not failing, worst, ", ".join(failing)


def _conjugated(inner: ConeMap, A: np.ndarray) -> ConeMap:
    cone = inner.source
    return ConeMap((Linear(np.linalg.inv(A)),) + inner.pipeline + (Linear(A),), cone, cone)


def check_composition_parity(ctx: SuiteContext) -> Tuple[bool, float, str]:
    cases = [
        (psd(2), congruence_matrix(np.array([[2.0, 1.0], [0.0, 1.0]]))),
        (lorentz(4), lorentz_boost(4, 0.6, axis=2) @ lorentz_boost(4, -0.3, axis=1)),
    ]
    worst, failing = 0.0, []
    for cone, A in cases:
        star = vinberg_star(cone)
        _, residual = fit_linear(compose(star, _conjugated(star, A)), seed=ctx.seed)
        worst = max(worst, residual)
        if residual > LINEAR_TOL:
            failing.append(str(cone))
    return not failing, worst, ", ".join(failing)


def _boundary_pair(rng: np.random.Generator, axis: int) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    a, a_prime = rng.uniform(0.5, 2.0, size=2)
    first, second = [0.0, 0.0], [0.0, 0.0]
    first[axis], second[axis] = a, a_prime
    return tuple(first), tuple(second)


def check_product_detour(ctx: SuiteContext) -> Tuple[bool, float, str]:
    o2 = orthant(2)
    cone = product(o2, o2)
    r1, r2 = ReverseFunk(o2, (1.0, 0.0)), ReverseFunk(o2, (0.0, 1.0))
    worst, failing = 0.0, []
    xi = ProductHoro(cone, r1, r2, 0.0)
    for eps in (-1.0, -0.25, 0.25, 1.0):
        delta = detour_formula(xi, ProductHoro(cone, r1, r2, eps)).delta
        worst = max(worst, abs(delta - abs(eps)))
        if abs(delta - abs(eps)) > DETOUR_TOL:
            failing.append(f"eps={eps}")

    rng = ctx.rng(7)
    grid = 2_000 if ctx.quick else 100_000
    for k in range(10):
        x1, x1_prime = _boundary_pair(rng, 0)
        x2, x2_prime = _boundary_pair(rng, 1)
        u, v = rng.uniform(-1.0, 1.0, size=2)
        xi = ProductHoro(cone, ReverseFunk(o2, x1), ReverseFunk(o2, x2), u)
        eta = ProductHoro(cone, ReverseFunk(o2, x1_prime), ReverseFunk(o2, x2_prime), v)
        formula = detour_formula(xi, eta).H
        empirical = detour_empirical(cone, xi, eta, count=grid, seed=ctx.seed + k)
        if empirical > formula + 1e-9:
            failing.append(f"instance {k}: empirical {empirical:.4g} above formula {formula:.4g}")
        if not ctx.quick:
            worst = max(worst, formula - empirical)
            if formula - empirical > EMPIRICAL_GAP:
                failing.append(f"instance {k}: gap {formula - empirical:.3g}")
    return not failing, worst, ", ".join(failing)


def _singleton_cases() -> List[Tuple[object, bool]]:
    o3 = orthant(3)
    e1, e2, e3 = np.eye(3)
    edge = ReverseFunk(o3, (1.0, 1.0, 0.0))
    corner = ReverseFunk(o3, tuple(e1))
    f2, f3 = FunkSingleton(o3, tuple(e2)), FunkSingleton(o3, tuple(e3))
    return [
        (Combined(corner, f2, INF), True),
        (Combined(corner, f2, -INF), True),
        (Combined(corner, f3, 0.5), False),
        (Combined(edge, f3, INF), False),
        (Combined(edge, f3, -INF), True),
        (Combined(edge, f3, -2.0), False),
        (ThompsonInteriorR(o3, (1.0, 2.0, 3.0)), False),
        (ThompsonInteriorF(o3, (1.0, 2.0, 3.0)), False),
    ]


def check_thompson_detour(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(8)
    worst, failing = 0.0, []
    for cone in (orthant(3), lorentz(3)):
        xs = sample_interior(cone, 100, rng)
        ys = sample_interior(cone, 100, rng)
        for x, y in zip(xs, ys):
            for cls in (ThompsonInteriorR, ThompsonInteriorF):
                xi, eta = cls(cone, tuple(x)), cls(cone, tuple(y))
                delta = absorbing_sum(thompson_cost(xi, eta), thompson_cost(eta, xi))
                error = abs(delta - hilbert(cone, x, y))
                worst = max(worst, error)
                if error > GAUGE_TOL:
                    failing.append(f"{cone} {cls.tag}")
            cross = detour_formula(ThompsonInteriorR(cone, tuple(x)), ThompsonInteriorF(cone, tuple(y)))
            if cross.delta != INF:
                failing.append(f"{cone} cross-type delta {cross.delta:.4g}")
    for h, expected in _singleton_cases():
        if is_singleton(h) != expected:
            failing.append(f"singleton {h.to_dict()}")
    return not failing, worst, "; ".join(sorted(set(failing)))


def check_sequences(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(9)
    steps = np.arange(0, 21)
    worst, failing = 0.0, []
    for cone in (orthant(3), lorentz(3)):
        b = base_point(cone)
        x = sample_interior(cone, 1, rng)[0]
        # a boundary point for the radial approach
        p = np.array([1.0, 1.0, 0.0]) if cone.kind == "lorentz" else np.array([1.0, 0.5, 0.0])
        probes = sample_interior(cone, 20, rng)
        cases = [
            ("thompson", [np.exp(k) * x for k in steps], ThompsonInteriorR(cone, tuple(x))),
            ("thompson", [np.exp(-k) * x for k in steps], ThompsonInteriorF(cone, tuple(x))),
            ("rfunk", [p + np.exp(-k) * b for k in steps], ReverseFunk(cone, tuple(p))),
        ]
        for metric, seq, h in cases:
            table = horofunction_from_sequence(cone, metric, seq, probes, tol=SEQUENCE_TOL)
            error = max(abs(v - h.evaluate(q)) for v, q in zip(table.limit, probes))
            worst = max(worst, error)
            if error > SEQUENCE_TOL:
                failing.append(f"{cone} {h.tag}")
    return not failing, worst, ", ".join(failing)


def _mixed_isometries() -> List[Tuple[ConeSpec, ConeMap, Tuple[int, int]]]:
    def block(matrix: np.ndarray, cone: ConeSpec) -> ConeMap:
        return ConeMap((Linear(matrix),), cone, cone)

    o1, o2, o3 = orthant(1), orthant(2), orthant(3)
    l3, l4, p2 = lorentz(3), lorentz(4), psd(2)
    pairs = [
        (o2, block(np.diag([2.0, 0.5]), o2), l3, vinberg_star(l3), (2, 3)),
        (l3, block(lorentz_boost(3, 0.4), l3), o2, vinberg_star(o2), (3, 2)),
        (p2, vinberg_star(p2), o2, block(np.array([[0.0, 1.0], [3.0, 0.0]]), o2), (2, 3)),
        (o1, ConeMap((Scale(3.0),), o1, o1), l4, vinberg_star(l4), (1, 4)),
        (l3, vinberg_star(l3), p2, block(congruence_matrix(np.array([[1.0, 0.5], [0.0, 2.0]])), p2), (3, 3)),
    ]
    cases = []
    for f1, m1, f2, m2, dims in pairs:
        cone = product(f1, f2)
        cases.append((cone, make_map([ProductMap((m1, m2))], cone, cone), dims))
    cases.append((o3, make_map([Linear(np.diag([1.0, 2.0, 4.0]))], o3, o3), (3, 0)))
    cases.append((p2, make_map([PsdInverse(2)], p2, p2), (0, 3)))
    return cases


def check_decomposition(ctx: SuiteContext) -> Tuple[bool, float, str]:
    worst, failing = 0.0, []
    for cone, phi, dims in _mixed_isometries():
        result = decompose(cone, cone, phi, samples=60 if ctx.quick else config.DEFAULT_SAMPLES, seed=ctx.seed)
        worst = max(worst, result.residual, result.sum_error)
        if not result.ok or tuple(result.dims) != dims:
            failing.append(f"{cone}: dims {tuple(result.dims)} expected {dims}; {'; '.join(result.failures)}")
    return not failing, worst, " | ".join(failing)


def check_busemann_sup(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(11)
    worst = 0.0
    for k in range(5):
        cone = random_polyhedral("poly_h", 3 + k % 2, 6 + 2 * k, rng)
        xs = sample_interior(cone, 20, rng)
        ys = sample_interior(cone, 20, rng)
        for x, y in zip(xs, ys):
            worst = max(worst, abs(distance_from_busemann_sup(cone, x, y) - funk(cone, x, y)))
    return worst <= SUP_TOL, worst, ""


def _counterexample(k: int, rng: np.random.Generator) -> ConeMap:
    cone = orthant(3)
    if k % 2 == 0:
        p = float(rng.uniform(0.3, 0.8))
        fn = FunctionMap(lambda x, p=p: x ** p, lambda y, p=p: y ** (1.0 / p), f"power({p:.3f})")
        return make_map([fn], cone, cone)
    mixing = np.eye(3) + rng.uniform(0.1, 1.0, size=(3, 3))
    return make_map([Linear(mixing)], cone, cone)


def check_negative_controls(ctx: SuiteContext) -> Tuple[bool, float, str]:
    rng = ctx.rng(12)
    failing = []
    for k in range(20):
        report = classify(_counterexample(k, rng), samples=50, seed=ctx.seed + k)
        if report.gauge_preserving.passed or report.gauge_reversing.passed or report.thompson_isometry.passed:
            failing.append(str(k))
    return not failing, float(len(failing)), ", ".join(failing)


CRITERIA: Dict[int, Tuple[str, Callable[[SuiteContext], Tuple[bool, float, str]]]] = {
    1: ("gauge oracle equivalence", check_gauge_oracle),
    2: ("metric axioms", check_metric_axioms),
    3: ("star-map reversal", check_star_reversal),
    4: ("fixed-between identity", check_fixed_between),
    5: ("bilinear form certificate", check_bilinear_form),
    6: ("composition parity", check_composition_parity),
    7: ("product horoboundary", check_product_detour),
    8: ("Thompson horoboundary", check_thompson_detour),
    9: ("sequence convergence", check_sequences),
    10: ("decomposition", check_decomposition),
    11: ("Funk distance from Busemann sup", check_busemann_sup),
    12: ("negative controls", check_negative_controls),
}


def run_suite(quick: bool = True, seed: int = config.DEFAULT_SEED,
              only: Optional[Sequence[int]] = None) -> SuiteReport:
    ctx = SuiteContext(seed=seed, quick=quick)
    results, timings = [], {}
    for number in sorted(only or CRITERIA):
        name, check = CRITERIA[number]
        logger.info("criterion %d: %s", number, name)
        started = time.perf_counter()
        try:
            passed, worst, detail = check(ctx)
        except ConeGaugeError as e:
            logger.warning("criterion %d raised %s: %s", number, type(e).__name__, e.detail)
            passed, worst, detail = False, float("nan"), f"{type(e).__name__}: {e.detail}"
        timings[number] = time.perf_counter() - started
        results.append(CriterionResult(criterion=number, name=name, passed=bool(passed),
                                       worst=float(worst), detail=detail))
    report = SuiteReport(quick=quick, seed=seed, passed=all(r.passed for r in results), criteria=results)
    report._timings.update(timings)
    return report


def print_summary(report: SuiteReport, stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stderr
    print("=" * 60, file=stream)
    print(f"conegauge suite ({'quick' if report.quick else 'full'}, seed {report.seed})", file=stream)
    print("=" * 60, file=stream)
    for r in report.criteria:
        mark = "PASS" if r.passed else "FAIL"
        seconds = report._timings.get(r.criterion)
        elapsed = "" if seconds is None else f" ({seconds:.1f}s)"
        print(f"[{mark}] {r.criterion:2d}. {r.name:<34} worst {r.worst:.3g}{elapsed}", file=stream)
        if r.detail and not r.passed:
            print(f"       {r.detail}", file=stream)
    print(f"\n{'=' * 60}", file=stream)
    print(f"{sum(r.passed for r in report.criteria)}/{len(report.criteria)} criteria passed", file=stream)


def suite_csv(report: SuiteReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["criterion", "passed", "worst"])
    for r in report.criteria:
        writer.writerow([r.criterion, str(r.passed).lower(), f"{r.worst:.6g}"])
    return buffer.getvalue()
