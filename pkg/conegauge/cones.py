"""Cone specifications: membership, base points, duals, faces and cross-sections.

Every cone is a proper open convex cone given by an explicit representation.
Points are plain numpy vectors in the cone's ambient coordinates; symmetric
matrices are stored as ``svec`` vectors (diagonal first, then the upper
off-diagonal entries row by row, scaled by sqrt(2)) so that the ambient dot
product equals the trace inner product.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from . import config
from .errors import (
    ConeSpecError,
    DimensionError,
    FaceEnumerationError,
    MembershipError,
    UnsupportedConeError,
)

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
KINDS = ("orthant", "lorentz", "psd", "poly_h", "poly_v", "product")
POLYHEDRAL_KINDS = ("orthant", "poly_h", "poly_v")

# HiGHS tolerances used for every membership and gauge LP
LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class ConeSpec:
    """Declarative description of a proper open convex cone.

    ``n`` is the dimension for orthant/lorentz/polyhedral cones and the matrix
    order for psd cones. ``vectors`` holds facet normals (poly_h) or rays
    (poly_v); ``factors`` holds the factors of a product.
    """

    kind: str
    n: int
    vectors: Tuple[Tuple[float, ...], ...] = ()
    factors: Tuple["ConeSpec", ...] = ()

    @property
    def ambient_dim(self) -> int:
        if self.kind == "psd":
            return self.n * (self.n + 1) // 2
        if self.kind == "product":
            return sum(f.ambient_dim for f in self.factors)
        return self.n

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.vectors, dtype=float)

    def blocks(self) -> List[Tuple[slice, "ConeSpec"]]:
        """Coordinate slices of the factors (a single block for non-products)."""
        if self.kind != "product":
            return [(slice(0, self.ambient_dim), self)]
        out = []
        start = 0
        for factor in self.factors:
            stop = start + factor.ambient_dim
            out.append((slice(start, stop), factor))
            start = stop
        return out

    def to_dict(self) -> dict:
        if self.kind in ("orthant", "lorentz"):
            return {"kind": self.kind, "dim": self.n}
        if self.kind == "psd":
            return {"kind": "psd", "n": self.n}
        if self.kind == "poly_h":
            return {"kind": "poly_h", "normals": [list(v) for v in self.vectors]}
        if self.kind == "poly_v":
            return {"kind": "poly_v", "rays": [list(v) for v in self.vectors]}
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}

    def __str__(self) -> str:
        if self.kind == "product":
            return " x ".join(str(f) for f in self.factors)
        return f"{self.kind}({self.n})"


@dataclass(frozen=True)
class CrossSection:
    """The affine slice {x in C : <functional, x> = level}."""

    functional: Tuple[float, ...]
    level: float = 1.0

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.functional, dtype=float)


@dataclass(frozen=True)
class FaceDescriptor:
    """Identifies the minimal face containing a point.

    kind is one of "active" (polyhedral active set), "interior", "ray",
    "apex" or "product".
    """

    kind: str
    active: Tuple[int, ...] = ()
    ray: Tuple[float, ...] = ()
    factors: Tuple["FaceDescriptor", ...] = ()


# ---------------------------------------------------------------------------
# Symmetric-matrix vectorization

def svec(X: np.ndarray) -> np.ndarray:
    """Vectorize a symmetric matrix with sqrt(2)-scaled off-diagonals."""
    X = np.asarray(X, dtype=float)
    iu = np.triu_indices(X.shape[0], 1)
    return np.concatenate([np.diag(X), SQRT2 * X[iu]])


def smat(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of svec."""
    v = np.asarray(v, dtype=float)
    X = np.diag(v[:n]).astype(float)
    iu = np.triu_indices(n, 1)
    off = v[n:] / SQRT2
    X[iu] = off
    X[(iu[1], iu[0])] = off
    return X


def _as_rows(vectors: Sequence[Sequence[float]]) -> np.ndarray:
    rows = np.array(vectors, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
        raise ConeSpecError("expected a non-empty list of equal-length vectors")
    if not np.all(np.isfinite(rows)):
        raise ConeSpecError("vectors must have finite entries")
    if np.any(np.linalg.norm(rows, axis=1) == 0.0):
        raise ConeSpecError("zero vectors are not allowed")
    return rows


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _as_tuple(rows: np.ndarray) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in row) for row in rows)


# ---------------------------------------------------------------------------
# Constructors

def orthant(n: int) -> ConeSpec:
    if n < 1:
        raise ConeSpecError(f"orthant dimension must be positive, got {n}")
    return ConeSpec("orthant", int(n))


def lorentz(n: int) -> ConeSpec:
    """Lorentz cone {(t, v) : t > |v|} of ambient dimension n."""
    if n < 2:
        raise ConeSpecError(f"lorentz dimension must be at least 2, got {n}")
    return ConeSpec("lorentz", int(n))


def psd(n: int) -> ConeSpec:
    if n < 1:
        raise ConeSpecError(f"psd order must be positive, got {n}")
    return ConeSpec("psd", int(n))


def poly_h(normals: Sequence[Sequence[float]]) -> ConeSpec:
    """Polyhedral cone {x : <a_i, x> > 0 for every normal a_i}."""
    A = _as_rows(normals)
    dim = A.shape[1]
    if np.linalg.matrix_rank(A) < dim:
        raise ConeSpecError("facet normals do not span the dual space; the cone is not pointed")
    _, radius = _chebyshev(_unit_rows(A))
    if radius <= config.INTERIOR_TOL:
        raise ConeSpecError("facet normals leave the cone without interior")
    return ConeSpec("poly_h", dim, _as_tuple(A))


def poly_v(rays: Sequence[Sequence[float]]) -> ConeSpec:
    """Polyhedral cone spanned positively by the given rays."""
    R = _as_rows(rays)
    dim = R.shape[1]
    if np.linalg.matrix_rank(R) < dim:
        raise ConeSpecError("rays do not span the ambient space")
    # pointed iff some psi has <psi, r> >= 1 on every ray
    res = linprog(
        c=np.zeros(dim),
        A_ub=-R, b_ub=-np.ones(R.shape[0]),
        bounds=[(None, None)] * dim,
        method="highs",
    )
    if res.status != 0:
        raise ConeSpecError("rays do not span a pointed cone")
    return ConeSpec("poly_v", dim, _as_tuple(R))


def product(*factors: ConeSpec) -> ConeSpec:
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    if not factors:
        raise ConeSpecError("a product needs at least one factor")
    for factor in factors:
        if not isinstance(factor, ConeSpec):
            raise ConeSpecError(f"product factors must be cone specs, got {type(factor).__name__}")
    return ConeSpec("product", len(factors), factors=tuple(factors))


def is_polyhedral(cone: ConeSpec) -> bool:
    if cone.kind == "product":
        return all(is_polyhedral(f) for f in cone.factors)
    return cone.kind in POLYHEDRAL_KINDS


def check_point(cone: ConeSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (cone.ambient_dim,):
        raise DimensionError(
            f"point has shape {x.shape}, cone {cone} needs ({cone.ambient_dim},)"
        )
    if not np.all(np.isfinite(x)):
        raise DimensionError("point has non-finite entries")
    return x


# ---------------------------------------------------------------------------
# Linear programs

def _chebyshev(U: np.ndarray) -> Tuple[np.ndarray, float]:
    """Maximize s subject to <u_i, x> >= s inside the box [-1, 1]^d."""
    m, dim = U.shape
    res = linprog(
        c=np.concatenate([np.zeros(dim), [-1.0]]),
        A_ub=np.hstack([-U, np.ones((m, 1))]), b_ub=np.zeros(m),
        bounds=[(-1.0, 1.0)] * dim + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0:
        raise ConeSpecError(f"Chebyshev program failed: {res.message}")
    return res.x[:dim], float(res.x[dim])


def lp_extreme_shift(R: np.ndarray, rhs: np.ndarray, d: np.ndarray, maximize: bool) -> float:
    """Extreme s with rhs - s*d in the cone spanned by the rows of R.

    Solves R^T mu + s d = rhs, mu >= 0, then polishes s on the optimal
    support by least squares.
    """
    m = R.shape[0]
    sign = -1.0 if maximize else 1.0
    res = linprog(
        c=np.concatenate([np.zeros(m), [sign]]),
        A_eq=np.hstack([R.T, d[:, None]]), b_eq=rhs,
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
        options=LP_OPTIONS,
    )
    if res.status == 2:
        return -np.inf if maximize else np.inf
    if res.status == 3:
        return np.inf if maximize else -np.inf
    if res.status != 0:
        logger.warning("LP returned status %s: %s", res.status, res.message)
        return float(res.x[m]) if res.x is not None else np.nan
    mu, s = res.x[:m], float(res.x[m])
    top = mu.max() if m else 0.0
    support = np.flatnonzero(mu > 1e-9 * max(1.0, top))
    cols = np.hstack([R[support].T, d[:, None]])
    if np.linalg.matrix_rank(cols) == cols.shape[1]:
        z, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
        scale = max(1.0, float(np.abs(rhs).max()))
        if np.all(z[:-1] >= -1e-12 * scale) and np.allclose(cols @ z, rhs, atol=1e-12 * scale):
            s = float(z[-1])
    return s


# ---------------------------------------------------------------------------
# Membership

def margin(cone: ConeSpec, x) -> float:
    """Signed interior margin: positive inside, zero on the boundary."""
    x = check_point(cone, x)
    if cone.kind == "orthant":
        return float(x.min())
    if cone.kind == "lorentz":
        return float(x[0] - np.linalg.norm(x[1:]))
    if cone.kind == "psd":
        return float(np.linalg.eigvalsh(smat(x, cone.n)).min())
    if cone.kind == "poly_h":
        return float((unit_normals(cone) @ x).min())
    if cone.kind == "poly_v":
        return lp_extreme_shift(cone.matrix, x, base_point(cone), maximize=True)
    return min(margin(f, x[s]) for s, f in cone.blocks())


def contains(cone: ConeSpec, x, strict: bool = True, tol: float = config.MEMBERSHIP_TOL) -> bool:
    """Open-cone membership (strict) or closure membership with slack tol."""
    m = margin(cone, x)
    return m > tol if strict else m >= -tol


def unit_normals(cone: ConeSpec) -> np.ndarray:
    return _unit_rows(cone.matrix)


# ---------------------------------------------------------------------------
# Base points, duals and sections

@lru_cache(maxsize=None)
def _base_point(cone: ConeSpec) -> Tuple[float, ...]:
    if cone.kind == "orthant":
        b = np.ones(cone.n)
    elif cone.kind == "lorentz":
        b = np.zeros(cone.n)
        b[0] = 1.0
    elif cone.kind == "psd":
        b = svec(np.eye(cone.n))
    elif cone.kind == "poly_v":
        b = _unit_rows(cone.matrix).mean(axis=0)
    elif cone.kind == "poly_h":
        b, radius = _chebyshev(unit_normals(cone))
        if radius <= config.INTERIOR_TOL:
            raise ConeSpecError("cone has no interior")
    else:
        b = np.concatenate([base_point(f) for f in cone.factors])
    return tuple(float(v) for v in b)


def base_point(cone: ConeSpec) -> np.ndarray:
    """Canonical deterministic interior point of the cone."""
    return np.array(_base_point(cone))


@lru_cache(maxsize=None)
def dual_cone(cone: ConeSpec) -> ConeSpec:
    """Closed dual under the ambient (trace) inner product."""
    if cone.kind in ("orthant", "lorentz", "psd"):
        return cone
    if cone.kind == "poly_h":
        return ConeSpec("poly_v", cone.n, cone.vectors)
    if cone.kind == "poly_v":
        return ConeSpec("poly_h", cone.n, cone.vectors)
    return ConeSpec("product", cone.n, factors=tuple(dual_cone(f) for f in cone.factors))


def canonical_section(cone: ConeSpec) -> CrossSection:
    """Section by the dual base point, scaled so the base point has level 1."""
    f = base_point(dual_cone(cone))
    f = f / float(f @ base_point(cone))
    return CrossSection(tuple(float(v) for v in f))


def cross_section(cone: ConeSpec, functional) -> CrossSection:
    """Validate a user functional and rescale it so f(base_point) = 1."""
    f = check_point(cone, functional)
    if not contains(dual_cone(cone), f, strict=True):
        raise MembershipError("functional is not strictly positive on the closed cone")
    f = f / float(f @ base_point(cone))
    return CrossSection(tuple(float(v) for v in f))


def to_section(section: CrossSection, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    level = float(section.vector @ x)
    if level <= 0.0:
        raise MembershipError("point does not meet the cross-section")
    return section.level * x / level


# ---------------------------------------------------------------------------
# Extremal structure

def _unique_directions(rows: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    kept: List[np.ndarray] = []
    for row in rows:
        u = row / np.linalg.norm(row)
        if not any(np.linalg.norm(u - k / np.linalg.norm(k)) <= tol for k in kept):
            kept.append(row)
    return np.array(kept)


def _irredundant_rows(R: np.ndarray) -> np.ndarray:
    """Drop rows that are nonnegative combinations of the others (LP test)."""
    R = _unique_directions(R)
    keep = []
    for i in range(R.shape[0]):
        others = np.delete(R, i, axis=0)
        if others.shape[0] == 0:
            keep.append(i)
            continue
        res = linprog(
            c=np.zeros(others.shape[0]),
            A_eq=others.T, b_eq=R[i],
            bounds=[(0, None)],
            method="highs",
        )
        if res.status != 0:
            keep.append(i)
    return R[keep]


@lru_cache(maxsize=None)
def _vertex_enumeration(vectors: Tuple[Tuple[float, ...], ...]) -> Tuple[Tuple[float, ...], ...]:
    """Extreme rays of {x : <a_i, x> >= 0} by enumerating (d-1)-subsets."""
    U = _unit_rows(np.array(vectors, dtype=float))
    m, dim = U.shape
    if dim > config.FACE_ENUMERATION_MAX_DIM:
        raise FaceEnumerationError(
            f"vertex enumeration capped at dimension {config.FACE_ENUMERATION_MAX_DIM}, got {dim}"
        )
    logger.debug("enumerating %d subsets of %d normals in dimension %d",
                 math.comb(m, dim - 1), m, dim)
    rays: List[np.ndarray] = []
    for combo in itertools.combinations(range(m), dim - 1):
        sub = U[list(combo)]
        if dim > 1 and np.linalg.matrix_rank(sub, tol=1e-10) < dim - 1:
            continue
        basis = null_space(sub) if dim > 1 else np.ones((1, 1))
        if basis.shape[1] != 1:
            continue
        v = basis[:, 0]
        values = U @ v
        if np.all(values >= -1e-9):
            rays.append(v)
        elif np.all(values <= 1e-9):
            rays.append(-v)
    if not rays:
        raise ConeSpecError("vertex enumeration found no extreme rays")
    rays_arr = _unique_directions(np.array(rays))
    order = np.lexsort(np.round(rays_arr, 9).T[::-1])
    return _as_tuple(rays_arr[order])


def extremal_generators(cone: ConeSpec, count: int = config.EXTREMAL_SAMPLE_COUNT,
                        seed: int = config.DEFAULT_SEED) -> np.ndarray:
    """Extremal generators as rows; lorentz/psd factors are sampled deterministically."""
    if cone.kind == "orthant":
        return np.eye(cone.n)
    if cone.kind == "poly_v":
        return _irredundant_rows(cone.matrix)
    if cone.kind == "poly_h":
        return np.array(_vertex_enumeration(cone.vectors))
    rng = np.random.default_rng(seed)
    if cone.kind == "lorentz":
        if cone.n == 2:
            return np.array([[1.0, 1.0], [1.0, -1.0]])
        u = rng.normal(size=(count, cone.n - 1))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return np.hstack([np.ones((count, 1)), u])
    if cone.kind == "psd":
        if cone.n == 1:
            return np.ones((1, 1))
        u = rng.normal(size=(count, cone.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return np.array([svec(np.outer(w, w)) for w in u])
    rows = []
    for index, (block, factor) in enumerate(cone.blocks()):
        for g in extremal_generators(factor, count, seed + index):
            full = np.zeros(cone.ambient_dim)
            full[block] = g
            rows.append(full)
    return np.array(rows)


def facet_normals(cone: ConeSpec) -> np.ndarray:
    """Irredundant unit facet normals of a polyhedral cone."""
    if cone.kind == "orthant":
        return np.eye(cone.n)
    if cone.kind == "poly_h":
        return _unit_rows(_irredundant_rows(cone.matrix))
    if cone.kind == "poly_v":
        return np.array(_vertex_enumeration(cone.vectors))
    if cone.kind == "product":
        rows = []
        for block, factor in cone.blocks():
            for a in facet_normals(factor):
                full = np.zeros(cone.ambient_dim)
                full[block] = a
                rows.append(full)
        return np.array(rows)
    raise UnsupportedConeError(f"{cone.kind} cones have no finite facet description")


def is_extremal(cone: ConeSpec, g, tol: float = 1e-7) -> bool:
    """Whether g spans an extreme ray of the closed cone."""
    g = check_point(cone, g)
    size = float(np.linalg.norm(g))
    if size <= tol:
        return False
    if margin(cone, g) < -tol * size:
        return False
    if cone.kind == "orthant":
        return int(np.count_nonzero(g > tol * size)) == 1
    if cone.kind in ("poly_h", "poly_v"):
        if cone.n == 1:
            return True
        normals = facet_normals(cone)
        active = normals[np.abs(normals @ g) <= tol * size]
        return active.shape[0] > 0 and np.linalg.matrix_rank(active, tol=1e-8) == cone.n - 1
    if cone.kind == "lorentz":
        return g[0] > 0 and abs(margin(cone, g)) <= tol * size
    if cone.kind == "psd":
        eig = np.sort(np.linalg.eigvalsh(smat(g, cone.n)))[::-1]
        return eig[0] > 0 and (cone.n == 1 or eig[1] <= tol * eig[0])
    nonzero = [(s, f) for s, f in cone.blocks() if np.linalg.norm(g[s]) > tol * size]
    return len(nonzero) == 1 and is_extremal(nonzero[0][1], g[nonzero[0][0]], tol)


def _face_normals(cone: ConeSpec) -> np.ndarray:
    """Normals against which active sets are reported."""
    if cone.kind == "poly_h":
        return unit_normals(cone)
    return facet_normals(cone)


def minimal_face(cone: ConeSpec, x, tol: float = config.MEMBERSHIP_TOL) -> FaceDescriptor:
    """Descriptor of the minimal face of the closed cone containing x."""
    x = check_point(cone, x)
    if cone.kind == "psd":
        raise UnsupportedConeError("face lattice of psd cones is not enumerated")
    if not contains(cone, x, strict=False, tol=tol):
        raise MembershipError("point lies outside the closed cone")
    scale = max(1.0, float(np.linalg.norm(x)))
    if cone.kind in POLYHEDRAL_KINDS:
        values = _face_normals(cone) @ x
        return FaceDescriptor("active", active=tuple(int(i) for i in np.flatnonzero(values <= tol * scale)))
    if cone.kind == "lorentz":
        if np.linalg.norm(x) <= tol:
            return FaceDescriptor("apex")
        if margin(cone, x) > tol * scale:
            return FaceDescriptor("interior")
        return FaceDescriptor("ray", ray=tuple(float(v) for v in np.round(x / x[0], 9)))
    return FaceDescriptor(
        "product",
        factors=tuple(minimal_face(f, x[s], tol) for s, f in cone.blocks()),
    )


def face_directions(cone: ConeSpec, face: FaceDescriptor,
                    section: Optional[CrossSection] = None) -> np.ndarray:
    """Orthonormal basis (columns) of the linear span of a face.

    With a section, the span is intersected with the section's direction space.
    """
    dim = cone.ambient_dim
    if face.kind == "active":
        rows = _face_normals(cone)[list(face.active)]
        basis = null_space(rows) if rows.shape[0] else np.eye(dim)
    elif face.kind == "interior":
        basis = np.eye(dim)
    elif face.kind == "ray":
        ray = np.array(face.ray)
        basis = (ray / np.linalg.norm(ray))[:, None]
    elif face.kind == "apex":
        basis = np.zeros((dim, 0))
    else:
        parts = []
        for (block, factor), sub in zip(cone.blocks(), face.factors):
            local = face_directions(factor, sub)
            full = np.zeros((dim, local.shape[1]))
            full[block] = local
            parts.append(full)
        basis = np.hstack(parts)
    if section is not None and basis.shape[1]:
        coeffs = null_space((section.vector @ basis)[None, :])
        basis = basis @ coeffs
    return basis


def _minimizing_ray(cone: ConeSpec, w: np.ndarray) -> np.ndarray:
    """Generator direction minimizing <w, d>/<f, d> for the cone's canonical f."""
    if cone.kind == "orthant":
        d = np.zeros(cone.n)
        d[int(np.argmin(w))] = 1.0
        return d
    if cone.kind in ("poly_h", "poly_v"):
        G = extremal_generators(cone)
        f = canonical_section(cone).vector
        return G[int(np.argmin((G @ w) / (G @ f)))]
    if cone.kind == "lorentz":
        tail = w[1:]
        size = np.linalg.norm(tail)
        u = -tail / size if size > 0 else np.eye(cone.n - 1)[0]
        return np.concatenate([[1.0], u])
    if cone.kind == "psd":
        _, vecs = np.linalg.eigh(smat(w, cone.n))
        v = vecs[:, 0]
        return svec(np.outer(v, v))
    f = canonical_section(cone).vector
    best, best_value = None, np.inf
    for block, factor in cone.blocks():
        d = np.zeros(cone.ambient_dim)
        d[block] = _minimizing_ray(factor, w[block])
        value = float(w @ d) / float(f @ d)
        if value < best_value:
            best, best_value = d, value
    return best


def minimizing_generator(cone: ConeSpec, w) -> np.ndarray:
    """Extremal point g of the closed cone with f(g) = 1 minimizing <w, g>."""
    w = check_point(cone, w)
    d = _minimizing_ray(cone, w)
    return d / float(canonical_section(cone).vector @ d)


def exposed_face_point(cone: ConeSpec, functional, tol: float = 1e-9) -> np.ndarray:
    """Relative-interior point of the face {z in cl C : <functional, z> = 0}."""
    y = check_point(cone, functional)
    scale = max(1.0, float(np.linalg.norm(y)))
    if cone.kind in POLYHEDRAL_KINDS:
        G = extremal_generators(cone)
        G = G / np.linalg.norm(G, axis=1, keepdims=True)
        on_face = G[np.abs(G @ y) <= tol * scale]
        return on_face.mean(axis=0) if on_face.shape[0] else np.zeros(cone.ambient_dim)
    if cone.kind == "lorentz":
        if abs(margin(cone, y)) <= tol * scale:
            return np.concatenate([[y[0]], -y[1:]])
        return np.zeros(cone.n)
    if cone.kind == "psd":
        eig, vecs = np.linalg.eigh(smat(y, cone.n))
        kernel = vecs[:, eig <= tol * max(1.0, float(np.abs(eig).max()))]
        return svec(kernel @ kernel.T)
    point = np.zeros(cone.ambient_dim)
    for block, factor in cone.blocks():
        if np.linalg.norm(y[block]) <= tol * scale:
            point[block] = base_point(factor)
        else:
            point[block] = exposed_face_point(factor, y[block], tol)
    return point
