"""SVG figures of two-dimensional cross-sections rendered with Jinja2."""
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape
from scipy.linalg import null_space

from .cones import ConeSpec, CrossSection, base_point, canonical_section
from .errors import UnsupportedConeError
from .gauges import boundary_intersections, exit_parameter, hilbert_ball_boundary

logger = logging.getLogger(__name__)

TEMPLATE_PATH = Path(__file__).parent / "templates" / "section.svg.j2"
ENVIRONMENT = Environment(
    loader=FileSystemLoader(TEMPLATE_PATH.parent),
    autoescape=select_autoescape(enabled_extensions=("svg.j2",)),
)
CANVAS = 480
PADDING = 24
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _frame(cone: ConeSpec, section: CrossSection) -> Tuple[np.ndarray, np.ndarray]:
    """Section origin (the rescaled base point) and an orthonormal basis of its directions."""
    b = base_point(cone)
    origin = section.level * b / float(section.vector @ b)
    return origin, null_space(section.vector[None, :])


def _polyline(points: np.ndarray, origin: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return (np.atleast_2d(points) - origin) @ basis


def render_section(cone: ConeSpec, section: Optional[CrossSection] = None,
                   centers: Sequence[Sequence[float]] = (), radii: Sequence[float] = (),
                   geodesics: Sequence[Tuple[Sequence[float], Sequence[float]]] = (),
                   resolution: int = 180, title: str = "") -> str:
    """Boundary of the section, Hilbert balls around each center, and chords through geodesic pairs."""
    if cone.ambient_dim != 3:
        raise UnsupportedConeError("cross-section figures need a cone of ambient dimension 3")
    section = section or canonical_section(cone)
    origin, basis = _frame(cone, section)
    angles = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    directions = np.cos(angles)[:, None] * basis[:, 0] + np.sin(angles)[:, None] * basis[:, 1]
    boundary = np.array([origin + exit_parameter(cone, origin, u) * u for u in directions])

    shapes = {"boundary": _polyline(boundary, origin, basis), "balls": [], "segments": [], "chords": []}
    for k, center in enumerate(centers):
        center = section.level * np.asarray(center, dtype=float) / float(section.vector @ center)
        for radius in radii:
            ring = hilbert_ball_boundary(cone, section, center, radius, directions)
            shapes["balls"].append((_polyline(ring, origin, basis), PALETTE[k % len(PALETTE)], radius))
    for x, y in geodesics:
        x = section.level * np.asarray(x, dtype=float) / float(section.vector @ x)
        y = section.level * np.asarray(y, dtype=float) / float(section.vector @ y)
        w, z = boundary_intersections(cone, section, x, y)
        shapes["chords"].append(_polyline(np.array([w, z]), origin, basis))
        shapes["segments"].append(_polyline(np.array([x, y]), origin, basis))

    flat = shapes["boundary"]
    low, high = flat.min(axis=0), flat.max(axis=0)
    scale = (CANVAS - 2 * PADDING) / float(max(high - low))

    def to_svg(points: np.ndarray) -> str:
        # svg y grows downwards
        xs = PADDING + (points[:, 0] - low[0]) * scale
        ys = CANVAS - PADDING - (points[:, 1] - low[1]) * scale
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(xs, ys))

    template = ENVIRONMENT.get_template(TEMPLATE_PATH.name)
    logger.debug("rendering %s with %d balls and %d geodesics", cone, len(shapes["balls"]), len(geodesics))
    return template.render(
        size=CANVAS,
        title=title or f"Cross-section of {cone}",
        boundary=to_svg(shapes["boundary"]),
        balls=[{"points": to_svg(p), "color": color, "radius": radius} for p, color, radius in shapes["balls"]],
        chords=[to_svg(p) for p in shapes["chords"]],
        segments=[to_svg(p) for p in shapes["segments"]],
    )


def ball_vertex_count(ring: np.ndarray, tol: float = 1e-3) -> int:
    """Number of corners of a sampled closed curve.

    A corner is a maximal run of consecutive samples whose turning angle exceeds tol.
    """
    edges = np.roll(ring, -1, axis=0) - ring
    headings = np.arctan2(edges[:, 1], edges[:, 0])
    turning = np.abs(np.angle(np.exp(1j * (np.roll(headings, -1) - headings)))) > tol
    if turning.all():
        return 0
    starts = turning & ~np.roll(turning, 1)
    return int(np.sum(starts))


def section_ball(cone: ConeSpec, center, radius: float, resolution: int = 360,
                 section: Optional[CrossSection] = None) -> np.ndarray:
    """A Hilbert ball boundary in section coordinates."""
    section = section or canonical_section(cone)
    origin, basis = _frame(cone, section)
    angles = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    directions = np.cos(angles)[:, None] * basis[:, 0] + np.sin(angles)[:, None] * basis[:, 1]
    center = section.level * np.asarray(center, dtype=float) / float(section.vector @ center)
    return _polyline(hilbert_ball_boundary(cone, section, center, radius, directions), origin, basis)

