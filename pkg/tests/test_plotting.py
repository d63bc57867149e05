import numpy as np
import pytest

from conegauge import cones, plotting
from conegauge.errors import UnsupportedConeError


class TestRenderSection:
    def test_boundary_balls_and_geodesics(self, square):
        svg = plotting.render_section(
            square,
            centers=[[1.0, 0.0, 0.0], [1.0, 0.3, -0.2]],
            radii=[0.5, 1.0],
            geodesics=[([1.0, -0.5, 0.0], [1.0, 0.5, 0.5])],
            resolution=90,
            title="square",
        )
        assert svg.lstrip().startswith("<svg")
        assert svg.count('class="boundary"') == 1
        assert svg.count('class="ball"') == 4
        assert svg.count('class="chord"') == 1
        assert svg.count('class="geodesic"') == 1
        assert "<title>square</title>" in svg

    def test_default_title(self):
        svg = plotting.render_section(cones.lorentz(3), resolution=60)
        assert "Cross-section of" in svg
        assert 'class="ball"' not in svg

    def test_title_is_escaped(self, square):
        svg = plotting.render_section(square, resolution=60, title="F(x, y) < 1 & R(x, y) > 0")
        assert "<title>F(x, y) &lt; 1 &amp; R(x, y) &gt; 0</title>" in svg

    def test_needs_three_dimensions(self):
        with pytest.raises(UnsupportedConeError):
            plotting.render_section(cones.orthant(4))


class TestBallShape:
    def test_simplex_ball_is_a_hexagon(self):
        ring = plotting.section_ball(cones.orthant(3), [1.0, 1.0, 1.0], 0.5, resolution=720)
        assert ring.shape == (720, 2)
        assert plotting.ball_vertex_count(ring) == 6

    def test_disk_ball_has_no_corners(self):
        ring = plotting.section_ball(cones.lorentz(3), [1.0, 0.0, 0.0], 0.5, resolution=360)
        assert plotting.ball_vertex_count(ring) == 0

    def test_vertex_count_of_sampled_square(self):
        t = np.linspace(0.0, 1.0, 25, endpoint=False)
        sides = [np.c_[t, np.zeros_like(t)], np.c_[np.ones_like(t), t],
                 np.c_[1.0 - t, np.ones_like(t)], np.c_[np.zeros_like(t), 1.0 - t]]
        assert plotting.ball_vertex_count(np.vstack(sides)) == 4
