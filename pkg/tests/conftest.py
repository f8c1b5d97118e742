import numpy as np
import pytest

from hivevec.geometry import VectorPath, polygon_points, square_points
from hivevec.raster import Scene
from hivevec.styles import StyleClass, style_preset

ALL_STYLES = list(StyleClass)


def blob_points(rng, center, radius, segments=4, jitter=0.25):
    """Closed smooth-ish blob whose last point does not coincide with the first."""
    n = 3 * segments
    ang = np.linspace(0.0, 2.0 * np.pi, n + 1)[:-1] + rng.uniform(0, 0.2)
    rad = radius * (1.0 + jitter * rng.uniform(-1, 1, n))
    pts = np.stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)], axis=1)
    return np.vstack([pts, pts[:1] + rng.uniform(0.3, 0.8, 2)])


def random_path(rng, style: StyleClass, width: int, height: int) -> VectorPath:
    preset = style_preset(style)
    size = min(width, height)
    center = rng.uniform(0.2 * width, 0.8 * width), rng.uniform(0.2 * height, 0.8 * height)
    alpha = rng.uniform(0.4, 0.95)
    if preset.polygon:
        if style is StyleClass.PIXEL_ART:
            pts = square_points(center, rng.uniform(0.15, 0.35) * size)
        else:
            k = int(rng.integers(3, 6))
            ang = np.sort(rng.uniform(0, 2 * np.pi, k))
            r = rng.uniform(0.1, 0.3) * size
            pts = polygon_points(np.stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)], 1))
    elif preset.closed:
        pts = blob_points(rng, center, rng.uniform(0.1, 0.25) * size, segments=int(rng.integers(2, 5)))
    else:
        segs = int(rng.integers(1, 4))
        pts = np.asarray(center) + rng.uniform(-0.2, 0.2, (3 * segs + 1, 2)) * size
    if preset.fixed_rgb is not None:
        paint = np.array([*preset.fixed_rgb, alpha])
    else:
        paint = np.array([*rng.uniform(0.05, 0.95, 3), alpha])
    return VectorPath(
        pts,
        closed=preset.closed,
        fill=paint if preset.filled else None,
        stroke=None if preset.filled else paint,
        stroke_width=rng.uniform(1.5, 4.0) if preset.stroked else 0.0,
        style=style,
    )


def random_scene(rng, width=64, height=64, max_paths=8, styles=None) -> Scene:
    styles = styles or ALL_STYLES
    n = int(rng.integers(1, max_paths + 1))
    scene = Scene(width, height)
    for _ in range(n):
        scene.add(random_path(rng, styles[int(rng.integers(len(styles)))], width, height))
    return scene


def rect_path(x0, y0, x1, y1, color=(1.0, 0.0, 0.0, 1.0), **kw) -> VectorPath:
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    return VectorPath(polygon_points(corners), fill=np.array(color, dtype=float), **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
