import numpy as np
import pytest

from rfmap.geometry import Point2, axis_aligned_rectangle
from rfmap.scene import Scene


@pytest.fixture
def empty_scene():
    return Scene(
        id="empty",
        side_m=200.0,
        buildings=(),
        ues=(Point2(20.0, 20.0),),
        bss=(Point2(120.0, 20.0),),
    )


@pytest.fixture
def one_wall_scene():
    """One slab whose south face (y = 23) mirrors the worked bounce example.

    Device frame is shifted by +20 m so everything stays inside the extent:
    ue = (20, 20), bs = (24, 20), wall face on y = 23 spanning x in [10, 30].
    """
    wall = axis_aligned_rectangle(10.0, 23.0, 30.0, 27.0)
    return Scene(
        id="one-wall",
        side_m=200.0,
        buildings=(wall,),
        ues=(Point2(20.0, 20.0),),
        bss=(Point2(24.0, 20.0),),
    )


def random_simple_polygon(rng: np.random.Generator, cx, cy, rmin, rmax, n=None):
    """Random star-shaped CCW polygon around (cx, cy).

    Stratified angles keep every angular gap below pi, which makes the
    center interior and the sorted-angle polygon provably simple.
    """
    from rfmap.geometry import Point2, SimplePolygon

    n = n if n is not None else int(rng.integers(4, 10))
    angles = (np.arange(n) + rng.uniform(0.1, 0.9, size=n)) * (2.0 * np.pi / n)
    radii = rng.uniform(rmin, rmax, size=n)
    pts = [
        Point2(cx + r * np.cos(a), cy + r * np.sin(a))
        for a, r in zip(angles, radii)
    ]
    return SimplePolygon(tuple(pts))
