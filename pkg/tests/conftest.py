import pytest

from hullsim import standard_scene_path
from hullsim.world import Bounds, Circle, WorldConfig, load_scene


def make_scene(hull=None, labels=None, obstacles=(), poi=None, bounds=None,
               **kw) -> WorldConfig:
    """Unit-square hull scene unless overridden; poi defaults to mid bottom edge."""
    if hull is None:
        hull = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
        labels = labels or ("Port", "Starboard", "Bow", "Stern")
    if labels is None:
        labels = tuple("Port" for _ in hull)
    cfg = WorldConfig(
        hull=tuple(hull),
        edge_labels=tuple(labels),
        obstacles=tuple(Circle(center=c, radius=r) for c, r in obstacles),
        poi=poi if poi is not None else (0.5, 0.0),
        bounds=bounds or Bounds(-100.0, -100.0, 100.0, 100.0),
        **kw,
    )
    cfg.validate()
    return cfg


def far_scene(**kw) -> WorldConfig:
    """Scene whose geometry is far from the origin (effectively empty nearby)."""
    hull = ((500.0, 500.0), (510.0, 500.0), (510.0, 510.0), (500.0, 510.0))
    return make_scene(hull=hull, labels=("Port",) * 4, poi=(505.0, 500.0),
                      bounds=Bounds(-1000.0, -1000.0, 1000.0, 1000.0), **kw)


@pytest.fixture(scope="session")
def standard_scene() -> WorldConfig:
    return load_scene(standard_scene_path())
