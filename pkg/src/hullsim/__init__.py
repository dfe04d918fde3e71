"""Shared-autonomy hull inspection simulator.

A teleoperated leader and a learned follower keep a PoI-centric formation
around a ship hull under a degraded pose-broadcast link, with a behavior-tree
mission executive and a wire protocol for a live operator console.
"""

from importlib import resources

__version__ = "0.1.0"


def standard_scene_path():
    """Filesystem path of the packaged standard scene."""
    return resources.files(__package__) / "scenes" / "standard.yaml"
