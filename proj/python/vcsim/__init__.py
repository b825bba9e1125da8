"""Vehicular collision detection over an SDN backhaul, simulated."""

try:
    from ._vcsim import *  # noqa: F401,F403
    from ._vcsim import VcsimError
except ImportError:  # build tree: extension sits next to the package
    from _vcsim import *  # noqa: F401,F403
    from _vcsim import VcsimError

__all__ = [
    "VcsimError",
    "access_delay",
    "cli",
    "config_defaults",
    "cpa",
    "refine",
    "run",
    "topology_json",
]
