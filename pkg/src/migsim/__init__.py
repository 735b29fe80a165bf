"""migsim: deterministic simulation of objects executing on network nodes,
with object-addressed routing over FIFO links and runtime adaptation via
load-driven object migration."""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig
from .engine import InvariantError, World
from .netgraph import build_full_mesh, build_grid, build_hypercube, validate
from .routing import ObjectId, RoutingTable

__all__ = [
    "ConfigError",
    "InvariantError",
    "ObjectId",
    "RoutingTable",
    "RunConfig",
    "World",
    "build_full_mesh",
    "build_grid",
    "build_hypercube",
    "validate",
    "__version__",
]
