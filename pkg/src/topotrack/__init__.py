"""topotrack: merge-tree feature tracking with partial optimal transport."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    evaluation,
    export,
    field,
    mergetree,
    network,
    stability,
    synthetic,
    tracking,
    transport,
)
