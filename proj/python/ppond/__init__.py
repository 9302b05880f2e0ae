"""Goal-based contingent-problem solver with sensing-aware heuristics."""

from ._core import (
    Problem,
    __version__,
    generate_localize,
    generate_maze,
    generate_wumpus,
    heuristic_value,
    oracle,
    parse,
    serialize,
    solve,
    structurally_equal,
)

__all__ = [
    "Problem",
    "__version__",
    "generate_localize",
    "generate_maze",
    "generate_wumpus",
    "heuristic_value",
    "oracle",
    "parse",
    "serialize",
    "solve",
    "structurally_equal",
]
