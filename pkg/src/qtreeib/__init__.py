"""Information-optimal quadtree abstractions: soft Q-tree search, the hard-constrained
integer program, and the duality relations between them."""

from .envmodel import Environment, load_environment, mutual_information_xy
from .infotheory import InfoIncrements, compute_increments, tree_information
from .quadtree import TreeSelection, enumerate_all_trees, leaves_of, validate_selection

__all__ = [
    "Environment",
    "InfoIncrements",
    "TreeSelection",
    "compute_increments",
    "enumerate_all_trees",
    "leaves_of",
    "load_environment",
    "mutual_information_xy",
    "tree_information",
    "validate_selection",
]

__version__ = "0.1.0"
