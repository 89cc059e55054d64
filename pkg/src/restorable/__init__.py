"""Restorable tiebreaking for replacement paths, and the fault-tolerant
structures built on it: preservers, +4 spanners, distance labels, a
lower-bound family and a CONGEST simulator."""

from .errors import RestorableError
from .graph import UNREACHABLE, UndirectedGraph, load_graph, read_graph, write_graph
from .tiebreak import PerturbedDigraph, Rpts, perturb, with_resampling

__version__ = "0.1.0"

__all__ = [
    "UNREACHABLE",
    "PerturbedDigraph",
    "RestorableError",
    "Rpts",
    "UndirectedGraph",
    "load_graph",
    "perturb",
    "read_graph",
    "with_resampling",
    "write_graph",
]
