"""Cycle structure of cycle-weighted interchange processes on Hamming graphs."""

__version__ = "0.1.0"

from .graph import HammingGraph, complete, hamming
from .permutation import CycleTracker, Permutation, cycle_stats
from .config import BridgeConfiguration, permutation_of, sample_poisson

__all__ = ["HammingGraph", "hamming", "complete", "Permutation", "CycleTracker",
           "cycle_stats", "BridgeConfiguration", "sample_poisson", "permutation_of"]
