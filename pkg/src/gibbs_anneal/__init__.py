"""Grand-canonical Gibbs sampling, annealing and local ground-state checks for pair-potential particle systems."""

__version__ = "0.1.0"

from .potential import PairPotential, bump, hard_rods, ideal, rho_threshold, shoulder_well
from .configuration import BoxRegion, Configuration, Snapshot, energy
from .sampler import GibbsParams, MoveWeights, new_chain, run
from .annealing import Schedule, anneal, replica_ladder
from .ground_state import WindowTest, excitation_gap

__all__ = [
    "PairPotential", "bump", "hard_rods", "ideal", "rho_threshold", "shoulder_well",
    "BoxRegion", "Configuration", "Snapshot", "energy",
    "GibbsParams", "MoveWeights", "new_chain", "run",
    "Schedule", "anneal", "replica_ladder",
    "WindowTest", "excitation_gap",
]
