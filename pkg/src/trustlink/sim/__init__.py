"""Monte Carlo simulation of the service protocol."""

from .batch import SimSummary, dominance_scan, run_batch, simulate_range
from .episode import EpisodeConfig, EpisodeResult, ExponentialService, GeometricW, run_episode

__all__ = [
    "EpisodeConfig",
    "EpisodeResult",
    "ExponentialService",
    "GeometricW",
    "SimSummary",
    "dominance_scan",
    "run_batch",
    "run_episode",
    "simulate_range",
]
