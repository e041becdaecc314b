"""Incentive analysis for pay-per-round wireless service under payment loss."""

__version__ = "0.1.0"
