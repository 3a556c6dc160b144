"""Optically pumped NV centre as a tunable Markovian bath for nuclear spins."""

__version__ = "0.1.0"
