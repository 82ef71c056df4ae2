"""Compensated jump martingales: simulation, partition entropy and maximal-inequality checks."""

__version__ = "0.1.0"
