"""Quantum Fisher information of noisy qubit probes and metrology strategy comparison."""

__version__ = "0.1.0"
