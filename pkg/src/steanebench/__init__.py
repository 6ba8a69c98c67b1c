"""Logical-qubit benchmarking with the Steane code."""

__version__ = "0.1.0"
