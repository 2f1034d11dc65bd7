"""Synthesis of many-body unitaries from chained few-body entanglers."""

__version__ = "0.1.0"
