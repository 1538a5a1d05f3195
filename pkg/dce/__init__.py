"""Numerical engine for the dynamical Casimir effect in a cavity bounded by two driven SQUIDs."""
__version__ = "0.1.0"
