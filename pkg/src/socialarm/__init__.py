"""Deterministic behaviour engine and interactive simulator for an
expressive, attention-driven 6-DOF arm."""

__version__ = "0.1.0"
