"""Ensures the tests directory is importable (for the oracle helpers)."""
