"""Statistical tests for name-frequency corpora against a historical reference."""

__version__ = "0.1.0"
