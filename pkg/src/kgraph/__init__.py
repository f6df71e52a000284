"""K-theory invariants of higher-rank graphs with involution."""

__version__ = "0.1.0"
