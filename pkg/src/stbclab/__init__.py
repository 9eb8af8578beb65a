"""Rank analysis and sphere decoding for linear-dispersion space-time block codes."""

__version__ = "0.1.0"
