"""Guardrailed, retrieval-augmented stepwise HRV interpretation."""

__version__ = "0.1.0"
