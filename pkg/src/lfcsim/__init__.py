"""Load-frequency control simulation for single- and multi-area power systems."""

__version__ = "0.1.0"
