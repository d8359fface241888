"""Learned per-layer channel-pruning ratios for conv nets under a FLOPs budget."""

__version__ = "0.1.0"
