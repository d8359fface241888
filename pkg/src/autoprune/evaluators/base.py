"""Common interface for accuracy evaluators."""

from __future__ import annotations

from ..netmodel import NetworkSpec


class Evaluator:
    """Maps a per-layer keep-ratio vector to an error fraction and a FLOPs count."""

    # "linear" means each layer costs f_t * a_t (output side only);
    # "chained" means a layer's cost also shrinks with its producer's ratio.
    accounting = "linear"
    network: NetworkSpec

    @property
    def layer_count(self) -> int:
        raise NotImplementedError

    def base_error(self) -> float:
        """Error at all-ones ratios."""
        raise NotImplementedError

    def evaluate(self, ratios) -> float:
        """Error fraction in [0, 1] for the given keep ratios; pure per call."""
        raise NotImplementedError

    def flops(self, ratios) -> float:
        """FLOPs of the network compressed by the given ratios."""
        raise NotImplementedError
