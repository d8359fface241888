"""Pluggable accuracy evaluators: the analytic proxy and the tiny CNN."""

from .base import Evaluator
from .dataset import (IMAGE_SIZE, NUM_CLASSES, SyntheticDataset, export_dataset,
                      generate_dataset)
from .proxy import (SENSITIVITY_RANGE, ProxyEvaluator, ProxyModel, make_proxy,
                    proxy_evaluate, proxy_flops)
from .tinycnn import (ACCURACY_GATE, PRETRAIN_EPOCHS, TinyCnnEvaluator, accuracy,
                      build_tinycnn, channel_importance, evaluate_pruned, fine_tune,
                      kept_channels, load_tinycnn, one_hot, pretrain_tinycnn,
                      prune_network, save_tinycnn)

__all__ = [
    "ACCURACY_GATE", "Evaluator", "IMAGE_SIZE", "NUM_CLASSES", "PRETRAIN_EPOCHS",
    "ProxyEvaluator", "ProxyModel", "SENSITIVITY_RANGE", "SyntheticDataset",
    "TinyCnnEvaluator", "accuracy", "build_tinycnn", "channel_importance",
    "evaluate_pruned", "export_dataset", "fine_tune", "generate_dataset",
    "kept_channels", "load_tinycnn", "make_proxy", "one_hot", "pretrain_tinycnn",
    "proxy_evaluate", "proxy_flops", "prune_network", "save_tinycnn",
]
