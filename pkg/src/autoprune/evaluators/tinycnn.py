"""Tiny convolutional classifier: pretraining, channel pruning, fine-tuning."""

from __future__ import annotations

import copy

import numpy as np

from ..errors import ShapeError, TrainingError
from ..netmodel import NetworkSpec, apply_ratios, keep_channels, total_flops
from ..nncore import (ConvNet, ConvStage, Sgd, conv_backward, conv_forward,
                      init_conv_stage, load_checkpoint, mse_loss,
                      optimizer_step, save_checkpoint)
from .base import Evaluator
from .dataset import NUM_CLASSES, SyntheticDataset

STAGE_WIDTHS = (8, 16, 32)
PRETRAIN_EPOCHS = 30
PRETRAIN_LR = 0.05
MOMENTUM = 0.9
BATCH_SIZE = 64
ACCURACY_GATE = 0.90


def build_tinycnn(rng) -> ConvNet:
    """Fresh conv 1->8->16->32 classifier with a 4-way dense head."""
    stages = [
        init_conv_stage(rng, STAGE_WIDTHS[0], 1, 3, pad=1, pool=True),
        init_conv_stage(rng, STAGE_WIDTHS[1], STAGE_WIDTHS[0], 3, pad=1, pool=True),
        init_conv_stage(rng, STAGE_WIDTHS[2], STAGE_WIDTHS[1], 3, pad=1, pool=False),
    ]
    bound = 1.0 / np.sqrt(STAGE_WIDTHS[2])
    dense_w = rng.uniform(-bound, bound, (NUM_CLASSES, STAGE_WIDTHS[2]))
    dense_b = np.zeros(NUM_CLASSES)
    return ConvNet(stages, dense_w, dense_b)


def one_hot(labels: np.ndarray) -> np.ndarray:
    out = np.zeros((labels.shape[0], NUM_CLASSES))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def accuracy(net: ConvNet, images: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of images whose arg-max logit matches the label."""
    logits, _ = conv_forward(net, images)
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def _sgd_epochs(net, dataset, epochs, rng, lr):
    opt = Sgd(lr, momentum=MOMENTUM)
    targets = one_hot(dataset.train_y)
    n = dataset.train_x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, BATCH_SIZE):
            idx = order[start:start + BATCH_SIZE]
            logits, cache = conv_forward(net, dataset.train_x[idx])
            loss, grad = mse_loss(logits, targets[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss {loss}")
            grads = conv_backward(net, cache, grad)
            optimizer_step(opt, net.params(), grads)


def pretrain_tinycnn(dataset: SyntheticDataset, epochs: int = PRETRAIN_EPOCHS,
                     seed: int = 1) -> tuple[ConvNet, float]:
    """Train a fresh net with sgd+momentum; full-length runs must pass the accuracy gate."""
    rng = np.random.Generator(np.random.PCG64(seed))
    net = build_tinycnn(rng)
    _sgd_epochs(net, dataset, epochs, rng, PRETRAIN_LR)
    acc = accuracy(net, dataset.val_x, dataset.val_y)
    if epochs >= PRETRAIN_EPOCHS and acc < ACCURACY_GATE:
        raise TrainingError(
            f"validation accuracy {acc:.4f} below the {ACCURACY_GATE:.2f} gate")
    return net, acc


def save_tinycnn(stem: str, net: ConvNet):
    """Write the net's parameters as a checkpoint."""
    save_checkpoint(stem, net.params())


def load_tinycnn(stem: str) -> ConvNet:
    """Rebuild a (possibly pruned) tiny CNN from a checkpoint."""
    tensors = load_checkpoint(stem)
    stages = []
    for i in range(len(STAGE_WIDTHS)):
        stages.append(ConvStage(tensors[f"conv{i}.w"], tensors[f"conv{i}.b"],
                                pad=1, pool=(i < 2)))
    return ConvNet(stages, tensors["dense.w"], tensors["dense.b"])


def channel_importance(layer_w: np.ndarray, next_w: np.ndarray) -> np.ndarray:
    """Per-channel downstream L1 mass: how strongly the next layer reads each channel."""
    n = layer_w.shape[0]
    if next_w.ndim == 4:
        if next_w.shape[1] != n:
            raise ShapeError(f"next layer consumes {next_w.shape[1]} channels, layer has {n}")
        return np.abs(next_w).sum(axis=(0, 2, 3))
    if next_w.ndim == 2:
        if next_w.shape[1] != n:
            raise ShapeError(f"dense layer consumes {next_w.shape[1]} channels, layer has {n}")
        return np.abs(next_w).sum(axis=0)
    raise ShapeError(f"next-layer weights must be rank 2 or 4, got rank {next_w.ndim}")


def kept_channels(net: ConvNet, ratios) -> list[np.ndarray]:
    """Sorted index sets of the channels each conv stage keeps under the given ratios."""
    ratios = [float(a) for a in ratios]
    if len(ratios) != len(net.stages):
        raise ValueError(f"expected {len(net.stages)} ratios, got {len(ratios)}")
    for a in ratios:
        if not 0.0 < a <= 1.0:
            raise ValueError(f"ratio {a} outside (0, 1]")
    kept = []
    for i, stage in enumerate(net.stages):
        next_w = net.stages[i + 1].w if i + 1 < len(net.stages) else net.dense_w
        scores = channel_importance(stage.w, next_w)
        keep = keep_channels(ratios[i], stage.w.shape[0])
        order = np.argsort(-scores, kind="stable")
        kept.append(np.sort(order[:keep]))
    return kept


def prune_network(net: ConvNet, ratios) -> ConvNet:
    """Keep each stage's highest-scoring channels; drop the consumers' input slices."""
    kept = kept_channels(net, ratios)
    stages = []
    prev = None
    for stage, keep in zip(net.stages, kept):
        w = stage.w[keep]
        if prev is not None:
            w = w[:, prev]
        stages.append(ConvStage(w.copy(), stage.b[keep].copy(),
                                stride=stage.stride, pad=stage.pad, pool=stage.pool))
        prev = keep
    dense_w = net.dense_w[:, kept[-1]].copy()
    return ConvNet(stages, dense_w, net.dense_b.copy())


def fine_tune(net: ConvNet, dataset: SyntheticDataset, fraction: float = 0.1,
              seed: int = 1, base_epochs: int = PRETRAIN_EPOCHS,
              lr: float = PRETRAIN_LR * 0.1) -> tuple[ConvNet, float]:
    """Short sgd pass over the surviving parameters; returns (tuned net, new error)."""
    epochs = int(round(fraction * base_epochs))
    tuned = copy.deepcopy(net)
    if epochs > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        _sgd_epochs(tuned, dataset, epochs, rng, lr)
    return tuned, 1.0 - accuracy(tuned, dataset.val_x, dataset.val_y)


class TinyCnnEvaluator(Evaluator):
    """Prune-and-measure evaluator around a pretrained tiny CNN."""

    accounting = "chained"

    def __init__(self, network: NetworkSpec, net: ConvNet, dataset: SyntheticDataset):
        widths = tuple(st.w.shape[0] for st in net.stages)
        spec_widths = tuple(network.layer(t).n for t in network.prunable_ts())
        if widths != spec_widths:
            raise ShapeError(f"net widths {widths} vs network description {spec_widths}")
        self.network = network
        self.net = net
        self.dataset = dataset
        self._base = 1.0 - accuracy(net, dataset.val_x, dataset.val_y)

    @property
    def layer_count(self) -> int:
        return len(self.net.stages)

    def base_error(self) -> float:
        return self._base

    def evaluate(self, ratios) -> float:
        pruned = prune_network(self.net, ratios)
        return 1.0 - accuracy(pruned, self.dataset.val_x, self.dataset.val_y)

    def flops(self, ratios) -> float:
        return float(total_flops(apply_ratios(self.network, [float(a) for a in ratios])))


def evaluate_pruned(evaluator: TinyCnnEvaluator, ratios) -> float:
    """Prune a copy of the evaluator's model and return its validation error."""
    return evaluator.evaluate(ratios)
