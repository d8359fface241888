"""Naive direct 2-D convolution network: conv+relu stages with optional 2x2
max pooling, global average pool, dense classifier head.

The forward pass accumulates over input channels one at a time, in index
order.  That makes a physically pruned network and a channel-masked full
network follow identical partial sums, so their logits agree exactly, which
the pruning evaluators rely on.  Backward is free to use fast contractions;
only forward values carry that exactness contract.
"""

import math

import numpy as np

from ..errors import ShapeError
from .core import Tensor


class ConvStage:
    """One block: k x k conv with bias, relu, optional 2x2 max pool."""

    def __init__(self, w: Tensor, b: Tensor, stride: int = 1, pad: int = 1, pool: bool = False):
        w = np.asarray(w, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if w.ndim != 4 or w.shape[2] != w.shape[3]:
            raise ShapeError(f"conv weight must be n x c x k x k, got {w.shape}")
        if b.shape != (w.shape[0],):
            raise ShapeError(f"conv bias shape {b.shape} vs {w.shape[0]} filters")
        self.w = w
        self.b = b
        self.stride = stride
        self.pad = pad
        self.pool = pool


def init_conv_stage(rng, n: int, c: int, k: int, stride: int = 1, pad: int = 1, pool: bool = False) -> ConvStage:
    bound = 1.0 / math.sqrt(c * k * k)
    return ConvStage(
        rng.uniform(-bound, bound, (n, c, k, k)),
        rng.uniform(-bound, bound, n),
        stride=stride, pad=pad, pool=pool,
    )


class ConvNet:
    """Conv stages, then global average pool, then one dense layer."""

    def __init__(self, stages: list[ConvStage], dense_w: Tensor, dense_b: Tensor):
        dense_w = np.asarray(dense_w, dtype=np.float64)
        dense_b = np.asarray(dense_b, dtype=np.float64)
        for a, b in zip(stages, stages[1:]):
            if b.w.shape[1] != a.w.shape[0]:
                raise ShapeError(f"stage chaining mismatch: {a.w.shape[0]} out vs {b.w.shape[1]} in")
        if stages and dense_w.shape[1] != stages[-1].w.shape[0]:
            raise ShapeError(f"dense input {dense_w.shape[1]} vs last stage {stages[-1].w.shape[0]}")
        if dense_b.shape != (dense_w.shape[0],):
            raise ShapeError(f"dense bias shape {dense_b.shape} vs {dense_w.shape[0]} classes")
        self.stages = stages
        self.dense_w = dense_w
        self.dense_b = dense_b

    def params(self) -> dict[str, Tensor]:
        out = {}
        for i, st in enumerate(self.stages):
            out[f"conv{i}.w"] = st.w
            out[f"conv{i}.b"] = st.b
        out["dense.w"] = self.dense_w
        out["dense.b"] = self.dense_b
        return out


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride: int, pad: int) -> tuple[Tensor, Tensor]:
    """Direct cross-correlation; returns (output, padded input).

    Channel accumulation is sequential in input-channel order (see module
    docstring); within a channel the kernel taps add in (ki, kj) order.
    """
    bsz, cin, h, wd = x.shape
    n, c, k, _ = w.shape
    if c != cin:
        raise ShapeError(f"input has {cin} channels, conv expects {c}")
    ho = (h + 2 * pad - k) // stride + 1
    wo = (wd + 2 * pad - k) // stride + 1
    if ho < 1 or wo < 1:
        raise ShapeError(f"conv output {ho}x{wo} < 1 for input {h}x{wd}")
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    out = np.zeros((bsz, n, ho, wo))
    for ci in range(cin):
        contrib = np.zeros((bsz, n, ho, wo))
        for ki in range(k):
            for kj in range(k):
                patch = xp[:, ci, ki:ki + stride * ho:stride, kj:kj + stride * wo:stride]
                contrib += w[None, :, ci, ki, kj, None, None] * patch[:, None, :, :]
        out += contrib
    return out + b[None, :, None, None], xp


def _conv2d_back(gz, xp, w, stride, pad):
    bsz, n, ho, wo = gz.shape
    k = w.shape[2]
    dw = np.zeros_like(w)
    gxp = np.zeros_like(xp)
    for ki in range(k):
        for kj in range(k):
            patch = xp[:, :, ki:ki + stride * ho:stride, kj:kj + stride * wo:stride]
            dw[:, :, ki, kj] = np.einsum("bnhw,bchw->nc", gz, patch)
            gxp[:, :, ki:ki + stride * ho:stride, kj:kj + stride * wo:stride] += \
                np.einsum("bnhw,nc->bchw", gz, w[:, :, ki, kj])
    db = gz.sum(axis=(0, 2, 3))
    if pad:
        gxp = gxp[:, :, pad:-pad, pad:-pad]
    return dw, db, gxp


def _pool2(a):
    bsz, c, h, wd = a.shape
    if h % 2 or wd % 2:
        raise ShapeError(f"2x2 pool needs even spatial size, got {h}x{wd}")
    q = (a[:, :, 0::2, 0::2], a[:, :, 0::2, 1::2], a[:, :, 1::2, 0::2], a[:, :, 1::2, 1::2])
    return np.maximum(np.maximum(q[0], q[1]), np.maximum(q[2], q[3])), q


def _pool2_back(gm, q, m, shape):
    # route each window's gradient to its first maximal entry, scan order
    gx = np.zeros(shape)
    views = (gx[:, :, 0::2, 0::2], gx[:, :, 0::2, 1::2], gx[:, :, 1::2, 0::2], gx[:, :, 1::2, 1::2])
    taken = np.zeros(gm.shape, dtype=bool)
    for qi, view in zip(q, views):
        hit = (qi == m) & ~taken
        view += np.where(hit, gm, 0.0)
        taken |= hit
    return gx


def conv_forward(net: ConvNet, batch: Tensor) -> tuple[Tensor, dict]:
    """Logits for a batch x c x h x w input, plus cached activations for
    conv_backward."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 4:
        raise ShapeError(f"batch must be 4-d, got shape {x.shape}")
    cache = {"input": x, "stages": []}
    for st in net.stages:
        z, xp = conv2d(x, st.w, st.b, st.stride, st.pad)
        a = np.maximum(z, 0.0)
        rec = {"xp": xp, "z": z}
        if st.pool:
            m, q = _pool2(a)
            rec.update(a=a, q=q, m=m)
            x = m
        else:
            x = a
        cache["stages"].append(rec)
    cache["gap_in"] = x
    gap = x.mean(axis=(2, 3))
    cache["gap"] = gap

    logits = np.zeros((x.shape[0], net.dense_b.shape[0]))
    for ci in range(gap.shape[1]):  # channel-sequential, mirrors conv2d
        logits += gap[:, ci:ci + 1] * net.dense_w[None, :, ci]
    logits += net.dense_b
    return logits, cache


def conv_backward(net: ConvNet, cache: dict, output_grad: Tensor) -> dict[str, Tensor]:
    """Parameter gradients of sum(logits * output_grad) from a cached forward."""
    gout = np.asarray(output_grad, dtype=np.float64)
    gap = cache["gap"]
    if gout.shape != (gap.shape[0], net.dense_b.shape[0]):
        raise ShapeError(f"output_grad shape {gout.shape} mismatches logits")
    grads = {"dense.w": gout.T @ gap, "dense.b": gout.sum(axis=0)}
    ggap = gout @ net.dense_w

    gap_in = cache["gap_in"]
    h, wd = gap_in.shape[2:]
    gx = np.broadcast_to(ggap[:, :, None, None], gap_in.shape) / (h * wd)

    for i in reversed(range(len(net.stages))):
        st = net.stages[i]
        rec = cache["stages"][i]
        if st.pool:
            gx = _pool2_back(gx, rec["q"], rec["m"], rec["a"].shape)
        gz = gx * (rec["z"] > 0.0)
        dw, db, gx = _conv2d_back(gz, rec["xp"], st.w, st.stride, st.pad)
        grads[f"conv{i}.w"] = dw
        grads[f"conv{i}.b"] = db
    return grads
