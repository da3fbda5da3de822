"""Numpy fallback kernels for the network hot loops.

Convolutions are expressed as windowed views feeding BLAS matmuls
(tensordot), so this lane is fast enough to train on, just heavier on
temporary memory than the native lane.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

NAME = "numpy"


def _check_conv_args(x, w, b, stride, pad):
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-d input/weights, got {x.ndim}/{w.ndim}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(f"channel mismatch: input has {x.shape[1]}, "
                         f"weights expect {w.shape[1]}")
    if b.shape != (w.shape[0],):
        raise ValueError(f"bias shape {b.shape} != ({w.shape[0]},)")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if pad < 0:
        raise ValueError("pad must be >= 0")


def _windows(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """(B, C, OH, OW, kh, kw) sliding view over an already padded input."""
    batch, chans, height, width = x.shape
    out_h = (height - kh) // stride + 1
    out_w = (width - kw) // stride + 1
    sb, sc, sh, sw = x.strides
    return as_strided(
        x,
        (batch, chans, out_h, out_w, kh, kw),
        (sb, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                   stride: int = 1, pad: int = 0) -> np.ndarray:
    _check_conv_args(x, w, b, stride, pad)
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    win = _windows(x, w.shape[2], w.shape[3], stride)
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))
    out += b
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d_backward(x: np.ndarray, w: np.ndarray, dy: np.ndarray,
                    stride: int = 1, pad: int = 0):
    """Gradients (dx, dw, db) of conv2d_forward."""
    _check_conv_args(x, w, np.zeros(w.shape[0], dtype=w.dtype), stride, pad)
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    win = _windows(xp, kh, kw, stride)

    db = dy.sum(axis=(0, 2, 3))
    dw = np.tensordot(dy, win, axes=([0, 2, 3], [0, 2, 3]))

    # Input gradient: full correlation of the (dilated) upstream gradient
    # with the spatially flipped kernels gives the gradient w.r.t. the
    # padded input; the pad border is then cropped off.  Rows/cols the
    # sliding window never reached keep zero gradient.
    if stride > 1:
        dil = np.zeros((dy.shape[0], dy.shape[1],
                        (dy.shape[2] - 1) * stride + 1,
                        (dy.shape[3] - 1) * stride + 1), dtype=dy.dtype)
        dil[:, :, ::stride, ::stride] = dy
    else:
        dil = dy
    dyp = np.pad(dil, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
    dy_win = _windows(dyp, kh, kw, 1)
    w_flip = w[:, :, ::-1, ::-1]
    dxp = np.tensordot(dy_win, w_flip, axes=([1, 4, 5], [0, 2, 3]))
    dxp = dxp.transpose(0, 3, 1, 2)
    full = np.zeros((x.shape[0], x.shape[1],
                     x.shape[2] + 2 * pad, x.shape[3] + 2 * pad), dtype=x.dtype)
    full[:, :, :dxp.shape[2], :dxp.shape[3]] = dxp
    dx = np.ascontiguousarray(
        full[:, :, pad:pad + x.shape[2], pad:pad + x.shape[3]])
    return dx, np.ascontiguousarray(dw), db


def maxpool2x2_forward(x: np.ndarray):
    """2x2/stride-2 max pool; returns (pooled, argmax index in 0..3)."""
    batch, chans, height, width = x.shape
    if height % 2 or width % 2:
        raise ValueError(f"maxpool2x2 needs even spatial dims, got {height}x{width}")
    blocks = x.reshape(batch, chans, height // 2, 2, width // 2, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(
        batch, chans, height // 2, width // 2, 4)
    idx = blocks.argmax(axis=-1).astype(np.uint8)
    out = np.take_along_axis(blocks, idx[..., None].astype(np.intp), axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool2x2_backward(dy: np.ndarray, idx: np.ndarray) -> np.ndarray:
    batch, chans, out_h, out_w = dy.shape
    blocks = np.zeros((batch, chans, out_h, out_w, 4), dtype=dy.dtype)
    np.put_along_axis(blocks, idx[..., None].astype(np.intp), dy[..., None], axis=-1)
    blocks = blocks.reshape(batch, chans, out_h, out_w, 2, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5)
    return np.ascontiguousarray(
        blocks.reshape(batch, chans, out_h * 2, out_w * 2))
