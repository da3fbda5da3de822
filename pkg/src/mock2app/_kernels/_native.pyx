# cython: boundscheck=False, wraparound=False, language_level=3
"""Thin wrapper binding the C hot-loop kernels to numpy arrays.

Shape validation and array normalization happen here; the arithmetic
lives in convkernels.c.  Semantics mirror the numpy lane exactly: zero
padding, row-major first-index tie-break in pooling, float32.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "convkernels.h" nogil:
    void m2a_conv2d_forward(const float *x, const float *w, const float *b,
                            float *out, int B, int CI, int H, int W,
                            int CO, int KH, int KW, int stride, int pad)
    void m2a_conv2d_backward(const float *x, const float *w, const float *dy,
                             float *dx, float *dw, float *db,
                             int B, int CI, int H, int W,
                             int CO, int KH, int KW, int OH, int OW,
                             int stride, int pad)
    void m2a_maxpool2x2_forward(const float *x, float *out, unsigned char *idx,
                                int B, int C, int H, int W)
    void m2a_maxpool2x2_backward(const float *dy, const unsigned char *idx,
                                 float *dx, int B, int C, int OH, int OW)

NAME = "native"


def _conv_shapes(x, w, b, int stride, int pad):
    if x.ndim != 4 or w.ndim != 4:
        raise ValueError(f"conv2d expects 4-d input/weights, got {x.ndim}/{w.ndim}")
    if x.shape[1] != w.shape[1]:
        raise ValueError(f"channel mismatch: input has {x.shape[1]}, "
                         f"weights expect {w.shape[1]}")
    if b is not None and b.shape[0] != w.shape[0]:
        raise ValueError(f"bias shape {b.shape} != ({w.shape[0]},)")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if pad < 0:
        raise ValueError("pad must be >= 0")
    oh = (x.shape[2] + 2 * pad - w.shape[2]) // stride + 1
    ow = (x.shape[3] + 2 * pad - w.shape[3]) // stride + 1
    if oh <= 0 or ow <= 0:
        raise ValueError("kernel larger than padded input")
    return oh, ow


def conv2d_forward(x, w, b, int stride=1, int pad=0):
    x = np.ascontiguousarray(x, dtype=np.float32)
    w = np.ascontiguousarray(w, dtype=np.float32)
    b = np.ascontiguousarray(b, dtype=np.float32)
    oh, ow = _conv_shapes(x, w, b, stride, pad)
    out = np.empty((x.shape[0], w.shape[0], oh, ow), dtype=np.float32)
    cdef float[:, :, :, ::1] xv = x, wv = w, ov = out
    cdef float[::1] bv = b
    cdef int B = x.shape[0], CI = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef int CO = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef int s = stride, p = pad
    with nogil:
        m2a_conv2d_forward(&xv[0, 0, 0, 0], &wv[0, 0, 0, 0], &bv[0],
                           &ov[0, 0, 0, 0], B, CI, H, W, CO, KH, KW, s, p)
    return out


def conv2d_backward(x, w, dy, int stride=1, int pad=0):
    x = np.ascontiguousarray(x, dtype=np.float32)
    w = np.ascontiguousarray(w, dtype=np.float32)
    dy = np.ascontiguousarray(dy, dtype=np.float32)
    _conv_shapes(x, w, None, stride, pad)
    dx = np.zeros_like(x)
    dw = np.empty_like(w)
    db = np.empty(w.shape[0], dtype=np.float32)
    cdef float[:, :, :, ::1] xv = x, wv = w, dyv = dy, dxv = dx, dwv = dw
    cdef float[::1] dbv = db
    cdef int B = x.shape[0], CI = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef int CO = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef int OH = dy.shape[2], OW = dy.shape[3]
    cdef int s = stride, p = pad
    with nogil:
        m2a_conv2d_backward(&xv[0, 0, 0, 0], &wv[0, 0, 0, 0], &dyv[0, 0, 0, 0],
                            &dxv[0, 0, 0, 0], &dwv[0, 0, 0, 0], &dbv[0],
                            B, CI, H, W, CO, KH, KW, OH, OW, s, p)
    return dx, dw, db


def maxpool2x2_forward(x):
    x = np.ascontiguousarray(x, dtype=np.float32)
    cdef int B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    if H % 2 or W % 2:
        raise ValueError(f"maxpool2x2 needs even spatial dims, got {H}x{W}")
    out = np.empty((B, C, H // 2, W // 2), dtype=np.float32)
    idx = np.empty((B, C, H // 2, W // 2), dtype=np.uint8)
    cdef float[:, :, :, ::1] xv = x, ov = out
    cdef unsigned char[:, :, :, ::1] iv = idx
    with nogil:
        m2a_maxpool2x2_forward(&xv[0, 0, 0, 0], &ov[0, 0, 0, 0],
                               &iv[0, 0, 0, 0], B, C, H, W)
    return out, idx


def maxpool2x2_backward(dy, idx):
    dy = np.ascontiguousarray(dy, dtype=np.float32)
    idx = np.ascontiguousarray(idx, dtype=np.uint8)
    cdef int B = dy.shape[0], C = dy.shape[1], OH = dy.shape[2], OW = dy.shape[3]
    dx = np.zeros((B, C, OH * 2, OW * 2), dtype=np.float32)
    cdef float[:, :, :, ::1] dyv = dy, dxv = dx
    cdef unsigned char[:, :, :, ::1] iv = idx
    with nogil:
        m2a_maxpool2x2_backward(&dyv[0, 0, 0, 0], &iv[0, 0, 0, 0],
                                &dxv[0, 0, 0, 0], B, C, OH, OW)
    return dx
