/* Hot loops for the network kernels.
 *
 * Zero padding, row-major layouts (NCHW activations, OIHW weights).
 * Valid output ranges are precomputed per kernel tap so the innermost
 * loops stay branch-free; restrict-qualified row pointers let the
 * compiler vectorize them.  Parallel partitions never share an output
 * cell, so results are deterministic for a fixed thread count.
 */

#include "convkernels.h"

#ifdef _OPENMP
#include <omp.h>
#endif

static inline int range_lo(int k, int pad, int stride) {
    int t = pad - k;
    if (t <= 0) return 0;
    return (t + stride - 1) / stride;
}

static inline int range_hi(int k, int pad, int stride, int extent, int out_extent) {
    int t = extent - 1 - k + pad;
    int h;
    if (t < 0) return 0;
    h = t / stride + 1;
    return h < out_extent ? h : out_extent;
}

void m2a_conv2d_forward(const float *x, const float *w, const float *b,
                        float *out, int B, int CI, int H, int W,
                        int CO, int KH, int KW, int stride, int pad) {
    const int OH = (H + 2 * pad - KH) / stride + 1;
    const int OW = (W + 2 * pad - KW) / stride + 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int bi = 0; bi < B; bi++) {
        for (int oc = 0; oc < CO; oc++) {
            float *oplane = out + ((long)(bi * CO + oc)) * OH * OW;
            for (long i = 0; i < (long)OH * OW; i++)
                oplane[i] = b[oc];
            for (int ic = 0; ic < CI; ic++) {
                const float *xplane = x + ((long)(bi * CI + ic)) * H * W;
                for (int ky = 0; ky < KH; ky++) {
                    const int oy_lo = range_lo(ky, pad, stride);
                    const int oy_hi = range_hi(ky, pad, stride, H, OH);
                    for (int kx = 0; kx < KW; kx++) {
                        const float wval = w[((long)(oc * CI + ic) * KH + ky) * KW + kx];
                        const int ox_lo = range_lo(kx, pad, stride);
                        const int ox_hi = range_hi(kx, pad, stride, W, OW);
                        const int base = kx - pad;
                        for (int oy = oy_lo; oy < oy_hi; oy++) {
                            const int iy = oy * stride + ky - pad;
                            const float *restrict xrow = xplane + (long)iy * W;
                            float *restrict orow = oplane + (long)oy * OW;
                            if (stride == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    orow[ox] += wval * xrow[ox + base];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    orow[ox] += wval * xrow[ox * stride + base];
                            }
                        }
                    }
                }
            }
        }
    }
}

void m2a_conv2d_backward(const float *x, const float *w, const float *dy,
                         float *dx, float *dw, float *db,
                         int B, int CI, int H, int W,
                         int CO, int KH, int KW, int OH, int OW,
                         int stride, int pad) {
    /* dW and db: parallel over output channels, no shared cells. */
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int oc = 0; oc < CO; oc++) {
        double bias_acc = 0.0;
        for (int bi = 0; bi < B; bi++) {
            const float *dyplane = dy + ((long)(bi * CO + oc)) * OH * OW;
            for (long i = 0; i < (long)OH * OW; i++)
                bias_acc += dyplane[i];
        }
        db[oc] = (float)bias_acc;
        for (int ic = 0; ic < CI; ic++) {
            for (int ky = 0; ky < KH; ky++) {
                const int oy_lo = range_lo(ky, pad, stride);
                const int oy_hi = range_hi(ky, pad, stride, H, OH);
                for (int kx = 0; kx < KW; kx++) {
                    const int ox_lo = range_lo(kx, pad, stride);
                    const int ox_hi = range_hi(kx, pad, stride, W, OW);
                    const int base = kx - pad;
                    float acc = 0.0f;
                    for (int bi = 0; bi < B; bi++) {
                        const float *xplane = x + ((long)(bi * CI + ic)) * H * W;
                        const float *dyplane = dy + ((long)(bi * CO + oc)) * OH * OW;
                        for (int oy = oy_lo; oy < oy_hi; oy++) {
                            const int iy = oy * stride + ky - pad;
                            const float *restrict xrow = xplane + (long)iy * W;
                            const float *restrict dyrow = dyplane + (long)oy * OW;
                            if (stride == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    acc += dyrow[ox] * xrow[ox + base];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    acc += dyrow[ox] * xrow[ox * stride + base];
                            }
                        }
                    }
                    dw[((long)(oc * CI + ic) * KH + ky) * KW + kx] = acc;
                }
            }
        }
    }
    /* dX: parallel over the batch, scatter stays thread-local. */
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int bi = 0; bi < B; bi++) {
        for (int oc = 0; oc < CO; oc++) {
            const float *dyplane = dy + ((long)(bi * CO + oc)) * OH * OW;
            for (int ic = 0; ic < CI; ic++) {
                float *dxplane = dx + ((long)(bi * CI + ic)) * H * W;
                for (int ky = 0; ky < KH; ky++) {
                    const int oy_lo = range_lo(ky, pad, stride);
                    const int oy_hi = range_hi(ky, pad, stride, H, OH);
                    for (int kx = 0; kx < KW; kx++) {
                        const float wval = w[((long)(oc * CI + ic) * KH + ky) * KW + kx];
                        const int ox_lo = range_lo(kx, pad, stride);
                        const int ox_hi = range_hi(kx, pad, stride, W, OW);
                        const int base = kx - pad;
                        for (int oy = oy_lo; oy < oy_hi; oy++) {
                            const int iy = oy * stride + ky - pad;
                            float *restrict dxrow = dxplane + (long)iy * W;
                            const float *restrict dyrow = dyplane + (long)oy * OW;
                            if (stride == 1) {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    dxrow[ox + base] += wval * dyrow[ox];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ox++)
                                    dxrow[ox * stride + base] += wval * dyrow[ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

void m2a_maxpool2x2_forward(const float *x, float *out, unsigned char *idx,
                            int B, int C, int H, int W) {
    const int OH = H / 2, OW = W / 2;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int bi = 0; bi < B; bi++) {
        for (int c = 0; c < C; c++) {
            const float *xplane = x + ((long)(bi * C + c)) * H * W;
            float *oplane = out + ((long)(bi * C + c)) * OH * OW;
            unsigned char *iplane = idx + ((long)(bi * C + c)) * OH * OW;
            for (int oy = 0; oy < OH; oy++) {
                const float *r0 = xplane + (long)(2 * oy) * W;
                const float *r1 = r0 + W;
                for (int ox = 0; ox < OW; ox++) {
                    float best = r0[2 * ox];
                    int k = 0;
                    if (r0[2 * ox + 1] > best) { best = r0[2 * ox + 1]; k = 1; }
                    if (r1[2 * ox] > best)     { best = r1[2 * ox];     k = 2; }
                    if (r1[2 * ox + 1] > best) { best = r1[2 * ox + 1]; k = 3; }
                    oplane[(long)oy * OW + ox] = best;
                    iplane[(long)oy * OW + ox] = (unsigned char)k;
                }
            }
        }
    }
}

void m2a_maxpool2x2_backward(const float *dy, const unsigned char *idx,
                             float *dx, int B, int C, int OH, int OW) {
    const int H = OH * 2, W = OW * 2;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int bi = 0; bi < B; bi++) {
        for (int c = 0; c < C; c++) {
            const float *dyplane = dy + ((long)(bi * C + c)) * OH * OW;
            const unsigned char *iplane = idx + ((long)(bi * C + c)) * OH * OW;
            float *dxplane = dx + ((long)(bi * C + c)) * H * W;
            for (int oy = 0; oy < OH; oy++) {
                for (int ox = 0; ox < OW; ox++) {
                    const int k = iplane[(long)oy * OW + ox];
                    dxplane[(long)(2 * oy + (k >> 1)) * W + 2 * ox + (k & 1)] +=
                        dyplane[(long)oy * OW + ox];
                }
            }
        }
    }
}
