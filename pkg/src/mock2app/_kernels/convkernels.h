#ifndef MOCK2APP_CONVKERNELS_H
#define MOCK2APP_CONVKERNELS_H

void m2a_conv2d_forward(const float *x, const float *w, const float *b,
                        float *out, int B, int CI, int H, int W,
                        int CO, int KH, int KW, int stride, int pad);

void m2a_conv2d_backward(const float *x, const float *w, const float *dy,
                         float *dx, float *dw, float *db,
                         int B, int CI, int H, int W,
                         int CO, int KH, int KW, int OH, int OW,
                         int stride, int pad);

void m2a_maxpool2x2_forward(const float *x, float *out, unsigned char *idx,
                            int B, int C, int H, int W);

void m2a_maxpool2x2_backward(const float *dy, const unsigned char *idx,
                             float *dx, int B, int C, int OH, int OW);

#endif
