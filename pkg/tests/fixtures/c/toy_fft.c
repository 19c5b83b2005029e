#include <math.h>

#define PI 3.14159265358979323846

/* interleaved (re, im) twiddles for a 16-point transform */
static double tw[16];

void init_tw(void)
{
    int i;
    for (i = 0; i < 8; i++) {
        tw[2 * i] = cos(2.0 * PI * i / 16.0);
        tw[2 * i + 1] = -sin(2.0 * PI * i / 16.0);
    }
}

/* 8 output bins of a direct DFT over 16 integer samples, scaled by 1/16 */
void fft16(int in[16], int out[16])
{
    int k, n;
    for (k = 0; k < 8; k++) {
        double re = 0.0, im = 0.0;
        for (n = 0; n < 16; n++) {
            int m = (k * n) & 15;
            int j = m & 7;
            double s = (m & 8) ? -1.0 : 1.0;
            double c = s * tw[2 * j];
            double d = s * tw[2 * j + 1];
            re += in[n] * c; im += in[n] * d;
        }
        out[2 * k] = (int)(long long)(re / 16.0);
        out[2 * k + 1] = (int)(long long)(im / 16.0);
    }
}
