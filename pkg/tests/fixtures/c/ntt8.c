#include <stdint.h>

#define Q 3329
#define NTT_N 8

static const int16_t zetas[4] = { 1729, 2580, 3289, 2642 };

static int16_t fqmul(int16_t a, int16_t b)
{
    int32_t t = (int32_t)a * b;
    t %= Q;
    if (t < 0)
        t += Q;
    return (int16_t)t;
}

void ntt8(int16_t r[8])
{
    int len, start, j, k = 0;
    int16_t t, zeta;
    for (len = 4; len >= 1; len >>= 1) {
        for (start = 0; start < NTT_N; start = j + len) {
            zeta = zetas[k++ & 3];
            for (j = start; j < start + len; j++) {
                t = fqmul(zeta, r[j + len]);
                r[j + len] = (int16_t)((r[j] - t + Q) % Q);
                r[j] = (int16_t)((r[j] + t) % Q);
            }
        }
    }
}
