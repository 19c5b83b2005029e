#include <stdint.h>

void xor_block(const uint8_t a[16], const uint8_t b[16], uint8_t out[16])
{
    int i;
    for (i = 0; i < 16; i++)
        out[i] = a[i] ^ b[i];
}
