#include <stdint.h>

void accumulate(uint32_t *acc, const uint32_t *x, uint32_t *count)
{
    int i;
    for (i = 0; i < 8; i++)
        *(acc + i) += x[i];
    *count = *count + 1;
}
