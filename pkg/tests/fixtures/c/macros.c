#include <stdint.h>

// Multi-line macros, odd spacing and literals the printer must keep verbatim.
#define ROL64(a, n) \
    (((a) << (n)) | ((a) >> (64 - (n))))
#define LANES   5

static const char tag[] = "theta\t\"rho\"";
static const char sep = '\'';

void theta(uint64_t s[25])
{
    uint64_t c[LANES], d;   /* column parities */
    int x, y;
    for (x = 0; x < LANES; x++)
        c[x] = s[x] ^ s[x + 5] ^ s[x + 10] ^ s[x + 15] ^ s[x + 20];
    for (x = 0; x < LANES; x++) {
        d = c[(x + 4) % 5] ^ ROL64(c[(x + 1) % 5], 1);
        for (y = 0; y < 25; y += 5)
            s[y + x] ^= d;
    }
    (void)tag; (void)sep;
}
