"""xoshiro256** seeded through splitmix64, for reproducible KAT inputs."""

from __future__ import annotations

import struct

MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


def splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int):
        if not 0 <= seed <= MASK:
            raise ValueError("seed must fit in 64 bits")
        s = seed
        self.s = []
        for _ in range(4):
            s, v = splitmix64(s)
            self.s.append(v)

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n > MASK:
            hi = self.below(n >> 64) if n >> 64 else 0
            return ((hi << 64) | self.next_u64()) % n
        limit = (MASK + 1) - ((MASK + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def unit_float(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            out += struct.pack("<Q", self.next_u64())
        return bytes(out[:n])
