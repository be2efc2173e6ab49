"""Portable, bit-exactly specified randomness for training and data synthesis.

All randomness in signet flows through one generator so that runs are
reproducible across platforms and implementations:

  - State setup: splitmix64 seeded with the 64-bit user seed, producing the
    four 64-bit words of the xoshiro256** state (the standard seeding recipe
    from the xoshiro reference code). An all-zero expansion (probability
    ~2**-256) is patched to state[0] = 1 since xoshiro requires a nonzero
    state.
  - Draws: xoshiro256** steps; unit doubles are (u64 >> 11) * 2**-53,
    uniform in [0, 1).
  - Shuffles: Fisher-Yates from the top (i = n-1 .. 1) with
    j = next_u64() mod (i + 1). The modulo bias is negligible for any n
    this package handles and keeps the algorithm portable.

Stream identifiers (sweep cells, synthetic clips) are derived with
`derive_seed`, an 8-byte blake2b of a canonical string, so independent
streams never share state.
"""

from hashlib import blake2b

import numpy as np

from . import kernels

_MASK64 = 0xFFFFFFFFFFFFFFFF
_SPLITMIX_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_next(state):
    """One splitmix64 step: returns (output, new_state)."""
    state = (int(state) + _SPLITMIX_GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return z, state


def mix64(x):
    """The splitmix64 output function applied to x (counter-mode mixing)."""
    z, _ = splitmix64_next(int(x) & _MASK64)
    return z


def mix64_array(values):
    """Vectorized mix64 over a uint64 ndarray."""
    with np.errstate(over="ignore"):
        z = values.astype(np.uint64) + np.uint64(_SPLITMIX_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def derive_seed(*parts):
    """Deterministic 64-bit sub-seed from a sequence of printable parts."""
    canon = "|".join(str(p) for p in parts)
    return int.from_bytes(blake2b(canon.encode("utf-8"), digest_size=8).digest(), "little")


class Xoshiro256StarStar:
    """Seedable xoshiro256** stream backed by the kernel fill routines."""

    def __init__(self, seed):
        state = np.empty(4, dtype=np.uint64)
        sm = int(seed) & _MASK64
        for i in range(4):
            out, sm = splitmix64_next(sm)
            state[i] = out
        if not state.any():
            state[0] = 1
        self._state = state

    def next_u64(self):
        return int(kernels.xoshiro_fill_u64(self._state, 1)[0])

    def fill_u64(self, n):
        return kernels.xoshiro_fill_u64(self._state, n)

    def fill_unit(self, n):
        """n doubles uniform in [0, 1)."""
        return kernels.xoshiro_fill_unit(self._state, n)

    def uniform(self, low, high, n):
        return low + (high - low) * self.fill_unit(n)

    def randint(self, low, high):
        """Integer uniform in [low, high] via modulo (documented bias)."""
        span = high - low + 1
        return low + self.next_u64() % span

    def shuffle_indices(self, n):
        """Fisher-Yates permutation of range(n); consumes n-1 draws."""
        order = list(range(n))
        if n < 2:
            return order
        draws = self.fill_u64(n - 1)
        t = 0
        for i in range(n - 1, 0, -1):
            j = int(draws[t]) % (i + 1)
            t += 1
            order[i], order[j] = order[j], order[i]
        return order
