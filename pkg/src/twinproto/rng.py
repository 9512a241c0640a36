"""Deterministic per-trial random streams.

Batch results must be byte-identical regardless of how trials are scheduled
across workers, so every trial owns a private stream derived from
(base seed, trial index) instead of sharing one stateful generator.  The
stream is a splitmix64 sequence: cheap to seed (one integer), portable, and
independent of interpreter internals.
"""

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit integer."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, index: int) -> int:
    """Stream seed for trial ``index`` of a batch run under ``base_seed``."""
    return mix64(mix64((base_seed ^ _GOLDEN) & MASK64) + (index + 1) * _GOLDEN)


class RandomChooser:
    """Uniform integer source over 1..n backed by a splitmix64 sequence.

    The protocol consumes randomness exclusively through ``uniform_int``; the
    enumeration oracle walks the same choice points exhaustively, so the two
    agree by construction.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def uniform_int(self, n: int) -> int:
        """Draw from 1..n.  n == 1 consumes no randomness."""
        if n == 1:
            return 1
        s = (self.state + _GOLDEN) & MASK64
        self.state = s
        z = ((s ^ (s >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        z ^= z >> 31
        # Lemire-style range reduction; bias of n / 2**64 is far below any
        # statistical resolution used here.
        return ((z * n) >> 64) + 1
