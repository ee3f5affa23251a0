"""Seed-deterministic random numbers: Park-Miller uniforms, Box-Muller Gaussians.

Every stochastic quantity in the training loop comes from one of these
streams, so a worker's whole perturbation vector can be rebuilt anywhere
from a single scalar seed.  No library RNG is involved and all arithmetic
is exact 64-bit integer / IEEE double, which makes streams bit-identical
across processes and platforms.
"""

import math

PM_MODULUS = 2**31 - 1  # 2147483647, prime
PM_MULTIPLIER = 16807

_TWO_PI = 2.0 * math.pi
_MASK64 = (1 << 64) - 1


class ParkMillerRng:
    """Multiplicative congruential generator with state in [1, 2^31-2].

    The stream is a pure function of the state.  Instances are cheap values:
    one per worker, never shared between threads or processes.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not isinstance(seed, int) or not 1 <= seed <= PM_MODULUS - 1:
            raise ValueError(
                f"seed must be an integer in [1, {PM_MODULUS - 1}], got {seed!r}"
            )
        self.state = seed

    def uniform(self) -> float:
        """Next uniform draw, strictly inside (0, 1)."""
        s = (self.state * PM_MULTIPLIER) % PM_MODULUS
        self.state = s
        return s / PM_MODULUS

    def gaussian_pair(self) -> tuple[float, float]:
        """Two independent standard normals from one Box-Muller transform."""
        u1 = self.uniform()
        u2 = self.uniform()
        return box_muller(u1, u2)

    def fill_gaussian(self, count: int) -> list[float]:
        """`count` consecutive standard normals.

        Values come pairwise from gaussian_pair; an odd count discards the
        dangling second value of the final pair instead of caching it, so the
        stream position depends only on `count`.
        """
        if count < 0:
            raise ValueError("count must be >= 0")
        out = []
        append = out.append
        while len(out) < count:
            g0, g1 = self.gaussian_pair()
            append(g0)
            if len(out) < count:
                append(g1)
        return out


def box_muller(u1: float, u2: float) -> tuple[float, float]:
    """Map two uniforms in (0,1) to two standard normals.

    u1 > 0 is guaranteed by the Park-Miller mapping state/(2^31-1), so the
    log never sees zero.
    """
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(_TWO_PI * u2), r * math.sin(_TWO_PI * u2)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Hash a tuple of integers into a valid Park-Miller seed.

    Gives every (restart, iteration, candidate) combination its own
    independent stream derived from one master seed, without storing any
    generator state.  Result is always in [1, 2^31-2].
    """
    h = 0x243F6A8885A308D3
    for p in parts:
        h = _splitmix64(h ^ (p & _MASK64))
    return 1 + h % (PM_MODULUS - 1)
