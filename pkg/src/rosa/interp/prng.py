"""Deterministic splitmix64 generator shared by the interpreter and emitted C.

Every draw is defined bit-exactly so that interpreted and compiled runs of
the same program print identical output for the same seed.  Transcendental
steps use ``math`` (the platform libm), which is what the C runtime calls too.
"""

from __future__ import annotations

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK = (1 << 64) - 1
TWO_PI = 6.283185307179586
INV_2_53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK
    z = ((z ^ (z >> 27)) * MIX2) & MASK
    return z ^ (z >> 31)


class Prng:
    __slots__ = ("state",)

    def __init__(self, seed: int = 1):
        self.state = int(seed) & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        return _mix(self.state)

    def block_u64(self, n: int) -> np.ndarray:
        """The next ``n`` raw draws as a uint64 array (splitmix64 is counter based)."""
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + k * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GAMMA) & MASK
        return z

    # -- uniform -------------------------------------------------------------
    def unif(self) -> float:
        return (self.next_u64() >> 11) * INV_2_53

    def unif_list(self, n: int) -> list:
        if n < 64:
            return [self.unif() for _ in range(n)]
        z = self.block_u64(n) >> np.uint64(11)
        return (z.astype(np.float64) * INV_2_53).tolist()

    def runif(self, n: int, lo: float = 0.0, hi: float = 1.0) -> list:
        u = self.unif_list(n)
        if lo == 0.0 and hi == 1.0:
            return u
        w = hi - lo
        return [lo + w * x for x in u]

    # -- integers ------------------------------------------------------------
    def unif_int(self, k: int) -> int:
        """Uniform integer in [0, k) by rejection on the top of the 64-bit range."""
        bound = (1 << 64) - ((1 << 64) % k)
        while True:
            z = self.next_u64()
            if z < bound:
                return z % k

    def unif_int_list(self, k: int, n: int) -> list:
        if n < 64:
            return [self.unif_int(k) for _ in range(n)]
        bound = (1 << 64) - ((1 << 64) % k)
        saved = self.state
        z = self.block_u64(n)
        bad = np.nonzero(z >= np.uint64(bound))[0] if bound <= MASK else np.zeros(0, dtype=np.int64)
        if len(bad) == 0:
            return (z % np.uint64(k)).tolist()
        # rare: redo sequentially from the first rejected draw
        first = int(bad[0])
        out = (z[:first] % np.uint64(k)).tolist()
        self.state = (saved + first * GAMMA) & MASK
        out.extend(self.unif_int(k) for _ in range(n - first))
        return out

    # -- continuous distributions -------------------------------------------
    def norm(self) -> float:
        u1 = 1.0 - self.unif()
        u2 = self.unif()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)

    def rnorm(self, n: int, mean: float = 0.0, sd: float = 1.0) -> list:
        if n < 64:
            z = [self.norm() for _ in range(n)]
        else:
            u = self.unif_list(2 * n)
            sqrt, log, cos = math.sqrt, math.log, math.cos
            z = [sqrt(-2.0 * log(1.0 - u[2 * i])) * cos(TWO_PI * u[2 * i + 1]) for i in range(n)]
        if mean == 0.0 and sd == 1.0:
            return z
        return [mean + sd * v for v in z]

    def beta(self, a: float, b: float) -> float:
        """Johnk's method in log space."""
        log, exp = math.log, math.exp
        while True:
            lx = log(1.0 - self.unif()) / a
            ly = log(1.0 - self.unif()) / b
            m = lx if lx > ly else ly
            ls = m + log(exp(lx - m) + exp(ly - m))
            if ls <= 0.0:
                return exp(lx - ls)

    def rbeta(self, n: int, a: float, b: float) -> list:
        return [self.beta(a, b) for _ in range(n)]

    # -- sampling ------------------------------------------------------------
    def sample_index(self, k: int, size: int, replace: bool, prob=None) -> list:
        """Zero-based indices into a population of ``k`` items."""
        if prob is not None:
            return self._sample_prob(k, size, replace, prob)
        if replace:
            return self.unif_int_list(k, size)
        if size > k:
            raise ValueError("cannot take a sample larger than the population when 'replace = FALSE'")
        idx = list(range(k))
        for i in range(size):
            j = i + self.unif_int(k - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:size]

    def _sample_prob(self, k, size, replace, prob) -> list:
        p = [float(v) for v in prob]
        out = []
        avail = list(range(k))
        for _ in range(size):
            total = 0.0
            for i in avail:
                total += p[i]
            target = self.unif() * total
            acc = 0.0
            pick = avail[-1]
            for i in avail:
                acc += p[i]
                if target < acc:
                    pick = i
                    break
            out.append(pick)
            if not replace:
                avail.remove(pick)
        return out
