"""Portable seeded pseudo-random generator.

The generator is xorshift64* (Marsaglia's xorshift with the multiplier
``0x2545F4914F6CDD1D`` applied to the output) whose 64-bit state is
initialised by passing the user seed through one round of splitmix64.
Everything an exploration episode draws goes through :class:`Rng`, so a trace
is a pure function of the seed and can be reproduced by any implementation
that follows the same recipe::

    state  = splitmix64(seed mod 2**64)      # 0 is replaced by the golden gamma
    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27    (all mod 2**64)
    out    = x * 0x2545F4914F6CDD1D mod 2**64

``below(n)`` rejects outputs >= ``2**64 - (2**64 mod n)`` and returns
``out mod n``; ``choice`` and ``shuffle`` are built on ``below`` only.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
XORSHIFT_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    """One splitmix64 step, returning the mixed output for input state ``x``."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _stable_hash(part: object) -> int:
    # FNV-1a over the UTF-8 text; independent of PYTHONHASHSEED
    h = 0xCBF29CE484222325
    for byte in str(part).encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def derive_seed(*parts: object) -> int:
    """Combine integers and strings into one 64-bit seed, deterministically."""
    acc = 0
    for part in parts:
        value = part & MASK64 if isinstance(part, int) else _stable_hash(part)
        acc = splitmix64(acc ^ value)
    return acc


class Rng:
    """xorshift64* generator with splitmix64 seeding."""

    __slots__ = ("_state",)

    def __init__(self, seed: int = 0):
        state = splitmix64(seed & MASK64)
        self._state = state or GOLDEN_GAMMA

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * XORSHIFT_MULT) & MASK64

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise IndexError("choice from an empty sequence")
        return seq[self.below(len(seq))]

    def shuffle(self, seq: MutableSequence) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def permutation(self, seq: Sequence[T]) -> list[T]:
        out = list(seq)
        self.shuffle(out)
        return out

    def getstate(self) -> int:
        return self._state

    def setstate(self, state: int) -> None:
        self._state = state & MASK64 or GOLDEN_GAMMA
