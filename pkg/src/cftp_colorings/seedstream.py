"""Deterministic, addressable randomness.

Every draw is a pure function of (master_seed, block, update, draw index),
realized as a keyed counter PRNG: the address is absorbed into a 64-bit key
through successive splitmix64 finalizer rounds, and draw j of an update is
the finalizer applied to key + (j+1) * GOLDEN. Replaying an update therefore
needs only its address, never stored random bytes.

Couplings agree on a fixed draw layout per update (documented where each
coupling is implemented), so predict and decode regenerate identical values.
"""

from __future__ import annotations

from dataclasses import dataclass

from .colorsets import ColorSet, iter_colors, nth_color, size

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TO_DOUBLE = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """splitmix64 finalizer; bijective on 64 bits with full avalanche."""
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


@dataclass(frozen=True, order=True, slots=True)
class SubSeedAddress:
    """Location of one update's randomness: lexicographically ordered."""

    block: int
    update: int


class SeedStream:
    """Splittable randomness source keyed by a 64-bit master seed."""

    __slots__ = ("master_seed", "_root")

    def __init__(self, master_seed: int):
        self.master_seed = master_seed & _M64
        self._root = mix64(self.master_seed)

    def subkey(self, block: int, update: int) -> int:
        h = mix64((self._root + (block + 1) * _GOLDEN) & _M64)
        return mix64((h + (update + 1) * _GOLDEN) & _M64)

    def key_at(self, addr: SubSeedAddress) -> int:
        return self.subkey(addr.block, addr.update)


def raw64(key: int, draw: int) -> int:
    return mix64((key + (draw + 1) * _GOLDEN) & _M64)


def unit_uniform(key: int, draw: int) -> float:
    """Uniform double in [0, 1) from the top 53 bits of one raw word."""
    return (raw64(key, draw) >> 11) * _TO_DOUBLE


def randint_below(key: int, draw: int, n: int) -> int:
    """Uniform integer in [0, n) via multiply-shift.

    Bias is at most n / 2**64, far below anything resolvable by the
    statistical tests this package runs.
    """
    if n <= 0:
        raise ValueError("randint_below needs n >= 1")
    return (raw64(key, draw) * n) >> 64


def uniform_in_set(key: int, draw: int, colors: ColorSet) -> int:
    """Uniform member of a nonempty color set."""
    m = size(colors)
    if m == 0:
        raise ValueError("uniform_in_set called on an empty set")
    if m == 1:
        return colors.bit_length() - 1
    return nth_color(colors, randint_below(key, draw, m))


def categorical(key: int, draw: int, weights) -> int:
    """Index i with probability weights[i]; weights must sum to 1."""
    total = 0.0
    for w in weights:
        if w < 0:
            raise ValueError("categorical weights must be nonnegative")
        total += w
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"categorical weights sum to {total}, not 1")
    u = unit_uniform(key, draw)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def shuffled(key: int, first_draw: int, items: list) -> list:
    """Fisher-Yates permutation of items, consuming len(items)-1 draws.

    Element i of the result is fixed after step i, so a prefix of the
    permutation can be regenerated without the remaining draws.
    """
    out = list(items)
    m = len(out)
    for i in range(m - 1):
        j = i + randint_below(key, first_draw + i, m - i)
        out[i], out[j] = out[j], out[i]
    return out


def shuffled_prefix(key: int, first_draw: int, items: list, k: int) -> list:
    """First k elements of shuffled(key, first_draw, items)."""
    out = list(items)
    m = len(out)
    k = min(k, m)
    for i in range(min(k, m - 1)):
        j = i + randint_below(key, first_draw + i, m - i)
        out[i], out[j] = out[j], out[i]
    return out[:k]


def random_permutation(key: int, first_draw: int, colors: ColorSet) -> list[int]:
    """Uniform permutation of a nonempty color set."""
    items = list(iter_colors(colors))
    if not items:
        raise ValueError("random_permutation called on an empty set")
    return shuffled(key, first_draw, items)
