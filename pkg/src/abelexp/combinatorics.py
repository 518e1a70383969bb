"""Counting oracles: increasing trees, partitions and Chen-Fliess coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, factorial, prod
from typing import Iterable, Iterator


@dataclass(frozen=True)
class TreeCountTable:
    n: int
    counts: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.counts) - 1


def tree_count_product(n: int, k: int) -> int:
    """Number of increasing full n-ary trees with k internal vertices.

    ((n-1)(k-1)+1) ((n-1)(k-2)+1) ... n, and 1 for k = 0.
    """
    if n < 0 or k < 0:
        raise ValueError(f"need n, k >= 0, got n={n}, k={k}")
    return prod((n - 1) * j + 1 for j in range(1, k))


def _weak_compositions(k: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _weak_compositions(k - first, parts - 1):
            yield (first,) + rest


def _multinomial(ls: Iterable[int]) -> int:
    ls = list(ls)
    out = factorial(sum(ls))
    for l in ls:
        out //= factorial(l)
    return out


def tree_count_recurrence(n: int, K: int) -> TreeCountTable:
    """Same counts via splitting at the root: |T^{k+1}| = sum multinomial * prod |T^{l_j}|."""
    if n < 1:
        raise ValueError(f"recurrence needs n >= 1, got {n}")
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    counts = [1]
    for k in range(K):
        counts.append(
            sum(_multinomial(l) * prod(counts[j] for j in l) for l in _weak_compositions(k, n))
        )
    return TreeCountTable(n, tuple(counts))


def partition_count(k: int, largest: int | None = None) -> int:
    """Integer partitions of k, optionally with every part <= ``largest``.

    Partitions with parts <= n are equinumerous (by conjugation) with those
    having at most n parts, which is the per-step integral count of the
    product-form expansion.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    top = k if largest is None else min(largest, k)
    ways = [1] + [0] * k
    for part in range(1, top + 1):
        for s in range(part, k + 1):
            ways[s] += ways[s - part]
    return ways[k]


def bounded_partition_count(k: int, n: int) -> int:
    return partition_count(k, largest=n)


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def cf_vector_field(v: Iterable[int]) -> tuple[int, int]:
    """X_v = c x^e d/dx modulo second derivatives, for X_i = x^i d/dx; returns (c, e)."""
    v = tuple(v)
    k = len(v)
    if k == 0:
        raise ValueError("Chen-Fliess coefficient needs a nonempty word")
    if k == 1:
        return 1, v[0]
    c = 1
    suffix = 0
    for m, i in enumerate(reversed(v[1:])):
        suffix += i
        c *= suffix - m
        if c == 0:
            break
    return c, sum(v) - k + 1


def cf_coefficient(v: Iterable[int], evaluate_at_zero: bool = True) -> int:
    """Chen-Fliess coefficient X_v(x)(0) of the word v.

    With ``evaluate_at_zero=False`` the x-power is ignored and the bare
    product i_k (i_k + i_{k-1} - 1) ... is returned.
    """
    c, e = cf_vector_field(v)
    if not evaluate_at_zero:
        return c
    return c if e == 0 else 0


def in_M0(indices: Iterable[int]) -> bool:
    i = tuple(indices)
    k = len(i)
    if k == 0 or sum(i) != k - 1:
        return False
    suffix = 0
    for j in range(k, 1, -1):
        suffix += i[j - 1]
        if suffix - (k - j) < 0:
            return False
    return True


def enumerate_M0(k: int, n: int) -> list[tuple[int, ...]]:
    """Index sequences in {0..n}^k with total k-1 and nonnegative suffix constraints.

    Built right to left, pruning on the suffix inequalities, in lexicographic order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    out: list[tuple[int, ...]] = []

    def extend(suffix: tuple[int, ...], total: int) -> None:
        j = k - len(suffix)  # next position to fill (1-based)
        if j == 1:
            first = (k - 1) - total
            if 0 <= first <= n:
                out.append((first,) + suffix)
            return
        for i in range(min(n, k - 1 - total) + 1):
            if total + i - (k - j) >= 0:
                extend((i,) + suffix, total + i)

    extend((), 0)
    return sorted(out)


def m0_size(k: int, n: int) -> int:
    return len(enumerate_M0(k, n))


def all_words(k: int, n: int) -> Iterator[tuple[int, ...]]:
    return product(range(n + 1), repeat=k)
