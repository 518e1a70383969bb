"""Graded solution series of the algebraic shuffle equation.

The solution Z of

    Z = a0 + sum_{i=1..n} C(n, i) * (Z sh ... sh Z)_{i times} . a_i

is built degree by degree; Z_1 = a0 and Z_{k+1} collects, for every
composition (l_1, ..., l_i) of k, the shuffle Z_{l_1} sh ... sh Z_{l_i}
concatenated with a_i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from math import comb, factorial
from typing import Iterator

from .shuffle import (
    EMPTY,
    NCPolynomial,
    concat,
    from_json_terms,
    shuffle,
    shuffle_exp_truncated,
    shuffle_power,
    to_json_terms,
)

DEFAULT_GUARD = 16


class GuardExceeded(ValueError):
    """Requested truncation order is above the configured guard."""


class Normalization(str, Enum):
    BINOMIAL = "normalized"
    RAW = "raw"


@dataclass(frozen=True)
class EquationSpec:
    """x' = sum_i C(n, i) u_i x^i; ``normalization`` records how the input was given.

    With ``RAW`` the user supplied c_i and u_i = c_i / C(n, i).
    """

    n: int
    normalization: Normalization = Normalization.BINOMIAL

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"polynomial degree must be >= 0, got {self.n}")
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    def binomial(self, i: int) -> int:
        return comb(self.n, i)


@dataclass
class GradedSeries:
    """Homogeneous parts parts[0..K] of a truncated series."""

    parts: list[NCPolynomial]
    n: int | None = None

    def __post_init__(self):
        for k, p in enumerate(self.parts):
            if not p.is_homogeneous(k):
                raise ValueError(f"part {k} is not homogeneous of degree {k}")

    @property
    def K(self) -> int:
        return len(self.parts) - 1

    def __getitem__(self, k: int) -> NCPolynomial:
        if 0 <= k < len(self.parts):
            return self.parts[k]
        return NCPolynomial()

    def __iter__(self) -> Iterator[NCPolynomial]:
        return iter(self.parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedSeries):
            return NotImplemented
        K = max(self.K, other.K)
        return all(self[k] == other[k] for k in range(K + 1))

    def total(self) -> NCPolynomial:
        out = NCPolynomial()
        for p in self.parts:
            out = out + p
        return out

    def truncate(self, K: int) -> GradedSeries:
        return GradedSeries([self[k] for k in range(K + 1)], self.n)

    @classmethod
    def from_polynomial(cls, p: NCPolynomial, K: int, n: int | None = None) -> GradedSeries:
        return cls([p.homogeneous_part(k) for k in range(K + 1)], n)

    def to_dict(self) -> dict:
        return {"n": self.n, "K": self.K, "parts": [to_json_terms(p) for p in self.parts]}

    @classmethod
    def from_dict(cls, d: dict) -> GradedSeries:
        parts = [from_json_terms(items) for items in d["parts"]]
        if len(parts) != d["K"] + 1:
            raise ValueError(f"expected {d['K'] + 1} parts, found {len(parts)}")
        return cls(parts, d.get("n"))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> GradedSeries:
        return cls.from_dict(json.loads(s))


# -- multi-index sets ----------------------------------------------------------


def compositions(k: int, i: int) -> Iterator[tuple[int, ...]]:
    """All (l_1..l_i) with l_j >= 1 and sum k."""
    if i == 0:
        if k == 0:
            yield ()
        return
    if i == 1:
        if k >= 1:
            yield (k,)
        return
    for first in range(1, k - i + 2):
        for rest in compositions(k - first, i - 1):
            yield (first,) + rest


def sorted_compositions(k: int, i: int, smallest: int = 1) -> Iterator[tuple[int, ...]]:
    """The nondecreasing members of ``compositions(k, i)`` (partitions of k into i parts)."""
    if i == 0:
        if k == 0:
            yield ()
        return
    if i == 1:
        if k >= smallest:
            yield (k,)
        return
    for first in range(smallest, k // i + 1):
        for rest in sorted_compositions(k - first, i - 1, first):
            yield (first,) + rest


def permutation_count(l: tuple[int, ...]) -> int:
    """Number of distinct rearrangements of the multi-index l."""
    out = factorial(len(l))
    for v in set(l):
        out //= factorial(l.count(v))
    return out


# -- expansions -----------------------------------------------------------------


def _check_order(K: int, guard: int) -> None:
    if K < 0:
        raise ValueError(f"truncation order must be >= 0, got {K}")
    if K > guard:
        raise GuardExceeded(f"truncation order {K} exceeds guard {guard}")


def _expand(n: int, K: int, active: range | list[int]) -> GradedSeries:
    """Recursion restricted to the letters ``active`` (subset of 1..n)."""
    parts = [NCPolynomial(), NCPolynomial.from_word((0,))][: K + 1]
    # shuffles of parts, keyed by sorted multi-index
    products: dict[tuple[int, ...], NCPolynomial] = {}

    def product(key: tuple[int, ...]) -> NCPolynomial:
        if key not in products:
            if len(key) == 1:
                products[key] = parts[key[0]]
            else:
                products[key] = shuffle(product(key[:-1]), parts[key[-1]])
        return products[key]

    for k in range(1, K):
        nxt = NCPolynomial()
        for i in active:
            acc = NCPolynomial()
            for l in compositions(k, i):
                acc = acc + product(tuple(sorted(l)))
            if acc:
                nxt = nxt + concat(acc, NCPolynomial.from_word((i,))).scale(comb(n, i))
        parts.append(nxt)
    return GradedSeries(parts, n)


def expand_general(spec: EquationSpec | int, K: int, guard: int = DEFAULT_GUARD) -> GradedSeries:
    """Homogeneous parts Z_0..Z_K of the unique solution."""
    if isinstance(spec, int):
        spec = EquationSpec(spec)
    _check_order(K, guard)
    return _expand(spec.n, K, range(1, spec.n + 1))


def _truncated_power(p: NCPolynomial, m: int, K: int) -> NCPolynomial:
    out = NCPolynomial.one()
    for _ in range(m):
        out = shuffle(p, out).truncate(K)
    return out


def algebraic_residual(Z: GradedSeries, spec: EquationSpec | int) -> GradedSeries:
    """Z - a0 - sum_i C(n,i) Z^{sh i} . a_i, graded and truncated at Z.K."""
    if isinstance(spec, int):
        spec = EquationSpec(spec)
    K = Z.K
    total = Z.total()
    rhs = NCPolynomial.from_word((0,))
    for i in range(1, spec.n + 1):
        # concatenation with a_i raises degree by one
        power = _truncated_power(total, i, K - 1)
        rhs = rhs + concat(power, NCPolynomial.from_word((i,))).scale(spec.binomial(i))
    return GradedSeries.from_polynomial((total - rhs).truncate(K), K, spec.n)


def verify_algebraic_equation(Z: GradedSeries, spec: EquationSpec | int) -> bool:
    """True iff Z solves the algebraic equation in every degree <= Z.K."""
    return all(not p for p in algebraic_residual(Z, spec))


def expand_linear_closed_form(K: int) -> GradedSeries:
    """n = 1: Z_k = a0 a1^(k-1)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    parts = [NCPolynomial()] + [NCPolynomial.from_word((0,) + (1,) * (k - 1)) for k in range(1, K + 1)]
    return GradedSeries(parts, 1)


def n1_identity_check(K: int) -> bool:
    """Check a0 (1 + a1 + a1^2 + ...) = exp(a1) sh (exp(-a1) . a0) up to degree K."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    a0 = NCPolynomial.from_word((0,))
    a1 = NCPolynomial.from_word((1,))
    left = shuffle_exp_truncated(a1, K).total()
    right = concat(shuffle_exp_truncated(-a1, K - 1).total(), a0)
    lhs = shuffle(left, right).truncate(K)
    return GradedSeries.from_polynomial(lhs, K, 1) == expand_linear_closed_form(K)


def expand_riccati(K: int, guard: int = DEFAULT_GUARD) -> GradedSeries:
    """n = 2: Z_{k+1} = 2 Z_k . a1 + sum_{l=1}^{k-1} (Z_l sh Z_{k-l}) . a2."""
    _check_order(K, guard)
    a1 = NCPolynomial.from_word((1,))
    a2 = NCPolynomial.from_word((2,))
    parts = [NCPolynomial(), NCPolynomial.from_word((0,))][: K + 1]
    for k in range(1, K):
        quad = NCPolynomial()
        for l in range(1, k):
            quad = quad + shuffle(parts[l], parts[k - l])
        parts.append(concat(parts[k], a1).scale(2) + concat(quad, a2))
    return GradedSeries(parts, 2)


def omega_series(Z: GradedSeries) -> GradedSeries:
    """Omega = a1 + Z . a2 for the n = 2 solution, truncated at Z.K + 1."""
    a2 = NCPolynomial.from_word((2,))
    parts = [NCPolynomial(), NCPolynomial.from_word((1,))]
    for k in range(1, Z.K + 1):
        parts.append(concat(Z[k], a2))
    return GradedSeries(parts, 2)


def two_term_expand(n: int, K: int, guard: int = DEFAULT_GUARD) -> GradedSeries:
    """Solution for x' = u0 + u_n x^n (only letters a0 and a_n occur)."""
    if n < 1:
        raise ValueError(f"two-term equation needs n >= 1, got {n}")
    _check_order(K, guard)
    return _expand(n, K, [n])
