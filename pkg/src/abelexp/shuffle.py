"""Noncommutative polynomials over a finite alphabet {a0, ..., an}.

Words are tuples of small integers (letter indices); the empty tuple is the
empty word.  Coefficients are exact: ``int`` when integral, otherwise
``fractions.Fraction``.  Polynomials are immutable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping, Union

Word = tuple[int, ...]
Coefficient = Union[int, Fraction]

EMPTY: Word = ()


def word_key(w: Word) -> tuple[int, Word]:
    """Canonical order: by length, then lexicographically by letter index."""
    return (len(w), w)


def _norm(c) -> Coefficient:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    return _norm(Fraction(c))


@dataclass(frozen=True)
class Alphabet:
    """The letters a0..an; carries n so letters can be validated at runtime."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"alphabet needs n >= 0, got {self.n}")

    @property
    def size(self) -> int:
        return self.n + 1

    def check(self, w: Iterable[int]) -> Word:
        w = tuple(int(i) for i in w)
        for i in w:
            if not 0 <= i <= self.n:
                raise ValueError(f"letter a{i} not in alphabet a0..a{self.n}")
        return w

    def letter(self, i: int) -> NCPolynomial:
        return NCPolynomial({self.check((i,)): 1})

    def word(self, *letters: int) -> NCPolynomial:
        return NCPolynomial({self.check(letters): 1})

    def polynomial(self, terms: Mapping[Iterable[int], Coefficient]) -> NCPolynomial:
        return NCPolynomial({self.check(w): c for w, c in terms.items()})


class NCPolynomial:
    """Finite linear combination of words with exact rational coefficients.

    ``*`` is the concatenation product, ``shuffle`` (or ``%``) the shuffle
    product; ``+``, ``-`` and scalar multiplication are as usual.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Iterable[int], Coefficient] | None = None):
        clean: dict[Word, Coefficient] = {}
        for w, c in (terms or {}).items():
            c = _norm(c)
            if c != 0:
                w = tuple(w)
                clean[w] = _norm(clean.get(w, 0) + c)
                if clean[w] == 0:
                    del clean[w]
        self._terms = dict(sorted(clean.items(), key=lambda kv: word_key(kv[0])))

    @classmethod
    def one(cls) -> NCPolynomial:
        return cls({EMPTY: 1})

    @classmethod
    def zero(cls) -> NCPolynomial:
        return cls()

    @classmethod
    def from_word(cls, w: Iterable[int], c: Coefficient = 1) -> NCPolynomial:
        return cls({tuple(w): c})

    @classmethod
    def _trusted(cls, terms: dict[Word, Coefficient]) -> NCPolynomial:
        # terms already free of zeros; only needs ordering
        p = cls.__new__(cls)
        p._terms = dict(sorted(terms.items(), key=lambda kv: word_key(kv[0])))
        return p

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[Word, Coefficient]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def words(self) -> list[Word]:
        return list(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, NCPolynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == NCPolynomial({EMPTY: other})
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def coefficient(self, w: Iterable[int]) -> Coefficient:
        return self._terms.get(tuple(w), 0)

    def degree(self) -> int:
        """Length of the longest word; -1 for the zero polynomial."""
        return max((len(w) for w in self._terms), default=-1)

    def is_homogeneous(self, k: int) -> bool:
        return all(len(w) == k for w in self._terms)

    def homogeneous_part(self, k: int) -> NCPolynomial:
        return NCPolynomial._trusted({w: c for w, c in self._terms.items() if len(w) == k})

    def truncate(self, k: int) -> NCPolynomial:
        """Drop every word longer than k."""
        return NCPolynomial._trusted({w: c for w, c in self._terms.items() if len(w) <= k})

    def restrict(self, letters: Iterable[int]) -> NCPolynomial:
        """Keep only words whose letters all lie in ``letters``."""
        keep = set(letters)
        return NCPolynomial._trusted(
            {w: c for w, c in self._terms.items() if keep.issuperset(w)}
        )

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: NCPolynomial) -> NCPolynomial:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        out = dict(self._terms)
        for w, c in other._terms.items():
            s = _norm(out.get(w, 0) + c)
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
        return NCPolynomial._trusted(out)

    def __neg__(self) -> NCPolynomial:
        return NCPolynomial._trusted({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: NCPolynomial) -> NCPolynomial:
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self + (-other)

    def scale(self, s: Coefficient) -> NCPolynomial:
        s = _norm(s)
        if s == 0:
            return NCPolynomial()
        return NCPolynomial._trusted({w: _norm(c * s) for w, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, NCPolynomial):
            return concat(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __mod__(self, other: NCPolynomial) -> NCPolynomial:
        return shuffle(self, other)

    # -- rendering ----------------------------------------------------------

    def __repr__(self) -> str:
        return f"NCPolynomial({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)


def concat(p: NCPolynomial, q: NCPolynomial) -> NCPolynomial:
    """Concatenation product, extended bilinearly."""
    out: dict[Word, Coefficient] = {}
    for v, a in p.items():
        for w, b in q.items():
            u = v + w
            s = _norm(out.get(u, 0) + a * b)
            if s == 0:
                out.pop(u, None)
            else:
                out[u] = s
    return NCPolynomial._trusted(out)


@lru_cache(maxsize=1 << 14)
def shuffle_words(v: Word, w: Word) -> tuple[tuple[Word, int], ...]:
    """Shuffle of two words as (word, multiplicity) pairs.

    Uses the last-letter recursion
    (vb) sh (wc) = (v sh wc) b + (vb sh w) c.
    """
    if not v:
        return ((w, 1),)
    if not w:
        return ((v, 1),)
    out: dict[Word, int] = {}
    b, c = v[-1:], w[-1:]
    for u, m in shuffle_words(v[:-1], w):
        out[u + b] = out.get(u + b, 0) + m
    for u, m in shuffle_words(v, w[:-1]):
        out[u + c] = out.get(u + c, 0) + m
    return tuple(out.items())


def shuffle(p: NCPolynomial, q: NCPolynomial) -> NCPolynomial:
    """Shuffle product, extended bilinearly."""
    out: dict[Word, Coefficient] = {}
    for v, a in p.items():
        for w, b in q.items():
            ab = a * b
            # shuffle is commutative; canonical argument order improves cache hits
            key = (v, w) if word_key(v) <= word_key(w) else (w, v)
            for u, m in shuffle_words(*key):
                out[u] = out.get(u, 0) + ab * m
    return NCPolynomial({u: c for u, c in out.items() if c != 0})


def shuffle_power(p: NCPolynomial, m: int) -> NCPolynomial:
    if m < 0:
        raise ValueError(f"shuffle power needs m >= 0, got {m}")
    out = NCPolynomial.one()
    for _ in range(m):
        out = shuffle(p, out)
    return out


def coefficient(p: NCPolynomial, w: Iterable[int]) -> Coefficient:
    return p.coefficient(w)


def word_norm(p: NCPolynomial) -> Coefficient:
    """Sum of absolute values of the coefficients."""
    return _norm(sum((abs(c) for _, c in p.items()), 0))


def shuffle_exp_truncated(p: NCPolynomial, K: int):
    """exp of ``p`` under the shuffle product, as a graded series up to degree K.

    ``p`` must have no constant term; its powers are truncated at K as they
    are formed, so only finitely many terms contribute.
    """
    from .series import GradedSeries

    if K < 0:
        raise ValueError(f"truncation order must be >= 0, got {K}")
    if p.coefficient(EMPTY) != 0:
        raise ValueError("shuffle exponential needs a polynomial without constant term")
    total = NCPolynomial.one()
    power = NCPolynomial.one()
    for m in range(1, K + 1):
        power = shuffle(p, power).truncate(K)
        if not power:
            break
        total = total + power.scale(Fraction(1, factorial(m)))
    return GradedSeries.from_polynomial(total, K)


# -- text and JSON forms ----------------------------------------------------


def _render_word(w: Word) -> str:
    return ".".join(f"a{i}" for i in w) if w else "1"


def to_text(p: NCPolynomial) -> str:
    """Canonical text form, e.g. ``"2 a0.a1.a1 + 1 a0.a0.a2"``; ``"0"`` if empty."""
    if not p:
        return "0"
    parts = []
    for i, (w, c) in enumerate(p.items()):
        sign = "-" if c < 0 else "+"
        body = f"{abs(c)} {_render_word(w)}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def _parse_word(s: str) -> Word:
    if s == "1":
        return EMPTY
    out = []
    for tok in s.split("."):
        if not tok.startswith("a") or not tok[1:].isdigit():
            raise ValueError(f"bad letter {tok!r}")
        out.append(int(tok[1:]))
    return tuple(out)


def from_text(s: str) -> NCPolynomial:
    """Inverse of :func:`to_text`."""
    toks = s.split()
    if toks == ["0"]:
        return NCPolynomial()
    terms: dict[Word, Coefficient] = {}
    sign = 1
    i = 0
    expect_term = True
    while i < len(toks):
        tok = toks[i]
        if not expect_term:
            if tok not in "+-":
                raise ValueError(f"expected '+' or '-' at token {i}: {tok!r}")
            sign = -1 if tok == "-" else 1
            expect_term = True
            i += 1
            continue
        if i + 1 >= len(toks):
            raise ValueError(f"dangling coefficient {tok!r}")
        c = Fraction(tok) * sign
        w = _parse_word(toks[i + 1])
        terms[w] = _norm(terms.get(w, 0) + c)
        sign = 1
        expect_term = False
        i += 2
    if expect_term:
        raise ValueError("polynomial text ends with an operator")
    return NCPolynomial(terms)


def to_json_terms(p: NCPolynomial) -> list[dict]:
    out = []
    for w, c in p.items():
        c = Fraction(c)
        out.append({"word": list(w), "num": c.numerator, "den": c.denominator})
    return out


def from_json_terms(items: list[dict]) -> NCPolynomial:
    return NCPolynomial({tuple(d["word"]): Fraction(d["num"], d["den"]) for d in items})


def to_json(p: NCPolynomial) -> str:
    return json.dumps(to_json_terms(p))


def from_json(s: str) -> NCPolynomial:
    return from_json_terms(json.loads(s))
