"""Numeric evaluation of iterated integrals and of the expansion terms Phi_k(t).

All integrals are cumulative composite trapezoid rules on one uniform grid,
so every Phi_k is known at every grid point and feeds the next order
pointwise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .combinatorics import cf_coefficient, enumerate_M0, tree_count_product
from .series import EquationSpec, GradedSeries, permutation_count, sorted_compositions
from .shuffle import Word, shuffle_words

MAX_ORACLE_WORD = 12


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Samples of u_0..u_n on t_j = j T / (N - 1), with a sup-bound M."""

    T: float
    samples: np.ndarray
    M: float

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if self.T <= 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if samples.shape[1] < 2:
            raise ValueError("grid needs at least 2 points")
        if not np.all(np.isfinite(samples)):
            raise ValueError("control samples must be finite")
        observed = float(np.max(np.abs(samples))) if samples.size else 0.0
        if self.M < observed * (1 - 1e-12):
            raise ValueError(f"bound M={self.M} is below observed max |u_i| = {observed}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_samples(cls, T: float, samples, M: float | None = None, safety: float = 1.0) -> ControlGrid:
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        if M is None:
            M = safety * float(np.max(np.abs(samples)))
        return cls(T, samples, M)

    @classmethod
    def from_functions(
        cls,
        T: float,
        N: int,
        controls: Sequence[Callable[[np.ndarray], np.ndarray] | float],
        M: float | None = None,
    ) -> ControlGrid:
        if N < 2:
            raise ValueError(f"grid needs N >= 2, got {N}")
        t = np.linspace(0.0, T, N)
        rows = []
        for u in controls:
            row = u(t) if callable(u) else np.full_like(t, float(u))
            rows.append(np.broadcast_to(np.asarray(row, dtype=float), t.shape))
        return cls.from_samples(T, np.array(rows), M)

    @property
    def n(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def N(self) -> int:
        return self.samples.shape[1]

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N)

    @property
    def h(self) -> float:
        return self.T / (self.N - 1)

    def u(self, i: int) -> np.ndarray:
        return self.samples[i]

    def scaled(self, weights: Sequence[float], M: float | None = None) -> ControlGrid:
        """Grid with u_i multiplied by weights[i]."""
        w = np.asarray(weights, dtype=float)[:, None]
        return ControlGrid.from_samples(self.T, self.samples * w, M)

    def coarsened(self) -> ControlGrid:
        """Every other sample (needs N odd); doubles the step."""
        if self.N % 2 == 0:
            raise ValueError("coarsening needs an odd number of grid points")
        return ControlGrid(self.T, self.samples[:, ::2], self.M)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t"] + [f"u{i}" for i in range(self.n + 1)])
        for j, tj in enumerate(self.t):
            w.writerow([repr(float(tj))] + [repr(float(x)) for x in self.samples[:, j]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, M: float | None = None, rtol: float = 1e-9) -> ControlGrid:
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        data = np.array([[float(x) for x in r] for r in rows])
        if data.ndim != 2 or data.shape[1] < 2 or data.shape[0] < 2:
            raise ValueError("grid CSV needs a t column, >= 1 control column and >= 2 rows")
        t = data[:, 0]
        T = float(t[-1])
        if t[0] != 0.0 or not np.allclose(t, np.linspace(0.0, T, len(t)), rtol=rtol, atol=rtol * T):
            raise ValueError("grid CSV time column must be uniform from 0 to T")
        return cls.from_samples(T, data[:, 1:].T, M)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cumulative_integral(f: np.ndarray, h: float) -> np.ndarray:
    """int_0^{t_j} f for every grid point (trapezoid, value 0 at t=0)."""
    return cumulative_trapezoid(f, dx=h, initial=0.0)


# -- iterated integrals ----------------------------------------------------------


def iterated_integral(v: Iterable[int], g: ControlGrid) -> np.ndarray:
    """Upsilon^t(v) on the grid; the first letter is the innermost integral."""
    v = tuple(v)
    out = np.ones(g.N)
    for i in v:
        if not 0 <= i <= g.n:
            raise ValueError(f"letter a{i} not available on a grid with n={g.n}")
        out = cumulative_integral(out * g.u(i), g.h)
    return out


class _PrefixCache:
    """Iterated integrals of words, reusing shared prefixes."""

    def __init__(self, g: ControlGrid):
        self.g = g
        self.cache: dict[Word, np.ndarray] = {(): np.ones(g.N)}

    def __call__(self, w: Word) -> np.ndarray:
        if w not in self.cache:
            prev = self(w[:-1])
            i = w[-1]
            if not 0 <= i <= self.g.n:
                raise ValueError(f"letter a{i} not available on a grid with n={self.g.n}")
            self.cache[w] = cumulative_integral(prev * self.g.u(i), self.g.h)
        return self.cache[w]


@dataclass
class ExpansionTable:
    """Phi_1..Phi_K on the grid, their partial sum and the tail majorant.

    ``integral_counts[k]`` is the number of integrals spent to obtain Phi_k.
    """

    t: np.ndarray
    phi: np.ndarray
    bound: np.ndarray
    integral_counts: dict[int, int] = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.phi.shape[0]

    @property
    def partial(self) -> np.ndarray:
        return self.phi.sum(axis=0)

    def order(self, k: int) -> np.ndarray:
        return self.phi[k - 1]


def evaluate_series(Z: GradedSeries, g: ControlGrid, spec: EquationSpec | None = None) -> ExpansionTable:
    """Phi_k = sum_v <Z_k, v> Upsilon(v), word by word (slow reference path)."""
    n = Z.n if Z.n is not None else g.n
    if n != g.n:
        raise ValueError(f"series over a0..a{n} but grid carries u0..u{g.n}")
    longest = max((len(w) for p in Z for w in p), default=0)
    if longest > MAX_ORACLE_WORD:
        raise ValueError(f"word-by-word evaluation limited to length {MAX_ORACLE_WORD}")
    ii = _PrefixCache(g)
    K = Z.K
    phi = np.zeros((K, g.N))
    counts = {}
    for k in range(1, K + 1):
        for w, c in Z[k].items():
            phi[k - 1] += float(c) * ii(w)
        counts[k] = len(Z[k])
    spec = spec or EquationSpec(n)
    return ExpansionTable(g.t, phi, remainder_bound(spec, g, K), counts)


def expansion_via_products(spec: EquationSpec | int, g: ControlGrid, K: int) -> ExpansionTable:
    """Phi_k by integrating products of lower orders, one integral per partition.

    Phi_1 = int u_0 and
    Phi_{k+1} = sum_i C(n,i) sum_{l partition of k into i parts} R(l) int Phi_{l_1}...Phi_{l_i} u_i.
    """
    if isinstance(spec, int):
        spec = EquationSpec(spec)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if spec.n != g.n:
        raise ValueError(f"equation has n={spec.n} but grid carries u0..u{g.n}")
    n = spec.n
    phi = np.zeros((K, g.N))
    phi[0] = cumulative_integral(g.u(0), g.h)
    counts = {1: 1}
    for k in range(1, K):
        acc = np.zeros(g.N)
        used = 0
        for i in range(1, n + 1):
            weight_i = comb(n, i)
            for l in sorted_compositions(k, i):
                integrand = g.u(i) * (weight_i * permutation_count(l))
                for lj in l:
                    integrand = integrand * phi[lj - 1]
                acc += cumulative_integral(integrand, g.h)
                used += 1
        phi[k] = acc
        counts[k + 1] = used
    return ExpansionTable(g.t, phi, remainder_bound(spec, g, K), counts)


def chen_fliess_terms(n: int, raw: ControlGrid, K: int) -> ExpansionTable:
    """Per-order Chen-Fliess sums over M0(k), driven by the raw coefficients c_i.

    ``integral_counts[k]`` is |M0(k)|.
    """
    if raw.n != n:
        raise ValueError(f"equation has n={n} but grid carries c0..c{raw.n}")
    ii = _PrefixCache(raw)
    phi = np.zeros((K, raw.N))
    counts = {}
    for k in range(1, K + 1):
        idx = enumerate_M0(k, n)
        for w in idx:
            c = cf_coefficient(w)
            if c:
                phi[k - 1] += c * ii(w)
        counts[k] = len(idx)
    return ExpansionTable(raw.t, phi, np.full(raw.N, np.inf), counts)


# -- bounds ---------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusReport:
    n: int
    M: float
    T: float
    radius: float

    def inside(self, t) -> np.ndarray:
        """Points where the absolute-convergence guarantee holds."""
        t = np.asarray(t, dtype=float)
        if self.n <= 1 or self.M == 0:
            return (t >= 0) & (t <= self.T)
        return (t >= 0) & (t < self.radius)


def convergence_radius(spec: EquationSpec | int, M: float, T: float) -> RadiusReport:
    n = spec if isinstance(spec, int) else spec.n
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if n <= 1 or M == 0:
        return RadiusReport(n, M, T, T)
    return RadiusReport(n, M, T, min(T, 1.0 / (M * (n - 1))))


def _tail(n: int, x: float, K: int, rtol: float = 1e-17, max_terms: int = 100_000) -> float:
    """sum_{k>K} ||Z_k|| x^k / k! with x = M t, for x inside the convergence disc."""
    if x == 0:
        return 0.0
    if n == 0:
        return x if K < 1 else 0.0
    # term_k = ||Z_k|| x^k / k!; ratio term_{k+1}/term_k = ((n-1)k+1) x / (k+1)
    log_term = math.log(x)  # k = 1
    for k in range(1, K + 1):
        log_term += math.log(((n - 1) * k + 1) * x / (k + 1))
    if log_term > 700:
        return math.inf
    term = math.exp(log_term)  # k = K + 1
    total = 0.0
    k = K + 1
    limit = (n - 1) * x  # sup of the ratios for n >= 2
    for _ in range(max_terms):
        total += term
        r = ((n - 1) * k + 1) * x / (k + 1)
        term *= r
        k += 1
        # remaining tail <= term / (1 - q) with q an upper bound on later ratios
        q = limit if n >= 2 else r
        if q < 1 and term / (1 - q) <= rtol * total:
            return total + term / (1 - q)
        if term == 0.0:
            return total
    q = limit if n >= 2 else ((n - 1) * k + 1) * x / (k + 1)
    return total + term / (1 - q) if q < 1 else math.inf


def remainder_bound(spec: EquationSpec | int, g: ControlGrid, K: int) -> np.ndarray:
    """Majorant of |x(t) - sum_{k<=K} Phi_k(t)|; infinite outside the certified radius."""
    n = spec if isinstance(spec, int) else spec.n
    report = convergence_radius(n, g.M, g.T)
    t = g.t
    inside = report.inside(t)
    out = np.full(g.N, np.inf)
    for j in np.flatnonzero(inside):
        out[j] = _tail(n, g.M * float(t[j]), K)
    return out


def simplex_bound(n: int, k: int, M: float, t) -> np.ndarray:
    """||Z_k|| (M t)^k / k!, the bound on |Phi_k(t)|."""
    t = np.asarray(t, dtype=float)
    return tree_count_product(n, k) * (M * t) ** k / math.factorial(k)


def homomorphism_check(v: Iterable[int], w: Iterable[int], g: ControlGrid) -> float:
    """max_t |Upsilon(v sh w) - Upsilon(v) Upsilon(w)|."""
    v, w = tuple(v), tuple(w)
    ii = _PrefixCache(g)
    left = np.zeros(g.N)
    for u, m in shuffle_words(v, w):
        left += m * ii(u)
    return float(np.max(np.abs(left - ii(v) * ii(w))))
