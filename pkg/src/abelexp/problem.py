"""Problem configuration, coefficient conventions and the RK4 reference solver."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from math import comb
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .quadrature import ControlGrid
from .series import DEFAULT_GUARD, EquationSpec, Normalization


class ConfigError(ValueError):
    """Invalid problem configuration; the message names the field (and line)."""


class BlowUp(ArithmeticError):
    """The reference integrator left the admissible range."""

    def __init__(self, message: str, last_safe_time: float):
        super().__init__(message)
        self.last_safe_time = last_safe_time


# -- coefficient functions --------------------------------------------------------


@dataclass(frozen=True)
class Control:
    """A named coefficient preset evaluated on a time array."""

    kind: str
    params: tuple[float, ...] = ()
    path: str | None = None
    column: int = 1

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.params[0])
        if self.kind == "poly":
            # params are c_0..c_d of sum c_j t^j
            return np.polynomial.polynomial.polyval(t, self.params) + np.zeros_like(t)
        if self.kind == "sine":
            amp, freq, phase = self.params
            return amp * np.sin(freq * t + phase)
        if self.kind == "file":
            return self._from_file(t)
        raise ValueError(f"unknown control kind {self.kind!r}")

    def _from_file(self, t: np.ndarray) -> np.ndarray:
        data = np.atleast_2d(np.loadtxt(self.path, delimiter=",", ndmin=2, skiprows=_header_rows(self.path)))
        if data.shape[0] != t.shape[0]:
            raise ValueError(f"{self.path}: {data.shape[0]} samples, grid has {t.shape[0]} points")
        if not np.allclose(data[:, 0], t, rtol=1e-9, atol=1e-12 * max(1.0, float(t[-1]))):
            raise ValueError(f"{self.path}: time column does not match the grid")
        if not 1 <= self.column < data.shape[1]:
            raise ValueError(f"{self.path}: no column {self.column}")
        return data[:, self.column].copy()

    def describe(self) -> str:
        if self.kind == "file":
            return f"file({self.path}, {self.column})"
        return f"{self.kind}({', '.join(repr(p) for p in self.params)})"


@dataclass(frozen=True)
class Combination:
    """sum_j weight_j * control_j."""

    terms: tuple[tuple[float, Callable[[np.ndarray], np.ndarray]], ...]

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(t, dtype=float))
        for w, f in self.terms:
            if w:
                out = out + w * f(t)
        return out

    def describe(self) -> str:
        return " + ".join(f"{w!r}*{_describe(f)}" for w, f in self.terms if w) or "constant(0.0)"


def _describe(f) -> str:
    return f.describe() if hasattr(f, "describe") else repr(f)


def _header_rows(path) -> int:
    with open(path) as fh:
        first = fh.readline().split(",")[0].strip()
    try:
        float(first)
    except ValueError:
        return 1
    return 0


_PRESET = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")
_ARITY = {"constant": (1, 1), "poly": (1, None), "sine": (3, 3)}


def parse_control(text: str, base_dir: Path | None = None) -> Control:
    """Parse ``constant(c)``, ``poly(c0, ..., cd)``, ``sine(amp, freq, phase)`` or ``file(path[, col])``."""
    m = _PRESET.match(text)
    if not m:
        raise ValueError(f"expected preset(args), got {text!r}")
    kind, args = m.group(1), [a.strip() for a in m.group(2).split(",") if a.strip()]
    if kind == "file":
        if not 1 <= len(args) <= 2:
            raise ValueError("file() takes a path and an optional column")
        path = Path(args[0].strip("'\""))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ValueError(f"sample file {path} not found")
        return Control("file", (), str(path), int(args[1]) if len(args) == 2 else 1)
    if kind not in _ARITY:
        raise ValueError(f"unknown preset {kind!r} (constant, poly, sine, file)")
    lo, hi = _ARITY[kind]
    if len(args) < lo or (hi is not None and len(args) > hi):
        raise ValueError(f"{kind}() takes {lo if lo == hi else f'at least {lo}'} argument(s), got {len(args)}")
    try:
        params = tuple(float(a) for a in args)
    except ValueError as e:
        raise ValueError(f"non-numeric argument in {text!r}") from e
    return Control(kind, params)


# -- configuration ----------------------------------------------------------------


@dataclass(frozen=True)
class ProblemConfig:
    n: int
    coefficients: tuple[Callable[[np.ndarray], np.ndarray], ...]
    convention: Normalization = Normalization.RAW
    x0: float = 0.0
    T: float = 1.0
    N: int = 4097
    K: int = 8
    M_override: float | None = None
    guard: int = DEFAULT_GUARD
    ceiling: float = 1e8

    def __post_init__(self):
        object.__setattr__(self, "convention", Normalization(self.convention))
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if self.n < 0:
            raise ConfigError(f"n: must be >= 0, got {self.n}")
        if len(self.coefficients) != self.n + 1:
            raise ConfigError(f"coefficients: expected {self.n + 1} entries, got {len(self.coefficients)}")
        if not self.T > 0:
            raise ConfigError(f"T: must be positive, got {self.T}")
        if self.N < 2:
            raise ConfigError(f"N: must be >= 2, got {self.N}")
        if self.K < 1:
            raise ConfigError(f"K: must be >= 1, got {self.K}")

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N)

    def with_overrides(self, K: int | None = None, N: int | None = None) -> ProblemConfig:
        return replace(self, K=self.K if K is None else K, N=self.N if N is None else N)


def _locate(text: str) -> dict[tuple[str, str], int]:
    """(section, key) -> 1-based line number."""
    where: dict[tuple[str, str], int] = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        s = re.split(r"\s[#;]", line, maxsplit=1)[0].strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
        elif "=" in s and not s.startswith(("#", ";")):
            where[(section, s.split("=", 1)[0].strip().lower())] = lineno
    return where


def parse_config(text: str, base_dir: Path | None = None) -> ProblemConfig:
    """Read an INI-style problem description.

    Sections: [equation] n, convention, x0; [coefficients] c0..cn;
    [grid] T, N, M; [expansion] K, guard; [rk4] ceiling.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config syntax: {e}") from e
    lines = _locate(text)

    def where(section, key):
        line = lines.get((section, key))
        return f"[{section}] {key}" + (f" (line {line})" if line else "")

    def get(section, key, conv, default=None, required=False):
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"[{section}] {key}: missing")
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ValueError as e:
            raise ConfigError(f"{where(section, key)}: {e}") from e

    n = get("equation", "n", int, required=True)
    convention = get("equation", "convention", Normalization, Normalization.RAW)
    if not cp.has_section("coefficients"):
        raise ConfigError("[coefficients]: missing section")
    known = {f"c{i}" for i in range(max(n, 0) + 1)}
    for key in cp.options("coefficients"):
        if key not in known:
            raise ConfigError(f"{where('coefficients', key)}: unexpected coefficient for n={n}")
    coefficients = [
        get("coefficients", f"c{i}", lambda s: parse_control(s, base_dir), required=True)
        for i in range(max(n, 0) + 1)
    ]
    try:
        return ProblemConfig(
            n=n,
            coefficients=coefficients,
            convention=convention,
            x0=get("equation", "x0", float, 0.0),
            T=get("grid", "t", float, 1.0),
            N=get("grid", "n", int, 4097),
            K=get("expansion", "k", int, 8),
            M_override=get("grid", "m", float, None),
            guard=get("expansion", "guard", int, DEFAULT_GUARD),
            ceiling=get("rk4", "ceiling", float, 1e8),
        )
    except ConfigError as e:
        fields = {"n": ("equation", "n"), "T": ("grid", "t"), "N": ("grid", "n"), "K": ("expansion", "k")}
        name = str(e).split(":", 1)[0]
        if name in fields:
            raise ConfigError(f"{where(*fields[name])}:{str(e).split(':', 1)[1]}") from None
        raise


def load_config(path: str | Path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, path.parent)


# -- conventions ------------------------------------------------------------------


def sample_raw(cfg: ProblemConfig) -> np.ndarray:
    """Raw coefficients c_i(t_j), shape (n+1, N), whatever the input convention."""
    t = cfg.t
    rows = np.array([np.broadcast_to(np.asarray(f(t), dtype=float), t.shape) for f in cfg.coefficients])
    if cfg.convention == Normalization.BINOMIAL:
        rows = rows * np.array([comb(cfg.n, i) for i in range(cfg.n + 1)], dtype=float)[:, None]
    return rows


def normalize_coefficients(cfg: ProblemConfig) -> tuple[EquationSpec, ControlGrid]:
    """Sample the coefficients and bring them to u_i with x' = sum C(n,i) u_i x^i."""
    t = cfg.t
    rows = []
    for i, f in enumerate(cfg.coefficients):
        try:
            row = np.asarray(f(t), dtype=float)
        except ValueError as e:
            raise ConfigError(f"[coefficients] c{i}: {e}") from e
        if row.shape not in ((), t.shape):
            raise ConfigError(f"[coefficients] c{i}: {row.shape[0]} samples for a grid of {t.shape[0]}")
        row = np.broadcast_to(row, t.shape)
        if cfg.convention == Normalization.RAW:
            row = row / comb(cfg.n, i)
        rows.append(row)
    grid = ControlGrid.from_samples(cfg.T, np.array(rows), cfg.M_override)
    return EquationSpec(cfg.n, cfg.convention), grid


def shift_initial_value(cfg: ProblemConfig) -> ProblemConfig:
    """Rewrite the equation for y = x - x0, so y(0) = 0.

    c'_j = sum_{i >= j} c_i C(i, j) x0^(i-j); the result uses the raw convention.
    """
    if cfg.x0 == 0:
        return cfg
    n, x0 = cfg.n, cfg.x0
    if cfg.convention == Normalization.BINOMIAL:
        raw = [Combination(((float(comb(n, i)), f),)) for i, f in enumerate(cfg.coefficients)]
    else:
        raw = list(cfg.coefficients)
    shifted = [
        Combination(tuple((comb(i, j) * x0 ** (i - j), raw[i]) for i in range(j, n + 1)))
        for j in range(n + 1)
    ]
    return replace(cfg, coefficients=tuple(shifted), convention=Normalization.RAW, x0=0.0)


# -- reference integrator ---------------------------------------------------------


def rk4_oracle(cfg: ProblemConfig) -> np.ndarray:
    """Classical RK4 for x' = sum c_i(t) x^i on the config grid, x(0) = x0.

    Coefficients are sampled on the grid and interpolated linearly at the
    half steps.
    """
    c = sample_raw(cfg)
    t = cfg.t
    h = t[1] - t[0]
    mid = 0.5 * (c[:, :-1] + c[:, 1:])
    powers = np.arange(cfg.n + 1)

    def f(coef, x):
        return float(np.dot(coef, x ** powers))

    x = np.empty(cfg.N)
    x[0] = cfg.x0
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(cfg.N - 1):
            xj = x[j]
            k1 = f(c[:, j], xj)
            k2 = f(mid[:, j], xj + 0.5 * h * k1)
            k3 = f(mid[:, j], xj + 0.5 * h * k2)
            k4 = f(c[:, j + 1], xj + h * k3)
            nxt = xj + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.isfinite(nxt) or abs(nxt) > cfg.ceiling:
                raise BlowUp(f"RK4 solution exceeded {cfg.ceiling:g} after t={t[j]:.6g}", float(t[j]))
            x[j + 1] = nxt
    return x
