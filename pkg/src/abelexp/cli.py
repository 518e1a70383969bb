"""Command line front end: ``abelexp {expand,solve,count,compare}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import combinatorics as cb
from .problem import BlowUp, ConfigError, load_config, normalize_coefficients, rk4_oracle, sample_raw, shift_initial_value
from .quadrature import ControlGrid, chen_fliess_terms, convergence_radius, expansion_via_products
from .reports import write_table
from .series import GuardExceeded, expand_general
from .shuffle import to_text, word_norm

log = logging.getLogger("abelexp")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GUARD = 0, 1, 2, 3


def _check_guard(cfg) -> None:
    if cfg.K > cfg.guard:
        raise GuardExceeded(f"truncation order {cfg.K} exceeds guard {cfg.guard}")


def _warn_radius(spec, grid) -> None:
    report = convergence_radius(spec, grid.M, grid.T)
    if not report.inside(grid.t).all():
        log.warning(
            "certified radius is %.6g (n=%d, M=%.6g); remainder bound is reported as inf beyond it",
            report.radius, spec.n, grid.M,
        )


def _solution(cfg):
    """Expansion of the shifted problem plus the RK4 reference of the original one."""
    shifted = shift_initial_value(cfg)
    spec, grid = normalize_coefficients(shifted)
    _warn_radius(spec, grid)
    table = expansion_via_products(spec, grid, cfg.K)
    reference = rk4_oracle(cfg)
    return shifted, spec, grid, table, reference


def run_expand(cfg, out: Path, fmt: str) -> Path:
    Z = expand_general(cfg.n, cfg.K, guard=cfg.guard)
    if fmt == "json":
        path = out / "expand.json"
        path.write_text(Z.to_json(indent=1))
        return path
    path = out / "expand.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "word_norm", "polynomial"])
        for k, p in enumerate(Z):
            w.writerow([k, word_norm(p), to_text(p)])
    return path


def run_solve(cfg, out: Path, fmt: str) -> Path:
    _check_guard(cfg)
    _, _, grid, table, reference = _solution(cfg)
    cols = {"t": grid.t}
    for k in range(1, table.K + 1):
        cols[f"phi_{k}"] = table.order(k)
    cols["partial_sum"] = table.partial
    cols["x"] = table.partial + cfg.x0
    cols["remainder_bound"] = table.bound
    cols["rk4_reference"] = reference
    cols["abs_error"] = np.abs(cols["x"] - reference)
    return write_table(out / f"solve.{fmt}", cols, fmt)


def count_columns(n: int, K: int, guard: int | None = None) -> dict[str, list[int]]:
    ks = list(range(1, K + 1))
    Z = expand_general(n, K, guard=guard if guard is not None else max(K, 16))
    recurrence = cb.tree_count_recurrence(n, K).counts if n >= 1 else None
    return {
        "k": ks,
        "tree_product": [cb.tree_count_product(n, k) for k in ks],
        # the recurrence is defined for n >= 1 only; n = 0 falls back to the product
        "tree_recurrence": [recurrence[k] if recurrence else cb.tree_count_product(n, k) for k in ks],
        "word_norm": [int(word_norm(Z[k])) for k in ks],
        "partitions": [cb.partition_count(k) for k in ks],
        "bounded_partitions": [cb.bounded_partition_count(k, n) for k in ks],
        "M0_size": [cb.m0_size(k, n) for k in ks],
    }


def run_count(cfg, out: Path, fmt: str) -> Path:
    return write_table(out / f"count.{fmt}", count_columns(cfg.n, cfg.K, cfg.guard), fmt)


def run_compare(cfg, out: Path, fmt: str) -> list[Path]:
    _check_guard(cfg)
    shifted, spec, grid, table, reference = _solution(cfg)
    raw = ControlGrid.from_samples(shifted.T, sample_raw(shifted))
    cf = chen_fliess_terms(cfg.n, raw, cfg.K)
    x = table.partial + cfg.x0
    x_cf = cf.partial + cfg.x0
    per_t = {
        "t": grid.t,
        "expansion": x,
        "rk4_reference": reference,
        "chen_fliess": x_cf,
        "err_expansion": np.abs(x - reference),
        "err_chen_fliess": np.abs(x_cf - reference),
        "remainder_bound": table.bound,
    }
    ks = list(range(1, cfg.K + 1))
    per_order = {
        "k": ks,
        "product_integrals": [cb.bounded_partition_count(k, cfg.n) for k in ks],
        "cf_integrals": [cf.integral_counts[k] for k in ks],
        "partitions": [cb.partition_count(k) for k in ks],
        "catalan": [cb.catalan(k) for k in ks],
    }
    return [
        write_table(out / f"compare.{fmt}", per_t, fmt),
        write_table(out / f"compare_counts.{fmt}", per_order, fmt),
    ]


COMMANDS = {"expand": run_expand, "solve": run_solve, "count": run_count, "compare": run_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="abelexp", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path, help="problem description (INI)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--order", type=int, help="truncation order K (overrides config)")
    p.add_argument("--grid", type=int, help="number of grid points N (overrides config)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: json for expand, csv otherwise)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    fmt = args.format or ("json" if args.command == "expand" else "csv")
    try:
        cfg = load_config(args.config).with_overrides(K=args.order, N=args.grid)
        args.out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](cfg, args.out, fmt)
    except ConfigError as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    except GuardExceeded as e:
        log.error("%s", e)
        return EXIT_GUARD
    except BlowUp as e:
        log.error("numerical failure: %s (last safe time %.6g)", e, e.last_safe_time)
        return EXIT_NUMERIC
    for path in written if isinstance(written, list) else [written]:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
