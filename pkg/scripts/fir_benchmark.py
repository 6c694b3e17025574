#!/usr/bin/env python3
"""Quantized-coefficient benchmark over the shipped filter fixtures.

For each fixture (four band layouts at 35 and 45 taps) and each
quantization kind, compares the minimax error of:

  naive   uniform wordlengths, plain rounding
  lc      closed-form low-complexity allocation
  ppso    penalized particle swarm
  gcpso   greedy-constrained particle swarm

against the full-precision design. Results go to stdout as a table and
to a CSV for plotting.

Usage:
  python3 scripts/fir_benchmark.py [--kind fixed|float|both]
      [--n-pop 100] [--restarts 10] [--out fir_benchmark.csv]
"""

import argparse
import csv
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bitalloc.fir import (
    benchmark_spec,
    fir_problem,
    full_precision_error,
    lc_fixed_alloc,
    lc_float_alloc,
    lc_float_map,
    load_coefficients,
    minimax_error,
)
from bitalloc.swarm import SwarmConfig, run_gcpso, run_ppso

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

# Total-wordlength budgets for the fixed-point runs and mantissa-bit
# budgets for the floating-point runs, per band layout.
FIXED_BUDGETS = {"a": 8, "b": 9, "c": 8, "d": 8}
FLOAT_BUDGETS = {"a": 4, "b": 5, "c": 4, "d": 4}


def run_case(letter, n_taps, kind, swarm, seed):
    spec = benchmark_spec(letter, n_taps)
    coeffs = load_coefficients(FIXTURE_DIR / f"{letter}{n_taps}.txt")
    budget = (FIXED_BUDGETS if kind == "fixed" else FLOAT_BUDGETS)[letter]
    problem = fir_problem(spec, coeffs, kind, budget)
    dim = problem.dimension

    rows = {}
    naive = np.full(dim, budget, dtype=np.int64)
    rows["naive"] = (naive, minimax_error(spec, coeffs, naive, kind))

    if kind == "fixed":
        lc = lc_fixed_alloc(n_taps, budget)
    else:
        m_tilde = lc_float_alloc(coeffs.h, budget, strict=False)
        lc = lc_float_map(m_tilde, coeffs.h, budget)
    rows["lc"] = (lc, minimax_error(spec, coeffs, lc, kind))

    cfg = replace(swarm, seed=seed)
    t0 = time.perf_counter()
    pp = run_ppso(problem, cfg)
    gc = run_gcpso(problem, cfg)
    elapsed = time.perf_counter() - t0
    rows["ppso"] = (pp.best, problem.evaluate_objective(pp.best))
    rows["gcpso"] = (gc.best, problem.evaluate_objective(gc.best))

    floor = full_precision_error(spec, coeffs)
    return rows, floor, elapsed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", choices=("fixed", "float", "both"), default="both")
    ap.add_argument("--n-pop", type=int, default=100)
    ap.add_argument("--restarts", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lengths", type=int, nargs="+", default=[35, 45])
    ap.add_argument("--out", type=Path, default=Path("fir_benchmark.csv"))
    args = ap.parse_args(argv)

    kinds = ("fixed", "float") if args.kind == "both" else (args.kind,)
    swarm = SwarmConfig(n_pop=args.n_pop, restarts=args.restarts)

    records = []
    for kind in kinds:
        print(f"== {kind}-point quantization ==")
        header = f"{'design':>8} {'budget':>6} {'full-prec':>10} " + "".join(
            f"{s:>10}" for s in ("naive", "lc", "ppso", "gcpso")
        )
        print(header)
        for letter in "abcd":
            for n_taps in args.lengths:
                rows, floor, elapsed = run_case(
                    letter, n_taps, kind, swarm, args.seed
                )
                budget = (FIXED_BUDGETS if kind == "fixed" else FLOAT_BUDGETS)[letter]
                cells = "".join(f"{rows[s][1]:>10.5f}" for s in ("naive", "lc", "ppso", "gcpso"))
                print(f"{letter + str(n_taps):>8} {budget:>6} {floor:>10.5f} {cells}   [{elapsed:.1f}s swarm]")
                for strategy, (bits, err) in rows.items():
                    records.append(
                        {
                            "design": f"{letter}{n_taps}",
                            "kind": kind,
                            "budget_bits": budget,
                            "strategy": strategy,
                            "minimax_error": repr(err),
                            "full_precision": repr(floor),
                            "bits": " ".join(str(int(v)) for v in bits),
                        }
                    )

    with open(args.out, "w", newline="") as fh:
        fh.write(f"# seed={args.seed}\n")
        writer = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
