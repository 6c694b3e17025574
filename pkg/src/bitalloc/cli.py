"""Command-line driver for allocation experiments.

Experiments are described by a small INI-style config file with an
[experiment] section naming the application and the strategies to run,
an optional [swarm] section overriding engine hyperparameters, and one
application section ([fir], [receiver] or [qgd]) with the problem
parameters. All randomness flows from the single seed in [experiment];
each module derives its own substream, so reruns of the same config
produce byte-identical result files.

Subcommands:
  run <config>               execute the experiment, write CSV results
  check-convergence          print the stability report for (w, c1, c2)
  oracle <config>            brute-force the configured problem
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fir, qgd, receiver
from .convergence import check_convergence_conditions
from .problem import (
    AllocationProblem,
    ContractViolation,
    InfeasibleBudgetError,
    SearchSpaceTooLarge,
    brute_force_optimum,
)
from .swarm import RunResult, SwarmConfig, run_gcpso, run_ppso

_APPLICATIONS = ("fir", "receiver", "qgd")
_STRATEGIES = ("naive", "lc", "ppso", "gcpso", "oracle")


class ConfigError(Exception):
    """Invalid experiment configuration; message names the field."""


def _fail(field: str, message: str) -> ConfigError:
    return ConfigError(f"{field}: {message}")


def _split_list(raw: str) -> list[str]:
    return raw.replace(",", " ").split()


def _floats(section: str, key: str, raw: str) -> list[float]:
    try:
        return [float(tok) for tok in _split_list(raw)]
    except ValueError:
        raise _fail(f"[{section}] {key}", f"expected numbers, got {raw!r}") from None


class _Section:
    """Typed access to one config section with field-naming errors."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self._parser = parser

    def has(self, key: str) -> bool:
        return self._parser.has_option(self.name, key)

    def raw(self, key: str, default: str | None = None) -> str:
        if not self.has(key):
            if default is None:
                raise _fail(f"[{self.name}] {key}", "required key is missing")
            return default
        return self._parser.get(self.name, key).strip()

    def text(self, key: str, default: str | None = None) -> str:
        return self.raw(key, default)

    def integer(self, key: str, default: int | None = None) -> int:
        raw = self.raw(key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError:
            raise _fail(f"[{self.name}] {key}", f"expected an integer, got {raw!r}") from None

    def number(self, key: str, default: float | None = None) -> float:
        raw = self.raw(key, None if default is None else repr(default))
        try:
            return float(raw)
        except ValueError:
            raise _fail(f"[{self.name}] {key}", f"expected a number, got {raw!r}") from None

    def flag(self, key: str, default: bool) -> bool:
        raw = self.raw(key, str(default)).lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise _fail(f"[{self.name}] {key}", f"expected a boolean, got {raw!r}")


def _load_parser(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise _fail("config", f"file not found: {path}") from None
    except configparser.Error as exc:
        raise _fail("config", f"parse error: {exc}") from None
    return parser


def _swarm_config(parser: configparser.ConfigParser, seed: int) -> SwarmConfig:
    cfg = SwarmConfig(seed=seed)
    if not parser.has_section("swarm"):
        return cfg
    section = _Section(parser, "swarm")
    fields = {
        "n_pop": section.integer("n_pop", cfg.n_pop),
        "i_iter": section.integer("i_iter", cfg.i_iter),
        "w_min": section.number("w_min", cfg.w_min),
        "w_max": section.number("w_max", cfg.w_max),
        "c1_min": section.number("c1_min", cfg.c1_min),
        "c1_max": section.number("c1_max", cfg.c1_max),
        "c2_min": section.number("c2_min", cfg.c2_min),
        "c2_max": section.number("c2_max", cfg.c2_max),
        "v_min": section.number("v_min", cfg.v_min),
        "v_max": section.number("v_max", cfg.v_max),
        "penalty_weight": section.number("penalty_weight", cfg.penalty_weight),
        "restarts": section.integer("restarts", cfg.restarts),
        "per_dimension_draws": section.flag("per_dimension_draws", cfg.per_dimension_draws),
    }
    try:
        return replace(cfg, **fields)
    except ContractViolation as exc:
        raise _fail("[swarm]", str(exc)) from None


def _write_csv(path: Path, seed: int, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


def _bits_str(bits) -> str:
    return " ".join(str(int(b)) for b in np.asarray(bits).ravel())


def _trace_rows(result: RunResult) -> list[list]:
    return [[it, _fmt(cost)] for it, cost in enumerate(result.trace)]


# -- application runners -------------------------------------------------------


def _fir_spec_from(section: _Section, n_taps: int) -> fir.FilterSpec:
    if section.has("benchmark"):
        return fir.benchmark_spec(section.text("benchmark"), n_taps)
    for key in ("bands", "desired", "weights"):
        if not section.has(key):
            raise _fail(f"[fir] {key}", "required when no benchmark letter is given")
    band_edges = []
    for tok in _split_list(section.raw("bands")):
        lo, _, hi = tok.partition(":")
        if not hi:
            raise _fail("[fir] bands", f"expected low:high pairs, got {tok!r}")
        band_edges.append((float(lo), float(hi)))
    desired = _floats("fir", "desired", section.raw("desired"))
    weights = _floats("fir", "weights", section.raw("weights"))
    try:
        return fir.FilterSpec.of_pi(band_edges, desired, weights, n_taps)
    except ContractViolation as exc:
        raise _fail("[fir]", str(exc)) from None


def _run_fir(parser, strategies, swarm_cfg, seed, out_dir, config_dir):
    section = _Section(parser, "fir")
    coeff_path = Path(section.text("coefficients"))
    if not coeff_path.is_absolute():
        coeff_path = config_dir / coeff_path
    if not coeff_path.exists():
        raise _fail("[fir] coefficients", f"file not found: {coeff_path}")
    coeffs = fir.load_coefficients(coeff_path)
    spec = _fir_spec_from(section, coeffs.n_taps)
    kind = section.text("kind", "fixed")
    if kind not in ("fixed", "float"):
        raise _fail("[fir] kind", f"expected 'fixed' or 'float', got {kind!r}")
    budget_bits = section.integer("budget_bits", 8)
    exp_bits = section.integer("exp_bits", fir.DEFAULT_EXP_BITS)
    points_per_tap = section.integer("points_per_tap", fir.DEFAULT_POINTS_PER_TAP)
    problem = fir.fir_problem(
        spec, coeffs, kind, budget_bits, exp_bits=exp_bits, points_per_tap=points_per_tap
    )
    cap = _Section(parser, "experiment").integer("oracle_cap", 10**6)

    rows, traces, summary = [], {}, []
    for strategy in strategies:
        try:
            if strategy == "naive":
                bits = np.full(problem.dimension, budget_bits, dtype=np.int64)
            elif strategy == "lc":
                if kind == "fixed":
                    bits = fir.lc_fixed_alloc(coeffs.n_taps, budget_bits)
                else:
                    relaxed = fir.lc_float_alloc(coeffs, budget_bits, strict=False)
                    bits = fir.lc_float_map(relaxed, coeffs, budget_bits)
            elif strategy == "oracle":
                bits, _ = brute_force_optimum(problem, cap=cap)
            else:
                engine = run_gcpso if strategy == "gcpso" else run_ppso
                result = engine(problem, swarm_cfg)
                bits = result.best
                traces[f"trace_{strategy}.csv"] = _trace_rows(result)
        except (InfeasibleBudgetError, SearchSpaceTooLarge) as exc:
            print(f"strategy {strategy}: {exc}", file=sys.stderr)
            rows.append([strategy, "nan", "nan", ""])
            continue
        error = problem.evaluate_objective(bits)
        cons = problem.evaluate_consumption(bits)
        rows.append([strategy, _fmt(error), _fmt(cons), _bits_str(bits)])
        summary.append(
            {
                "strategy": strategy,
                "minimax_error": error,
                "consumption": cons,
                "bits": [int(b) for b in bits],
            }
        )
    _write_csv(out_dir / "results.csv", seed, ["strategy", "minimax_error", "consumption", "bits"], rows)
    for name, trace_rows in traces.items():
        _write_csv(out_dir / name, seed, ["iteration", "best_cost"], trace_rows)
    return summary


def _receiver_config(section: _Section, seed: int, p_u: float) -> receiver.SystemConfig:
    try:
        return receiver.SystemConfig(
            m_antennas=section.integer("m_antennas", 64),
            k_users=section.integer("k_users", 10),
            p_u=p_u,
            cell_radius=section.number("cell_radius", 1000.0),
            r_min=section.number("r_min", 100.0),
            path_loss_exponent=section.number("path_loss_exponent", 3.8),
            shadowing_db=section.number("shadowing_db", 8.0),
            budget_bits=section.integer("budget_bits", 1),
            mc_channels=section.integer("mc_channels", 100),
            seed=seed,
            redraw_large_scale=section.flag("redraw_large_scale", True),
        )
    except ContractViolation as exc:
        raise _fail("[receiver]", str(exc)) from None


def _pu_label(p_u_db: float) -> str:
    return f"{p_u_db:g}".replace("-", "m").replace(".", "p")


def _run_receiver(parser, strategies, swarm_cfg, seed, out_dir, config_dir):
    section = _Section(parser, "receiver")
    p_u_db_list = _floats("receiver", "p_u_db", section.raw("p_u_db", "0"))
    cap = _Section(parser, "experiment").integer("oracle_cap", 10**6)

    rows, traces, summary = [], {}, []
    for p_u_db in p_u_db_list:
        cfg = _receiver_config(section, seed, 10.0 ** (p_u_db / 10.0))
        problem = receiver.receiver_problem(cfg)
        for strategy in strategies:
            try:
                if strategy == "naive":
                    bits = np.full(problem.dimension, cfg.budget_bits, dtype=np.int64)
                elif strategy == "oracle":
                    bits, _ = brute_force_optimum(problem, cap=cap)
                else:
                    engine = run_gcpso if strategy == "gcpso" else run_ppso
                    result = engine(problem, swarm_cfg)
                    bits = result.best
                    traces[f"trace_{strategy}_pu{_pu_label(p_u_db)}dB.csv"] = _trace_rows(result)
            except (InfeasibleBudgetError, SearchSpaceTooLarge) as exc:
                print(f"strategy {strategy} at {p_u_db} dB: {exc}", file=sys.stderr)
                rows.append([_fmt(p_u_db), strategy, "nan", "nan", ""])
                continue
            rate = -problem.evaluate_objective(bits)
            cons = problem.evaluate_consumption(bits)
            rows.append([_fmt(p_u_db), strategy, _fmt(rate), _fmt(cons), _bits_str(bits)])
            summary.append(
                {
                    "p_u_dB": p_u_db,
                    "strategy": strategy,
                    "sum_rate_bps_hz": rate,
                    "consumption": cons,
                    "bits": [int(b) for b in bits],
                }
            )
    _write_csv(
        out_dir / "results.csv",
        seed,
        ["p_u_dB", "strategy", "sum_rate_bps_hz", "consumption", "bits"],
        rows,
    )
    for name, trace_rows in traces.items():
        _write_csv(out_dir / name, seed, ["iteration", "best_cost"], trace_rows)
    return summary


def _qgd_task(section: _Section, seed: int, config_dir: Path) -> qgd.QgdTask:
    kind = section.text("task", "least_squares")
    eta = section.number("eta", 0.001)
    t_iter = section.integer("t_iter", 200)
    budget_bits = section.integer("budget_bits", 4)
    try:
        if kind == "least_squares":
            return qgd.gaussian_least_squares(
                n_rows=section.integer("n_rows", 200),
                n_cols=section.integer("n_cols", 20),
                eta=eta,
                t_iter=t_iter,
                budget_bits=budget_bits,
                seed=seed,
                noise_std=section.number("noise_std", 0.0),
            )
        if kind == "logistic":
            return qgd.synthetic_classification(
                n_samples=section.integer("n_samples", 400),
                n_features=section.integer("n_features", 30),
                eta=eta,
                t_iter=t_iter,
                budget_bits=budget_bits,
                seed=seed,
                separation=section.number("separation", 2.0),
            )
        path = Path(kind)
        if not path.is_absolute():
            path = config_dir / path
        if not path.exists():
            raise _fail(
                "[qgd] task",
                f"expected 'least_squares', 'logistic' or a dataset path; {path} not found",
            )
        return qgd.load_sparse_dataset(
            path, eta=eta, t_iter=t_iter, budget_bits=budget_bits, seed=seed
        )
    except ContractViolation as exc:
        raise _fail("[qgd]", str(exc)) from None


def _run_qgd(parser, strategies, swarm_cfg, seed, out_dir, config_dir):
    section = _Section(parser, "qgd")
    task = _qgd_task(section, seed, config_dir)
    if parser.has_section("swarm"):
        step_cfg = swarm_cfg
    else:
        step_cfg = replace(qgd.DEFAULT_STEP_SWARM, seed=seed)

    rows, summary = [], []
    for strategy in strategies:
        qgd_strategy = "uniform" if strategy == "naive" else strategy
        result = qgd.train(task, qgd_strategy, swarm_config=step_cfg)
        metric_name = "error" if task.z_star is not None else "loss"
        trace_rows = [
            [t, _fmt(value), int(result.allocations[t - 1].sum()) if t else 0]
            for t, value in enumerate(result.metric_trace)
        ]
        _write_csv(
            out_dir / f"trace_{strategy}.csv",
            seed,
            ["iteration", metric_name, "bits_used"],
            trace_rows,
        )
        final = float(result.metric_trace[-1])
        final_bits = result.allocations[-1]
        rows.append([strategy, _fmt(final), _fmt(final_bits.sum()), _bits_str(final_bits)])
        summary.append(
            {
                "strategy": strategy,
                f"final_{metric_name}": final,
                "consumption": float(final_bits.sum()),
                "bits": [int(b) for b in final_bits],
            }
        )
    _write_csv(
        out_dir / "results.csv",
        seed,
        ["strategy", "final_metric", "consumption", "bits"],
        rows,
    )
    return summary


_RUNNERS = {"fir": _run_fir, "receiver": _run_receiver, "qgd": _run_qgd}
_VALID_STRATEGIES = {
    "fir": ("naive", "lc", "ppso", "gcpso", "oracle"),
    "receiver": ("naive", "ppso", "gcpso", "oracle"),
    "qgd": ("naive", "ppso", "gcpso"),
}


def run_experiment(config_path) -> int:
    config_path = Path(config_path)
    parser = _load_parser(config_path)
    if not parser.has_section("experiment"):
        raise _fail("[experiment]", "section is missing")
    exp = _Section(parser, "experiment")
    application = exp.text("application")
    if application not in _APPLICATIONS:
        raise _fail(
            "[experiment] application", f"must be one of {', '.join(_APPLICATIONS)}"
        )
    strategies = _split_list(exp.raw("strategies"))
    for strategy in strategies:
        if strategy not in _STRATEGIES:
            raise _fail(
                "[experiment] strategies",
                f"unknown strategy {strategy!r}; valid: {', '.join(_STRATEGIES)}",
            )
        if strategy not in _VALID_STRATEGIES[application]:
            raise _fail(
                "[experiment] strategies",
                f"strategy {strategy!r} is not valid for application {application!r}",
            )
    if not strategies:
        raise _fail("[experiment] strategies", "at least one strategy is required")
    seed = exp.integer("seed", 0)
    config_dir = config_path.resolve().parent
    out_dir = Path(exp.text("output_dir", "results"))
    if not out_dir.is_absolute():
        out_dir = config_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    if not parser.has_section(application):
        raise _fail(f"[{application}]", "section is missing")
    swarm_cfg = _swarm_config(parser, seed)

    summary = _RUNNERS[application](parser, strategies, swarm_cfg, seed, out_dir, config_dir)
    if exp.flag("json_summary", False):
        payload = {"application": application, "seed": seed, "results": summary}
        (out_dir / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def run_oracle(config_path) -> int:
    config_path = Path(config_path)
    parser = _load_parser(config_path)
    if not parser.has_section("experiment"):
        raise _fail("[experiment]", "section is missing")
    exp = _Section(parser, "experiment")
    application = exp.text("application")
    seed = exp.integer("seed", 0)
    cap = exp.integer("oracle_cap", 10**6)
    config_dir = config_path.resolve().parent

    problem: AllocationProblem
    if application == "fir":
        section = _Section(parser, "fir")
        coeff_path = Path(section.text("coefficients"))
        if not coeff_path.is_absolute():
            coeff_path = config_dir / coeff_path
        coeffs = fir.load_coefficients(coeff_path)
        spec = _fir_spec_from(section, coeffs.n_taps)
        problem = fir.fir_problem(
            spec,
            coeffs,
            section.text("kind", "fixed"),
            section.integer("budget_bits", 8),
            exp_bits=section.integer("exp_bits", fir.DEFAULT_EXP_BITS),
            points_per_tap=section.integer("points_per_tap", fir.DEFAULT_POINTS_PER_TAP),
        )
    elif application == "receiver":
        section = _Section(parser, "receiver")
        p_u_db = _floats("receiver", "p_u_db", section.raw("p_u_db", "0"))[0]
        problem = receiver.receiver_problem(
            _receiver_config(section, seed, 10.0 ** (p_u_db / 10.0))
        )
    elif application == "qgd":
        section = _Section(parser, "qgd")
        task = _qgd_task(section, seed, config_dir)
        problem = qgd.qgd_problem(task, np.zeros(task.dimension))
    else:
        raise _fail("[experiment] application", f"must be one of {', '.join(_APPLICATIONS)}")

    try:
        bits, value = brute_force_optimum(problem, cap=cap)
    except (SearchSpaceTooLarge, InfeasibleBudgetError) as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return 1
    print(f"problem: {problem.name or application} (dimension {problem.dimension}, "
          f"{len(problem.allowed_values)} allowed values)")
    print(f"bits = {_bits_str(bits)}")
    print(f"objective = {_fmt(value)}")
    print(f"consumption = {_fmt(problem.evaluate_consumption(bits))} (budget {_fmt(problem.budget)})")
    return 0


def run_check_convergence(w: float, c1: float, c2: float) -> int:
    report = check_convergence_conditions(w, c1, c2)
    print(f"w = {report.w:g}")
    print(f"c = {report.c:g}  ((c1 + c2) / 2)")
    print(f"P = [[{report.P[0,0]:.6f}, {report.P[0,1]:.6f}], "
          f"[{report.P[1,0]:.6f}, {report.P[1,1]:.6f}]]")
    print(f"lambda_max(P) = {report.lambda_max_P:.6f}")
    print(f"threshold 1/(2 sqrt(c^2+w^2)) = {report.threshold:.6f}")
    print(f"condition 1 (0 < w < c+1): {report.condition_1}")
    print(f"condition 2 (lambda_max(P) < threshold): {report.condition_2}")
    print(f"guaranteed: {report.guaranteed}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bitalloc", description="Bit-allocation search experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to the experiment config file")
    p_conv = sub.add_parser("check-convergence", help="stability check for (w, c1, c2)")
    p_conv.add_argument("--w", type=float, required=True)
    p_conv.add_argument("--c1", type=float, required=True)
    p_conv.add_argument("--c2", type=float, required=True)
    p_oracle = sub.add_parser("oracle", help="brute-force the configured problem")
    p_oracle.add_argument("config", help="path to the experiment config file")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            return run_experiment(args.config)
        if args.command == "check-convergence":
            return run_check_convergence(args.w, args.c1, args.c2)
        return run_oracle(args.config)
    except (ConfigError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
