"""Command-line front end.

Subcommands: ``run`` executes a configured experiment and writes the result
CSV, ``check-assumptions`` verifies a configured problem against its
certificate, ``fit-rate`` fits power-law exponents to a result CSV, and
``plot`` renders CSVs to SVG. Exit codes: 0 success, 1 usage or config
error, 2 a bound or assumption check failed, 3 internal error. Stdout is
machine-parseable key=value lines; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .checks import run_all_checks
from .config import ConfigError, build_problem, build_solver, load_config
from .harness import (
    DEFAULT_BOUND_KIND,
    ExperimentPlan,
    check_bound,
    epoch_excess_stats,
    fit_rate,
    run_trials,
)
from .bounds import epoch_gd_risk_bound
from .reporting import (
    ResultRow,
    csv_to_rows,
    plot_excess_vs_budget,
    plot_excess_vs_epoch,
    rows_to_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_INTERNAL = 3

EPOCH_CSV_HEADER = "algorithm,T,k,mean_excess,std_error"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epochsa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the configured experiment and write CSV")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", help="override the CSV output path")
    run_p.add_argument("--trials", type=int, help="override the trial count")
    run_p.add_argument("--seed", type=int, help="override the base seed")

    chk_p = sub.add_parser("check-assumptions", help="verify the configured problem against its certificate")
    chk_p.add_argument("--config", required=True)
    chk_p.add_argument("--checks", type=int, default=10_000, help="randomized checks per property")

    fit_p = sub.add_parser("fit-rate", help="fit log-log rate exponents to a result CSV")
    fit_p.add_argument("--csv", required=True)
    fit_p.add_argument("--out", help="also write the fit lines to this file")

    plot_p = sub.add_parser("plot", help="render a result CSV to SVG")
    plot_p.add_argument("--csv", required=True)
    plot_p.add_argument("--out", required=True, help="SVG output path")
    plot_p.add_argument("--epochs-csv", help="per-epoch CSV to render as a semi-log plot")
    plot_p.add_argument("--epochs-out", help="SVG path for the per-epoch plot")

    return parser


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.trials is not None:
        cfg.experiment["trials"] = args.trials
    if args.seed is not None:
        cfg.experiment["base_seed"] = args.seed
    if args.out is not None:
        cfg.output["csv"] = args.out
    csv_path = cfg.output.get("csv", "results.csv")
    verbosity = cfg.output.get("verbosity", 1)

    problem = build_problem(cfg.problem)
    solver = build_solver(cfg.solver)
    plan = ExperimentPlan(
        problem=problem,
        solver=solver,
        budget_grid=cfg.experiment["budget_grid"],
        trials=cfg.experiment["trials"],
        base_seed=cfg.experiment["base_seed"],
    )
    if verbosity:
        print(
            f"running {solver.algorithm_name} on {problem.kind}: "
            f"{len(plan.budget_grid)} budgets x {plan.trials} trials",
            file=sys.stderr,
        )
    results = run_trials(plan)
    if verbosity:
        degenerate = [T for T in plan.budget_grid if results[T][0].degenerate]
        if degenerate:
            print(
                f"note: budgets {degenerate} are too small for a full schedule; "
                "those trials return the start point",
                file=sys.stderr,
            )
    kind = DEFAULT_BOUND_KIND[solver.algorithm_name]
    reports = check_bound(kind, plan, results)

    rows = []
    for report in reports:
        per_budget = results[report.budget]
        rows.append(
            ResultRow(
                algorithm=solver.algorithm_name,
                T=report.budget,
                trials=plan.trials,
                mean_excess=report.empirical_mean,
                std_error=report.std_error,
                theoretical_rhs=report.theoretical_rhs,
                satisfied=report.satisfied,
                k_dagger=per_budget[0].epochs,
                gradients_consumed=per_budget[0].gradients,
            )
        )
    _write(csv_path, rows_to_csv(rows))

    epochs_path = cfg.output.get("epochs_csv")
    if epochs_path:
        lines = [EPOCH_CSV_HEADER]
        for T in plan.budget_grid:
            if results[T][0].epochs == 0:
                continue
            means, ses = epoch_excess_stats(results[T])
            for k, (m, s) in enumerate(zip(means, ses), start=1):
                lines.append(
                    f"{solver.algorithm_name},{T},{k},{format(m, '.17g')},{format(s, '.17g')}"
                )
        _write(epochs_path, "\n".join(lines) + "\n")

    svg_path = cfg.output.get("svg")
    if svg_path:
        _write(svg_path, plot_excess_vs_budget(rows))

    cert = problem.constants
    for row in rows:
        line = (
            f"algorithm={row.algorithm} T={row.T} trials={row.trials} "
            f"mean_excess={row.mean_excess:.6e} std_error={row.std_error:.6e} "
            f"theoretical_rhs={row.theoretical_rhs:.6e} satisfied={str(row.satisfied).lower()} "
            f"k_dagger={row.k_dagger} gradients_consumed={row.gradients_consumed}"
        )
        if solver.algorithm_name == "epoch_gd":
            # conservative variant: the same guarantee charged to a half budget
            half = max(row.T // 2, 1)
            line += f" theoretical_rhs_half_budget={epoch_gd_risk_bound(cert.G, cert.lam, half):.6e}"
        print(line)

    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_CHECK_FAILED


def _cmd_check_assumptions(args) -> int:
    cfg = load_config(args.config)
    problem = build_problem(cfg.problem)
    results = run_all_checks(problem, n=args.checks, seed=cfg.experiment["base_seed"])
    for res in results:
        print(res)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def _cmd_fit_rate(args) -> int:
    with open(args.csv, "r", encoding="utf-8") as fh:
        rows = csv_to_rows(fh.read())
    by_algo: dict[str, list] = {}
    for r in rows:
        by_algo.setdefault(r.algorithm, []).append(r)
    lines = []
    for algo, algo_rows in sorted(by_algo.items()):
        algo_rows.sort(key=lambda r: r.T)
        fit = fit_rate([r.T for r in algo_rows], [r.mean_excess for r in algo_rows])
        lines.append(
            f"algorithm={algo} slope={fit.slope:.6f} intercept={fit.intercept:.6f} "
            f"r_squared={fit.r_squared:.6f} n_points={len(fit.log_budgets)} n_dropped={fit.n_dropped}"
        )
    for line in lines:
        print(line)
    if args.out:
        _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _parse_epoch_csv(text: str):
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != EPOCH_CSV_HEADER:
        raise ValueError("missing or malformed epoch CSV header")
    series: dict[str, tuple] = {}
    for ln in lines[1:]:
        algo, T, k, mean, _se = ln.split(",")
        label = f"{algo} T={T}"
        ks, ms = series.setdefault(label, ([], []))
        ks.append(int(k))
        ms.append(float(mean))
    return [(label, ks, ms) for label, (ks, ms) in series.items()]


def _cmd_plot(args) -> int:
    with open(args.csv, "r", encoding="utf-8") as fh:
        rows = csv_to_rows(fh.read())
    _write(args.out, plot_excess_vs_budget(rows))
    if args.epochs_csv:
        if not args.epochs_out:
            raise ConfigError(["--epochs-out is required when --epochs-csv is given"])
        with open(args.epochs_csv, "r", encoding="utf-8") as fh:
            series = _parse_epoch_csv(fh.read())
        _write(args.epochs_out, plot_excess_vs_epoch(series))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check-assumptions":
            return _cmd_check_assumptions(args)
        if args.command == "fit-rate":
            return _cmd_fit_rate(args)
        if args.command == "plot":
            return _cmd_plot(args)
        raise AssertionError(args.command)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
