"""Command-line front end.

Exit codes: 0 success, 1 a ``--check`` gate failed, 2 usage error.  Output
files are written atomically and only after every flag has been validated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Any, Sequence

from . import acceptance
from .approachability import SOURCES, SequenceSource, run_cesaro_experiment
from .bernoulli import JEFFREYS, LAPLACE, table2_report
from .conformal import SCENARIOS, table4_report
from .decision_core import DomainError, FiniteParamSpace
from .eprocess import table3_report
from .gaussian import GaussianModel, separation_json, separation_report
from .harness import ExperimentConfig, Table, jsonable
from .matrix import compare_with_reference, derive_matrix, render_matrix
from .riskset import PredictiveRule, trace_lower_boundary


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # raise instead of exiting, so main owns the exit code
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, fmt_default: str = "csv") -> None:
    p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    p.add_argument("--reps", type=int, default=None, help="Monte-Carlo replications B")
    p.add_argument("--format", choices=("csv", "json", "text"), default=fmt_default)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--check", action="store_true", help="also run the acceptance gates for this command")
    p.add_argument("--config", default=None, help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="admissibility", description="Admissibility laboratory experiments and checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("riskset", help="two-point risk-set boundary trace")
    _common(p)
    p.add_argument("--theta1", type=float, default=0.3)
    p.add_argument("--theta2", type=float, default=0.7)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--grid", type=int, default=1001)

    p = sub.add_parser("bernoulli", help="Bayes vs plug-in log loss (Table 2)")
    _common(p)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--clamp-eps", type=float, default=None)
    p.add_argument("--n-list", default=None, help="comma-separated sample sizes")

    p = sub.add_parser("eprocess", help="e-process vs naive peeking type-I error (Table 3)")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--looks", default=None, help="comma-separated look times")
    p.add_argument("--monitor-looks-only", action="store_true", default=None)

    p = sub.add_parser("conformal", help="split conformal under covariate shift (Table 4)")
    _common(p)
    p.add_argument("--scenario", choices=("A", "B", "C", "all"), default="all")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n-cal", type=int, default=None)
    p.add_argument("--n-test", type=int, default=None)

    p = sub.add_parser("defensive", help="defensive forecaster calibration-error curves")
    _common(p)
    p.add_argument("--source", choices=SOURCES + ("all",), default="all")
    p.add_argument("--horizon", dest="rounds", type=int, default=10_000)
    p.add_argument("--every", type=int, default=1, help="emit every k-th round")

    p = sub.add_parser("gaussian", help="Gaussian separation report")
    _common(p, fmt_default="json")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu0", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10)

    p = sub.add_parser("matrix", help="procedures-by-criteria classification")
    _common(p, fmt_default="text")

    p = sub.add_parser("tables", help="reproduce a numbered table")
    _common(p)
    p.add_argument("--which", choices=("2", "3", "4"), required=True)
    p.add_argument("--scenario", choices=("A", "B", "C", "all"), default="all")

    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    _common(p, fmt_default="text")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return parser


def _int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"{flag} expects integers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag} must not be empty")
    return vals


def _config(args: argparse.Namespace, defaults: dict[str, Any]) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    base = ExperimentConfig()
    values: dict[str, Any] = {}
    if args.config:
        try:
            base = ExperimentConfig.from_file(args.config)
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"bad config file: {exc}") from None
        with open(args.config) as fh:
            from_file = {ln.split("=", 1)[0].strip() for ln in fh if "=" in ln.split("#", 1)[0]}
    else:
        from_file = set()
    for key, val in defaults.items():
        if key not in from_file:
            values[key] = val
    flag_map = {
        "seed": "seed", "reps": "reps", "theta": "theta", "clamp_eps": "clamp_eps", "alpha": "alpha",
        "horizon": "horizon", "monitor_looks_only": "monitor_looks_only", "n_cal": "n_cal", "n_test": "n_test",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    if getattr(args, "n_list", None):
        values["n_list"] = _int_list(args.n_list, "--n-list")
    if getattr(args, "looks", None):
        values["looks"] = _int_list(args.looks, "--looks")
    try:
        cfg = base.replace(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if not 0.0 < cfg.alpha < 1.0:
        raise UsageError(f"--alpha must lie in (0, 1), got {cfg.alpha}")
    if not 0.0 < cfg.theta < 1.0:
        raise UsageError(f"--theta must lie in (0, 1), got {cfg.theta}")
    if not 0.0 < cfg.clamp_eps < 0.5:
        raise UsageError(f"--clamp-eps must lie in (0, 0.5), got {cfg.clamp_eps}")
    if cfg.horizon < 1:
        raise UsageError("--horizon must be >= 1")
    if any(n < 1 for n in cfg.n_list):
        raise UsageError("--n-list entries must be >= 1")
    if any(b <= a for a, b in zip(cfg.looks, cfg.looks[1:])) or cfg.looks[0] < 1 or cfg.looks[-1] > cfg.horizon:
        raise UsageError("--looks must be increasing, positive and within the horizon")
    if cfg.n_cal < 1 or cfg.n_test < 1:
        raise UsageError("--n-cal and --n-test must be >= 1")


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _scenarios(choice: str) -> tuple[str, ...]:
    return tuple(SCENARIOS) if choice == "all" else (choice,)


def _run_checks(numbers: Sequence[int], cfg: ExperimentConfig) -> bool:
    results = acceptance.run_criteria(numbers, cfg)
    sys.stdout.write(acceptance.report(results))
    for r in results:
        sys.stderr.write(f"[{r.number:>2}] {r.seconds:.2f}s\n")
    return all(r.passed for r in results)


# --- subcommands ----------------------------------------------------------------

def _cmd_riskset(args, cfg):
    if args.grid < 3:
        raise UsageError("--grid must be at least 3")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    try:
        space = FiniteParamSpace((args.theta1, args.theta2))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    def work():
        trace = trace_lower_boundary(space, args.n, args.grid)
        rules = [JEFFREYS.rule(args.n), LAPLACE.rule(args.n), PredictiveRule.plugin(args.n)]
        rules = [PredictiveRule(r.n, r.probs, name) for r, name in zip(rules, ("P1", "laplace", "plug-in"))]
        table = trace.to_table(rules)
        table.meta["seed"] = cfg.seed
        return table.render(args.format), [9]
    return work


def _cmd_bernoulli(args, cfg):
    return lambda: (table2_report(cfg).render(args.format), [1, 2, 3, 4])


def _cmd_eprocess(args, cfg):
    return lambda: (table3_report(cfg).render(args.format), [5])


def _cmd_conformal(args, cfg):
    scen = _scenarios(args.scenario)
    return lambda: (table4_report(cfg, scen).render(args.format), [6, 7])


def _cmd_defensive(args, cfg):
    if args.rounds < 1 or args.every < 1:
        raise UsageError("--horizon and --every must be >= 1")
    kinds = SOURCES if args.source == "all" else (args.source,)

    def work():
        table = Table(["source", "t", "calibration_error"],
                      meta={"horizon": args.rounds, "seed": cfg.seed, "every": args.every})
        for kind in kinds:
            run = run_cesaro_experiment(SequenceSource(kind, seed=cfg.seed), args.rounds)
            for t, err in run.to_table(args.every).rows:
                table.rows.append([kind, t, err])
        return table.render(args.format), [8]
    return work


def _cmd_gaussian(args, cfg):
    try:
        model = GaussianModel(args.sigma, args.mu0, args.tau)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 1:
        raise UsageError("--n must be >= 1")

    def work():
        checks = separation_report(model, cfg, n=args.n)
        payload = {"config": jsonable(cfg.as_dict()), "model": jsonable(model), "n": args.n,
                   "checks": jsonable(separation_json(checks))}
        if args.format == "json":
            text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        else:
            table = Table(["check", "key", "value"], meta={**cfg.as_dict(), "n": args.n})
            for c in checks:
                table.rows.append([c.name, "passed", c.passed])
                for k, v in c.values.items():
                    table.rows.append([c.name, k, v])
            text = table.render(args.format)
        return text, [10]
    return work


def _cmd_matrix(args, cfg):
    def work():
        cells = derive_matrix(cfg)
        text = render_matrix(cells, args.format)
        bad = compare_with_reference(cells)
        return text, bad
    return work


def _cmd_tables(args, cfg):
    if args.which == "2":
        return lambda: (table2_report(cfg).render(args.format), [1, 2])
    if args.which == "3":
        return lambda: (table3_report(cfg).render(args.format), [5])
    scen = _scenarios(args.scenario)
    return lambda: (table4_report(cfg, scen).render(args.format), [6])


def _cmd_acceptance(args, cfg):
    numbers = sorted(acceptance.CRITERIA)
    if args.only:
        numbers = list(_int_list(args.only, "--only"))
        unknown = [k for k in numbers if k not in acceptance.CRITERIA]
        if unknown:
            raise UsageError(f"unknown criteria: {unknown}")

    def work():
        results = acceptance.run_criteria(numbers, cfg)
        for r in results:
            sys.stderr.write(f"[{r.number:>2}] {r.seconds:.2f}s\n")
        if args.format == "json":
            text = json.dumps(jsonable([{"number": r.number, "name": r.name, "passed": r.passed,
                                         "measured": r.measured, "tolerance": r.tolerance} for r in results]),
                              indent=2, sort_keys=True) + "\n"
        else:
            text = acceptance.report(results)
        return text, all(r.passed for r in results)
    return work


COMMANDS = {
    "riskset": (_cmd_riskset, {}),
    "bernoulli": (_cmd_bernoulli, {}),
    "eprocess": (_cmd_eprocess, {"theta": 0.5}),
    "conformal": (_cmd_conformal, {"alpha": 0.1}),
    "defensive": (_cmd_defensive, {}),
    "gaussian": (_cmd_gaussian, {}),
    "matrix": (_cmd_matrix, {}),
    "tables": (_cmd_tables, {}),
    "acceptance": (_cmd_acceptance, {}),
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        handler, defaults = COMMANDS[args.command]
        if args.command == "tables" and args.which == "4":
            defaults = {"alpha": 0.1}
        elif args.command == "tables" and args.which == "3":
            defaults = {"theta": 0.5}
        cfg = _config(args, defaults)
        work = handler(args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2

    text, gate = work()
    _write(text, args.out)
    if args.command == "matrix":
        if args.check:
            for d in gate:
                sys.stderr.write(f"disagreement: {d.procedure}/{d.criterion} derived={d.derived} "
                                 f"reference={d.reference}\n")
            return 1 if gate else 0
        return 0
    if args.command == "acceptance":
        return 0 if gate else 1
    if args.check:
        return 0 if _run_checks(gate, cfg) else 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
