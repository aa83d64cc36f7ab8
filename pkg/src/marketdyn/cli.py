"""Command line interface.

Subcommands: fit, simulate, scenario, equilibria. Exit codes: 0 success,
2 configuration error, 3 data error, 4 I/O error. All file outputs are
deterministic: repeated invocations on the same inputs produce identical
bytes.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dataset as ds
from . import learn, simulate, svgchart
from .dynamics import DEGENERATE, classify_equilibria
from .errors import ConfigError, DataError
from .influence import (
    CONSTRAINT_MODES,
    CROSS_PAIRS_ONLY,
    FULL_SYMMETRY,
    UNCONSTRAINED,
    ConstraintSpec,
    InputVector,
    load_alpha,
    normalize_payoff,
    synthesize_payoff,
)

_MODE_FLAGS = {"full": FULL_SYMMETRY, "cross": CROSS_PAIRS_ONLY, "none": UNCONSTRAINED}


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _add_common_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="observed dataset CSV")
    parser.add_argument("--holdout", type=float, default=learn.DEFAULT_HOLDOUT,
                        help="validation fraction (chronological tail, default 0.2)")
    parser.add_argument("--dt", type=float, default=1.0, help="Euler step size in quarters")
    parser.add_argument("--normalize-inputs", action=argparse.BooleanOptionalAction,
                        default=True,
                        help="min-max scale inputs using training-window statistics")


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--r", type=int, default=1, help="integer search radius")
    parser.add_argument("--constraints", choices=sorted(_MODE_FLAGS), default="full",
                        help="constraint mode: full (swap symmetry plus zero mask), "
                             "cross (cross-entry equalities only), none")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel evaluation threads (result is identical)")
    parser.add_argument("--dump-candidates", default=None, metavar="PATH",
                        help="write per-candidate training errors as CSV")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketdyn",
        description="Replicator-dynamics market modeling with input-driven payoffs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="grid-search coefficients against observed shares")
    _add_common_data_flags(p_fit)
    _add_grid_flags(p_fit)
    p_fit.add_argument("--out", required=True, help="fit report JSON (embeds coefficients)")
    p_fit.add_argument("--auto-r", action="store_true",
                       help="escalate the radius until the training error beats the target")
    p_fit.add_argument("--error-target", type=float, default=learn.DEFAULT_ERROR_TARGET,
                       help="training-error target for --auto-r (default 4e-5)")
    p_fit.add_argument("--max-r", type=int, default=4, help="radius cap for --auto-r")
    p_fit.set_defaults(handler=_cmd_fit)

    p_sim = sub.add_parser("simulate", help="replay the observed inputs under given coefficients")
    _add_common_data_flags(p_sim)
    p_sim.add_argument("--alpha", required=True,
                       help="coefficient JSON (bare document or fit report)")
    p_sim.add_argument("--out", required=True, help="trajectory CSV")
    p_sim.add_argument("--svg", default=None, help="optional share chart")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_sc = sub.add_parser("scenario", help="counterfactual runs")
    _add_common_data_flags(p_sc)
    p_sc.add_argument("--kind", required=True,
                      choices=[simulate.CONSTANT_INPUTS, "constant-market",
                               simulate.CUSTOM_INPUTS])
    p_sc.add_argument("--alpha", default=None,
                      help="coefficient JSON (constant-inputs and custom-inputs kinds)")
    p_sc.add_argument("--inputs", default=None,
                      help="input series CSV for the custom-inputs kind")
    p_sc.add_argument("--out", required=True, help="trajectory CSV")
    p_sc.add_argument("--svg", default=None, help="optional share chart")
    p_sc.add_argument("--alpha-out", default=None,
                      help="fit report JSON for the constant-market kind")
    _add_grid_flags(p_sc)
    p_sc.set_defaults(handler=_cmd_scenario)

    p_eq = sub.add_parser("equilibria", help="equilibrium structure at a frozen input vector")
    p_eq.add_argument("--alpha", required=True, help="coefficient JSON")
    p_eq.add_argument("--y", required=True,
                      help="comma-separated input values, e.g. 0.5,0.2,0.3,0.7")
    p_eq.set_defaults(handler=_cmd_equilibria)

    return parser


def _validate_common(args) -> None:
    if not 0.0 < args.holdout < 1.0:
        raise ConfigError(f"holdout must be in (0, 1), got {args.holdout}")
    if not args.dt > 0.0:
        raise ConfigError(f"dt must be positive, got {args.dt}")


def _validate_grid(args) -> None:
    if args.r < 0:
        raise ConfigError(f"r must be >= 0, got {args.r}")
    if args.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {args.workers}")


def _load_and_scale(args) -> tuple[ds.MarketDataset, ds.MarketDataset, int]:
    """Load the dataset, split, and scale inputs off the training window."""
    raw = ds.load_csv(args.data)
    (_, train_len), _ = learn.split(raw, args.holdout)
    if args.normalize_inputs:
        scaled, _ = ds.normalize_inputs(raw, (0, train_len))
    else:
        scaled = raw
    return raw, scaled, train_len


def _constraints_for(dataset: ds.MarketDataset, mode_flag: str) -> ConstraintSpec:
    mode = _MODE_FLAGS[mode_flag]
    if mode == UNCONSTRAINED:
        n_y = dataset.n_y
        identity = tuple(range(n_y))
        return ConstraintSpec(mode=mode, swap=tuple(range(dataset.n)),
                              input_pairing=identity, ownership=dataset.ownership)
    if dataset.n != 2:
        raise ConfigError(
            f"constraint mode {mode!r} needs a 2-strategy dataset, got n={dataset.n}"
        )
    spec = ConstraintSpec.standard_duopoly(dataset.n_y, mode=mode)
    if spec.ownership != dataset.ownership:
        spec = ConstraintSpec(mode=mode, swap=spec.swap,
                              input_pairing=spec.input_pairing,
                              ownership=dataset.ownership)
    return spec


def _write_chart(path, trajectory: simulate.Trajectory, train_len: int | None) -> None:
    times = [t * trajectory.dt for t in trajectory.times]
    series = []
    n = trajectory.states[0].n
    for i in range(n):
        series.append((f"share_{i + 1}", times, list(trajectory.share_series(i))))
    boundary = None
    if train_len is not None and train_len < len(trajectory):
        boundary = (train_len - 0.5) * trajectory.dt
    markup = svgchart.line_chart(
        series, title="market shares", x_label="t (quarters)", y_label="share",
        boundary_x=boundary,
    )
    svgchart.save_chart(markup, path)


def _print_report(report: learn.FitReport) -> None:
    print(f"train window: {report.train_len} samples, "
          f"validation window: {report.validation_len} samples")
    print(f"candidates evaluated: {report.candidates_evaluated}")
    print(f"best free values: {list(report.best_values)}")
    print(f"tie class size: {report.tie_class_size}")
    print(f"train error: {_fmt(report.train_error)}")
    print(f"validation error: {_fmt(report.validation_error)}")
    print(f"elapsed: {report.elapsed_seconds:.3f}s", file=sys.stderr)


def _cmd_fit(args) -> int:
    _validate_common(args)
    _validate_grid(args)
    if args.auto_r and args.max_r < args.r:
        raise ConfigError(f"max-r {args.max_r} is below r {args.r}")
    _, scaled, _ = _load_and_scale(args)
    constraints = _constraints_for(scaled, args.constraints)
    if args.auto_r:
        report = learn.fit_escalating(
            scaled, constraints, args.holdout,
            error_target=args.error_target, start_radius=max(args.r, 0),
            max_radius=args.max_r, dt=args.dt, workers=args.workers,
        )
    else:
        report = learn.fit(
            scaled, learn.GridSpec(args.r), constraints, args.holdout,
            dt=args.dt, workers=args.workers, error_dump=args.dump_candidates,
        )
    learn.save_report(report, scaled.ownership, args.out)
    _print_report(report)
    print(f"report written to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    _validate_common(args)
    alpha, _ = load_alpha(args.alpha)
    _, scaled, train_len = _load_and_scale(args)
    if alpha.n_y != scaled.n_y:
        raise ConfigError(
            f"coefficients expect {alpha.n_y} inputs, dataset has {scaled.n_y}"
        )
    trajectory = simulate.run(simulate.observed_scenario(scaled, dt=args.dt), alpha)
    simulate.write_trajectory_csv(trajectory, args.out)
    if args.svg:
        _write_chart(args.svg, trajectory, train_len)
    final = trajectory.final.shares
    print("final shares: " + ", ".join(_fmt(v) for v in final))
    print(f"trajectory written to {args.out}")
    return 0


def _cmd_scenario(args) -> int:
    _validate_common(args)
    _validate_grid(args)
    raw, scaled, train_len = _load_and_scale(args)

    if args.kind == "constant-market":
        if args.alpha_out is None:
            raise ConfigError("constant-market needs --alpha-out for the fitted coefficients")
        constraints = _constraints_for(scaled, args.constraints)
        report = learn.fit_constant_market(
            scaled, learn.GridSpec(args.r), constraints, args.holdout,
            dt=args.dt, workers=args.workers, error_dump=args.dump_candidates,
        )
        learn.save_report(report, scaled.ownership, args.alpha_out)
        trajectory = simulate.run(
            simulate.observed_scenario(scaled, dt=args.dt), report.best_alpha
        )
        _print_report(report)
        print(f"report written to {args.alpha_out}")
    else:
        if args.alpha is None:
            raise ConfigError(f"{args.kind} needs --alpha")
        alpha, _ = load_alpha(args.alpha)
        if alpha.n_y != scaled.n_y:
            raise ConfigError(
                f"coefficients expect {alpha.n_y} inputs, dataset has {scaled.n_y}"
            )
        if args.kind == simulate.CONSTANT_INPUTS:
            spec = simulate.constant_scenario(scaled, dt=args.dt)
        else:
            if args.inputs is None:
                raise ConfigError("custom-inputs needs --inputs")
            table = ds.load_input_table(args.inputs)
            if table.shape[1] != scaled.n_y:
                raise DataError(
                    f"custom input series has {table.shape[1]} inputs, expected {scaled.n_y}"
                )
            if args.normalize_inputs:
                _, record = ds.normalize_inputs(raw, (0, train_len))
                table = record.apply(table)
            vectors = [InputVector(values=row, ownership=scaled.ownership) for row in table]
            spec = simulate.custom_scenario(vectors, scaled.shares[0], dt=args.dt)
        trajectory = simulate.run(spec, alpha)

    simulate.write_trajectory_csv(trajectory, args.out)
    if args.svg:
        _write_chart(args.svg, trajectory, train_len if args.kind != simulate.CONSTANT_INPUTS else None)
    final = trajectory.final.shares
    print("final shares: " + ", ".join(_fmt(v) for v in final))
    print(f"trajectory written to {args.out}")
    return 0


def _cmd_equilibria(args) -> int:
    alpha, ownership = load_alpha(args.alpha)
    try:
        values = [float(v) for v in args.y.split(",")]
    except ValueError as exc:
        raise ConfigError(f"could not parse --y: {exc}") from exc
    if len(values) != alpha.n_y:
        raise ConfigError(f"--y must supply {alpha.n_y} values, got {len(values)}")
    y = InputVector(values=np.array(values), ownership=ownership)
    payoff = normalize_payoff(synthesize_payoff(alpha, y))

    print("normalized payoff matrix:")
    for row in payoff.entries:
        print("  " + "  ".join(_fmt(v) for v in row))

    if alpha.n != 2:
        print("equilibrium analysis is only available for 2 strategies")
        return 0

    eq = classify_equilibria(payoff)
    for vertex in eq.vertices:
        print("vertex equilibrium: (" + ", ".join(_fmt(v) for v in vertex.shares) + ")")
    if bool(np.all(payoff.entries == 0.5)):
        print("no interior equilibrium; all states stationary")
    elif eq.mixed is None:
        print("no interior equilibrium")
    else:
        point = ", ".join(_fmt(v) for v in eq.mixed.shares)
        print(f"mixed equilibrium: ({point}) [{eq.mixed_stability}]")
        if eq.mixed_stability != DEGENERATE:
            print("target equilibrium: (" + point + ")")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
