"""Coefficient learning by exhaustive integer grid search.

Every candidate assigns an integer in [-r, r] to each free coefficient
position, the implied coefficient matrix drives a trajectory over the
training window (seeded once at the first observed shares), and the
candidate is scored by the mean squared error of strategy 1's simulated
share against the observed series. Candidates are enumerated in
lexicographic order of their free-value tuples and ties are broken toward
the lexicographically smallest tuple, so the result is independent of
evaluation order and of any internal parallelism.

The candidate evaluations are pure and independent; the engine batches them
into vectorized chunks whose per-candidate arithmetic is identical,
operation for operation, to the scalar simulation path.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import MarketDataset
from .errors import ConfigError, DataError
from .influence import (
    DEGENERATE_RANGE,
    ConstraintSpec,
    InfluenceMatrix,
    Position,
    alpha_to_dict,
    build_constraints,
    free_orbits,
)

REPORT_FORMAT = "fit-report/1"
DEFAULT_HOLDOUT = 0.2
DEFAULT_ERROR_TARGET = 4e-5
MAX_CANDIDATES = 100_000_000
_DEFAULT_CHUNK = 16384


@dataclass(frozen=True)
class GridSpec:
    """Integer search lattice: every free coefficient ranges over the
    integers in [-radius, radius] with step 1."""

    radius: int

    def __post_init__(self):
        if int(self.radius) != self.radius or self.radius < 0:
            raise ValueError(f"grid radius must be a non-negative integer, got {self.radius}")
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    def candidate_count(self, free_count: int) -> int:
        if free_count < 0:
            raise ValueError("free parameter count cannot be negative")
        return self.side**free_count


@dataclass(frozen=True)
class FitReport:
    """Outcome of one grid search."""

    best_alpha: InfluenceMatrix
    constraint_mode: str
    free_layout: tuple[Position, ...]
    best_values: tuple[int, ...]
    train_error: float
    validation_error: float
    tie_class_size: int
    candidates_evaluated: int
    radius: int
    train_len: int
    validation_len: int
    elapsed_seconds: float


def paired_free_count(n: int, n_y: int) -> int:
    """Parameter count when the swap symmetry alone halves the full
    coefficient grid: n_y * n^2 / 2."""
    return n_y * n * n // 2


def search_space_size(radius: int, free_count: int) -> int:
    """Number of integer lattice points: (2 r + 1) ** free_count."""
    return GridSpec(radius).candidate_count(free_count)


def mse(predicted, observed) -> float:
    """Mean squared error over aligned series of length >= 1."""
    p = np.asarray(predicted, dtype=float)
    o = np.asarray(observed, dtype=float)
    if p.ndim != 1 or p.shape != o.shape:
        raise ValueError(f"series must be 1-d and aligned, got {p.shape} vs {o.shape}")
    if p.size < 1:
        raise ValueError("at least one sample is required")
    acc = 0.0
    for k in range(p.size):
        d = p[k] - o[k]
        acc += d * d
    return acc / p.size


def split(dataset: MarketDataset, holdout_fraction: float) -> tuple[tuple[int, int], tuple[int, int]]:
    """Chronological train/validation windows as half-open index ranges.

    The validation window is the last ceil(fraction * length) samples.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError(f"holdout fraction must be in (0, 1), got {holdout_fraction}")
    length = len(dataset)
    if length < 5:
        raise DataError(f"dataset too short to split: length >= 5 required, got {length}")
    validation_len = math.ceil(holdout_fraction * length)
    train_len = length - validation_len
    if train_len < 2:
        raise DataError(
            f"holdout fraction {holdout_fraction} leaves only {train_len} training samples"
        )
    return (0, train_len), (train_len, length)


# ---------------------------------------------------------------------------
# chunked candidate evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Problem:
    n: int
    n_y: int
    orbits: tuple[tuple[Position, ...], ...]
    layout: tuple[Position, ...]
    zero_mask: frozenset
    symmetry_pairs: frozenset
    inputs: np.ndarray      # (L, n_y)
    target: np.ndarray      # (L,) strategy-1 share to match
    x0: np.ndarray          # (n,)
    train_len: int
    total_len: int
    dt: float


def _build_problem(
    dataset: MarketDataset,
    constraints: ConstraintSpec,
    holdout_fraction: float,
    target_series: Optional[np.ndarray],
    dt: float,
) -> _Problem:
    if constraints.ownership != dataset.ownership:
        raise ConfigError(
            f"constraint ownership {constraints.ownership} does not match "
            f"dataset ownership {dataset.ownership}"
        )
    (_, train_len), (_, total_len) = split(dataset, holdout_fraction)
    zero_mask, pairs = build_constraints(constraints, dataset.n, dataset.n_y)
    orbits = free_orbits(dataset.n, dataset.n_y, zero_mask, pairs)
    if target_series is None:
        target = dataset.share_series(0)
    else:
        target = np.asarray(target_series, dtype=float)
        if target.shape != (len(dataset),):
            raise ValueError(
                f"target series must have length {len(dataset)}, got shape {target.shape}"
            )
    return _Problem(
        n=dataset.n,
        n_y=dataset.n_y,
        orbits=orbits,
        layout=tuple(orbit[0] for orbit in orbits),
        zero_mask=zero_mask,
        symmetry_pairs=pairs,
        inputs=np.array(dataset.inputs, dtype=float),
        target=target,
        x0=np.array(dataset.shares[0].shares, dtype=float),
        train_len=train_len,
        total_len=total_len,
        dt=float(dt),
    )


def _decode_values(lo: int, hi: int, radius: int, free_count: int) -> np.ndarray:
    """Free-value rows for candidate ids [lo, hi); id order is exactly the
    lexicographic order of the value tuples."""
    base = 2 * radius + 1
    rem = np.arange(lo, hi, dtype=np.int64)
    values = np.empty((hi - lo, free_count), dtype=np.int64)
    for p in range(free_count - 1, -1, -1):
        rem, digit = np.divmod(rem, base)
        values[:, p] = digit - radius
    return values


def _materialize_chunk(problem: _Problem, values: np.ndarray) -> np.ndarray:
    count = values.shape[0]
    alpha = np.zeros((count, problem.n * problem.n, problem.n_y))
    for f, orbit in enumerate(problem.orbits):
        column = values[:, f].astype(np.float64)
        for k, m in orbit:
            alpha[:, k, m] = column
    return alpha


def _simulate_chunk(
    problem: _Problem, alpha: np.ndarray, simulate_validation: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Trajectory-matching errors for a batch of candidates.

    Mirrors the scalar path (synthesize_payoff, normalize_payoff,
    replicator_rates, advance_shares) with identical per-element operation
    order, so batch and scalar results agree bit for bit.
    """
    n, n_y = problem.n, problem.n_y
    inputs, target, dt = problem.inputs, problem.target, problem.dt
    count = alpha.shape[0]
    stop = problem.total_len if simulate_validation else problem.train_len

    x = np.empty((count, n))
    x[:] = problem.x0
    d0 = x[:, 0] - target[0]
    err_train = d0 * d0
    err_val = np.zeros(count)

    for t in range(1, stop):
        y = inputs[t - 1]
        raw = alpha[:, :, 0] * y[0]
        for m in range(1, n_y):
            raw += alpha[:, :, m] * y[m]

        lo = raw.min(axis=1)
        hi = raw.max(axis=1)
        rng = hi - lo
        degenerate = rng < DEGENERATE_RANGE
        denom = np.where(degenerate, 1.0, rng)
        payoff = np.where(degenerate[:, None], 0.5, (raw - lo[:, None]) / denom[:, None])

        fitness = np.empty((count, n))
        for i in range(n):
            acc = payoff[:, i * n] * x[:, 0]
            for j in range(1, n):
                acc += payoff[:, i * n + j] * x[:, j]
            fitness[:, i] = acc
        mean = x[:, 0] * fitness[:, 0]
        for i in range(1, n):
            mean += x[:, i] * fitness[:, i]
        rates = x * (fitness - mean[:, None])

        nxt = x + dt * rates
        np.clip(nxt, 0.0, 1.0, out=nxt)
        total = nxt[:, 0].copy()
        for i in range(1, n):
            total += nxt[:, i]
        x = nxt / total[:, None]

        d = x[:, 0] - target[t]
        if t < problem.train_len:
            err_train += d * d
        else:
            err_val += d * d

    err_train /= problem.train_len
    validation_len = problem.total_len - problem.train_len
    if simulate_validation and validation_len > 0:
        err_val /= validation_len
    return err_train, err_val


def _chunk_ranges(total: int, chunk_size: int):
    for lo in range(0, total, chunk_size):
        yield lo, min(lo + chunk_size, total)


def _evaluate_chunks(problem, grid, total, chunk_size, workers, simulate_validation):
    """Yield (lo, hi, err_train, err_val) in candidate order."""
    free_count = len(problem.orbits)

    def job(bounds):
        lo, hi = bounds
        values = _decode_values(lo, hi, grid.radius, free_count)
        alpha = _materialize_chunk(problem, values)
        err_train, err_val = _simulate_chunk(problem, alpha, simulate_validation)
        return lo, hi, values, err_train, err_val

    bounds = list(_chunk_ranges(total, chunk_size))
    if workers <= 1:
        for b in bounds:
            yield job(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map preserves submission order, so consumers see candidates in order
            yield from pool.map(job, bounds)


def train_error_table(
    dataset: MarketDataset,
    grid: GridSpec,
    constraints: ConstraintSpec,
    holdout_fraction: float = DEFAULT_HOLDOUT,
    *,
    target_series=None,
    dt: float = 1.0,
    workers: int = 1,
    chunk_size: int = _DEFAULT_CHUNK,
) -> np.ndarray:
    """Training error of every candidate, indexed by lexicographic rank of
    its free-value tuple. Intended for audits and small radii; memory grows
    with the full candidate count."""
    problem = _build_problem(dataset, constraints, holdout_fraction, target_series, dt)
    total = grid.candidate_count(len(problem.orbits))
    if total > MAX_CANDIDATES:
        raise ConfigError(
            f"search space of {total} candidates exceeds the supported maximum {MAX_CANDIDATES}"
        )
    table = np.empty(total)
    for lo, hi, _, err_train, _ in _evaluate_chunks(
        problem, grid, total, chunk_size, workers, simulate_validation=False
    ):
        table[lo:hi] = err_train
    return table


def _fit_common(
    dataset: MarketDataset,
    grid: GridSpec,
    constraints: ConstraintSpec,
    holdout_fraction: float,
    target_series,
    dt: float,
    workers: int,
    chunk_size: int,
    error_dump,
) -> FitReport:
    started = time.perf_counter()
    problem = _build_problem(dataset, constraints, holdout_fraction, target_series, dt)
    free_count = len(problem.orbits)
    total = grid.candidate_count(free_count)
    if total > MAX_CANDIDATES:
        raise ConfigError(
            f"search space of {total} candidates exceeds the supported maximum {MAX_CANDIDATES}"
        )

    dump_file = None
    if error_dump is not None:
        dump_file = open(error_dump, "w", encoding="utf-8", newline="\n")
        header = ["candidate_index"]
        header += [f"param_{f + 1}" for f in range(free_count)]
        header += ["train_error"]
        dump_file.write(",".join(header) + "\n")

    best_err = math.inf
    best_index = -1
    best_values: Optional[tuple[int, ...]] = None
    tie_count = 0
    try:
        for lo, hi, values, err_train, _ in _evaluate_chunks(
            problem, grid, total, chunk_size, workers, simulate_validation=False
        ):
            if dump_file is not None:
                for row in range(hi - lo):
                    cells = [str(lo + row)]
                    cells += [str(int(v)) for v in values[row]]
                    cells += [format(float(err_train[row]), ".17g")]
                    dump_file.write(",".join(cells) + "\n")
            chunk_best = int(np.argmin(err_train)) if hi > lo else -1
            if chunk_best >= 0:
                chunk_err = float(err_train[chunk_best])
                chunk_ties = int(np.count_nonzero(err_train == chunk_err))
                if chunk_err < best_err:
                    best_err = chunk_err
                    best_index = lo + chunk_best
                    best_values = tuple(int(v) for v in values[chunk_best])
                    tie_count = chunk_ties
                elif chunk_err == best_err:
                    tie_count += chunk_ties
    finally:
        if dump_file is not None:
            dump_file.close()

    if best_values is None:
        raise ConfigError("empty search space")

    best_alpha = InfluenceMatrix.from_free_values(
        problem.n, problem.n_y, problem.zero_mask, problem.symmetry_pairs, best_values
    )
    # Winner-only pass through the validation window.
    winner_batch = _materialize_chunk(
        problem, np.array([best_values], dtype=np.int64)
    )
    _, err_val = _simulate_chunk(problem, winner_batch, simulate_validation=True)

    return FitReport(
        best_alpha=best_alpha,
        constraint_mode=constraints.mode,
        free_layout=problem.layout,
        best_values=best_values,
        train_error=best_err,
        validation_error=float(err_val[0]),
        tie_class_size=tie_count,
        candidates_evaluated=total,
        radius=grid.radius,
        train_len=problem.train_len,
        validation_len=problem.total_len - problem.train_len,
        elapsed_seconds=time.perf_counter() - started,
    )


def fit(
    dataset: MarketDataset,
    grid: GridSpec,
    constraints: ConstraintSpec,
    holdout_fraction: float = DEFAULT_HOLDOUT,
    *,
    dt: float = 1.0,
    workers: int = 1,
    chunk_size: int = _DEFAULT_CHUNK,
    error_dump=None,
) -> FitReport:
    """Exhaustive grid search against the observed share series.

    The dataset's inputs are used exactly as stored; rescale them first
    (see dataset.normalize_inputs) when the coefficients should live on
    normalized inputs. The winner minimizes training error; exact ties go
    to the lexicographically smallest free-value tuple, and tie_class_size
    reports how many candidates achieved the minimum. validation_error
    continues the winning simulation through the holdout window.
    """
    return _fit_common(
        dataset, grid, constraints, holdout_fraction,
        target_series=None, dt=dt, workers=workers,
        chunk_size=chunk_size, error_dump=error_dump,
    )


def fit_constant_market(
    dataset: MarketDataset,
    grid: GridSpec,
    constraints: ConstraintSpec,
    holdout_fraction: float = DEFAULT_HOLDOUT,
    *,
    dt: float = 1.0,
    workers: int = 1,
    chunk_size: int = _DEFAULT_CHUNK,
    error_dump=None,
) -> FitReport:
    """Same search, but the target series is a market frozen at the first
    observed shares while the real inputs keep driving the payoffs. The
    resulting coefficients describe a hypothetical market that ignores the
    observed input trends."""
    target = np.full(len(dataset), float(dataset.shares[0].shares[0]))
    return _fit_common(
        dataset, grid, constraints, holdout_fraction,
        target_series=target, dt=dt, workers=workers,
        chunk_size=chunk_size, error_dump=error_dump,
    )


def fit_escalating(
    dataset: MarketDataset,
    constraints: ConstraintSpec,
    holdout_fraction: float = DEFAULT_HOLDOUT,
    *,
    error_target: float = DEFAULT_ERROR_TARGET,
    start_radius: int = 1,
    max_radius: int = 4,
    dt: float = 1.0,
    workers: int = 1,
    chunk_size: int = _DEFAULT_CHUNK,
) -> FitReport:
    """Grow the search radius until the training error beats the target.

    Returns the first satisfying report, or the max_radius report when the
    target is never reached."""
    if not error_target > 0.0:
        raise ConfigError(f"error target must be positive, got {error_target}")
    if start_radius < 0 or max_radius < start_radius:
        raise ConfigError(
            f"invalid radius range [{start_radius}, {max_radius}]"
        )
    report = None
    for radius in range(start_radius, max_radius + 1):
        report = fit(
            dataset, GridSpec(radius), constraints, holdout_fraction,
            dt=dt, workers=workers, chunk_size=chunk_size,
        )
        if report.train_error < error_target:
            return report
    assert report is not None
    return report


def report_to_dict(report: FitReport, ownership: tuple[int, ...]) -> dict:
    """JSON-ready fit report embedding the coefficient document.

    Wall-clock time is deliberately left out so repeated runs serialize to
    identical bytes.
    """
    return {
        "format": REPORT_FORMAT,
        "alpha": alpha_to_dict(report.best_alpha, ownership),
        "constraint_mode": report.constraint_mode,
        "free_layout": [list(p) for p in report.free_layout],
        "best_values": [int(v) for v in report.best_values],
        "train_error": float(report.train_error),
        "validation_error": float(report.validation_error),
        "tie_class_size": int(report.tie_class_size),
        "candidates_evaluated": int(report.candidates_evaluated),
        "radius": int(report.radius),
        "train_len": int(report.train_len),
        "validation_len": int(report.validation_len),
    }


def save_report(report: FitReport, ownership: tuple[int, ...], path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report, ownership), indent=2) + "\n",
        encoding="utf-8",
    )
