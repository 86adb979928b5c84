"""Replication engine: reproducible streams, sweeps, and aggregation.

Each replication r of a sweep cell gets its own counter-based stream
derived from (seed, global replication index), so results are independent
of worker count and scheduling.  Aggregation runs over arrays assembled in
replication order, making sweep output byte-identical across worker
layouts.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import math
import multiprocessing
import os
import tempfile

import numpy as np

from .densities import JumpDensitySpec, get_density
from .functionals import EstimatorTriple, estimate
from .path import TruncationError, TruncationPolicy, sample_path

SWEEP_CSV_FIELDS = ("gamma", "alpha", "B_hat", "B_se", "M_hat", "M_se",
                    "E_hat", "reps", "trunc_failures", "seed")

_MAX_CHUNK = 50_000
_UINT64_MAX = 2 ** 64


class CellError(RuntimeError):
    """Every replication of a sweep cell failed."""


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    """One sweep: gamma grid x alpha grid at fixed density and seed."""

    gamma_grid: tuple
    alphas: tuple
    reps: int
    seed: int
    density_name: str = "gaussian"
    trunc: TruncationPolicy = TruncationPolicy()
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.gamma_grid:
            raise ValueError("gamma_grid must be non-empty")
        if not self.alphas:
            raise ValueError("alphas must be non-empty")
        for g in self.gamma_grid:
            if not (g > 0.0 and math.isfinite(g)):
                raise ValueError(f"gamma values must be finite and > 0, got {g}")
        for a in self.alphas:
            if not (0.0 <= a <= 1.0):
                raise ValueError(f"alpha values must lie in [0, 1], got {a}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not (0 <= self.seed < _UINT64_MAX):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        get_density(self.density_name)


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """One (gamma, alpha) cell: second-moment estimates with standard errors.

    B_hat is alpha-independent (shared zeta sample) and repeated per row;
    E_hat = B_hat / M_hat.  reps counts attempted replications,
    trunc_failures the ones excluded for hitting the event cap.
    """

    gamma: float
    alpha: float
    B_hat: float
    B_se: float
    M_hat: float
    M_se: float
    E_hat: float
    reps: int
    trunc_failures: int
    seed: int


def make_stream(seed: int, replication_index: int) -> np.random.Generator:
    """Counter-based stream for one replication.

    Philox keyed by the two 64-bit words (seed, replication_index): streams
    are reproducible, statistically independent across indices, and do not
    depend on which worker runs them.
    """
    if not (0 <= seed < _UINT64_MAX):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not (0 <= replication_index < _UINT64_MAX):
        raise ValueError(
            f"replication_index must be a 64-bit unsigned integer, got {replication_index}")
    key = np.array([seed, replication_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_replication(d: JumpDensitySpec, gamma: float, trunc: TruncationPolicy,
                    stream: np.random.Generator) -> EstimatorTriple:
    """Sample one two-sided path and compute its estimator triple."""
    return estimate(sample_path(d, gamma, trunc, stream))


def estimate_second_moment(samples) -> tuple[float, float]:
    """Mean of squares and its standard error (sample sd of squares / sqrt N)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least 2 samples")
    sq = arr * arr
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(sq.size))


def _run_chunk(density_name: str, gamma: float, trunc: TruncationPolicy,
               seed: int, base: int, start: int, stop: int):
    d = get_density(density_name)
    k = stop - start
    zetas = np.empty(k)
    xi_m = np.empty(k)
    xi_p = np.empty(k)
    failed = np.zeros(k, dtype=bool)
    for j in range(k):
        stream = make_stream(seed, base + start + j)
        try:
            triple = run_replication(d, gamma, trunc, stream)
        except TruncationError:
            failed[j] = True
            zetas[j] = xi_m[j] = xi_p[j] = np.nan
        else:
            zetas[j] = triple.zeta
            xi_m[j] = triple.xi_minus
            xi_p[j] = triple.xi_plus
    return start, zetas, xi_m, xi_p, failed


def _run_cell(config: SweepConfig, gamma: float, base: int, executor):
    reps = config.reps
    zetas = np.empty(reps)
    xi_m = np.empty(reps)
    xi_p = np.empty(reps)
    failed = np.zeros(reps, dtype=bool)
    chunk = max(1, min(_MAX_CHUNK, -(-reps // (8 * config.workers))))
    spans = [(s, min(s + chunk, reps)) for s in range(0, reps, chunk)]
    args = [(config.density_name, gamma, config.trunc, config.seed, base, s, e)
            for s, e in spans]
    if executor is None:
        results = (_run_chunk(*a) for a in args)
    else:
        results = executor.map(_run_chunk_star, args)
    for start, z, m, p, f in results:
        k = z.size
        zetas[start:start + k] = z
        xi_m[start:start + k] = m
        xi_p[start:start + k] = p
        failed[start:start + k] = f
    return zetas, xi_m, xi_p, failed


def _run_chunk_star(args):
    return _run_chunk(*args)


def run_sweep(config: SweepConfig, progress=None) -> list:
    """One SweepRow per (gamma, alpha) pair, in grid order.

    Replication r of the i-th gamma cell uses the stream
    make_stream(seed, i*reps + r); all alphas of a cell share its paths.
    Truncation-capped replications are excluded from the estimates and
    counted in trunc_failures.  Output is deterministic given (seed,
    config) regardless of worker count.  progress, if given, is called
    with each completed SweepRow.
    """
    executor = None
    rows = []
    try:
        if config.workers > 1:
            executor = concurrent.futures.ProcessPoolExecutor(
                max_workers=config.workers,
                mp_context=multiprocessing.get_context("fork"))
        for i, gamma in enumerate(config.gamma_grid):
            zetas, xi_m, xi_p, failed = _run_cell(
                config, gamma, i * config.reps, executor)
            ok = ~failed
            n_failed = int(failed.sum())
            if not np.any(ok):
                raise CellError(
                    f"all {config.reps} replications failed for gamma={gamma}")
            b_hat, b_se = estimate_second_moment(zetas[ok])
            for alpha in config.alphas:
                xa = alpha * xi_m[ok] + (1.0 - alpha) * xi_p[ok]
                m_hat, m_se = estimate_second_moment(xa)
                row = SweepRow(
                    gamma=gamma, alpha=alpha, B_hat=b_hat, B_se=b_se,
                    M_hat=m_hat, M_se=m_se, E_hat=b_hat / m_hat,
                    reps=config.reps, trunc_failures=n_failed,
                    seed=config.seed)
                rows.append(row)
                if progress is not None:
                    progress(row)
    finally:
        if executor is not None:
            executor.shutdown()
    return rows


def _row_values(row: SweepRow):
    return [getattr(row, f) for f in SWEEP_CSV_FIELDS]


def format_sweep_csv(rows) -> str:
    """CSV text for sweep rows; floats in shortest round-trip form."""
    lines = [",".join(SWEEP_CSV_FIELDS)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in _row_values(row)))
    return "\n".join(lines) + "\n"


def format_sweep_json(rows) -> str:
    """JSON mirror of the CSV: a list of objects with identical field names."""
    payload = [dict(zip(SWEEP_CSV_FIELDS, _row_values(row))) for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def write_text_atomic(text: str, out_path: str) -> None:
    """Write via a temp file in the destination directory, then rename."""
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_sweep_csv(rows, out_path: str) -> None:
    write_text_atomic(format_sweep_csv(rows), out_path)


def write_sweep_json(rows, out_path: str) -> None:
    write_text_atomic(format_sweep_json(rows), out_path)


def parse_sweep_csv(text: str) -> list:
    """Rows of a sweep CSV produced by format_sweep_csv."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",") != list(SWEEP_CSV_FIELDS):
        raise ValueError("not a sweep CSV: bad header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(SWEEP_CSV_FIELDS):
            raise ValueError(f"bad sweep CSV line: {ln!r}")
        rows.append(SweepRow(
            gamma=float(parts[0]), alpha=float(parts[1]),
            B_hat=float(parts[2]), B_se=float(parts[3]),
            M_hat=float(parts[4]), M_se=float(parts[5]),
            E_hat=float(parts[6]), reps=int(parts[7]),
            trunc_failures=int(parts[8]), seed=int(parts[9])))
    return rows
