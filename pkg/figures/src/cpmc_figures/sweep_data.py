"""Reader for the sweep CSV schema.

The contract is the exact header
gamma,alpha,B_hat,B_se,M_hat,M_se,E_hat,reps,trunc_failures,seed
with one row per (gamma, alpha) cell; any deviation raises SchemaError.
"""

from __future__ import annotations

import csv
import dataclasses

import numpy as np

EXPECTED_HEADER = ("gamma", "alpha", "B_hat", "B_se", "M_hat", "M_se",
                   "E_hat", "reps", "trunc_failures", "seed")

_FLOAT_FIELDS = ("gamma", "alpha", "B_hat", "B_se", "M_hat", "M_se", "E_hat")
_INT_FIELDS = ("reps", "trunc_failures", "seed")


class SchemaError(ValueError):
    """The CSV does not match the sweep output contract."""


@dataclasses.dataclass(frozen=True)
class SweepTable:
    """Column arrays of one sweep, ordered as in the file."""

    gamma: np.ndarray
    alpha: np.ndarray
    B_hat: np.ndarray
    B_se: np.ndarray
    M_hat: np.ndarray
    M_se: np.ndarray
    E_hat: np.ndarray
    reps: np.ndarray
    trunc_failures: np.ndarray
    seed: np.ndarray

    def __len__(self) -> int:
        return self.gamma.size

    @property
    def alphas(self) -> tuple:
        """Distinct alpha values in file order."""
        return tuple(dict.fromkeys(float(a) for a in self.alpha))

    def rows_for_alpha(self, alpha: float) -> "SweepTable":
        mask = self.alpha == alpha
        return SweepTable(**{f.name: getattr(self, f.name)[mask]
                             for f in dataclasses.fields(self)})


def load_sweep(path) -> SweepTable:
    """Parse and validate a sweep CSV; raise SchemaError on any mismatch."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != EXPECTED_HEADER:
            raise SchemaError(
                f"{path}: header {header!r} does not match the sweep schema "
                f"{','.join(EXPECTED_HEADER)}")
        raw = list(reader)
    if not raw:
        raise SchemaError(f"{path}: no data rows")
    cols = {name: [] for name in EXPECTED_HEADER}
    for i, row in enumerate(raw, start=2):
        if len(row) != len(EXPECTED_HEADER):
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, "
                              f"expected {len(EXPECTED_HEADER)}")
        for name, value in zip(EXPECTED_HEADER, row):
            try:
                cols[name].append(float(value) if name in _FLOAT_FIELDS
                                  else int(value))
            except ValueError:
                raise SchemaError(
                    f"{path}: line {i}: bad {name} value {value!r}") from None
    table = SweepTable(**{
        name: np.asarray(cols[name],
                         dtype=np.float64 if name in _FLOAT_FIELDS else np.int64)
        for name in EXPECTED_HEADER})
    for name in ("gamma", "B_hat", "M_hat", "E_hat"):
        vals = getattr(table, name)
        if not np.all(np.isfinite(vals)):
            raise SchemaError(f"{path}: non-finite {name} values")
    if np.any(table.gamma <= 0.0):
        raise SchemaError(f"{path}: gamma values must be > 0")
    if np.any((table.alpha < 0.0) | (table.alpha > 1.0)):
        raise SchemaError(f"{path}: alpha values must lie in [0, 1]")
    return table
