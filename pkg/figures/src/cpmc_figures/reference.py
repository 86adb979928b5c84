"""Limiting constants, fetched from the cpmc command-line tool.

The simulation package owns the constant values; this package only
consumes the JSON that `cpmc constants` prints, keeping the two
installations decoupled.
"""

from __future__ import annotations

import dataclasses
import json
import shutil
import subprocess


@dataclasses.dataclass(frozen=True)
class Constants:
    """Small- and large-gamma limiting values of the moment curves."""

    B0: float
    M0: float
    E0: float
    B_inf: float
    M_inf: dict      # alpha -> limit of M_hat as gamma -> inf
    E_inf: dict      # alpha -> limit of E_hat as gamma -> inf

    def require_alphas(self, alphas) -> None:
        missing = [a for a in alphas if a not in self.M_inf]
        if missing:
            raise KeyError(
                f"constants output lacks alpha values {missing}; re-run "
                f"`cpmc constants --alphas ...` with the sweep's alphas")


def parse_constants(text: str) -> Constants:
    """Parse the JSON document printed by `cpmc constants`."""
    payload = json.loads(text)
    try:
        return Constants(
            B0=float(payload["B0"]),
            M0=float(payload["M0"]),
            E0=float(payload["E0"]),
            B_inf=float(payload["B_inf"]),
            M_inf={float(a): float(v) for a, v in payload["M_inf"].items()},
            E_inf={float(a): float(v) for a, v in payload["E_inf"].items()},
        )
    except KeyError as exc:
        raise ValueError(f"constants JSON is missing key {exc}") from None


def fetch_constants(alphas) -> Constants:
    """Run `cpmc constants` for the given alpha values and parse it."""
    exe = shutil.which("cpmc")
    if exe is None:
        raise RuntimeError(
            "the cpmc command-line tool is not on PATH; install the "
            "changepoint-mc package (pip install changepoint-mc)")
    alpha_arg = ",".join(repr(float(a)) for a in alphas)
    proc = subprocess.run([exe, "constants", "--alphas", alpha_arg],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"`cpmc constants` failed: {proc.stderr.strip()}")
    consts = parse_constants(proc.stdout)
    consts.require_alphas(float(a) for a in alphas)
    return consts
