"""Shared test helpers."""

import numpy as np
import pytest

from changepoint_mc import SidePath, TwoSidedPath


def build_path(plus_times, plus_sums, minus_times, minus_sums,
               gamma=1.0, density_name="gaussian") -> TwoSidedPath:
    """Hand-crafted path from explicit event/sum lists (validated)."""

    def side(times, sums):
        times = np.asarray(times, dtype=np.float64)
        sums = np.asarray(sums, dtype=np.float64)
        gap = float(np.max(sums) - sums[-1])
        return SidePath(event_times=times, cum_sums=sums,
                        truncated_at=len(times) - 1, trunc_gap=gap).validate()

    return TwoSidedPath(plus=side(plus_times, plus_sums),
                        minus=side(minus_times, minus_sums),
                        gamma=gamma, density_name=density_name)


@pytest.fixture
def toy_path():
    """The single-interval toy: plus events {0, 2}, minus {0, 1}, S = -40."""
    return build_path([0.0, 2.0], [0.0, -40.0], [0.0, 1.0], [0.0, -40.0])
