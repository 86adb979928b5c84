"""Two-sided compound Poisson log-likelihood-ratio paths.

The log process is piecewise constant: on the plus side it jumps by
ln(f(eps+gamma)/f(eps)) at unit-intensity Poisson event locations
0 < x_1 < x_2 < ..., and symmetrically with shift -gamma on the minus
side.  Paths are sampled until they fall ``gap_T`` below their running
maximum; the Cramer-Lundberg bound P(rebound above running max - gap_T + a)
<= exp(-a) makes the discarded tail negligible for the downstream
functionals, with the neglected mass reported separately.

Stream recipe (reproducible by an independent scalar implementation):
per event, one ``standard_exponential()`` draw for the waiting time, then
one innovation draw (see the density's sampler).  ``sample_path`` consumes
the plus side fully, then the minus side, from a single stream.
"""

from __future__ import annotations

import dataclasses
import io
import math

import numpy as np

from . import _kernels
from .densities import JumpDensitySpec, NumericalError

_KIND_CODES = {"gaussian": _kernels.KIND_GAUSSIAN, "logistic": _kernels.KIND_LOGISTIC}
_LOGISTIC_SCALE = math.sqrt(3.0) / math.pi
_EVENT_BLOCK = 1 << 24  # events per vectorized block in the marginal lanes


class TruncationError(RuntimeError):
    """The event cap was reached before the stopping rule fired."""


class OutOfHorizonError(ValueError):
    """Evaluation point lies beyond the sampled horizon of the path."""


@dataclasses.dataclass(frozen=True)
class TruncationPolicy:
    """Stop a side once it falls gap_T below its running maximum.

    gap_T is in natural-log units; max_events is a per-side safety cap
    whose violation raises TruncationError.
    """

    gap_T: float = 30.0
    max_events: int = 10_000_000

    def __post_init__(self):
        if not (self.gap_T > 0.0 and math.isfinite(self.gap_T)):
            raise ValueError(f"gap_T must be finite and > 0, got {self.gap_T}")
        if self.max_events < 1:
            raise ValueError(f"max_events must be >= 1, got {self.max_events}")


@dataclasses.dataclass(frozen=True)
class SidePath:
    """One side of the path: event locations and partial sums.

    event_times[0] = 0 = cum_sums[0]; event_times strictly increasing.
    truncated_at is the index N of the final sampled event and trunc_gap
    the distance of S_N below the running maximum at termination.
    """

    event_times: np.ndarray
    cum_sums: np.ndarray
    truncated_at: int
    trunc_gap: float

    def validate(self):
        if self.event_times.shape != self.cum_sums.shape or self.event_times.ndim != 1:
            raise ValueError("event_times and cum_sums must be 1-d arrays of equal length")
        if self.event_times[0] != 0.0 or self.cum_sums[0] != 0.0:
            raise ValueError("paths must start at x_0 = 0, S_0 = 0")
        if not np.all(np.diff(self.event_times) > 0.0):
            raise ValueError("event_times must be strictly increasing")
        if self.truncated_at != len(self.event_times) - 1:
            raise ValueError("truncated_at must index the final entry")
        if self.trunc_gap < 0.0:
            raise ValueError("trunc_gap must be >= 0")
        return self

    @property
    def max(self) -> float:
        return float(np.max(self.cum_sums))

    @property
    def argmax_index(self) -> int:
        return int(np.argmax(self.cum_sums))


@dataclasses.dataclass(frozen=True)
class TwoSidedPath:
    """Both sides of the path plus the parameters that generated it."""

    plus: SidePath
    minus: SidePath
    gamma: float
    density_name: str


@dataclasses.dataclass(frozen=True)
class SideScan:
    """Summary of a side path sampled without storage (see scan_side_path)."""

    n_events: int
    last_time: float
    last_sum: float
    max_sum: float
    s_at_marks: np.ndarray
    sup_after_marks: np.ndarray


def _check_gamma(gamma: float):
    if not (gamma > 0.0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be finite and > 0, got {gamma}")


def _side_shift(gamma: float, side: str) -> float:
    if side == "plus":
        return gamma
    if side == "minus":
        return -gamma
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


def _initial_capacity(gamma: float, policy: TruncationPolicy) -> int:
    # expected events per side is about gap_T / KL(gamma); KL ~ gamma^2/2
    est = (policy.gap_T + 8.0) / (0.5 * gamma * gamma)
    return int(min(policy.max_events + 1, 6.0 * est + 64.0))


def sample_side_path(d: JumpDensitySpec, gamma: float, side: str,
                     policy: TruncationPolicy, rng: np.random.Generator) -> SidePath:
    """Sample one side until it falls policy.gap_T below its running max."""
    _check_gamma(gamma)
    shift = _side_shift(gamma, side)
    if d.kind in _KIND_CODES:
        return _sample_side_kernel(d, shift, policy, rng)
    return _sample_side_generic(d, shift, policy, rng)


def _sample_side_kernel(d, shift, policy, rng):
    kind = _KIND_CODES[d.kind]
    cap = _initial_capacity(abs(shift), policy)
    times = np.empty(cap)
    sums = np.empty(cap)
    times[0] = 0.0
    sums[0] = 0.0
    n, t, s, m = 0, 0.0, 0.0, 0.0
    while True:
        status, n, t, s, m = _kernels.sample_side(
            rng, kind, shift, _LOGISTIC_SCALE, policy.gap_T, policy.max_events,
            times, sums, n, t, s, m)
        if status == _kernels.STATUS_OK:
            break
        if status == _kernels.STATUS_CAP_EXCEEDED:
            raise TruncationError(
                f"side path hit max_events={policy.max_events} before falling "
                f"gap_T={policy.gap_T} below its maximum (shift={shift}, "
                f"running max {m:.4f}, current sum {s:.4f})")
        grown = np.empty(2 * len(times))
        grown[:n + 1] = times[:n + 1]
        times = grown
        grown = np.empty(2 * len(sums))
        grown[:n + 1] = sums[:n + 1]
        sums = grown
    return SidePath(event_times=times[:n + 1].copy(), cum_sums=sums[:n + 1].copy(),
                    truncated_at=n, trunc_gap=m - s)


def _sample_side_generic(d, shift, policy, rng):
    times = [0.0]
    sums = [0.0]
    t = 0.0
    s = 0.0
    m = 0.0
    while True:
        if len(times) - 1 >= policy.max_events:
            raise TruncationError(
                f"side path hit max_events={policy.max_events} before falling "
                f"gap_T={policy.gap_T} below its maximum (shift={shift}, "
                f"running max {m:.4f}, current sum {s:.4f})")
        t += float(rng.standard_exponential())
        eps = float(d.sampler(rng, 1)[0])
        jump = float(d.log_ratio(np.float64(eps), shift))
        if not math.isfinite(jump):
            raise NumericalError(
                f"density {d.name!r} produced a non-finite log ratio at "
                f"eps={eps}, shift={shift}")
        s += jump
        times.append(t)
        sums.append(s)
        if s > m:
            m = s
        elif s <= m - policy.gap_T:
            break
    return SidePath(event_times=np.array(times), cum_sums=np.array(sums),
                    truncated_at=len(times) - 1, trunc_gap=m - s)


def sample_path(d: JumpDensitySpec, gamma: float, policy: TruncationPolicy,
                rng: np.random.Generator) -> TwoSidedPath:
    """Sample a two-sided path: plus side first, then minus, one stream."""
    plus = sample_side_path(d, gamma, "plus", policy, rng)
    minus = sample_side_path(d, gamma, "minus", policy, rng)
    return TwoSidedPath(plus=plus, minus=minus, gamma=gamma, density_name=d.name)


def scan_side_path(d: JumpDensitySpec, gamma: float, side: str,
                   policy: TruncationPolicy, rng: np.random.Generator,
                   marks=()) -> SideScan:
    """Sample a side without storing it, recording values at given marks.

    For each mark position the scan records the path value at the mark and
    the supremum of the path strictly beyond it; their maximum is the
    supremum over (mark, infinity) by piecewise constancy.  Built-in
    densities only (the storage-free lane exists for large replication
    counts).
    """
    _check_gamma(gamma)
    shift = _side_shift(gamma, side)
    if d.kind not in _KIND_CODES:
        raise ValueError("scan_side_path supports built-in densities only")
    marks_arr = np.asarray(marks, dtype=np.float64)
    if marks_arr.size and np.any(np.diff(marks_arr) <= 0.0):
        raise ValueError("marks must be strictly increasing")
    if np.any(marks_arr < 0.0):
        raise ValueError("marks must be >= 0")
    s_at = np.zeros(marks_arr.size)
    sup_after = np.full(marks_arr.size, -np.inf)
    status, n, t, s, m = _kernels.scan_side(
        rng, _KIND_CODES[d.kind], shift, _LOGISTIC_SCALE, policy.gap_T,
        policy.max_events, marks_arr, s_at, sup_after)
    if status == _kernels.STATUS_CAP_EXCEEDED:
        raise TruncationError(
            f"side scan hit max_events={policy.max_events} before falling "
            f"gap_T={policy.gap_T} below its maximum (shift={shift})")
    return SideScan(n_events=n, last_time=t, last_sum=s, max_sum=m,
                    s_at_marks=s_at, sup_after_marks=sup_after)


def evaluate_log(path: TwoSidedPath, x):
    """Value of ln Z at x: S_i on [x_i, x_{i+1}) mirrored onto the minus side.

    Accepts a scalar or an array; raises OutOfHorizonError when |x| exceeds
    the last sampled event time on its side.
    """
    xs = np.asarray(x, dtype=np.float64)
    out = np.empty(xs.shape)
    plus_mask = xs >= 0.0
    for mask, side in ((plus_mask, path.plus), (~plus_mask, path.minus)):
        if not np.any(mask):
            continue
        pos = np.abs(xs[mask])
        horizon = side.event_times[-1]
        if np.any(pos > horizon):
            worst = float(np.max(pos))
            raise OutOfHorizonError(
                f"|x|={worst} beyond sampled horizon {horizon}")
        idx = np.searchsorted(side.event_times, pos, side="right") - 1
        out[mask] = side.cum_sums[idx]
    if np.ndim(x) == 0:
        return float(out)
    return out


def rescale_time(path: TwoSidedPath, fisher_info: float) -> TwoSidedPath:
    """Multiply event times by fisher_info * gamma**2, leaving sums as is.

    Evaluating the result at y equals evaluating the original at
    y / (fisher_info * gamma**2).
    """
    if not (fisher_info > 0.0 and math.isfinite(fisher_info)):
        raise ValueError(f"fisher_info must be finite and > 0, got {fisher_info}")
    factor = fisher_info * path.gamma * path.gamma

    def scale(side: SidePath) -> SidePath:
        return SidePath(event_times=side.event_times * factor,
                        cum_sums=side.cum_sums,
                        truncated_at=side.truncated_at,
                        trunc_gap=side.trunc_gap)

    return TwoSidedPath(plus=scale(path.plus), minus=scale(path.minus),
                        gamma=path.gamma, density_name=path.density_name)


def dump_path_csv(path: TwoSidedPath, file) -> None:
    """Write the path as CSV rows (side, index, event_time, cum_sum)."""
    own = isinstance(file, str)
    fh = open(file, "w", encoding="utf-8") if own else file
    try:
        fh.write("side,index,event_time,cum_sum\n")
        for name, side in (("plus", path.plus), ("minus", path.minus)):
            for i in range(len(side.event_times)):
                fh.write(f"{name},{i},{float(side.event_times[i])!r},"
                         f"{float(side.cum_sums[i])!r}\n")
    finally:
        if own:
            fh.close()


def path_csv_text(path: TwoSidedPath) -> str:
    buf = io.StringIO()
    dump_path_csv(path, buf)
    return buf.getvalue()


def sample_log_at(d: JumpDensitySpec, gamma: float, x: float, n: int,
                  rng: np.random.Generator) -> np.ndarray:
    """n independent draws of ln Z(x): the marginal law at a single point.

    Only the events in [0, |x|] matter for the marginal: the event count is
    Poisson(|x|) and each event contributes one innovation's log ratio
    (shift +gamma for x > 0, -gamma for x < 0).  Stream recipe: one
    vectorized Poisson draw of all n counts, then innovations in
    replication order.  Law-identical to evaluating a fully sampled path
    at x, at a fraction of the cost.
    """
    _check_gamma(gamma)
    if n < 1:
        raise ValueError("n must be >= 1")
    shift = gamma if x >= 0.0 else -gamma
    lam = abs(float(x))
    counts = rng.poisson(lam, n)
    out = np.empty(n)
    start = 0
    while start < n:
        stop = start
        block = 0
        while stop < n and (block == 0 or block + counts[stop] <= _EVENT_BLOCK):
            block += counts[stop]
            stop += 1
        eps = d.sampler(rng, int(block))
        jumps = d.log_ratio(eps, shift)
        cuts = np.zeros(stop - start + 1, dtype=np.int64)
        np.cumsum(counts[start:stop], out=cuts[1:])
        cs = np.concatenate(([0.0], np.cumsum(jumps)))
        out[start:stop] = cs[cuts[1:]] - cs[cuts[:-1]]
        start = stop
    return out


def sample_log_at_pair(d: JumpDensitySpec, gamma: float, x1: float, x2: float,
                       n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """n joint draws of (ln Z(x1), ln Z(x2)) for 0 <= x1 <= x2 on one side.

    The event count at x2 is Poisson(x2); conditionally on it the count at
    x1 is Binomial(count, x1/x2), and by exchangeability of the innovation
    sequence the first count1 jumps land in [0, x1].  Stream recipe: the
    Poisson counts, then the binomial thinning counts, then innovations in
    replication order.
    """
    _check_gamma(gamma)
    if not (0.0 <= x1 <= x2):
        raise ValueError(f"need 0 <= x1 <= x2, got x1={x1}, x2={x2}")
    if n < 1:
        raise ValueError("n must be >= 1")
    shift = gamma
    counts2 = rng.poisson(float(x2), n)
    if x2 == 0.0:
        return np.zeros(n), np.zeros(n)
    counts1 = rng.binomial(counts2, x1 / x2)
    out1 = np.empty(n)
    out2 = np.empty(n)
    start = 0
    while start < n:
        stop = start
        block = 0
        while stop < n and (block == 0 or block + counts2[stop] <= _EVENT_BLOCK):
            block += counts2[stop]
            stop += 1
        eps = d.sampler(rng, int(block))
        jumps = d.log_ratio(eps, shift)
        cuts = np.zeros(stop - start + 1, dtype=np.int64)
        np.cumsum(counts2[start:stop], out=cuts[1:])
        cs = np.concatenate(([0.0], np.cumsum(jumps)))
        begin = cs[cuts[:-1]]
        out1[start:stop] = cs[cuts[:-1] + counts1[start:stop]] - begin
        out2[start:stop] = cs[cuts[1:]] - begin
        start = stop
    return out1, out2
