"""Estimator variables of a two-sided path.

From one path Z the limiting estimator variables are computed exactly from
the event structure: the Bayes variable zeta = integral of x Z / integral
of Z over the sampled horizon, and the argmax interval endpoints
(xi_minus, xi_plus) of Z, whose convex combinations xi_alpha are the
maximum-likelihood limit variables.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import _kernels
from .path import TwoSidedPath

_MIN_KL = 1e-12


@dataclasses.dataclass(frozen=True)
class EstimatorTriple:
    """One replication's estimator variables.

    zeta_tail_bound is an upper estimate of the truncation-induced error in
    zeta (the xi variables are exact once the path is sampled past its
    argmax, which the stopping rule guarantees).
    """

    zeta: float
    xi_minus: float
    xi_plus: float
    zeta_tail_bound: float

    def xi_alpha(self, alpha: float) -> float:
        return xi_alpha(self, alpha)


def _require_nondegenerate(path: TwoSidedPath):
    if len(path.plus.event_times) < 2 or len(path.minus.event_times) < 2:
        raise ValueError("path must contain at least one sampled event per side")


def _core(path: TwoSidedPath):
    _require_nondegenerate(path)
    xp = path.plus.event_times
    sp = path.plus.cum_sums
    xm = path.minus.event_times
    sm = path.minus.cum_sums
    kp, vp = _kernels.side_argmax(sp)
    km, vm = _kernels.side_argmax(sm)
    smax = vp if vp >= vm else vm
    num, den = _kernels.zeta_sums(xp, sp, xm, sm, smax)
    if not (den > 0.0):
        raise RuntimeError("internal: zero total mass on a finite path")
    return xp, sp, xm, sm, int(kp), float(vp), int(km), float(vm), float(smax), num, den


def _tail_bound(xp, sp, xm, sm, smax, den, zeta_val):
    # Neglected tail of each side, treating the exponent beyond the horizon
    # as decaying at the path's mean drift rate (KL divergence per unit
    # length, estimated from the path itself).  This is a reported estimate
    # of the truncation error, not a hard bound on a single realization.
    n_events = (len(xp) - 1) + (len(xm) - 1)
    kl = -(sp[-1] + sm[-1]) / max(n_events, 1)
    kl = max(kl, _MIN_KL)
    num_tail = 0.0
    den_tail = 0.0
    for x, s in ((xp, sp), (xm, sm)):
        w = math.exp(s[-1] - smax)
        num_tail += w * (x[-1] + 1.0 / kl) / kl
        den_tail += w / kl
    return (num_tail + abs(zeta_val) * den_tail) / den


def zeta(path: TwoSidedPath) -> tuple[float, float]:
    """Bayes variable: ratio of the signed second-moment sums to the mass sums.

    Cell [x_i, x_{i+1}) contributes 0.5*exp(S_i)*(x_{i+1}^2 - x_i^2) to the
    numerator (sign flipped on the minus side) and exp(S_i)*(x_{i+1} - x_i)
    to the denominator; both are scaled by exp(-max S) before summing.
    Returns (zeta, tail_bound).
    """
    xp, sp, xm, sm, _, _, _, _, smax, num, den = _core(path)
    value = num / den
    return value, _tail_bound(xp, sp, xm, sm, smax, den, value)


def xi_bounds(path: TwoSidedPath) -> tuple[float, float]:
    """Endpoints of the argmax interval of Z.

    With k the first argmax of the plus sums and l of the minus sums:
    xi_minus = x_k^+ if S_k^+ > S_l^-, else -x_{l+1}^-;
    xi_plus = x_{k+1}^+ if S_k^+ >= S_l^-, else -x_l^-.
    Ties within a side break toward the smallest index.
    """
    xp, sp, xm, sm, kp, vp, km, vm, _, _, _ = _core(path)
    return _xi_from_argmax(xp, xm, kp, vp, km, vm)


def _xi_from_argmax(xp, xm, kp, vp, km, vm):
    if vp > vm:
        lo, hi = kp, kp + 1
        if hi >= len(xp):
            raise ValueError("path not sampled past its argmax on the plus side")
        return float(xp[lo]), float(xp[hi])
    if vp < vm:
        lo, hi = km + 1, km
        if lo >= len(xm):
            raise ValueError("path not sampled past its argmax on the minus side")
        return float(-xm[lo]), float(-xm[hi])
    if km + 1 >= len(xm) or kp + 1 >= len(xp):
        raise ValueError("path not sampled past its argmax")
    return float(-xm[km + 1]), float(xp[kp + 1])


def xi_alpha(triple: EstimatorTriple, alpha: float) -> float:
    """Convex combination alpha*xi_minus + (1-alpha)*xi_plus."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * triple.xi_minus + (1.0 - alpha) * triple.xi_plus


def estimate(path: TwoSidedPath) -> EstimatorTriple:
    """All estimator variables of one path in a single pass."""
    xp, sp, xm, sm, kp, vp, km, vm, smax, num, den = _core(path)
    value = num / den
    xi_m, xi_p = _xi_from_argmax(xp, xm, kp, vp, km, vm)
    return EstimatorTriple(
        zeta=value,
        xi_minus=xi_m,
        xi_plus=xi_p,
        zeta_tail_bound=_tail_bound(xp, sp, xm, sm, smax, den, value),
    )
