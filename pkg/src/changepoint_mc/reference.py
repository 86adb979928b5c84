"""Reference limit processes and closed-form constants.

The small-shift limit Z_0(x) = exp(W(x) - |x|/2) (two-sided Brownian
motion with negative drift) is sampled on a uniform grid with exact
Gaussian increments; the large-shift limit Z_inf(x) = 1{-eta < x < tau}
(eta, tau independent exponentials) is sampled exactly.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np

from . import _kernels
from .functionals import EstimatorTriple
from .path import TruncationError

_BRIDGE_MISS = 1e-16  # per-cell probability of missing a supremum candidate


@functools.lru_cache(maxsize=1)
def zeta3() -> float:
    """Riemann zeta(3) to relative accuracy 1e-12.

    Direct series through n = 10^6 (summed ascending) plus the
    Euler-Maclaurin tail 1/(2M^2) + 1/(2M^3) + 1/(4M^4) at M = 10^6 + 1,
    whose error is O(M^-6).
    """
    n = np.arange(1_000_000, 0, -1, dtype=np.float64)
    partial = float(np.sum(1.0 / (n * n * n)))
    m = 1_000_001.0
    tail = 0.5 / (m * m) + 0.5 / (m * m * m) + 0.25 / (m * m * m * m)
    return partial + tail


@dataclasses.dataclass(frozen=True)
class ReferenceConstants:
    """Closed-form limiting second moments and efficiencies.

    B0, M0, E0 are the small-shift limits of the Bayes and argmax second
    moments and their ratio; B_inf and the alpha-dependent M_inf, E_inf
    are the large-shift limits.
    """

    B0: float
    M0: float
    E0: float
    B_inf: float

    def M_inf(self, alpha: float) -> float:
        _check_alpha(alpha)
        return 6.0 * (alpha - 0.5) ** 2 + 0.5

    def E_inf(self, alpha: float) -> float:
        _check_alpha(alpha)
        return 1.0 / (12.0 * (alpha - 0.5) ** 2 + 1.0)


def _check_alpha(alpha: float):
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def constants() -> ReferenceConstants:
    """The reference constants, with B0 = 16*zeta(3) computed, M0 = 26 exact."""
    z3 = zeta3()
    return ReferenceConstants(B0=16.0 * z3, M0=26.0, E0=16.0 * z3 / 26.0, B_inf=0.5)


def zinf_values(eta: float, tau: float, alpha: float) -> tuple[float, float]:
    """Estimator variables of Z_inf = 1{-eta < x < tau}.

    The mass is uniform on (-eta, tau), so zeta_inf = (tau - eta)/2; the
    argmax interval is the whole support, so xi_alpha = (1-alpha)*tau -
    alpha*eta.
    """
    _check_alpha(alpha)
    if not (eta >= 0.0 and tau >= 0.0):
        raise ValueError("eta and tau must be >= 0")
    return (tau - eta) / 2.0, (1.0 - alpha) * tau - alpha * eta


def sample_zinf(alpha: float, rng: np.random.Generator) -> tuple[float, float]:
    """One draw of (zeta_inf, xi_alpha_inf): eta then tau, exponential(1)."""
    _check_alpha(alpha)
    e = rng.standard_exponential(2)
    return zinf_values(float(e[0]), float(e[1]), alpha)


def sample_zinf_many(alpha: float, n: int, rng: np.random.Generator
                     ) -> tuple[np.ndarray, np.ndarray]:
    """n draws of (zeta_inf, xi_alpha_inf), stream-identical to n single draws."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("n must be >= 1")
    e = rng.standard_exponential((n, 2))
    eta = e[:, 0]
    tau = e[:, 1]
    return (tau - eta) / 2.0, (1.0 - alpha) * tau - alpha * eta


@dataclasses.dataclass(frozen=True)
class Z0Config:
    """Grid simulation of Z_0: step size, stopping gap, per-side step cap."""

    grid_step: float = 1e-3
    gap_T: float = 10.0
    max_steps: int = 100_000_000

    def __post_init__(self):
        if not (self.grid_step > 0.0 and math.isfinite(self.grid_step)):
            raise ValueError(f"grid_step must be finite and > 0, got {self.grid_step}")
        if not (self.gap_T > 0.0 and math.isfinite(self.gap_T)):
            raise ValueError(f"gap_T must be finite and > 0, got {self.gap_T}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclasses.dataclass(frozen=True)
class Z0Result:
    """Batch of Z_0 replications.

    sup_plus/sup_minus are the exact per-side suprema of W(t) - t/2
    (bridge-corrected between grid points), each distributed exponential(1).
    """

    zeta: np.ndarray
    xi: np.ndarray
    sup_plus: np.ndarray
    sup_minus: np.ndarray


def _bridge_threshold(h: float) -> float:
    # A cell can move the exact supremum above its endpoint maximum by more
    # than b with probability <= exp(-2 b^2 / h); choose b so that this is
    # _BRIDGE_MISS per cell.
    return math.sqrt(-0.5 * h * math.log(_BRIDGE_MISS))


def _z0_side(config: Z0Config, rng: np.random.Generator):
    status, n, sup, argmax_idx, gridmax, mass, xmass, s = _kernels.z0_side(
        rng, config.grid_step, config.gap_T, config.max_steps,
        _bridge_threshold(config.grid_step))
    if status == _kernels.STATUS_CAP_EXCEEDED:
        raise TruncationError(
            f"Z_0 side hit max_steps={config.max_steps} before falling "
            f"gap_T={config.gap_T} below its maximum")
    return n, sup, argmax_idx, gridmax, mass, xmass, s


def sample_z0(config: Z0Config, rng: np.random.Generator) -> EstimatorTriple:
    """One replication of Z_0: plus side first, then minus, one stream.

    zeta is the trapezoid quadrature of x*Z / Z on the grid; xi is the grid
    argmax location (xi_minus = xi_plus up to grid resolution, plus side on
    the measure-zero tie).  The increments are exact, so the only
    discretization effects are argmax/integral localization between grid
    points.
    """
    h = config.grid_step
    np_, sup_p, ai_p, gm_p, mass_p, xmass_p, s_p = _z0_side(config, rng)
    nm_, sup_m, ai_m, gm_m, mass_m, xmass_m, s_m = _z0_side(config, rng)
    zeta_val = (xmass_p - xmass_m) / (mass_p + mass_m)
    xi = ai_p * h if gm_p >= gm_m else -(ai_m * h)
    # truncation tail estimate, as in the compound Poisson functionals,
    # with the drift rate 1/2 of the exponent estimated from the path
    kl = max(-(s_p + s_m) / ((np_ + nm_) * h), 1e-12)
    smax = max(gm_p, gm_m)
    num_tail = 0.0
    den_tail = 0.0
    for n_steps, s_final in ((np_, s_p), (nm_, s_m)):
        w = math.exp(s_final - smax)
        num_tail += w * (n_steps * h + 1.0 / kl) / kl
        den_tail += w / kl
    den_scaled = (mass_p + mass_m) * math.exp(-smax)
    tail = (num_tail + abs(zeta_val) * den_tail) / den_scaled
    return EstimatorTriple(zeta=zeta_val, xi_minus=xi, xi_plus=xi,
                           zeta_tail_bound=tail)


def sample_z0_many(config: Z0Config, n: int, rng: np.random.Generator) -> Z0Result:
    """n replications of Z_0 from one sequentially consumed stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    h = config.grid_step
    zeta_out = np.empty(n)
    xi_out = np.empty(n)
    sup_p_out = np.empty(n)
    sup_m_out = np.empty(n)
    for i in range(n):
        np_, sup_p, ai_p, gm_p, mass_p, xmass_p, _ = _z0_side(config, rng)
        nm_, sup_m, ai_m, gm_m, mass_m, xmass_m, _ = _z0_side(config, rng)
        zeta_out[i] = (xmass_p - xmass_m) / (mass_p + mass_m)
        xi_out[i] = ai_p * h if gm_p >= gm_m else -(ai_m * h)
        sup_p_out[i] = sup_p
        sup_m_out[i] = sup_m
    return Z0Result(zeta=zeta_out, xi=xi_out, sup_plus=sup_p_out,
                    sup_minus=sup_m_out)
