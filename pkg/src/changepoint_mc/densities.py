"""Innovation densities for the jump process.

A density f must be strictly positive with mean 0 and variance 1.  The
process only sees f through three operations: drawing innovations,
evaluating the shifted log-likelihood ratio ln(f(eps+shift)/f(eps)), and
its Fisher information integral f'^2/f.

Built-ins: "gaussian" (closed forms throughout) and "logistic"
(variance-standardized, scale sqrt(3)/pi).  Custom densities are accepted
as a (log-density, sampler) pair; Fisher information is then computed by
adaptive quadrature.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import integrate

LOGISTIC_SCALE = math.sqrt(3.0) / math.pi

_LOG_HALF_2PI = 0.5 * math.log(2.0 * math.pi)
_DENSITY_FLOOR_LOG = math.log(1e-30)
_QUAD_RELTOL = 1e-8


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or produced non-finite values."""


@dataclasses.dataclass(frozen=True)
class JumpDensitySpec:
    """An innovation distribution with the operations the sampler needs.

    sampler(rng, n) draws n innovations as a float array, consuming the
    stream one draw per innovation.  log_ratio(eps, shift) evaluates
    ln(f(eps+shift)/f(eps)) elementwise.  log_pdf(x) evaluates ln f(x).
    kind selects the compiled sampling kernel ("gaussian", "logistic") or
    the generic python loop ("custom").
    """

    name: str
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    log_ratio: Callable[[np.ndarray, float], np.ndarray]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    fisher_info: float
    kind: str = "custom"

    def __post_init__(self):
        if not (self.fisher_info > 0.0 and math.isfinite(self.fisher_info)):
            raise ValueError(f"fisher_info must be finite and > 0, got {self.fisher_info}")


def _gaussian_sampler(rng, n):
    return rng.standard_normal(n)


def _gaussian_log_ratio(eps, shift):
    eps = np.asarray(eps, dtype=np.float64)
    return -shift * eps - 0.5 * shift * shift


def _gaussian_log_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return -0.5 * x * x - _LOG_HALF_2PI


def _logistic_sampler(rng, n):
    return rng.logistic(0.0, LOGISTIC_SCALE, n)


def _logistic_log_pdf(x):
    z = np.asarray(x, dtype=np.float64) / -LOGISTIC_SCALE
    return z - 2.0 * np.logaddexp(0.0, z) - math.log(LOGISTIC_SCALE)


def _logistic_log_ratio(eps, shift):
    eps = np.asarray(eps, dtype=np.float64)
    z0 = -eps / LOGISTIC_SCALE
    z1 = -(eps + shift) / LOGISTIC_SCALE
    return -shift / LOGISTIC_SCALE - 2.0 * (np.logaddexp(0.0, z1) - np.logaddexp(0.0, z0))


GAUSSIAN = JumpDensitySpec(
    name="gaussian",
    sampler=_gaussian_sampler,
    log_ratio=_gaussian_log_ratio,
    log_pdf=_gaussian_log_pdf,
    fisher_info=1.0,
    kind="gaussian",
)

LOGISTIC = JumpDensitySpec(
    name="logistic",
    sampler=_logistic_sampler,
    log_ratio=_logistic_log_ratio,
    log_pdf=_logistic_log_pdf,
    fisher_info=math.pi * math.pi / 9.0,
    kind="logistic",
)

_BUILTINS = {d.name: d for d in (GAUSSIAN, LOGISTIC)}


def list_densities():
    """Names of the built-in densities."""
    return sorted(_BUILTINS)


def get_density(name: str) -> JumpDensitySpec:
    """Look up a built-in density by name."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown density {name!r}; built-ins: {', '.join(list_densities())}"
        ) from None


def log_likelihood_ratio(d: JumpDensitySpec, eps, shift: float):
    """ln(f(eps+shift)/f(eps)), elementwise over eps.

    Raises NumericalError if the density vanishes at an evaluation point
    (possible only for custom densities; built-ins are strictly positive).
    """
    if not math.isfinite(shift):
        raise ValueError(f"shift must be finite, got {shift}")
    eps_arr = np.asarray(eps, dtype=np.float64)
    if not np.all(np.isfinite(eps_arr)):
        raise ValueError("eps must be finite")
    out = np.asarray(d.log_ratio(eps_arr, shift), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            f"density {d.name!r} has a zero or invalid value at a shifted "
            f"evaluation point (shift={shift})"
        )
    if np.ndim(eps) == 0:
        return float(out)
    return out


def fisher_information(d: JumpDensitySpec) -> float:
    """Fisher information integral f'^2/f of the density."""
    return d.fisher_info


def sample_innovation(d: JumpDensitySpec, rng: np.random.Generator) -> float:
    """One draw from f."""
    return float(d.sampler(rng, 1)[0])


def kl_divergence(d: JumpDensitySpec, shift: float) -> float:
    """KL divergence E[-log_ratio(eps, shift)] of f from its shift.

    Closed form shift^2/2 for the Gaussian; adaptive quadrature otherwise.
    """
    if not math.isfinite(shift):
        raise ValueError(f"shift must be finite, got {shift}")
    if d.kind == "gaussian":
        return 0.5 * shift * shift
    lo, hi = _support_window(d.log_pdf)

    def integrand(x):
        return math.exp(float(d.log_pdf(x))) * (
            float(d.log_pdf(x)) - float(d.log_pdf(x + shift))
        )

    value, abserr = integrate.quad(integrand, lo, hi, epsabs=0.0,
                                   epsrel=_QUAD_RELTOL, limit=200)
    if not math.isfinite(value):
        raise NumericalError(
            f"KL quadrature for density {d.name!r} diverged on [{lo}, {hi}]"
        )
    return value


def _support_window(log_pdf) -> tuple[float, float]:
    """Interval outside which f is below the quadrature floor (1e-30)."""
    lo = -1.0
    hi = 1.0
    for _ in range(64):
        if float(log_pdf(lo)) < _DENSITY_FLOOR_LOG:
            break
        lo *= 2.0
    else:
        raise NumericalError("density does not fall below the quadrature floor on the left")
    for _ in range(64):
        if float(log_pdf(hi)) < _DENSITY_FLOOR_LOG:
            break
        hi *= 2.0
    else:
        raise NumericalError("density does not fall below the quadrature floor on the right")
    return lo, hi


def _fisher_by_quadrature(log_pdf) -> float:
    """Adaptive quadrature of f'^2/f = f * (d/dx ln f)^2."""
    lo, hi = _support_window(log_pdf)

    def integrand(x):
        h = 1e-5 * (1.0 + abs(x))
        dlogf = (float(log_pdf(x + h)) - float(log_pdf(x - h))) / (2.0 * h)
        return math.exp(float(log_pdf(x))) * dlogf * dlogf

    value, abserr = integrate.quad(integrand, lo, hi, epsabs=0.0,
                                   epsrel=_QUAD_RELTOL, limit=200)
    if not (math.isfinite(value) and value > 0.0):
        raise NumericalError(
            f"Fisher quadrature failed: estimate {value} on domain [{lo}, {hi}]"
        )
    if abserr > 100.0 * _QUAD_RELTOL * abs(value):
        raise NumericalError(
            f"Fisher quadrature did not converge: estimate {value}, "
            f"error estimate {abserr}, domain [{lo}, {hi}]"
        )
    return value


def custom_density(name: str,
                   log_pdf: Callable[[np.ndarray], np.ndarray],
                   sampler: Callable[[np.random.Generator, int], np.ndarray],
                   fisher_info: float | None = None) -> JumpDensitySpec:
    """Build a density spec from a log-density and a sampler.

    The caller is responsible for f being a strictly positive density with
    mean 0 and variance 1, and for the sampler consuming its stream one
    draw per innovation.  Fisher information is computed by quadrature
    unless supplied.
    """

    def log_ratio(eps, shift):
        eps = np.asarray(eps, dtype=np.float64)
        return np.asarray(log_pdf(eps + shift), dtype=np.float64) - np.asarray(
            log_pdf(eps), dtype=np.float64)

    if fisher_info is None:
        fisher_info = _fisher_by_quadrature(log_pdf)
    return JumpDensitySpec(
        name=name,
        sampler=sampler,
        log_ratio=log_ratio,
        log_pdf=log_pdf,
        fisher_info=float(fisher_info),
        kind="custom",
    )
