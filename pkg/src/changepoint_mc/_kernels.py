"""Compiled scalar kernels for path simulation.

Every kernel consumes randomness from a numpy ``Generator`` in a documented
order, so an independent scalar reimplementation driving the same bit
generator reproduces the output exactly:

* compound Poisson side path, per event: one ``standard_exponential()`` for
  the waiting time, then one innovation draw (``standard_normal()`` for the
  Gaussian density, ``logistic(0, scale)`` for the logistic density), then
  the jump ``log f(eps + shift) - log f(eps)`` is added to the running sum;
* Brownian side path, per grid step: one ``standard_normal()`` for the
  increment, then one ``random()`` if and only if the step is a candidate
  for the running continuum supremum (see ``z0_side``).

Jump formulas are evaluated exactly as written here; reimplementations that
follow the same expressions in double precision match bit for bit.
"""

import math

import numpy as np
from numba import njit

KIND_GAUSSIAN = 0
KIND_LOGISTIC = 1

STATUS_OK = 0
STATUS_BUFFER_FULL = 1
STATUS_CAP_EXCEEDED = 2


@njit(cache=True)
def _softplus(z):
    if z > 0.0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


@njit(cache=True)
def _draw_jump(rng, kind, shift, scale):
    """Draw one innovation and return its log-likelihood-ratio jump."""
    if kind == KIND_GAUSSIAN:
        eps = rng.standard_normal()
        return -shift * eps - 0.5 * shift * shift
    eps = rng.logistic(0.0, scale)
    z0 = -eps / scale
    z1 = -(eps + shift) / scale
    return -shift / scale - 2.0 * (_softplus(z1) - _softplus(z0))


@njit(cache=True)
def sample_side(rng, kind, shift, scale, gap_t, max_events, times, sums,
                start_n, t0, s0, m0):
    """Extend a side path until the stopping rule fires or a limit is hit.

    ``times``/``sums`` are filled from index ``start_n + 1`` onward; the
    caller seeds index 0 with the origin.  Returns
    ``(status, n, t, s, m)`` where ``n`` is the last filled index and
    ``m`` the running maximum of the sums (including the origin).
    With STATUS_BUFFER_FULL the caller may grow the buffers and call again
    with the returned state; the random stream continues seamlessly.
    """
    cap = times.shape[0]
    i = start_n
    t = t0
    s = s0
    m = m0
    while True:
        if i >= max_events:
            return STATUS_CAP_EXCEEDED, i, t, s, m
        if i + 1 >= cap:
            return STATUS_BUFFER_FULL, i, t, s, m
        t += rng.standard_exponential()
        s += _draw_jump(rng, kind, shift, scale)
        i += 1
        times[i] = t
        sums[i] = s
        if s > m:
            m = s
        elif s <= m - gap_t:
            return STATUS_OK, i, t, s, m


@njit(cache=True)
def scan_side(rng, kind, shift, scale, gap_t, max_events, marks,
              s_at_marks, max_after_marks):
    """Sample a side path without storing it.

    ``marks`` must be sorted ascending.  For each mark the kernel records
    the path value at the mark position (``s_at_marks``) and the maximum of
    the event values strictly beyond it (``max_after_marks``, which the
    caller initialises to -inf).  Marks beyond the stopping point receive
    the final value.  Returns ``(status, n, t, s, smax)``.
    """
    nmarks = marks.shape[0]
    ptr = 0
    t = 0.0
    s = 0.0
    m = 0.0
    i = 0
    while True:
        if i >= max_events:
            return STATUS_CAP_EXCEEDED, i, t, s, m
        t_new = t + rng.standard_exponential()
        while ptr < nmarks and marks[ptr] < t_new:
            s_at_marks[ptr] = s
            ptr += 1
        s += _draw_jump(rng, kind, shift, scale)
        t = t_new
        i += 1
        for j in range(ptr):
            if s > max_after_marks[j]:
                max_after_marks[j] = s
        if s > m:
            m = s
        elif s <= m - gap_t:
            while ptr < nmarks:
                s_at_marks[ptr] = s
                ptr += 1
            return STATUS_OK, i, t, s, m


@njit(cache=True)
def side_argmax(sums):
    """Index and value of the first maximum of ``sums``."""
    m = sums[0]
    k = 0
    for i in range(1, sums.shape[0]):
        if sums[i] > m:
            m = sums[i]
            k = i
    return k, m


@njit(cache=True)
def zeta_sums(xp, sp, xm, sm, smax):
    """Signed second-moment and mass sums of a two-sided path.

    Both sums are scaled by exp(-smax) for overflow safety; the scaling
    cancels in the ratio.  Cells run over the sampled intervals
    [x_i, x_{i+1}) on each side.
    """
    num = 0.0
    den = 0.0
    for i in range(xp.shape[0] - 1):
        w = math.exp(sp[i] - smax)
        num += 0.5 * w * (xp[i + 1] * xp[i + 1] - xp[i] * xp[i])
        den += w * (xp[i + 1] - xp[i])
    for i in range(xm.shape[0] - 1):
        w = math.exp(sm[i] - smax)
        num -= 0.5 * w * (xm[i + 1] * xm[i + 1] - xm[i] * xm[i])
        den += w * (xm[i + 1] - xm[i])
    return num, den


@njit(cache=True)
def z0_side(rng, h, gap_t, max_steps, bridge_b):
    """One side of the Brownian limit on a grid of step ``h``.

    Per step: the grid increment is N(-h/2, h) drawn as
    ``g*sqrt(h) - h/2``.  The exact continuum supremum of the side is
    tracked through the cell-interior maxima of the Brownian bridges
    between grid points: a cell whose endpoint maximum plus ``bridge_b``
    exceeds the running supremum draws one uniform and inverts the bridge
    maximum CDF, ``cand = s + 0.5*(d + sqrt(d*d - 2*h*log1p(-u)))``.
    Cells failing that test cannot move the supremum (up to the miss
    probability exp(-2*bridge_b**2/h) chosen negligibly small).

    Trapezoid accumulators ``mass``/``xmass`` approximate the integrals of
    Z and x*Z over the sampled horizon.  Stops once the grid value falls
    ``gap_t`` below the running grid maximum.

    Returns (status, n, sup_exact, argmax_idx, gridmax, mass, xmass, s).
    """
    sqrt_h = math.sqrt(h)
    half_h = 0.5 * h
    s = 0.0
    e_prev = 1.0
    gridmax = 0.0
    argmax_idx = 0
    m = 0.0
    mass = 0.0
    xmass = 0.0
    i = 0
    while True:
        if i >= max_steps:
            return STATUS_CAP_EXCEEDED, i, m, argmax_idx, gridmax, mass, xmass, s
        g = rng.standard_normal()
        d = g * sqrt_h - half_h
        s_new = s + d
        pair = s if s > s_new else s_new
        if pair + bridge_b > m:
            u = rng.random()
            cand = s + 0.5 * (d + math.sqrt(d * d - 2.0 * h * math.log1p(-u)))
            if cand > m:
                m = cand
        x_prev = i * h
        i += 1
        x_new = i * h
        e_new = math.exp(s_new)
        mass += 0.5 * h * (e_prev + e_new)
        xmass += 0.5 * h * (x_prev * e_prev + x_new * e_new)
        e_prev = e_new
        s = s_new
        if s_new > gridmax:
            gridmax = s_new
            argmax_idx = i
        elif s_new <= gridmax - gap_t:
            return STATUS_OK, i, m, argmax_idx, gridmax, mass, xmass, s
