"""Rejection sampler for fN and fCN with the semicircle law fU as proposal.

The acceptance ratio r(x) = target(x)/fU(x) is bounded: for fN by the
alternating-series envelope M = sum (2k+1)|q|^{k(k+1)/2}, for fCN by
1 + sum (k+1)|gamma_k| over the Chebyshev expansion coefficients.  Both
constants are cross-checked against a dense grid supremum before any
sampling happens, and every proposal batch re-checks the bound, so a bad
envelope aborts loudly instead of skewing the output.
"""

import math
from dataclasses import dataclass

import numpy as np

from .qcore import ParameterError, QOrthoError, support
from . import connect, densities
from .densities import density_ratio, fU


class EnvelopeViolationError(QOrthoError):
    """The target/proposal ratio exceeded the declared envelope constant."""


@dataclass(frozen=True)
class SampleResult:
    samples: np.ndarray
    acceptance_rate: float
    n_proposed: int
    envelope: float
    seed: int


_GRID_N = 10001
_SLACK = 1e-9


def _series_constant(dens):
    q = dens.q
    if dens.tag == "fn":
        total, k, term = 0.0, 0, 1.0
        while term > 1e-16 * max(total, 1.0) or k < 3:
            term = (2 * k + 1) * abs(q) ** (k * (k + 1) // 2)
            total += term
            k += 1
            if k > 2000:
                return None
        return total
    if dens.tag == "fcn":
        total, small = 1.0, 0
        for k in range(1, 400):
            t = (k + 1) * abs(connect.gamma_coeff(k, dens.y, dens.rho, q))
            total += t
            small = small + 1 if t < 1e-12 else 0
            if small >= 3:
                return total
        return None
    raise ParameterError("envelope defined for fn and fcn targets only")


def envelope_constant(dens, grid_n=_GRID_N):
    """Rejection constant M with sup_x target/fU <= M, grid cross-checked."""
    if dens.tag not in ("fn", "fcn"):
        raise ParameterError("sampler supports fn and fcn targets, got %r" % dens.tag)
    if not -1 < dens.q < 1:
        raise ParameterError("sampler requires -1 < q < 1")
    L = support(dens.q).radius
    xg = np.linspace(-L, L, grid_n)
    sup = float(np.max(density_ratio(dens, fU(dens.q), xg)))
    series = _series_constant(dens)
    if series is None:
        return sup * 1.05
    return max(series, sup)


def _semicircle_ppf(u, L):
    """Inverse CDF of the semicircle law on [-L, L], vectorized.

    Solves (theta - sin(theta)cos(theta))/pi = u by bisection then Newton
    polish; x = -L cos(theta).
    """
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, math.pi)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        g = (mid - np.sin(mid) * np.cos(mid)) / math.pi
        take = g < u
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    theta = 0.5 * (lo + hi)
    for _ in range(3):
        g = (theta - np.sin(theta) * np.cos(theta)) / math.pi - u
        dg = 2.0 * np.sin(theta) ** 2 / math.pi
        step = np.where(dg > 1e-12, g / np.maximum(dg, 1e-12), 0.0)
        theta = np.clip(theta - step, 0.0, math.pi)
    return -L * np.cos(theta)


def sample(dens, n, seed=0, batch=65536, envelope=None):
    """Draw n samples from dens by rejection against the semicircle law."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    M = envelope if envelope is not None else envelope_constant(dens)
    L = support(dens.q).radius
    proposal = fU(dens.q)

    # pre-flight: the envelope must dominate the ratio on a dense grid
    xg = np.linspace(-L, L, _GRID_N)
    rg = density_ratio(dens, proposal, xg)
    if np.any(rg > M * (1 + _SLACK)):
        raise EnvelopeViolationError(
            "ratio exceeds envelope %g by %g on pre-flight grid"
            % (M, float(np.max(rg)) - M)
        )

    ss = np.random.SeedSequence(seed)
    chunks = []
    n_prop = 0
    n_acc = 0
    while n_acc < n:
        rng = np.random.default_rng(ss.spawn(1)[0])
        u = rng.random((2, batch))
        x = _semicircle_ppf(u[0], L)
        r = density_ratio(dens, proposal, x)
        if np.any(r > M * (1 + _SLACK)):
            raise EnvelopeViolationError("ratio exceeded envelope during sampling")
        keep = u[1] * M <= r
        chunks.append(x[keep])
        n_prop += batch
        n_acc += int(np.count_nonzero(keep))
        if n == 0:
            break
    samples = np.concatenate(chunks)[:n] if chunks else np.empty(0)
    rate = n_acc / n_prop if n_prop else 0.0
    return SampleResult(samples, rate, n_prop, M, seed)


def ks_statistic(samples, dens, grid_n=513):
    """Kolmogorov-Smirnov distance between samples and dens.

    The CDF is tabulated on a theta-grid (x = -L cos theta) by cumulative
    trapezoid, which keeps the edge square roots analytic.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise ParameterError("ks_statistic needs at least one sample")
    L = support(dens.q).radius
    theta = np.linspace(0.0, math.pi, grid_n)
    x = -L * np.cos(theta)
    pdf = densities.density_eval(dens, x) * L * np.sin(theta)
    dtheta = theta[1] - theta[0]
    F = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * dtheta)])
    F /= F[-1]
    s = np.sort(samples)
    Fs = np.interp(s, x, F)
    i = np.arange(1, n + 1)
    return float(max(np.max(Fs - (i - 1) / n), np.max(i / n - Fs)))
