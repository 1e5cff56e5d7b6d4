"""Laminar conjugate-flow algebra: the depth-parameterized Bernoulli constant
and flow force of uniform streams, critical and conjugate depths, and the
bore-exclusion verdict.

A bore would need two distinct depths sharing both the Bernoulli constant and
the flow force; the convexity of the Bernoulli function rules this out, which
these routines verify numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Params

_EQ_TOL = 1e-12       # root residual targets of the scalar solves
_FORCE_TOL = 1e-10    # flow-force equality threshold in the verdict
_BRACKET_CAP = 1e3    # guard for pathological vorticity


@dataclass(frozen=True)
class ConjugateFlowReport:
    d_cr: float
    d_star: Optional[float]
    qhat_at_1: float
    shat_at_1: float
    shat_at_star: Optional[float]
    bore_excluded: bool
    reason: str
    sign_consistent: bool


def qhat(d: float, p: Params):
    """Bernoulli constant of the uniform stream of depth d:
    (1/d^2)((2-gamma)/2 + gamma d^2/2)^2 + eps1/d^2 + 2 alpha (d - 1).

    qhat(1) = 1 + eps1 for every parameter set.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("depth must be > 0")
    val = ((0.5 * (2.0 - p.gamma) + 0.5 * p.gamma * d * d) ** 2 / (d * d)
           + p.eps1 / (d * d) + 2.0 * p.alpha * (d - 1.0))
    return float(val) if val.ndim == 0 else val


def qhat_prime(d: float, p: Params):
    d = np.asarray(d, dtype=float)
    a = 0.5 * (2.0 - p.gamma)
    b = 0.5 * p.gamma
    # d/dd of (a/d + b d)^2 + eps1/d^2 + 2 alpha (d - 1)
    val = (2.0 * (a / d + b * d) * (-a / (d * d) + b)
           - 2.0 * p.eps1 / d ** 3 + 2.0 * p.alpha)
    return float(val) if val.ndim == 0 else val


def qhat_second(d: float, p: Params):
    """Closed-form second derivative 3(2-gamma)^2/(2 d^4) + gamma^2/2 + 6 eps1/d^4,
    strictly positive for every admissible parameter set."""
    d = np.asarray(d, dtype=float)
    val = 1.5 * (2.0 - p.gamma) ** 2 / d ** 4 + 0.5 * p.gamma ** 2 + 6.0 * p.eps1 / d ** 4
    return float(val) if val.ndim == 0 else val


def shat(d: float, p: Params):
    """Flow force of the uniform stream of depth d."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("depth must be > 0")
    g = p.gamma
    val = ((2.0 - g) ** 2 / (8.0 * d) - g * g * d ** 3 / 24.0
           - (2.0 - g) * g * d / 4.0 - 0.5 * p.alpha * d * d
           + 0.5 * (2.0 * p.alpha + 1.0 + p.eps1) * d + p.eps1 / (2.0 * d))
    return float(val) if val.ndim == 0 else val


def find_dcr(p: Params) -> float:
    """Depth minimizing the Bernoulli function, by Newton on its derivative
    with a bisection fallback on a doubling bracket."""
    d = 1.0
    for _ in range(60):
        fp = qhat_prime(d, p)
        if abs(fp) < _EQ_TOL:
            return d
        step = fp / qhat_second(d, p)
        d_new = d - step
        if d_new <= 0:
            d_new = 0.5 * d
        d = d_new
    # Newton stalled; bracket by doubling outward from 1 (derivative is
    # increasing, so one sign change exists)
    lo, hi = 1.0, 1.0
    while qhat_prime(lo, p) > 0:
        lo *= 0.5
        if lo < 1.0 / _BRACKET_CAP:
            raise RuntimeError("bracket search for the critical depth failed")
    while qhat_prime(hi, p) < 0:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise RuntimeError("bracket search for the critical depth failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(qhat_prime(mid, p)) < _EQ_TOL:
            return mid
        if qhat_prime(mid, p) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_dstar(p: Params) -> Optional[float]:
    """The unique depth other than 1 matching the unit-depth Bernoulli
    constant, or None in the degenerate tangency at the critical speed.

    Lies beyond the critical depth when alpha < alpha_cr, below it otherwise.
    """
    if abs(p.alpha - p.alpha_cr) < _EQ_TOL:
        return None
    d_cr = find_dcr(p)
    target = qhat(1.0, p)
    f = lambda d: qhat(d, p) - target

    if p.alpha < p.alpha_cr:
        lo, hi = d_cr, max(2.0 * d_cr, 2.0)
        while f(hi) < 0:
            hi *= 2.0
            if hi > _BRACKET_CAP:
                raise RuntimeError("conjugate-depth bracket expansion exceeded cap")
    else:
        hi = d_cr
        lo = 0.5 * d_cr
        while f(lo) < 0:
            lo *= 0.5
            if lo < 1.0 / _BRACKET_CAP:
                raise RuntimeError("conjugate-depth bracket expansion exceeded cap")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < _EQ_TOL:
            return mid
        # f < 0 between the tangent points, > 0 outside
        if p.alpha < p.alpha_cr:
            if fm < 0:
                lo = mid
            else:
                hi = mid
        else:
            if fm < 0:
                hi = mid
            else:
                lo = mid
    mid = 0.5 * (lo + hi)
    if abs(f(mid)) < 10 * _EQ_TOL:
        return mid
    raise RuntimeError("conjugate-depth bisection did not reach tolerance")


def bore_verdict(p: Params) -> ConjugateFlowReport:
    """Assemble the conjugate-flow report.

    Bores are excluded when no second depth shares both invariants: either
    the conjugate depth does not exist (critical speed) or its flow force
    differs from the unit-depth value.  The sign of that difference must
    agree with the sign of alpha_cr - alpha.
    """
    d_cr = find_dcr(p)
    d_star = find_dstar(p)
    s1 = shat(1.0, p)
    if d_star is None:
        return ConjugateFlowReport(
            d_cr=d_cr, d_star=None, qhat_at_1=qhat(1.0, p), shat_at_1=s1,
            shat_at_star=None, bore_excluded=True,
            reason="unique depth: the Bernoulli level set degenerates to d = 1",
            sign_consistent=True)
    s_star = shat(d_star, p)
    gap = s_star - s1
    excluded = abs(gap) > _FORCE_TOL
    sign_ok = (np.sign(gap) == np.sign(p.alpha_cr - p.alpha)) if excluded else False
    reason = ("flow-force mismatch between conjugate depths"
              if excluded else
              "flow forces coincide within tolerance; verdict inconclusive")
    return ConjugateFlowReport(
        d_cr=d_cr, d_star=d_star, qhat_at_1=qhat(1.0, p), shat_at_1=s1,
        shat_at_star=s_star, bore_excluded=excluded, reason=reason,
        sign_consistent=bool(sign_ok))
