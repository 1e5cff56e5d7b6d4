"""Planar reduced dynamics of the small-amplitude regime: the truncated
right-hand side, its explicit localized orbit, an energy-conserving RK4 check
integrator, and phase-portrait sampling.

In scaled variables the truncated system is
    Q' = P,   P' = 3 Q - c2 Q^2,       c2 = (3/2)(3 - 3 gamma + gamma^2 + eps1),
with first integral
    E = P^2/2 - (3/2) Q^2 + (c2/3) Q^3
(obtained by multiplying the equation by Q' and integrating).  The separatrix
through (q0, 0), q0 = 3/c2 * (3/2) ... = 3/(3 - 3 gamma + gamma^2 + eps1), is
the localized sech^2 orbit; only the second-order truncation is implemented
and the truncation order is recorded on every orbit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ValidationError

TRUNCATION_ORDER = 2  # quadratic truncation of the reduced right-hand side


@dataclass(frozen=True)
class OdeParams:
    gamma: float
    eps1: float
    eps: float = 0.0

    def __post_init__(self):
        if self.eps1 < 0:
            raise ValidationError("eps1", "must be >= 0")
        if self.eps < 0:
            raise ValidationError("eps", "bifurcation parameter must be >= 0")
        # 3 - 3g + g^2 has negative discriminant, so the denominator is
        # positive for every real gamma once eps1 >= 0
        assert self.denom > 0

    @property
    def denom(self) -> float:
        return 3.0 - 3.0 * self.gamma + self.gamma ** 2 + self.eps1

    @property
    def c2(self) -> float:
        """Coefficient of the quadratic term, (3/2)(3 - 3 gamma + gamma^2 + eps1)."""
        return 1.5 * self.denom

    @property
    def q0(self) -> float:
        """Crest value of the localized orbit in scaled variables."""
        return 3.0 / self.denom


def f_reduced(a: float, b: float, eps: float, p: OdeParams) -> float:
    """Truncated reduced right-hand side 3 eps A - c2 A^2.

    Independent of the slope argument b at this truncation order (the exact
    right-hand side is even in b).
    """
    return 3.0 * eps * a - p.c2 * a * a


def homoclinic_exact(x, p: OdeParams):
    """Closed-form localized orbit q0 sech^2(sqrt(3) x / 2) of the scaled
    equation; even in x with maximum q0 at x = 0."""
    x = np.asarray(x, dtype=float)
    val = p.q0 / np.cosh(0.5 * np.sqrt(3.0) * x) ** 2
    return float(val) if val.ndim == 0 else val


def homoclinic_slope(x, p: OdeParams):
    """Derivative of the closed-form orbit."""
    x = np.asarray(x, dtype=float)
    u = 0.5 * np.sqrt(3.0) * x
    val = -np.sqrt(3.0) * p.q0 * np.tanh(u) / np.cosh(u) ** 2
    return float(val) if val.ndim == 0 else val


def energy(q, pdot, p: OdeParams):
    """First integral E = P^2/2 - (3/2) Q^2 + (c2/3) Q^3 of the scaled system."""
    q = np.asarray(q, dtype=float)
    pdot = np.asarray(pdot, dtype=float)
    val = 0.5 * pdot * pdot - 1.5 * q * q + (p.c2 / 3.0) * q ** 3
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True, eq=False)
class Orbit:
    x: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy_drift: float
    escaped: bool
    step_warning: bool          # set when the drift exceeds 1e-6
    truncation_order: int = TRUNCATION_ORDER


def _rhs(q, pdot, p: OdeParams):
    return pdot, 3.0 * q - p.c2 * q * q


def integrate_orbit(q_init: float, p_init: float, p: OdeParams,
                    dt: float, n_steps: int,
                    escape_factor: float = 10.0) -> Orbit:
    """Classical fixed-step RK4 on the scaled planar system.

    Terminates early with the escaped flag once |Q| exceeds
    escape_factor * q0; flags the step size when the first-integral drift
    exceeds 1e-6.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    qs = np.empty(n_steps + 1)
    ps = np.empty(n_steps + 1)
    qs[0], ps[0] = q_init, p_init
    q, v = float(q_init), float(p_init)
    escaped = False
    count = n_steps
    for i in range(n_steps):
        k1q, k1p = _rhs(q, v, p)
        k2q, k2p = _rhs(q + 0.5 * dt * k1q, v + 0.5 * dt * k1p, p)
        k3q, k3p = _rhs(q + 0.5 * dt * k2q, v + 0.5 * dt * k2p, p)
        k4q, k4p = _rhs(q + dt * k3q, v + dt * k3p, p)
        q += (dt / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
        v += (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        qs[i + 1], ps[i + 1] = q, v
        if abs(q) > escape_factor * p.q0:
            escaped = True
            count = i + 1
            break
    qs, ps = qs[:count + 1], ps[:count + 1]
    xs = dt * np.arange(count + 1)
    e = energy(qs, ps, p)
    drift = float(np.max(np.abs(e - e[0])))
    return Orbit(x=xs, q=qs, p=ps, energy_drift=drift,
                 escaped=escaped, step_warning=drift > 1e-6)


def phase_portrait(p: OdeParams, q0_list, dt: float = 1e-3,
                   x_max: float = 20.0) -> list:
    """Orbits launched from (Q0, 0) for each Q0; suitable for plotting.

    Launch points below the separatrix crest trace closed loops, the crest
    itself traces the localized orbit, and higher launches escape and are
    flagged.
    """
    n_steps = int(round(x_max / dt))
    return [integrate_orbit(q0, 0.0, p, dt, n_steps) for q0 in q0_list]


def closed_orbit_return(q0: float, p: OdeParams, dt: float = 1e-3,
                        max_steps: int = 200_000) -> Optional[float]:
    """Distance to the launch point (q0, 0) at the first full revolution,
    or None if no return is detected within the budget.

    The crossing of P through zero is refined by bisection on the integrated
    flow, so the returned closure error reflects the integrator, not the
    sampling stride.
    """
    def flow(q, v, h):
        k1q, k1p = _rhs(q, v, p)
        k2q, k2p = _rhs(q + 0.5 * h * k1q, v + 0.5 * h * k1p, p)
        k3q, k3p = _rhs(q + 0.5 * h * k2q, v + 0.5 * h * k2p, p)
        k4q, k4p = _rhs(q + h * k3q, v + h * k3p, p)
        return (q + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q),
                v + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p))

    q, v = float(q0), 0.0
    crossings = 0
    for _ in range(max_steps):
        qn, vn = flow(q, v, dt)
        if abs(qn) > 10.0 * p.q0:
            return None
        if v != 0.0 and np.sign(vn) != np.sign(v) and vn != 0.0:
            # refine the crossing time by bisection on the sub-step
            lo, hi = 0.0, dt
            ql, vl = q, v
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                qm, vm = flow(q, v, mid)
                if np.sign(vm) == np.sign(vl) and vm != 0.0:
                    lo = mid
                    ql, vl = qm, vm
                else:
                    hi = mid
            crossings += 1
            if crossings == 2:
                return float(np.hypot(ql - q0, vl))
        q, v = qn, vn
    return None
