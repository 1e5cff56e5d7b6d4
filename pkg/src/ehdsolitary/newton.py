"""Damped Newton solver for the surface equation at fixed parameters.

The unknown is an even trace, represented by its cosine coefficients for the
linear solves.  Two linear paths: a dense collocation Jacobian (deterministic,
default for N <= 1024) and preconditioned GMRES using the uniform-stream
multiplier as the preconditioner.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .model import Grid, Params, WaveSolution, amplitude_of, symmetrize, tail_of
from .spectral import cosine_basis, cosine_coefficients, values_from_cosine
from .system import (
    NonFiniteTrace,
    jacobian_apply,
    lambda_min,
    linear_multiplier,
    residual,
    three_component_jacobian_apply,
    three_component_residual,
)


class NewtonError(RuntimeError):
    pass


class NoConvergence(NewtonError):
    """Iteration budget exhausted; carries the best iterate and norm history."""

    def __init__(self, message, best_t1=None, history=None):
        super().__init__(message)
        self.best_t1 = best_t1
        self.history = history or []


class LeftAdmissibleSet(NewtonError):
    """The iterate left the admissible set (lambda <= 0)."""


class SingularLinearSolve(NewtonError):
    """Jacobian factorization or Krylov iteration broke down."""


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-11            # sup-norm residual tolerance
    max_iter: int = 40
    damping: float = 0.5          # backtracking factor
    min_step: float = 2.0 ** -10
    linear_solver: str = "auto"   # auto | dense | krylov
    dense_max_n: int = 1024       # auto picks dense up to this N
    krylov_rtol: float = 1e-10
    krylov_maxiter: int = 400

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.linear_solver not in ("auto", "dense", "krylov"):
            raise ValueError("linear_solver must be auto, dense or krylov")


def build_solution(t1: np.ndarray, p: Params, g: Grid, tol: float,
                   history=None) -> WaveSolution:
    """WaveSolution record for a trace whose residual already meets tol."""
    rnorm = float(np.max(np.abs(residual(t1, p, g))))
    if rnorm > tol:
        raise NewtonError(f"residual norm {rnorm:.3e} exceeds tolerance {tol:.1e}")
    return WaveSolution(
        params=p,
        grid=g,
        t1=np.array(t1, dtype=float),
        residual_norm=rnorm,
        amplitude=amplitude_of(t1, g),
        tail=tail_of(t1, g),
        norm_history=list(history) if history is not None else None,
    )


def dense_jacobian(t1: np.ndarray, p: Params, g: Grid) -> np.ndarray:
    """Collocation Jacobian in the cosine basis, assembled column-by-column
    (batched) from directional derivatives on basis traces."""
    basis = cosine_basis(g)                       # (M, N)
    dr = jacobian_apply(t1, basis, p, g)          # (M, N)
    return cosine_coefficients(dr, g).T           # (M, M): rows output, cols input


def _preconditioner(p: Params, g: Grid) -> np.ndarray:
    """Diagonal Fourier preconditioner 1/max(|m(k)|, floor); the floor guards
    the near-zero mode close to the bifurcation threshold."""
    floor = 1e-3 * (1.0 + p.eps1)
    m = np.abs(linear_multiplier(g.wavenumbers, p))
    return 1.0 / np.maximum(m, floor)


def _use_dense(cfg: NewtonConfig, g: Grid) -> bool:
    if cfg.linear_solver == "dense":
        return True
    if cfg.linear_solver == "krylov":
        return False
    return g.n_points <= cfg.dense_max_n


def solve_newton_step(t1: np.ndarray, r: np.ndarray, p: Params, g: Grid,
                      cfg: NewtonConfig) -> np.ndarray:
    """Solve J dt = -r for the correction trace."""
    m = g.n_modes
    rhs = -cosine_coefficients(r, g)
    if _use_dense(cfg, g):
        jac = dense_jacobian(t1, p, g)
        try:
            sol = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularLinearSolve(f"dense factorization failed: {exc}") from exc
        if not np.all(np.isfinite(sol)):
            raise SingularLinearSolve("dense solve produced non-finite correction")
        return values_from_cosine(sol, g)

    diag = _preconditioner(p, g)

    def matvec(a):
        return cosine_coefficients(
            jacobian_apply(t1, values_from_cosine(a, g), p, g), g)

    op = LinearOperator((m, m), matvec=matvec)
    pre = LinearOperator((m, m), matvec=lambda a: diag * a)
    sol, info = gmres(op, rhs, rtol=cfg.krylov_rtol, atol=0.0,
                      maxiter=cfg.krylov_maxiter, M=pre)
    if info != 0 or not np.all(np.isfinite(sol)):
        raise SingularLinearSolve(f"preconditioned GMRES failed (info={info})")
    return values_from_cosine(sol, g)


def newton_solve(t1_init: np.ndarray, p: Params, g: Grid,
                 cfg: NewtonConfig = NewtonConfig()) -> WaveSolution:
    """Damped Newton iteration on the surface equation at fixed alpha.

    Every iterate is re-symmetrized to even; candidates with lambda <= 0 or a
    residual increase are rejected by backtracking.  Deterministic on the
    dense path.
    """
    if not p.alpha < p.alpha_cr:
        raise NewtonError(
            f"alpha={p.alpha} is not below alpha_cr={p.alpha_cr}; no solitary regime")
    t = symmetrize(np.array(t1_init, dtype=float))
    if not lambda_min(t, p, g) > 0:
        raise LeftAdmissibleSet("initial iterate has lambda <= 0")

    r = residual(t, p, g)
    norm = float(np.max(np.abs(r)))
    history = [norm]

    for _ in range(cfg.max_iter):
        if norm <= cfg.tol:
            return build_solution(t, p, g, cfg.tol, history)
        dt = solve_newton_step(t, r, p, g, cfg)

        step = 1.0
        accepted = False
        saw_admissible = False
        while step >= cfg.min_step:
            try:
                cand = symmetrize(t + step * dt)
                if not np.all(np.isfinite(cand)):
                    raise NonFiniteTrace("candidate iterate")
                if lambda_min(cand, p, g) <= 0:
                    step *= cfg.damping
                    continue
                saw_admissible = True
                rc = residual(cand, p, g)
            except NonFiniteTrace:
                step *= cfg.damping
                continue
            normc = float(np.max(np.abs(rc)))
            if normc < norm:
                t, r, norm = cand, rc, normc
                history.append(norm)
                accepted = True
                break
            step *= cfg.damping

        if not accepted:
            if not saw_admissible:
                raise LeftAdmissibleSet(
                    "no damped step stays in the admissible set (lambda <= 0)")
            raise NoConvergence(
                f"damping stalled at residual {norm:.3e}", best_t1=t, history=history)

    if norm <= cfg.tol:
        return build_solution(t, p, g, cfg.tol, history)
    raise NoConvergence(
        f"iteration budget exhausted at residual {norm:.3e}",
        best_t1=t, history=history)


# --- full three-component solve (elimination cross-check) -------------------

def newton_solve_three_component(t1_init, p: Params, g: Grid,
                                 cfg: NewtonConfig = NewtonConfig()):
    """Newton on the full system with the stream and electric traces kept as
    unknowns.  Returns (t1, t2, t3, history).  Dense only; intended as an
    oracle at moderate N."""
    m = g.n_modes
    basis = cosine_basis(g)
    zero = np.zeros_like(basis)

    t1 = symmetrize(np.array(t1_init, dtype=float))
    t2 = np.zeros_like(t1)
    t3 = np.zeros_like(t1)

    def full_residual(u1, u2, u3):
        r1, r2, r3 = three_component_residual(u1, u2, u3, p, g)
        return np.concatenate([cosine_coefficients(r1, g),
                               cosine_coefficients(r2, g),
                               cosine_coefficients(r3, g)])

    def sup_norm(u1, u2, u3):
        r1, r2, r3 = three_component_residual(u1, u2, u3, p, g)
        return max(float(np.max(np.abs(r))) for r in (r1, r2, r3))

    norm = sup_norm(t1, t2, t3)
    history = [norm]
    for _ in range(cfg.max_iter):
        if norm <= cfg.tol:
            return t1, t2, t3, history
        jac = np.zeros((3 * m, 3 * m))
        for j, (d1, d2, d3) in enumerate(((basis, zero, zero),
                                          (zero, basis, zero),
                                          (zero, zero, basis))):
            dr1, dr2, dr3 = three_component_jacobian_apply(
                t1, t2, t3, d1, d2, d3, p, g)
            block = np.vstack([cosine_coefficients(dr1, g).T,
                               cosine_coefficients(dr2, g).T,
                               cosine_coefficients(dr3, g).T])
            jac[:, j * m:(j + 1) * m] = block
        try:
            upd = np.linalg.solve(jac, -full_residual(t1, t2, t3))
        except np.linalg.LinAlgError as exc:
            raise SingularLinearSolve(str(exc)) from exc
        du1 = values_from_cosine(upd[:m], g)
        du2 = values_from_cosine(upd[m:2 * m], g)
        du3 = values_from_cosine(upd[2 * m:], g)

        step, accepted = 1.0, False
        while step >= cfg.min_step:
            c1 = symmetrize(t1 + step * du1)
            c2 = symmetrize(t2 + step * du2)
            c3 = symmetrize(t3 + step * du3)
            try:
                normc = sup_norm(c1, c2, c3)
            except NonFiniteTrace:
                step *= cfg.damping
                continue
            if normc < norm:
                t1, t2, t3, norm = c1, c2, c3, normc
                history.append(norm)
                accepted = True
                break
            step *= cfg.damping
        if not accepted:
            raise NoConvergence(
                f"three-component damping stalled at {norm:.3e}", history=history)
    if norm <= cfg.tol:
        return t1, t2, t3, history
    raise NoConvergence(
        f"three-component budget exhausted at {norm:.3e}", history=history)
