"""Constrained descent, Newton refinement, and continuation in the
coupling strength for the k-component cubic system.

A continuation run walks the coupling schedule upward, warm-starting each
stage from the previous converged state.  The first stage is produced by
anchoring a Newton solve at a large coupling (where the segregated
initial guess is nearly exact) and walking the coupling down adaptively
to the schedule's start; plain descent from the initial guess at weak
coupling falls into the wrong basin, while the walk follows the branch.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .assignment import Assignment
from .errors import (
    ConfigError,
    LeftNeighborhood,
    MaximizerFailure,
    NegativityPersistent,
    NewtonDivergence,
    SolveError,
    StageFailure,
)
from .grid import RadialGrid, apply_tridiag, h1_norm_sq, solve_tridiag
from .nehari import MaximizerReport, PulseEnsemble, coupled_energy, maximize_phi
from .scalar import NodalProfile

LAMBDA_UNIT_TOL = 1e-6


@dataclass
class SolverConfig:
    beta_schedule: tuple = (1.0, 10.0, 100.0, 1000.0, 10000.0)
    epsilon: float = 0.5
    outer_tol: float = 1e-7
    newton_tol: float = 1e-10
    max_iters: int = 150
    anchor_beta: float = 1e4

    def __post_init__(self) -> None:
        sched = tuple(float(b) for b in self.beta_schedule)
        if len(sched) == 0:
            raise ConfigError("beta_schedule must be nonempty")
        if any(b <= 0 for b in sched):
            raise ConfigError("beta_schedule entries must be positive")
        if any(b2 <= b1 for b1, b2 in zip(sched, sched[1:])):
            raise ConfigError("beta_schedule must be strictly increasing")
        self.beta_schedule = sched
        for name in ("epsilon", "outer_tol", "newton_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")


@dataclass
class SolutionRecord:
    beta: float
    ensemble: PulseEnsemble
    lambda_bar: np.ndarray
    energy: float
    residual: float
    d_to_K: float
    overlaps: np.ndarray
    in_nehari: bool
    hessian_negdef: bool = False
    accepted: bool = False
    maximizer: Optional[MaximizerReport] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "lambda_bar": [float(x) for x in self.lambda_bar],
            "energy": self.energy,
            "residual": self.residual,
            "d_to_K": self.d_to_K,
            "overlaps": [[float(x) for x in row] for row in self.overlaps],
            "in_nehari": self.in_nehari,
            "hessian_negdef": self.hessian_negdef,
            "accepted": self.accepted,
        }


def initial_guess(profile: NodalProfile, assignment: Assignment) -> PulseEnsemble:
    """Pulse (i, m) starts as the bump it is assigned to."""
    if profile.h != assignment.h:
        raise ConfigError(
            f"profile has {profile.h} bumps, assignment expects {assignment.h}"
        )
    return PulseEnsemble(
        grid=profile.grid,
        assignment=assignment,
        pulses=np.array([np.asarray(b, float) for b in profile.bumps]),
    )


def pulse_distance(ensemble: PulseEnsemble, profile: NodalProfile) -> float:
    """Aggregate H1 distance pulse-to-bump under the assignment order."""
    if profile.h != ensemble.assignment.h:
        raise ConfigError("bump count mismatch")
    grid = ensemble.grid
    total = 0.0
    for l in range(profile.h):
        diff = ensemble.pulses[l] - np.asarray(profile.bumps[l], float)
        total += h1_norm_sq(grid, diff)
    return float(np.sqrt(total))


def residual_components(grid: RadialGrid, beta: float, U: np.ndarray) -> np.ndarray:
    """Discrete residual of each component equation; identity row at r_max."""
    k = U.shape[0]
    R = np.empty_like(U)
    for i in range(k):
        T = sum(U[j] ** 2 for j in range(k) if j != i)
        R[i] = (
            apply_tridiag(grid.op_lower, grid.op_diag, grid.op_upper, U[i])
            - U[i] ** 3
            + beta * U[i] * T
        )
        R[i, -1] = U[i, -1]
    return R


def component_centers(grid: RadialGrid, assignment: Assignment, U: np.ndarray,
                      reference=None):
    """Per-pulse center indices read off the current component fields.

    For each component the tallest local maxima (the origin counts as
    one) are matched to its pulses in radial order.  Components showing
    fewer maxima than pulses keep the reference centers, so a dissolving
    state degrades instead of producing sliver cuts.
    """
    h = assignment.h
    centers = list(reference) if reference is not None else [0] * h
    for i in range(1, assignment.k + 1):
        qs = [q for q in range(h) if assignment.sigma[q] == i]
        u = U[i - 1]
        peak = float(u.max())
        if peak <= 0:
            continue
        cand = []
        for j in range(len(u) - 1):
            left = u[j - 1] if j > 0 else -np.inf
            if u[j] > left and u[j] >= u[j + 1] and u[j] > 1e-3 * peak:
                cand.append(j)
        cand = sorted(sorted(cand, key=lambda j: u[j])[-len(qs):])
        if len(cand) == len(qs):
            for q, j in zip(qs, cand):
                centers[q] = int(j)
    return centers


def split_components(grid: RadialGrid, assignment: Assignment, U: np.ndarray,
                     centers) -> np.ndarray:
    """Re-extract pulses: cut each component at its interior local minima
    between consecutive pulse centers."""
    h, k, n = assignment.h, assignment.k, grid.n_points
    P = np.zeros((h, n))
    for i in range(1, k + 1):
        qs = sorted(
            (q for q in range(h) if assignment.sigma[q] == i),
            key=lambda q: centers[q],
        )
        cuts = []
        for a, b in zip(qs[:-1], qs[1:]):
            ja, jb = centers[a], centers[b]
            if jb <= ja + 1:
                cuts.append(ja + 1)
                continue
            cuts.append(ja + int(np.argmin(U[i - 1][ja : jb + 1])))
        bnds = [0] + cuts + [n]
        for q, (ja, jb) in zip(qs, zip(bnds[:-1], bnds[1:])):
            P[q, ja:jb] = np.maximum(U[i - 1][ja:jb], 0.0)
    return P


def coupled_newton(grid: RadialGrid, beta: float, U: np.ndarray,
                   tol: float = 1e-10, maxit: int = 60,
                   history: Optional[list] = None):
    """Damped banded Newton on the k-field system; returns (U, resid, iters).

    Unknowns are node-major (all components per node adjacent), so the
    Jacobian has bandwidth k.
    """
    k, n = U.shape
    U = U.copy()
    F = residual_components(grid, beta, U)
    nf = float(np.max(np.abs(F)))
    if history is not None:
        history.append(nf)
    for it in range(maxit):
        if nf < tol:
            return U, nf, it
        ab = np.zeros((2 * k + 1, k * n))
        T = [sum(U[j] ** 2 for j in range(k) if j != i) for i in range(k)]
        for i in range(k):
            rows = i + k * np.arange(n)
            dii = (grid.op_diag - 3 * U[i] ** 2 + beta * T[i]).copy()
            dii[-1] = 1.0
            ab[k, rows] = dii
            ab[0, rows[:-1] + k] = grid.op_upper
            ab[2 * k, rows[1:] - k] = grid.op_lower
            ab[2 * k, rows[-1] - k] = 0.0
            for j in range(k):
                if j == i:
                    continue
                vals = (2 * beta * U[i] * U[j]).copy()
                vals[-1] = 0.0
                ab[k + i - j, j + k * np.arange(n)] = vals
        d = solve_banded((k, k), ab, -F.T.reshape(-1))
        dU = d.reshape(n, k).T
        t = 1.0
        ok = False
        for _ in range(50):
            Un = U + t * dU
            Fn = residual_components(grid, beta, Un)
            nn = float(np.max(np.abs(Fn)))
            if nn < (1 - 0.25 * t) * nf:
                U, F, nf = Un, Fn, nn
                ok = True
                if history is not None:
                    history.append(nf)
                break
            t *= 0.5
        if not ok:
            return U, nf, it
    return U, nf, maxit


def minimize_m_beta(beta: float, start: PulseEnsemble, config: SolverConfig,
                    target: Optional[NodalProfile] = None,
                    trace: Optional[list] = None) -> PulseEnsemble:
    """Descend the maximized scaling energy in the pulses.

    The descent direction is the preconditioned residual of the scaled
    components, weighted per pulse by its scaling (the scaling maximizer
    is critical, so no scaling derivative enters); Armijo backtracking
    with positivity clipping, re-maximization each accepted step.
    """
    grid = start.grid
    assignment = start.assignment
    h, k = assignment.h, assignment.k
    w = grid.quad_weights
    P = start.pulses.copy()
    report = maximize_phi(beta, start)
    lam = report.lambda_bar.values.copy()
    centers = [int(np.argmax(P[q])) for q in range(h)]
    ens = PulseEnsemble(grid, assignment, P)
    U = ens.components(lam)
    M = coupled_energy(grid, beta, U)
    if trace is not None:
        trace.append(M)
    for _ in range(config.max_iters):
        lamfield = np.zeros((k, grid.n_points))
        for q in range(h):
            i = assignment.sigma[q] - 1
            lamfield[i][P[q] > 0] = lam[q]
        lamfield[lamfield == 0] = 1.0
        R = residual_components(grid, beta, U)
        D = np.empty_like(R)
        gsq = 0.0
        for i in range(k):
            rhs_ = R[i] * lamfield[i]
            D[i] = solve_tridiag(grid.op_lower, grid.op_diag, grid.op_upper, rhs_)
            act = ~((U[i] <= 0) & (D[i] > 0))
            gsq += np.dot(w, (rhs_ * D[i]) * act)
        gn = np.sqrt(max(gsq, 0.0))
        if gn < config.outer_tol:
            break
        t = 1.0
        ok = False
        for _ in range(30):
            Un = np.maximum(U - t * D, 0.0)
            Un[:, -1] = 0.0
            Pn = split_components(grid, assignment, Un, centers)
            ens_n = PulseEnsemble(grid, assignment, Pn)
            try:
                rep_n = maximize_phi(beta, ens_n, x0=lam)
            except MaximizerFailure:
                # trial left the region where the scaling energy has a
                # finite maximum; shrink the step
                t *= 0.5
                continue
            Mn = rep_n.m_value
            if Mn < M - 1e-4 * t * gsq:
                U, P, lam, M = Un, Pn, rep_n.lambda_bar.values.copy(), Mn
                ok = True
                if trace is not None:
                    trace.append(M)
                break
            t *= 0.5
        if not ok:
            break
        centers = [int(np.argmax(P[q])) for q in range(h)]
        if target is not None:
            ens = PulseEnsemble(grid, assignment, P)
            if pulse_distance(ens, target) > config.epsilon:
                warnings.warn(
                    "descent iterate left the trust distance", LeftNeighborhood
                )
    return PulseEnsemble(grid, assignment, P)


def newton_refine(beta: float, ensemble: PulseEnsemble,
                  config: Optional[SolverConfig] = None,
                  target: Optional[NodalProfile] = None) -> SolutionRecord:
    """Solve the coupled system from the scaled ensemble and re-extract
    pulses; the record carries the residual, scaling state, and overlaps."""
    if config is None:
        config = SolverConfig()
    grid = ensemble.grid
    assignment = ensemble.assignment
    report = maximize_phi(beta, ensemble)
    lam = report.lambda_bar.values
    U0 = ensemble.components(lam)
    U, resid, _ = coupled_newton(grid, beta, U0, tol=config.newton_tol, maxit=80)
    if resid > max(1e-8, config.newton_tol * 10):
        raise NewtonDivergence(f"coupled solve stalled at residual {resid:.2e}")
    if U.min() < -1e-9:
        warnings.warn(
            f"component min {U.min():.2e} negative after damping",
            NegativityPersistent,
        )
    U = np.maximum(U, 0.0)
    resid = float(np.max(np.abs(residual_components(grid, beta, U))))
    centers = [int(np.argmax(ensemble.pulses[q])) for q in range(assignment.h)]
    P = split_components(grid, assignment, U, centers)
    refined = PulseEnsemble(grid, assignment, P)
    rep = maximize_phi(beta, refined)
    lam_bar = rep.lambda_bar.values
    k = assignment.k
    w = grid.quad_weights
    overlaps = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                overlaps[i, j] = np.dot(w, U[i] ** 2 * U[j] ** 2)
    in_nehari = bool(np.max(np.abs(lam_bar - 1.0)) < LAMBDA_UNIT_TOL)
    energy = coupled_energy(grid, beta, U)
    d_to_K = pulse_distance(refined, target) if target is not None else float("nan")
    return SolutionRecord(
        beta=float(beta),
        ensemble=refined,
        lambda_bar=lam_bar,
        energy=energy,
        residual=resid,
        d_to_K=d_to_K,
        overlaps=overlaps,
        in_nehari=in_nehari,
        hessian_negdef=rep.hessian_negdef,
        accepted=bool(resid < max(1e-8, config.newton_tol * 10))
        and in_nehari
        and rep.hessian_negdef,
        maximizer=rep,
    )


def _walk_beta(grid: RadialGrid, U, b_from: float, b_to: float,
               tol: float = 1e-10, max_solves: int = 400):
    """Adaptive log-beta walk from a converged state at b_from to b_to."""
    U = U.copy()
    lf, lt = np.log10(b_from), np.log10(b_to)
    pos = lf
    step = lt - lf
    solves = 0
    while abs(pos - lt) > 1e-14 and solves < max_solves:
        trial = pos + step if abs(step) < abs(lt - pos) else lt
        U2, res, _ = coupled_newton(grid, 10.0**trial, U, tol=tol, maxit=40)
        solves += 1
        if res < tol:
            U, pos = U2, trial
            step *= 1.7
            if abs(step) > abs(lt - pos):
                step = lt - pos
        else:
            step *= 0.35
            if abs(step) < 1e-4:
                return U, 10.0**pos, solves, False
    return U, 10.0**pos, solves, solves < max_solves


def continuation(profile: NodalProfile, assignment: Assignment,
                 config: SolverConfig) -> list:
    """One SolutionRecord per schedule stage, warm starts throughout.

    The first stage state comes from anchoring at a large coupling (the
    segregated guess converges there) and walking the coupling down along
    the branch; later stages reuse the previous stage's state.  Stage
    failures are recorded and the run continues from the last good state.
    """
    grid = profile.grid
    guess = initial_guess(profile, assignment)
    schedule = config.beta_schedule
    records = []
    anchor = max(config.anchor_beta, schedule[0])
    K = guess.components()
    U, res, _ = coupled_newton(grid, anchor, K, tol=config.newton_tol, maxit=120)
    if res > config.newton_tol:
        raise NewtonDivergence(f"anchor solve stalled at residual {res:.2e}")
    if abs(anchor - schedule[0]) > 0:
        U, reached, _, ok = _walk_beta(
            grid, U, anchor, schedule[0], tol=config.newton_tol
        )
        if not ok:
            raise NewtonDivergence(
                f"branch walk stalled near coupling {reached:.4g}"
            )
    centers = [int(np.argmax(guess.pulses[q])) for q in range(assignment.h)]
    # the walked-down state is compressed relative to the segregated guess,
    # so re-locate the bump centers before cutting it into pulses
    centers = component_centers(grid, assignment, U, reference=centers)
    state = PulseEnsemble(
        grid, assignment, split_components(grid, assignment, U, centers)
    )
    prev_beta = schedule[0]
    prev_U = U
    for beta in schedule:
        try:
            if beta != prev_beta:
                # direct jump, adaptive walk as fallback
                U2, res, _ = coupled_newton(
                    grid, beta, prev_U, tol=config.newton_tol, maxit=40
                )
                if res > config.newton_tol:
                    U2, _, _, ok = _walk_beta(
                        grid, prev_U, prev_beta, beta, tol=config.newton_tol
                    )
                    if not ok:
                        raise NewtonDivergence(
                            f"no converged state at coupling {beta:g}"
                        )
                centers = component_centers(
                    grid, assignment, U2, reference=centers
                )
                state = PulseEnsemble(
                    grid,
                    assignment,
                    split_components(grid, assignment, U2, centers),
                )
            ens = minimize_m_beta(beta, state, config, target=profile)
            rec = newton_refine(beta, ens, config=config, target=profile)
            records.append(rec)
            state = rec.ensemble
            centers = [
                int(np.argmax(state.pulses[q])) for q in range(assignment.h)
            ]
            prev_U = state.components(rec.lambda_bar)
            prev_beta = beta
        except SolveError as exc:
            # keep going from the last good state; the stage is absent
            # from the records rather than papered over
            warnings.warn(
                f"stage beta={beta:g} failed: {exc}",
                StageFailure,
                stacklevel=2,
            )
            continue
    return records
