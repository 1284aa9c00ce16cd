"""Constrained minimization of J_Gamma on the group Nehari set.

Every iterate is projected onto the Nehari set by a group-wise rescaling
``u_h -> sqrt(t_h) u_h`` (a linear solve for ``t``), so the recorded energy is
always an upper bound for the discrete level. The descent direction is the
gradient taken in the ``<.,.>_i`` inner products (one tridiagonal solve per
component); with unit step this is the normalized fixed-point iteration
``u <- (-Delta + lambda)^{-1}(u sum_j beta_ij u_j^2)``, damped by
backtracking when the energy would increase.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cholesky_banded, cho_solve_banded

from . import algebra, functional as fn
from .discretization import SPHERE_AREA
from .errors import (
    HypothesisViolated,
    NoAdmissibleStart,
    NonPositiveProjection,
    NotConverged,
    SingularGram,
)
from .functional import ProblemSpec


@dataclass(frozen=True)
class SolverOptions:
    step: float = 1.0
    tol: float = 1e-8
    max_iter: int = 2000
    restarts: int = 20
    seed: int = 0
    collapse_ratio: float = 1e-6
    min_step: float = 1e-6
    threads: int | None = None
    perturb_tries: int = 5


@dataclass
class ProjectionResult:
    t: np.ndarray
    residual: float
    state: np.ndarray


@dataclass
class MinimizerResult:
    state: np.ndarray
    level: float
    nehari_residuals: np.ndarray
    group_l4_mass: np.ndarray
    iterations: int
    converged: bool
    semi_trivial_groups: tuple[int, ...]
    gamma: tuple[int, ...]
    stationarity: float = np.inf
    restart: int = 0
    seed: int = 0
    restart_levels: tuple = ()
    collapsed_restarts: tuple[int, ...] = ()
    l4_range: tuple[float, float] = (np.nan, np.nan)
    history: tuple[float, ...] = field(default=(), repr=False)  # J of accepted iterates

    @property
    def dispersion(self) -> float:
        levels = [x for x in self.restart_levels if np.isfinite(x)]
        return float(max(levels) - min(levels)) if levels else np.nan

    def summary(self) -> dict:
        return {
            "level": self.level,
            "converged": self.converged,
            "iterations": self.iterations,
            "stationarity": self.stationarity,
            "gamma": list(self.gamma),
            "nehari_residuals": self.nehari_residuals.tolist(),
            "group_l4_mass": self.group_l4_mass.tolist(),
            "semi_trivial_groups": list(self.semi_trivial_groups),
            "restart": self.restart,
            "seed": self.seed,
            "restart_levels": [float(x) for x in self.restart_levels],
            "collapsed_restarts": list(self.collapsed_restarts),
            "dispersion": self.dispersion,
            "l4_mass_min": self.l4_range[0],
            "l4_mass_max": self.l4_range[1],
        }


def projection_coefficients(M, norms) -> tuple[np.ndarray, float]:
    """Solve M t = norms; returns (t, relative residual).

    Raises SingularGram when M has an empty row or is numerically singular,
    NonPositiveProjection when some t_h <= 0."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    norms = np.atleast_1d(np.asarray(norms, dtype=float))
    if np.any(np.diag(M) <= 0):
        raise SingularGram("a group has no L^4 mass")
    try:
        t = np.linalg.solve(M, norms)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(str(exc)) from exc
    residual = float(np.linalg.norm(M @ t - norms) / np.linalg.norm(norms))
    if not np.all(np.isfinite(t)) or residual > 1e-6:
        raise SingularGram(f"group Gram matrix is numerically singular (residual {residual:.2e})")
    if np.any(t <= 0):
        raise NonPositiveProjection(f"projection coefficients {t} not all positive", t=t)
    return t, residual


def project(spec: ProblemSpec, u, gamma=None) -> ProjectionResult:
    """Rescale each group so that all Nehari residuals vanish.

    J(sqrt(t_1) u_1, ...) is quadratic in t, and its stationarity system is
    M_B(u) t = (||u_h||_h^2)_h."""
    gamma = spec.all_groups() if gamma is None else tuple(sorted(gamma))
    u = np.asarray(u, dtype=float)
    t, residual = projection_coefficients(
        fn.group_gram(spec, u, gamma), fn.group_norms(spec, u, gamma)
    )
    out = u.copy()
    for k, h in enumerate(gamma):
        idx = list(spec.decomp.groups[h])
        out[idx] *= np.sqrt(t[k])
    return ProjectionResult(t, residual, out)


class _Preconditioner:
    """Cholesky factors of K + lambda_i M, one per distinct lambda."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        g = spec.grid
        self._factors = {}
        for lam in set(spec.lambdas):
            ab = g.stiffness_banded(shift=lam)
            upper = np.vstack([ab[0], ab[1]])  # upper form for cholesky_banded
            self._factors[lam] = cholesky_banded(upper, lower=False)
        self._ab = {lam: g.stiffness_banded(shift=lam) for lam in set(spec.lambdas)}

    def solve(self, lam: float, rhs: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self._factors[lam], False), rhs)

    def energy(self, lam: float, x: np.ndarray) -> float:
        ab = self._ab[lam]
        Kx = ab[1] * x
        Kx[1:] += ab[0, 1:] * x[:-1]
        Kx[:-1] += ab[2, :-1] * x[1:]
        return SPHERE_AREA * float(x @ Kx)


def _direction(spec, pre, u, comps):
    """Gradient in the <.,.>_i inner products and its squared length."""
    load = fn.nonlinear_load(spec, u)
    p = np.zeros_like(u)
    length = 0.0
    for i in comps:
        lam = spec.lambdas[i]
        x = u[i, :-1] - pre.solve(lam, load[i, :-1])
        p[i, :-1] = x
        length += pre.energy(lam, x)
    return p, length


def _hump(rng, grid, center_range=(0.0, 0.6), width_range=(0.2, 0.8)):
    R = grid.radius
    r0 = rng.uniform(*center_range) * R
    w = rng.uniform(*width_range) * R
    amp = rng.uniform(0.5, 1.5)
    s = (grid.nodes - r0) / w
    v = amp * np.clip(1.0 - s**2, 0.0, None) ** 2
    v[-1] = 0.0
    return v


def _competitor_start(spec, gamma):
    """Disjoint radial humps, one annulus per group."""
    g = spec.grid
    u = np.zeros((spec.d, g.n))
    k = len(gamma)
    edges = np.linspace(0.0, g.radius, k + 1)
    for slot, h in enumerate(gamma):
        a, b = edges[slot], edges[slot + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        if slot == 0:
            v = np.clip(1.0 - (g.nodes / b) ** 2, 0.0, None) ** 2
        else:
            v = np.clip(1.0 - ((g.nodes - mid) / half) ** 2, 0.0, None) ** 2
        v[-1] = 0.0
        for i in spec.decomp.groups[h]:
            u[i] = v
    return u


def _random_start(spec, gamma, rng):
    u = np.zeros((spec.d, spec.grid.n))
    for h in gamma:
        for i in spec.decomp.groups[h]:
            u[i] = _hump(rng, spec.grid)
    return u


def _admissible_start(spec, gamma, restart, options):
    rng = np.random.default_rng([options.seed, restart])
    u = _competitor_start(spec, gamma) if restart == 0 else _random_start(spec, gamma, rng)
    for _ in range(options.perturb_tries + 1):
        try:
            return project(spec, u, gamma).state, u
        except NonPositiveProjection as exc:
            for k, h in enumerate(gamma):
                if exc.t[k] <= 0:
                    scale = np.abs(u[list(spec.decomp.groups[h])]).max()
                    for i in spec.decomp.groups[h]:
                        u[i] += 0.01 * scale * _hump(rng, spec.grid)
        except SingularGram:
            break
    return None, u


def _run_single(spec, gamma, restart, options, pre):
    comps = spec.components(gamma)
    start, raw = _admissible_start(spec, gamma, restart, options)
    if start is None:
        return None
    initial_l4 = fn.group_l4_mass(spec, raw)[list(gamma)]
    u = start
    J = fn.energy_J(spec, u, gamma)
    tau = options.step
    converged = False
    collapsed = False
    stationarity = np.inf
    it = 0
    l4_seen = [np.inf, 0.0]
    history = [J]
    for it in range(1, options.max_iter + 1):
        p, plen = _direction(spec, pre, u, comps)
        scale = float(fn.group_norms(spec, u, gamma).sum())
        stationarity = float(np.sqrt(max(plen, 0.0) / scale))
        l4 = fn.group_l4_mass(spec, u)[list(gamma)]
        l4_seen = [min(l4_seen[0], l4.min()), max(l4_seen[1], l4.max())]
        if np.any(l4 < options.collapse_ratio * initial_l4):
            collapsed = True
            break
        if stationarity <= options.tol:
            converged = True
            break
        accepted = False
        while tau >= options.min_step:
            trial = np.abs(u - tau * p)
            trial[:, -1] = 0.0
            try:
                proj = project(spec, trial, gamma)
            except (NonPositiveProjection, SingularGram):
                tau *= 0.5
                continue
            J_trial = fn.energy_J(spec, proj.state, gamma)
            if J_trial <= J + 1e-12 * abs(J):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            break
        u, J = proj.state, J_trial
        history.append(J)
        tau = min(options.step, 2.0 * tau)
    l4 = fn.group_l4_mass(spec, u)
    semi = tuple(h for k, h in enumerate(gamma) if l4[h] < options.collapse_ratio * initial_l4[k])
    if collapsed and not semi:
        semi = tuple(gamma)
    return MinimizerResult(
        state=u,
        level=J,
        nehari_residuals=fn.nehari_residuals(spec, u, gamma),
        group_l4_mass=l4[list(gamma)],
        iterations=it,
        converged=converged and not collapsed,
        semi_trivial_groups=semi,
        gamma=tuple(gamma),
        stationarity=stationarity,
        restart=restart,
        seed=options.seed,
        l4_range=(float(l4_seen[0]), float(l4_seen[1])),
        history=tuple(history),
    )


def _threads(options) -> int:
    if options.threads is not None:
        return max(1, int(options.threads))
    return max(1, int(os.environ.get("NEHARI_THREADS", "1")))


def check_cooperation(spec: ProblemSpec, gamma=None) -> None:
    gamma = spec.all_groups() if gamma is None else gamma
    for h in gamma:
        block = spec.sub_block(h)
        if np.any(block < 0):
            raise HypothesisViolated(f"cooperation within group {h} (beta_ij >= 0 on K1)")


def minimize(spec: ProblemSpec, gamma=None, options: SolverOptions | None = None,
             require_converged: bool = True) -> MinimizerResult:
    """Least-energy search on the Nehari set N_gamma, best over restarts.

    Restart 0 starts from disjoint humps (one per group); the others from
    seeded random humps. The winner is the converged, non-collapsed run with
    the lowest level (restart index breaks ties)."""
    options = options or SolverOptions()
    gamma = spec.all_groups() if gamma is None else tuple(sorted(gamma))
    check_cooperation(spec, gamma)
    pre = _Preconditioner(spec)
    restarts = list(range(max(1, options.restarts)))
    workers = _threads(options)
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(lambda r: _run_single(spec, gamma, r, options, pre), restarts))
    else:
        runs = [_run_single(spec, gamma, r, options, pre) for r in restarts]
    usable = [r for r in runs if r is not None and not r.semi_trivial_groups]
    collapsed = tuple(i for i, r in zip(restarts, runs) if r is None or r.semi_trivial_groups)
    if not usable:
        raise NoAdmissibleStart(f"all {len(restarts)} restarts collapsed or could not be projected")
    levels = tuple(r.level if r is not None else np.nan for r in runs)
    good = [r for r in usable if r.converged] or usable
    best = min(good, key=lambda r: (r.level, r.restart))
    best = replace(best, restart_levels=levels, collapsed_restarts=collapsed)
    if require_converged and not best.converged:
        err = NotConverged(
            f"no restart reached stationarity {options.tol:g} (best {best.stationarity:.2e})"
        )
        err.result = best
        raise err
    return best


@dataclass
class LevelReport:
    level: float
    dispersion: float
    restart_levels: tuple
    result: MinimizerResult = field(repr=False)


def compute_level(spec: ProblemSpec, gamma=None, options: SolverOptions | None = None) -> LevelReport:
    res = minimize(spec, gamma, options)
    return LevelReport(res.level, res.dispersion, res.restart_levels, res)


@dataclass
class ClassificationReport:
    group: int
    direction: np.ndarray
    residual: float
    distance_to_maximizers: float
    f_max: float
    maximizers: tuple
    warnings: tuple[str, ...] = ()

    def summary(self) -> dict:
        return {
            "group": self.group,
            "direction": self.direction.tolist(),
            "residual": self.residual,
            "distance_to_maximizers": self.distance_to_maximizers,
            "f_max": self.f_max,
            "maximizers": [x.tolist() for x in self.maximizers],
            "warnings": list(self.warnings),
        }


def classify_minimizer(spec: ProblemSpec, result: MinimizerResult, group: int = 0,
                       zero_tol: float = 1e-3) -> ClassificationReport:
    """Fit u_i ~ X_i w on one group and compare X with the f_max maximizers."""
    idx = list(spec.decomp.groups[group])
    lams = {spec.lambdas[i] for i in idx}
    if len(lams) != 1:
        raise HypothesisViolated(f"equal lambdas within group {group}: got {sorted(lams)}")
    check_cooperation(spec, [group])
    U = result.state[idx] * np.sqrt(SPHERE_AREA * spec.grid.weights)
    left, sing, _ = np.linalg.svd(U, full_matrices=False)
    X = left[:, 0] * np.sign(left[:, 0].sum() or 1.0)
    X = np.abs(X) if np.all(X > -1e-12) else X
    total = float(np.sum(sing**2))
    residual = float(np.sqrt(max(total - sing[0] ** 2, 0.0) / total)) if total > 0 else 0.0
    sphere = algebra.fmax(spec.sub_block(group))
    dist = min(float(np.linalg.norm(np.abs(X) - x0)) for x0 in sphere.maximizers)
    warnings = []
    if np.any(np.abs(X) < zero_tol):
        warnings.append("fitted direction has (near-)zero components: semi-trivial ground state")
    if sphere.has_zero_components:
        warnings.append("f_max is attained at a direction with zero components")
    if sphere.degenerate:
        warnings.append("f_max maximizer set is degenerate; one representative reported")
    return ClassificationReport(group, X, residual, dist, sphere.f_max, sphere.maximizers, tuple(warnings))
