"""Radial conforming discretization of the ball B_R in R^4.

Nodes ``r_k = k h`` with ``r_{n-1} = R``. Radial profiles are continuous and
piecewise linear in ``r`` (the P1 space), so every discrete state is a genuine
H^1_0 radial function. Energies use exact integrals over that space: the
stiffness in closed form, the L^2 and quartic terms by 4-point Gauss-Legendre
per element, which is exact for the degree-7 integrands involved. Hence the
discrete functional is the continuous one restricted to a subspace, the
Sobolev inequality holds verbatim for discrete states, and discrete least
levels are upper bounds that decrease under nested refinement.

Nodal fields are paired through a lumped quadrature ``weights`` chosen so
that the nodal Laplacian ``-W^{-1} K`` is exact on ``r^2`` at every node
(including the origin, where it reads ``4 u''(0)``) and the weights add up to
the exact r^3-moment of ``[0, R]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

from .errors import BadParameters, GridMismatch, IterationNotConverged, LambdaOutOfRange

SPHERE_AREA = 2.0 * np.pi**2  # |S^3|

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
GAUSS_NODES = 0.5 * (_GL_X + 1.0)  # on [0, 1]
GAUSS_WEIGHTS = 0.5 * _GL_W


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial mesh of [0, R]. ``grading = 0`` is uniform; ``grading = g > 0``
    places nodes at R (e^{g s} - 1)/(e^g - 1), s uniform in [0, 1], so the
    cells near the origin are about e^g times smaller than those at R."""

    radius: float
    n: int
    grading: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise BadParameters(f"radius must be positive, got {self.radius}")
        if int(self.n) != self.n or self.n < 16:
            raise BadParameters(f"need n >= 16 nodes, got {self.n}")
        if not (np.isfinite(self.grading) and 0 <= self.grading <= 30):
            raise BadParameters(f"grading must lie in [0, 30], got {self.grading}")

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and self.radius == other.radius
            and self.n == other.n
            and self.grading == other.grading
        )

    def __hash__(self):
        return hash((self.radius, self.n, self.grading))

    @property
    def uniform(self) -> bool:
        return self.grading == 0

    @property
    def h(self) -> float:
        """Largest cell size."""
        return float(self.spacing.max())

    @cached_property
    def nodes(self) -> np.ndarray:
        s = np.arange(self.n) / (self.n - 1)
        if self.grading < 1e-8:  # indistinguishable from uniform, avoids expm1 underflow
            r = s * self.radius
        else:
            r = self.radius * np.expm1(self.grading * s) / np.expm1(self.grading)
        r[0] = 0.0
        r[-1] = self.radius
        r.setflags(write=False)
        return r

    @cached_property
    def spacing(self) -> np.ndarray:
        d = np.diff(self.nodes)
        d.setflags(write=False)
        return d

    @cached_property
    def half_nodes(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @cached_property
    def flux_weights(self) -> np.ndarray:
        """Per element, int r^3 dr / h_e^2, so that int u'^2 r^3 = sum s_e (du_e)^2."""
        s = np.diff(self.nodes**4) / (4.0 * self.spacing**2)
        s.setflags(write=False)
        return s

    @cached_property
    def weights(self) -> np.ndarray:
        """Lumped nodal r^3-weights; ``integrate`` multiplies by |S^3|.

        Interior weights are w_k = -(K r^2)_k / 8, which makes the nodal
        Laplacian exact on r^2; the boundary weight completes R^4/4."""
        r = self.nodes
        G = np.diff(r**4) * self.half_nodes / (2.0 * self.spacing) / 8.0
        w = np.empty(self.n)
        w[0] = G[0]
        w[1:-1] = np.diff(G)
        w[-1] = self.radius**4 / 4.0 - G[-1]
        w.setflags(write=False)
        return w

    @cached_property
    def quad_points(self) -> np.ndarray:
        """Gauss points, shape (n-1, 4)."""
        return self.nodes[:-1, None] + self.spacing[:, None] * GAUSS_NODES[None, :]

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """r^3-weighted Gauss weights matching ``quad_points``."""
        return self.spacing[:, None] * GAUSS_WEIGHTS[None, :] * self.quad_points**3

    @cached_property
    def _mass_parts(self):
        qw = self.quad_weights
        x = GAUSS_NODES
        return (qw @ (1 - x) ** 2, qw @ ((1 - x) * x), qw @ x**2)

    def volume(self) -> float:
        return SPHERE_AREA * float(self.weights.sum())

    def to_quadrature(self, u) -> np.ndarray:
        """Values of the P1 interpolant at the Gauss points, shape (..., n-1, 4)."""
        u = np.asarray(u, dtype=float)
        x = GAUSS_NODES
        return u[..., :-1, None] * (1 - x) + u[..., 1:, None] * x

    def assemble(self, fq) -> np.ndarray:
        """Load vector int f phi_k r^3 dr from Gauss-point values of f."""
        fq = np.asarray(fq, dtype=float) * self.quad_weights
        x = GAUSS_NODES
        out = np.zeros(fq.shape[:-2] + (self.n,))
        out[..., :-1] += fq @ (1 - x)
        out[..., 1:] += fq @ x
        return out

    def stiffness_apply(self, u) -> np.ndarray:
        """K u with int u'v' r^3 dr = v^T K u (no boundary condition)."""
        du = np.diff(np.asarray(u, dtype=float), axis=-1) * self.flux_weights
        out = np.zeros(du.shape[:-1] + (self.n,))
        out[..., :-1] -= du
        out[..., 1:] += du
        return out

    def mass_apply(self, u) -> np.ndarray:
        """Consistent mass: int u v r^3 dr = v^T M u on the P1 space."""
        u = np.asarray(u, dtype=float)
        ll, lr, rr = self._mass_parts
        out = np.zeros_like(u)
        out[..., :-1] += ll * u[..., :-1] + lr * u[..., 1:]
        out[..., 1:] += lr * u[..., :-1] + rr * u[..., 1:]
        return out

    def stiffness_banded(self, shift: float = 0.0) -> np.ndarray:
        """Banded (1,1) form of K + shift*M on the interior unknowns 0..n-2."""
        s = self.flux_weights
        ll, lr, rr = self._mass_parts
        n = self.n - 1
        ab = np.zeros((3, n))
        ab[1] = s[:n] + shift * ll[:n]
        ab[1, 1:] += s[: n - 1] + shift * rr[: n - 1]
        off = -s[: n - 1] + shift * lr[: n - 1]
        ab[0, 1:] = off
        ab[2, :-1] = off
        return ab


def make_grid(R: float, n: int, grading: float = 0.0) -> RadialGrid:
    return RadialGrid(float(R), int(n), float(grading))


def refine(grid: RadialGrid) -> RadialGrid:
    """Nested refinement: every cell split in two (exactly for uniform grids)."""
    return RadialGrid(grid.radius, 2 * grid.n - 1, grid.grading)


def _check(grid: RadialGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != grid.n:
        raise GridMismatch(f"field has {f.shape[-1]} nodes, grid has {grid.n}")
    return f


def as_field(grid: RadialGrid, values) -> np.ndarray:
    """Copy ``values`` into a field with the Dirichlet node zeroed."""
    u = np.array(_check(grid, values), dtype=float)
    u[..., -1] = 0.0
    return u


def laplacian_apply(grid: RadialGrid, f) -> np.ndarray:
    """Nodal radial Laplacian ``-W^{-1} K f``; the boundary row is 0."""
    f = _check(grid, f)
    out = -grid.stiffness_apply(f)
    out[..., :-1] /= grid.weights[:-1]
    out[..., -1] = 0.0
    return out


def integrate(grid: RadialGrid, f) -> float | np.ndarray:
    """Lumped quadrature of a nodal field over the ball."""
    f = _check(grid, f)
    return SPHERE_AREA * (f @ grid.weights)


def dirichlet_form(grid: RadialGrid, u, v=None) -> float:
    """Exact int grad u . grad v for the P1 interpolants."""
    u = _check(grid, u)
    v = u if v is None else _check(grid, v)
    return SPHERE_AREA * float(np.sum(np.diff(u) * np.diff(v) * grid.flux_weights))


def l2_inner(grid: RadialGrid, u, v=None) -> float:
    """Exact int u v for the P1 interpolants."""
    u = _check(grid, u)
    v = u if v is None else _check(grid, v)
    return SPHERE_AREA * float(np.sum(grid.mass_apply(u) * v))


def lp_norm(grid: RadialGrid, u, p: float = 4.0) -> float:
    """(int |u|^p)^(1/p) for the P1 interpolant (exact for p = 2, 4)."""
    uq = grid.to_quadrature(_check(grid, u))
    return float((SPHERE_AREA * np.sum(np.abs(uq) ** p * grid.quad_weights)) ** (1.0 / p))


def _inverse_power(grid: RadialGrid, tol: float, max_iter: int) -> float:
    n = grid.n - 1
    ab = grid.stiffness_banded()

    def mass(x):
        y = np.zeros(grid.n)
        y[:n] = x
        return grid.mass_apply(y)[:n]

    x = np.cos(0.5 * np.pi * grid.nodes[:n] / grid.radius)  # close to the ground mode
    lam_old = last_change = np.inf
    for _ in range(max_iter):
        y = solve_banded((1, 1), ab, mass(x))
        y /= np.sqrt(np.dot(y, mass(y)))
        Ky = ab[1] * y
        Ky[1:] += ab[0, 1:] * y[:-1]
        Ky[:-1] += ab[2, :-1] * y[1:]
        lam = float(np.dot(y, Ky))
        x = y
        change = abs(lam - lam_old)
        if change <= tol * lam:
            return lam
        if change <= 1e-10 * lam and change >= last_change:
            return lam  # stagnated at rounding level
        lam_old, last_change = lam, change
    raise IterationNotConverged(f"inverse power iteration stalled after {max_iter} steps")


def dirichlet_lambda1(grid: RadialGrid, tol: float = 1e-13, max_iter: int = 500,
                      extrapolate: bool = True) -> float:
    """First Dirichlet eigenvalue of -Delta on the ball.

    Inverse power iteration on the generalized problem K x = lambda M x. The
    discrete value is a Rayleigh quotient over a subspace, hence an upper
    bound; with ``extrapolate`` it is Richardson-extrapolated against the
    grid with half the spacing (the error is O(h^2))."""
    lam_h = _inverse_power(grid, tol, max_iter)
    if not extrapolate:
        return lam_h
    fine = refine(grid)
    lam_h2 = _inverse_power(fine, tol, max_iter)
    return (4.0 * lam_h2 - lam_h) / 3.0


def sobolev_S(grid: RadialGrid, lambdas, restarts: int = 3, seed: int = 0,
              tol: float = 1e-9, lambda1: float | None = None) -> float:
    """S = min_i inf_u (|grad u|^2 + lambda_i |u|^2) / |u|_4^2 over radial u.

    The infimum for a given lambda is 2 sqrt(c) where c is the least energy
    of the scalar problem -Delta u + lambda u = u^3, so this runs the
    Nehari minimizer once per distinct lambda."""
    from .functional import ProblemSpec
    from .nehari import SolverOptions, minimize

    lambdas = [float(x) for x in lambdas]
    if lambda1 is None:
        lambda1 = dirichlet_lambda1(grid)
    bad = [x for x in lambdas if not -lambda1 < x < 0]
    if bad:
        raise LambdaOutOfRange(f"lambdas {bad} outside (-{lambda1:.6g}, 0)")
    best = np.inf
    for lam in sorted(set(lambdas)):
        spec = ProblemSpec(grid, [lam], [[1.0]], (0, 1), lambda1=lambda1)
        res = minimize(spec, options=SolverOptions(restarts=restarts, seed=seed, tol=tol))
        best = min(best, 2.0 * np.sqrt(res.level))
    return float(best)
