"""Energy functional, norms, group Gram matrix and Nehari residuals on a
radial grid.

All integrals are exact for the piecewise-linear interpolants of the nodal
values (see :mod:`discretization`), so ``energy_J`` is the continuous energy
restricted to the discrete space.

A system state is an array of shape ``(d, n)``: one radial profile per
component, each vanishing at the last node. Group subsets ``gamma`` are
tuples of 0-based group indices; components outside ``gamma`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .algebra import GroupDecomposition
from .discretization import (
    SPHERE_AREA,
    RadialGrid,
    dirichlet_form,
    dirichlet_lambda1,
    l2_inner,
)
from .errors import GridMismatch, LambdaOutOfRange, LastNotD


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Grid, spectral shifts, coupling matrix and grouping of one system.

    ``limit_system=True`` admits lambda_i = 0, used to mimic the whole-space
    limit system on a large ball.
    """

    grid: RadialGrid
    lambdas: tuple[float, ...]
    B: np.ndarray
    decomp: GroupDecomposition
    lambda1: float | None = None
    limit_system: bool = False
    _group_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        B = algebra.as_coupling_matrix(self.B)
        decomp = self.decomp
        if not isinstance(decomp, GroupDecomposition):
            decomp = algebra.make_decomposition(decomp)
        lambdas = tuple(float(x) for x in self.lambdas)
        d = B.shape[0]
        if decomp.d != d:
            raise LastNotD(f"decomposition covers {decomp.d} components, B has {d}")
        if len(lambdas) != d:
            raise LambdaOutOfRange(f"expected {d} lambdas, got {len(lambdas)}")
        lam1 = self.lambda1 if self.lambda1 is not None else dirichlet_lambda1(self.grid)
        upper_ok = (lambda x: x <= 0) if self.limit_system else (lambda x: x < 0)
        bad = [x for x in lambdas if not (x > -lam1 and upper_ok(x))]
        if bad:
            raise LambdaOutOfRange(
                f"lambdas out of (-lambda1, 0): {bad} with lambda1 = {lam1:.6g}"
            )
        P = np.zeros((decomp.m, d))
        for h, g in enumerate(decomp.groups):
            P[h, list(g)] = 1.0
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "decomp", decomp)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "lambda1", float(lam1))
        object.__setattr__(self, "_group_matrix", P)

    @property
    def d(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.decomp.m

    def all_groups(self) -> tuple[int, ...]:
        return tuple(range(self.m))

    def components(self, gamma=None) -> list[int]:
        gamma = self.all_groups() if gamma is None else gamma
        return [i for h in gamma for i in self.decomp.groups[h]]

    def sub_block(self, h: int) -> np.ndarray:
        g = list(self.decomp.groups[h])
        return self.B[np.ix_(g, g)]


def _state(spec: ProblemSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.d, spec.grid.n):
        raise GridMismatch(f"state shape {u.shape} != {(spec.d, spec.grid.n)}")
    return u


def _gamma(spec: ProblemSpec, gamma) -> tuple[int, ...]:
    return spec.all_groups() if gamma is None else tuple(sorted(gamma))


def norm_i(spec: ProblemSpec, i: int, u) -> float:
    """Squared norm ||u||_i^2 = int |grad u|^2 + lambda_i int u^2."""
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.grid.n,):
        raise GridMismatch(f"field shape {u.shape} != ({spec.grid.n},)")
    return dirichlet_form(spec.grid, u) + spec.lambdas[i] * l2_inner(spec.grid, u)


def component_norms(spec: ProblemSpec, u) -> np.ndarray:
    """Vector of ||u_i||_i^2 for all components."""
    u = _state(spec, u)
    g = spec.grid
    grad = SPHERE_AREA * (np.diff(u, axis=1) ** 2 @ g.flux_weights)
    mass = SPHERE_AREA * np.sum(g.to_quadrature(u) ** 2 * g.quad_weights, axis=(1, 2))
    return grad + np.asarray(spec.lambdas) * mass


def group_norms(spec: ProblemSpec, u, gamma=None) -> np.ndarray:
    gamma = _gamma(spec, gamma)
    return (spec._group_matrix @ component_norms(spec, u))[list(gamma)]


def _squares_at_gauss(spec: ProblemSpec, u) -> np.ndarray:
    return spec.grid.to_quadrature(_state(spec, u)).reshape(spec.d, -1) ** 2


def quartic_matrix(spec: ProblemSpec, u) -> np.ndarray:
    """Q_ij = beta_ij int u_i^2 u_j^2."""
    u2 = _squares_at_gauss(spec, u)
    qw = spec.grid.quad_weights.ravel()
    return SPHERE_AREA * ((u2 * qw) @ u2.T) * spec.B


def group_gram(spec: ProblemSpec, u, gamma=None) -> np.ndarray:
    gamma = list(_gamma(spec, gamma))
    P = spec._group_matrix
    M = P @ quartic_matrix(spec, u) @ P.T
    return M[np.ix_(gamma, gamma)]


def group_l4_mass(spec: ProblemSpec, u) -> np.ndarray:
    """Per group, sum_{i in I_h} |u_i|_4^2."""
    u2 = _squares_at_gauss(spec, u)
    l4 = np.sqrt(SPHERE_AREA * (u2**2 @ spec.grid.quad_weights.ravel()))
    return spec._group_matrix @ l4


def energy_J(spec: ProblemSpec, u, gamma=None) -> float:
    gamma = _gamma(spec, gamma)
    return float(
        0.5 * group_norms(spec, u, gamma).sum() - 0.25 * group_gram(spec, u, gamma).sum()
    )


def nonlinear_load(spec: ProblemSpec, u) -> np.ndarray:
    """Nodal loads int u_i (sum_j beta_ij u_j^2) phi_k r^3 dr."""
    g = spec.grid
    uq = g.to_quadrature(_state(spec, u))
    f = uq * np.einsum("ij,jeq->ieq", spec.B, uq**2)
    return g.assemble(f)


def euclidean_gradient(spec: ProblemSpec, u, gamma=None) -> np.ndarray:
    """dJ/du_ik divided by |S^3|: K u_i + lambda_i M u_i - nonlinear load."""
    u = _state(spec, u)
    g = spec.grid
    active = np.zeros(spec.d, dtype=bool)
    active[spec.components(_gamma(spec, gamma))] = True
    ua = np.where(active[:, None], u, 0.0)
    G = g.stiffness_apply(ua) + np.asarray(spec.lambdas)[:, None] * g.mass_apply(ua)
    G -= nonlinear_load(spec, ua)
    G[~active] = 0.0
    G[:, -1] = 0.0
    return G


def gradient_J(spec: ProblemSpec, u, gamma=None) -> np.ndarray:
    """Nodal field approximating -Delta u_i + lambda_i u_i - u_i sum_j beta_ij u_j^2.

    It is the representative of dJ under ``pairing``, so its pairing with a
    direction is the exact directional derivative of ``energy_J``. Components
    outside ``gamma`` get zero."""
    return euclidean_gradient(spec, u, gamma) / spec.grid.weights


def pairing(spec: ProblemSpec, g, h) -> float:
    """L^2 pairing int sum_i g_i h_i."""
    return SPHERE_AREA * float(np.sum((np.asarray(g) * np.asarray(h)) @ spec.grid.weights))


def nehari_residuals(spec: ProblemSpec, u, gamma=None) -> np.ndarray:
    """Psi_k = ||u_k||_k^2 - sum_{h in gamma} M_kh for k in gamma."""
    gamma = _gamma(spec, gamma)
    return group_norms(spec, u, gamma) - group_gram(spec, u, gamma).sum(axis=1)


def in_nehari_set(spec: ProblemSpec, u, gamma=None, rtol: float = 1e-8) -> bool:
    norms = group_norms(spec, u, gamma)
    if np.any(norms <= 0):
        return False
    return bool(np.all(np.abs(nehari_residuals(spec, u, gamma)) <= rtol * norms))


def in_diagonally_dominant_set(spec: ProblemSpec, u, gamma=None) -> bool:
    return algebra.is_strictly_diagonally_dominant(group_gram(spec, u, gamma))
