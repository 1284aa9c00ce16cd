"""Whole-space objects in R^4: Aubin-Talenti bubbles, ground states of the
cooperative sub-systems and their levels, the limit-system level, and overlap
integrals between bubbles centred at different points.

Radial integrals use composite Gauss-Legendre rules on geometric panels
(fine near the concentration scale, coarse far out) and are checked against
a rule with twice as many points per panel. Bubble integrals over R^4 are
truncated and the exact tail beyond the truncation radius is added back.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import algebra
from .algebra import GroupDecomposition
from .discretization import SPHERE_AREA
from .errors import CooperationViolated, HypothesisViolated, QuadratureNotConverged

S_TILDE_SQ_EXACT = 32.0 * np.pi**2 / 3.0  # 128 pi^2 B(2,2)/2, reference value
NOT_ATTAINED = "not_attained"

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(k: int):
    if k not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(k)
        _GL_CACHE[k] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[k]


def _as_point(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.size > 4:
        raise ValueError(f"points live in R^4, got {y.size} coordinates")
    return np.pad(y, (0, 4 - y.size))


@dataclass(frozen=True)
class Bubble:
    """U_{eps,y}(x) = 2 sqrt(2) eps / (eps^2 + |x - y|^2)."""

    epsilon: float
    center: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "center", tuple(_as_point(self.center)))

    def radial(self, s):
        """Profile as a function of the distance s to the centre."""
        s = np.asarray(s, dtype=float)
        return 2.0 * np.sqrt(2.0) * self.epsilon / (self.epsilon**2 + s**2)

    def radial_derivative(self, s):
        s = np.asarray(s, dtype=float)
        return -4.0 * np.sqrt(2.0) * self.epsilon * s / (self.epsilon**2 + s**2) ** 2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 4:
            x = np.stack([_as_point(p) for p in np.atleast_2d(x)])
        dist = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        return self.radial(dist)


def bubble_eval(b: Bubble, x) -> float | np.ndarray:
    """Value of the bubble at a point (or an array of points, last axis 4)."""
    out = b(x)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- quadrature

def _geometric_edges(lo: float, hi: float, scale: float, breakpoints=()) -> np.ndarray:
    """Panel edges on [lo, hi]: dyadic multiples of ``scale`` plus breakpoints."""
    if hi <= lo:
        return np.array([lo, lo])
    k_lo = int(np.floor(np.log2(max(scale, 1e-300)))) - 14
    k_hi = int(np.ceil(np.log2(max(hi, scale)))) + 1
    edges = 2.0 ** np.arange(k_lo, k_hi + 1)
    edges = np.concatenate(([lo, hi], edges, np.asarray(breakpoints, dtype=float)))
    edges = np.unique(edges[(edges >= lo) & (edges <= hi)])
    # split wide linear-looking panels so none is wider than its left edge
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        pieces = max(1, int(np.ceil((b - a) / max(a, scale))))
        pieces = min(pieces, 64)
        out.extend(a + (b - a) * np.arange(1, pieces + 1) / pieces)
    return np.asarray(out)


def _panel_rule(edges: np.ndarray, k: int):
    x, w = _gauss(k)
    a, b = edges[:-1, None], edges[1:, None]
    pts = a + (b - a) * x
    wts = (b - a) * w
    return pts.ravel(), wts.ravel()


def radial_integral(fn, upper: float, scale: float = 1.0, breakpoints=(), order: int = 20,
                    rtol: float = 1e-11, tail: float = 0.0) -> float:
    """|S^3| int_0^upper fn(s) s^3 ds plus an optional precomputed tail.

    Evaluated with ``order`` and ``2*order`` Gauss points per panel;
    QuadratureNotConverged if the two disagree beyond ``rtol``."""
    edges = _geometric_edges(0.0, upper, scale, breakpoints)
    values = []
    for k in (order, 2 * order):
        pts, wts = _panel_rule(edges, k)
        values.append(SPHERE_AREA * float(np.sum(fn(pts) * pts**3 * wts)))
    if abs(values[1] - values[0]) > rtol * max(abs(values[1]), 1e-300):
        raise QuadratureNotConverged(
            f"radial quadrature unresolved: {values[0]!r} vs {values[1]!r}"
        )
    return values[1] + tail


@dataclass(frozen=True)
class BubbleIntegrals:
    gradient: float  # int |grad U|^2
    quartic: float   # int U^4
    cutoff: float
    tail: float      # closed-form contribution of |x| > cutoff (both integrals)

    @property
    def ratio(self) -> float:
        return self.gradient / self.quartic


def _bubble_tails(eps: float, R: float) -> tuple[float, float]:
    """Exact int_{|x|>R} of |grad U|^2 and U^4 (substitute t = s^2)."""
    a = eps**2
    W = a + R**2
    quartic = SPHERE_AREA * 64 * a**2 * 0.5 * (1 / (2 * W**2) - a / (3 * W**3))
    gradient = SPHERE_AREA * 32 * a * 0.5 * (1 / W - a / W**2 + a**2 / (3 * W**3))
    return gradient, quartic


def bubble_integrals(eps: float = 1.0, cutoff: float = 64.0, rtol: float = 1e-11) -> BubbleIntegrals:
    """int |grad U_eps|^2 and int U_eps^4 over R^4.

    Quadrature on [0, cutoff * eps] plus the exact tails beyond it."""
    b = Bubble(eps)
    R = cutoff * eps
    quartic = radial_integral(lambda s: b.radial(s) ** 4, R, eps, rtol=rtol)
    gradient = radial_integral(lambda s: b.radial_derivative(s) ** 2, R, eps, rtol=rtol)
    g_tail, q_tail = _bubble_tails(eps, R)
    return BubbleIntegrals(gradient + g_tail, quartic + q_tail, R, g_tail + q_tail)


@lru_cache(maxsize=None)
def sobolev_tilde_sq() -> float:
    """S~^2 = int |grad U|^2 = int U^4 for the standard bubble (value 32 pi^2/3)."""
    return bubble_integrals(1.0).quartic


# ------------------------------------------------------------ sub-systems

def _cooperative_block(B_sub) -> np.ndarray:
    B = algebra.as_coupling_matrix(B_sub)
    off = B - np.diag(np.diag(B))
    if np.any(off < 0):
        i, j = np.argwhere(off < 0)[0]
        raise CooperationViolated(f"beta[{i},{j}] = {B[i, j]} < 0 inside a group")
    return B


def subsystem_level(B_sub) -> float:
    """l_h = S~^2 / (4 f_max) for a cooperative block."""
    B = _cooperative_block(B_sub)
    return sobolev_tilde_sq() / (4.0 * algebra.fmax(B).f_max)


@dataclass(frozen=True)
class SubsystemGroundState:
    direction: np.ndarray
    f_max: float
    bubble: Bubble

    @property
    def coefficients(self) -> np.ndarray:
        """c_i with V_i = c_i U, i.e. X_i / sqrt(f_max)."""
        return self.direction / np.sqrt(self.f_max)

    def components(self, x) -> np.ndarray:
        return self.coefficients[:, None] * np.atleast_1d(self.bubble(x))[None, :]

    def radial_components(self, s) -> np.ndarray:
        return self.coefficients[:, None] * np.atleast_1d(self.bubble.radial(s))[None, :]

    def energy(self, B_sub) -> float:
        """E_h(V) = 1/2 sum int |grad V_i|^2 - 1/4 sum beta_ij int V_i^2 V_j^2."""
        B = np.asarray(B_sub, dtype=float)
        ints = bubble_integrals(self.bubble.epsilon)
        c2 = self.coefficients**2
        return 0.5 * c2.sum() * ints.gradient - 0.25 * float(c2 @ B @ c2) * ints.quartic


def subsystem_ground_state(B_sub, eps: float = 1.0, center=(0.0,)) -> SubsystemGroundState:
    B = _cooperative_block(B_sub)
    res = algebra.fmax(B)
    return SubsystemGroundState(res.representative.copy(), res.f_max, Bubble(eps, center))


@dataclass(frozen=True)
class LimitLevel:
    l_h: tuple[float, ...]
    l_total: float
    attained: bool = False

    @property
    def marker(self) -> str:
        return "attained" if self.attained else NOT_ATTAINED


def limit_level(B, decomp) -> LimitLevel:
    """sum_h l_h for the whole-space system with zero lambdas.

    Requires cooperation inside groups, no cooperation across groups, and
    two groups whose whole cross block is strictly negative; then the level
    equals sum_h l_h and is not attained."""
    B = algebra.as_coupling_matrix(B)
    if not isinstance(decomp, GroupDecomposition):
        decomp = algebra.make_decomposition(decomp, B.shape[0])
    if decomp.d != B.shape[0]:
        raise HypothesisViolated(f"decomposition covers {decomp.d} components, B has {B.shape[0]}")
    for i, j in sorted(decomp.same_group_pairs):
        if B[i, j] < 0:
            raise HypothesisViolated(f"same-group coupling beta[{i},{j}] = {B[i, j]} must be >= 0")
    for i, j in sorted(decomp.cross_group_pairs):
        if B[i, j] > 0:
            raise HypothesisViolated(f"cross-group coupling beta[{i},{j}] = {B[i, j]} must be <= 0")
    groups = decomp.groups
    negative_pair = any(
        np.all(B[np.ix_(groups[h], groups[k])] < 0)
        for h in range(decomp.m)
        for k in range(h + 1, decomp.m)
    )
    if decomp.m < 2 or not negative_pair:
        raise HypothesisViolated(
            "need two groups whose cross block is strictly negative"
        )
    levels = tuple(
        subsystem_level(B[np.ix_(g, g)]) for g in groups
    )
    return LimitLevel(levels, float(sum(levels)), attained=False)


# ---------------------------------------------------------- two-centre integrals

def _half_space_integral(f, g, R: float, scale: float, reach: float, n_theta: int,
                         order: int, breakpoints=()) -> float:
    """int over {x . e <= R/2} of f(|x|) g(|x - R e|), polar about the origin.

    ``reach`` bounds the support of f (np.inf for none)."""
    th_edges = np.linspace(0.0, np.pi, n_theta + 1)
    th, thw = _panel_rule(th_edges, 16)
    total = 0.0
    for theta, wt in zip(th, thw):
        c = np.cos(theta)
        smax = R / (2.0 * c) if c > 1e-300 else np.inf
        upper = min(smax, reach)
        if not np.isfinite(upper):
            upper = 1e6 * max(scale, R, 1.0)
        edges = _geometric_edges(0.0, upper, scale, tuple(breakpoints) + ((R,) if R > 0 else ()))
        s, w = _panel_rule(edges, order)
        dist = np.sqrt(np.maximum(s**2 + R**2 - 2.0 * R * s * c, 0.0))
        inner = np.sum(f(s) * g(dist) * s**3 * w)
        total += wt * 4.0 * np.pi * np.sin(theta) ** 2 * inner
    return float(total)


def two_center_integral(f, g, separation: float, scale_f: float = 1.0, scale_g: float = 1.0,
                        reach_f: float = np.inf, reach_g: float = np.inf,
                        breaks_f=(), breaks_g=(), rtol: float = 1e-8) -> float:
    """int_{R^4} f(|x|) g(|x - R e_1|) dx for radial f, g (vectorized).

    The space is split by the bisecting hyperplane and each half is written
    in polar coordinates about its own centre, so each inner integrand is
    peaked only at the origin of its coordinates. Refinement check against a
    rule with doubled resolution."""
    R = float(separation)
    if R < 0:
        raise ValueError("separation must be >= 0")
    vals = []
    for n_theta, order in ((8, 16), (16, 24)):
        a = _half_space_integral(f, g, R, scale_f, reach_f, n_theta, order, breaks_f)
        b = _half_space_integral(g, f, R, scale_g, reach_g, n_theta, order, breaks_g)
        vals.append(a + b)
    if abs(vals[1] - vals[0]) > rtol * max(abs(vals[1]), 1e-300):
        raise QuadratureNotConverged(f"two-centre quadrature unresolved: {vals[0]!r} vs {vals[1]!r}")
    return vals[1]


def bubble_overlap(eps1: float, eps2: float, separation: float, rtol: float = 1e-8) -> float:
    """int U_{eps1,0}^2 U_{eps2,R e}^2 over R^4."""
    if not (eps1 > 0 and eps2 > 0):
        raise ValueError("bubble scales must be positive")
    b1, b2 = Bubble(eps1), Bubble(eps2)
    return two_center_integral(
        lambda s: b1.radial(s) ** 2,
        lambda s: b2.radial(s) ** 2,
        separation,
        eps1,
        eps2,
        rtol=rtol,
    )


# ----------------------------------------------------- vector Sobolev inequality

def vector_sobolev_residual(v, B_sub, grid=None, quadrature=None) -> float:
    """(sum int |grad v_i|^2)^2 - 4 l_h int sum beta_ij v_i^2 v_j^2.

    ``v`` is either an array (k, n) of nodal profiles on ``grid`` (exact P1
    integrals), or a callable returning (k, len(s)) radial profiles together
    with their radial derivatives, integrated on ``quadrature = (upper,
    scale)`` over the whole space."""
    B = _cooperative_block(B_sub)
    l_h = subsystem_level(B)
    if callable(v):
        upper, scale = quadrature if quadrature is not None else (1e4, 1.0)
        vals = lambda s: v(s)[0]
        ders = lambda s: v(s)[1]
        grad = radial_integral(lambda s: np.sum(ders(s) ** 2, axis=0), upper, scale, rtol=1e-9)
        quart = radial_integral(
            lambda s: np.einsum("is,ij,js->s", vals(s) ** 2, B, vals(s) ** 2), upper, scale,
            rtol=1e-9,
        )
    else:
        from .discretization import dirichlet_form

        v = np.atleast_2d(np.asarray(v, dtype=float))
        grad = sum(dirichlet_form(grid, vi) for vi in v)
        vq2 = grid.to_quadrature(v).reshape(v.shape[0], -1) ** 2
        qw = grid.quad_weights.ravel()
        quart = SPHERE_AREA * float(np.sum(((vq2 * qw) @ vq2.T) * B))
    return float(grad**2 - 4.0 * l_h * quart)
