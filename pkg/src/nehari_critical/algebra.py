"""Finite-dimensional pieces: group decompositions, coupling matrices, the
quartic sphere maximization and diagonal-dominance bounds.

Indices are 0-based throughout the package: component ``i`` of a system with
``d`` components lives in ``range(d)`` and group ``h`` in ``range(m)``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FirstNotZero,
    IndexOutOfRange,
    InvalidMatrix,
    LastNotD,
    NotStrictlyIncreasing,
)


class PairClass(enum.Enum):
    DIAGONAL = "diagonal"
    SAME_GROUP = "same_group"
    CROSS_GROUP = "cross_group"


@dataclass(frozen=True)
class GroupDecomposition:
    """Consecutive grouping of ``d`` components via breakpoints
    ``0 = a_0 < a_1 < ... < a_m = d``."""

    breakpoints: tuple[int, ...]

    @property
    def d(self) -> int:
        return self.breakpoints[-1]

    @property
    def m(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def groups(self) -> tuple[tuple[int, ...], ...]:
        a = self.breakpoints
        return tuple(tuple(range(a[h], a[h + 1])) for h in range(self.m))

    def group_of(self, i: int) -> int:
        if not 0 <= i < self.d:
            raise IndexOutOfRange(f"component {i} outside range({self.d})")
        return int(np.searchsorted(self.breakpoints, i, side="right")) - 1

    @property
    def same_group_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (i, j) for g in self.groups for i in g for j in g if i != j
        )

    @property
    def cross_group_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (i, j)
            for i in range(self.d)
            for j in range(self.d)
            if self.group_of(i) != self.group_of(j)
        )


def make_decomposition(breakpoints, d: int | None = None) -> GroupDecomposition:
    a = [int(x) for x in breakpoints]
    if len(a) < 2:
        raise NotStrictlyIncreasing("need at least two breakpoints (0 and d)")
    if a[0] != 0:
        raise FirstNotZero(f"first breakpoint must be 0, got {a[0]}")
    if any(b <= c for c, b in zip(a, a[1:])):
        raise NotStrictlyIncreasing(f"breakpoints not strictly increasing: {a}")
    if d is not None and a[-1] != d:
        raise LastNotD(f"last breakpoint {a[-1]} != d = {d}")
    return GroupDecomposition(tuple(a))


def classify_pair(decomp: GroupDecomposition, i: int, j: int) -> PairClass:
    for k in (i, j):
        if not 0 <= k < decomp.d:
            raise IndexOutOfRange(f"index {k} outside range({decomp.d})")
    if i == j:
        return PairClass.DIAGONAL
    if decomp.group_of(i) == decomp.group_of(j):
        return PairClass.SAME_GROUP
    return PairClass.CROSS_GROUP


def as_coupling_matrix(entries, atol: float = 0.0) -> np.ndarray:
    """Validate and return a read-only float copy of a coupling matrix."""
    B = np.array(entries, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] == 0:
        raise InvalidMatrix(f"coupling matrix must be square, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise InvalidMatrix("coupling matrix has non-finite entries")
    if not np.allclose(B, B.T, rtol=0.0, atol=atol):
        raise InvalidMatrix("coupling matrix is not symmetric")
    if np.any(np.diag(B) <= 0):
        raise InvalidMatrix("coupling matrix needs a positive diagonal")
    B.setflags(write=False)
    return B


def quartic_form(B, X) -> float:
    """f(X) = sum_ij B_ij X_i^2 X_j^2."""
    y = np.asarray(X, dtype=float) ** 2
    return float(y @ np.asarray(B) @ y)


@dataclass(frozen=True)
class SphereMaxResult:
    f_max: float
    maximizers: tuple[np.ndarray, ...]
    degenerate: bool = False
    faces_checked: int = field(default=0, compare=False)

    @property
    def representative(self) -> np.ndarray:
        return self.maximizers[0]

    @property
    def has_zero_components(self) -> bool:
        return any(np.any(np.abs(x) < 1e-12) for x in self.maximizers)


def _face_stationary_point(Bs: np.ndarray):
    """Stationary point of y^T Bs y on the relative interior of the simplex.

    Solves Bs y = mu 1, 1^T y = 1. Returns (y, singular) or None when the
    point leaves the face."""
    k = Bs.shape[0]
    if k == 1:
        return np.ones(1), False
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = Bs
    kkt[:k, k] = -1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, _, rank, _ = np.linalg.lstsq(kkt, rhs, rcond=None)
    singular = rank < k + 1
    if np.linalg.norm(kkt @ sol - rhs) > 1e-9 * (1.0 + np.abs(Bs).max()):
        return None
    y = sol[:k]
    if np.any(y <= 0):
        return None
    return y, singular


def fmax(B, cluster_tol: float = 1e-8) -> SphereMaxResult:
    """Maximize f(X) = sum_ij B_ij X_i^2 X_j^2 over the unit sphere.

    With y = X^2 this is max y^T B y over the probability simplex. Every
    maximizer is a stationary point in the relative interior of some face, so
    enumerating faces and solving each face's KKT system is exact. Maximizers
    are returned with nonnegative entries (sign flips are implicit).
    """
    B = as_coupling_matrix(B)
    d = B.shape[0]
    scale = float(np.abs(B).max())
    candidates = []
    degenerate = False
    faces = 0
    for k in range(1, d + 1):
        for support in itertools.combinations(range(d), k):
            faces += 1
            idx = list(support)
            found = _face_stationary_point(B[np.ix_(idx, idx)])
            if found is None:
                continue
            ys, singular = found
            y = np.zeros(d)
            y[idx] = ys
            candidates.append((float(y @ B @ y), y, singular))
    best = max(c[0] for c in candidates)
    tol = 1e-10 * max(scale, 1.0)
    maximizers: list[np.ndarray] = []
    for value, y, singular in candidates:
        if value < best - tol:
            continue
        if singular:
            # face carries an affine continuum of stationary points
            degenerate = True
        x = np.sqrt(y)
        x /= np.linalg.norm(x)
        if all(np.linalg.norm(x - z) > cluster_tol for z in maximizers):
            maximizers.append(x)
    if len(maximizers) > 1 and not degenerate:
        # two maximizers sharing a face imply a maximizing segment between them
        for x1, x2 in itertools.combinations(maximizers, 2):
            mid = 0.5 * (x1**2 + x2**2)
            if abs(float(mid @ B @ mid) - best) <= tol:
                degenerate = True
                break
    if degenerate:
        maximizers = maximizers[:1]
    return SphereMaxResult(best, tuple(maximizers), degenerate, faces)


def gershgorin_lower_bound(M) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    diag = np.diag(M)
    off = np.abs(M).sum(axis=1) - np.abs(diag)
    return float(np.min(diag - off))


def is_strictly_diagonally_dominant(M) -> bool:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    diag = np.abs(np.diag(M))
    off = np.abs(M).sum(axis=1) - diag
    return bool(np.all(diag > off))
