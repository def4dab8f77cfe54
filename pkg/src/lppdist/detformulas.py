"""Determinantal formulas for the coupled last-passage chain.

The multi-step transition kernel of the vector chain (G(i, 1), ..., G(i, n))
is an n x n determinant of difference powers of the step-count convolution
weight,

    P[G(l+s) = y | G(l) = x] = det( Delta^(j-i) w_s(y_j - x_i) )_{i,j=1..n},

and summing the same structure gives the one-point distribution function

    P[G(m, n) <= eta] = det( Delta^(j-i-1) w_m(eta + 1) )_{i,j=1..n},  m >= n.

Both evaluate in two scalar layers: exact rationals through a fraction-free
Bareiss elimination, and floats through LAPACK's LU factorization.  The
two-point joint distribution composes two transition determinants and is a
truncated but exactly rational sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lpp import OrderedVector, StateSpaceError, _state_cap
from .weights import GeometricParameter, delta_neg_binomial

__all__ = [
    "TransitionQuery",
    "CdfQuery",
    "bareiss_determinant",
    "transition_det",
    "cdf_det",
    "joint_cdf",
]


@dataclass(frozen=True)
class TransitionQuery:
    """Endpoint pair and step count for the chain transition determinant."""

    q: GeometricParameter
    steps: int
    x: OrderedVector
    y: OrderedVector

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", GeometricParameter.coerce(self.q))
        object.__setattr__(self, "x", OrderedVector.coerce(self.x))
        object.__setattr__(self, "y", OrderedVector.coerce(self.y))
        if self.steps < 0:
            raise ValueError(f"step count must be >= 0, got {self.steps}")
        if len(self.x) != len(self.y):
            raise ValueError(
                f"endpoint dimensions differ: {len(self.x)} vs {len(self.y)}"
            )

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class CdfQuery:
    """Parameters of the one-point distribution determinant; needs m >= n >= 1."""

    q: GeometricParameter
    m: int
    n: int
    eta: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", GeometricParameter.coerce(self.q))
        if self.n < 1 or self.m < self.n:
            raise ValueError(
                f"need m >= n >= 1 (transpose the grid otherwise), got m={self.m}, n={self.n}"
            )
        if self.eta < 0:
            raise ValueError(f"threshold must be >= 0, got {self.eta}")


def bareiss_determinant(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """Exact determinant by fraction-free Bareiss elimination with row pivoting.

    Intermediate divisions are exact by construction, so the result is an
    exact rational for rational input.
    """
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    a = [[Fraction(entry) for entry in row] for row in matrix]
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            a[i][k] = Fraction(0)
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _lu_determinant(matrix: Sequence[Sequence[Fraction | int]]) -> float:
    return float(np.linalg.det(np.array(matrix, dtype=float)))


def _transition_matrix(tq: TransitionQuery) -> list[list[Fraction]]:
    q, s = tq.q, tq.steps
    return [
        [delta_neg_binomial(q, s, j - i, tq.y[j] - tq.x[i]) for j in range(tq.n)]
        for i in range(tq.n)
    ]


def transition_det(tq: TransitionQuery, *, exact: bool = True) -> Fraction | float:
    """Multi-step transition probability of the chain as a determinant.

    steps = 0 degenerates to the indicator of x = y.  The float layer reuses
    the exact entries and only swaps the determinant algorithm, so the two
    layers isolate elimination error from entry error.
    """
    if tq.steps == 0:
        hit = tq.x.entries == tq.y.entries
        return Fraction(int(hit)) if exact else float(hit)
    matrix = _transition_matrix(tq)
    return bareiss_determinant(matrix) if exact else _lu_determinant(matrix)


def cdf_det(cq: CdfQuery, *, exact: bool = True) -> Fraction | float:
    """P[G(m, n) <= eta] as an n x n determinant of difference powers at eta + 1."""
    matrix = [
        [delta_neg_binomial(cq.q, cq.m, j - i - 1, cq.eta + 1) for j in range(cq.n)]
        for i in range(cq.n)
    ]
    return bareiss_determinant(matrix) if exact else _lu_determinant(matrix)


def _ordered_tuples(bounds: Sequence[int], floor_first: int = 0):
    """Weakly increasing tuples with per-coordinate upper bounds (shared floor)."""
    n = len(bounds)
    out: list[tuple[int, ...]] = []
    cur = [0] * n

    def extend(k: int, low: int) -> None:
        if k == n:
            out.append(tuple(cur))
            return
        for v in range(low, bounds[k] + 1):
            cur[k] = v
            extend(k + 1, v)

    extend(0, floor_first)
    return out


def joint_cdf(
    q, m: int, n: int, eta1: int, eta2: int, trunc: int
) -> tuple[Fraction, Fraction]:
    """Exact two-point value P[G(m, m) <= eta1, G(n, n) <= eta2] for m < n.

    Composes the m-step transition from the origin with the (n-m)-step
    transition between intermediate and final states of the n-dimensional
    chain.  Coordinates of the intermediate state above position m are not
    pinned by eta1 and are truncated at `trunc`; the final state needs no
    truncation because its last coordinate is capped by eta2.  Returns the
    truncated value together with the contribution of intermediate states
    whose free coordinates touch the truncation bound, an exact convergence
    indicator that vanishes once trunc is large enough for the requested
    accuracy.
    """
    qp = GeometricParameter.coerce(q)
    if not (1 <= m < n):
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    if eta1 < 0 or eta2 < 0:
        return Fraction(0), Fraction(0)
    if trunc < max(eta1, eta2):
        raise ValueError(
            f"truncation bound {trunc} must be >= max(eta1, eta2) = {max(eta1, eta2)}"
        )
    origin = OrderedVector((0,) * n)
    x_bounds = [eta1] * m + [trunc] * (n - m)
    intermediates = _ordered_tuples(x_bounds)
    finals = _ordered_tuples([eta2] * n)
    cap = _state_cap()
    if len(intermediates) * len(finals) > cap:
        raise StateSpaceError(
            f"joint sum needs {len(intermediates) * len(finals)} state pairs, above the cap {cap}"
        )
    total = Fraction(0)
    edge = Fraction(0)
    for x in intermediates:
        # No final state can sit above eta2, so intermediates that already do
        # contribute exactly zero (the second determinant is a probability).
        if any(xk > eta2 for xk in x):
            continue
        xv = OrderedVector(x)
        d1 = transition_det(TransitionQuery(qp, m, origin, xv))
        if d1 == 0:
            continue
        inner = Fraction(0)
        for y in finals:
            if any(yk < xk for xk, yk in zip(x, y)):
                continue
            d2 = transition_det(TransitionQuery(qp, n - m, xv, OrderedVector(y)))
            inner += d2
        contribution = d1 * inner
        total += contribution
        if x[-1] == trunc:
            edge += contribution
    return total, edge
