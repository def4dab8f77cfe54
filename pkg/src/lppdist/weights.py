"""Scalar calculus for geometric weight models.

The model parameter is an exact rational q in (0, 1).  The one-site weight is
the geometric law P[w = k] = (1-q) q^k on k >= 0, and its m-fold convolution
is the negative binomial

    w_m(x) = (1-q)^m binom(x+m-1, x) q^x        for x >= 0, else 0.

On top of these the module provides the forward difference calculus

    (Delta f)(x)      = f(x+1) - f(x)
    (Delta^-1 f)(x)   = sum_{y <= x-1} f(y)     (f vanishing below a support bound)

with integer powers of either sign, the discrete kernels h^{*k} that represent
repeated summation as a convolution, and a contour-integral evaluation of
Delta^k w_m built on trapezoidal quadrature over circles.  Exact operations
return `fractions.Fraction`; the contour route returns floats and is the
independent cross-check used by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GeometricParameter",
    "ContourConfig",
    "QuadratureError",
    "geometric_pmf",
    "neg_binomial",
    "delta_pow",
    "delta_neg_binomial",
    "heaviside_conv_pow",
    "delta_w_contour",
    "circle_nodes",
    "circle_integral",
    "adaptive_circle_integral",
]


class QuadratureError(RuntimeError):
    """Contour quadrature failed to converge within the node cap."""


@dataclass(frozen=True)
class GeometricParameter:
    """Exact success parameter q of the geometric law, strictly inside (0, 1).

    Floats are rejected on purpose: every exact code path in the package
    depends on q being a true rational, and a float would silently promote
    Fraction arithmetic to binary approximations of itself.
    """

    value: Fraction

    def __post_init__(self) -> None:
        v = self.value
        if isinstance(v, float):
            raise TypeError(
                "q must be exact; pass a Fraction or a string like '1/2', not a float"
            )
        if not isinstance(v, Fraction):
            v = Fraction(v)
            object.__setattr__(self, "value", v)
        if not (0 < v < 1):
            raise ValueError(f"q must satisfy 0 < q < 1, got {v}")

    @classmethod
    def coerce(cls, q: "GeometricParameter | Fraction | str | int") -> "GeometricParameter":
        if isinstance(q, cls):
            return q
        if isinstance(q, float):
            raise TypeError(
                "q must be exact; pass a Fraction or a string like '1/2', not a float"
            )
        return cls(Fraction(q))

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return str(self.value)


def _q(q) -> Fraction:
    return GeometricParameter.coerce(q).value


@dataclass(frozen=True)
class ContourConfig:
    """Radii and node count for the circle quadratures.

    r2 is the inner radius (z contour), r1 the outer (w contour); admissible
    kernels need 1 < r2 < r1 < 1/q, where the last bound depends on q and is
    checked by `validate_for`.
    """

    r2: float
    r1: float
    nodes: int = 256

    def __post_init__(self) -> None:
        if not (1.0 < self.r2 < self.r1):
            raise ValueError(f"radii must satisfy 1 < r2 < r1, got r2={self.r2}, r1={self.r1}")
        if self.nodes < 16 or self.nodes % 2:
            raise ValueError(f"node count must be even and >= 16, got {self.nodes}")

    def validate_for(self, q) -> None:
        bound = 1.0 / float(_q(q))
        if not self.r1 < bound:
            raise ValueError(
                f"outer radius {self.r1} must stay below 1/q = {bound} for q = {_q(q)}"
            )

    @classmethod
    def for_q(cls, q, nodes: int = 256) -> "ContourConfig":
        """Default geometric spacing: r2, r1 at one and two thirds of (1, 1/q) on a log scale."""
        inv = 1.0 / float(_q(q))
        return cls(r2=inv ** (1.0 / 3.0), r1=inv ** (2.0 / 3.0), nodes=nodes)


def geometric_pmf(q, k: int) -> Fraction:
    """P[w = k] = (1-q) q^k for k >= 0, zero for k < 0."""
    qv = _q(q)
    if k < 0:
        return Fraction(0)
    return (1 - qv) * qv**k


def neg_binomial(q, m: int, x: int) -> Fraction:
    """m-fold convolution of the geometric law: (1-q)^m binom(x+m-1, x) q^x for x >= 0."""
    if m < 1:
        raise ValueError(f"convolution power m must be >= 1, got {m}")
    qv = _q(q)
    if x < 0:
        return Fraction(0)
    return (1 - qv) ** m * math.comb(x + m - 1, x) * qv**x


def heaviside_conv_pow(k: int, x: int) -> int:
    """k-fold convolution power of the shifted step h(x) = 1{x >= 1}.

    h^{*k}(x) = binom(x-1, k-1) for x >= k and 0 otherwise; convolving with
    h^{*k} realizes k-fold backward summation (Delta^-k) of a function whose
    support is bounded below.
    """
    if k < 1:
        raise ValueError(f"convolution power k must be >= 1, got {k}")
    if x < k:
        return 0
    return math.comb(x - 1, k - 1)


def delta_pow(
    f: Callable[[int], Fraction | float],
    k: int,
    x: int,
    *,
    support_min: int | None = None,
):
    """Apply the k-th power of the forward difference to f and evaluate at x.

    k > 0 uses the alternating binomial expansion and needs k+1 evaluations of
    f.  k < 0 is repeated summation sum_{y <= x-1}, which is only well defined
    when f vanishes below some point; callers must pass that point as
    `support_min`.  k = 0 returns f(x).  Exactness follows the scalar type
    returned by f.
    """
    if k == 0:
        return f(x)
    if k > 0:
        total = 0
        for i in range(k + 1):
            c = math.comb(k, i)
            term = c * f(x + i)
            total = total + term if (k - i) % 2 == 0 else total - term
        return total
    if support_min is None:
        raise ValueError("negative-order differences need a support bound (support_min)")
    depth = -k
    if x <= support_min:
        return 0
    # vals[i] holds the current layer's value at support_min + i; each pass
    # replaces it with the exclusive prefix sum, i.e. one backward summation.
    vals = [f(support_min + i) for i in range(x - support_min + 1)]
    for _ in range(depth):
        acc = 0
        for i, v in enumerate(vals):
            vals[i] = acc
            acc = acc + v
    return vals[-1]


def delta_neg_binomial(q, m: int, k: int, x: int) -> Fraction:
    """Exact Delta^k w_m(x) with the natural support bound 0 of w_m."""
    qv = _q(q)
    return delta_pow(lambda t: neg_binomial(qv, m, t), k, x, support_min=0)


def circle_nodes(radius: float, count: int) -> np.ndarray:
    """Equispaced quadrature nodes on the circle |z| = radius."""
    theta = 2.0 * np.pi * np.arange(count) / count
    return radius * np.exp(1j * theta)


def circle_integral(
    integrand: Callable[[np.ndarray], np.ndarray], radius: float, nodes: int
) -> np.ndarray | complex:
    """(1/2 pi i) times the contour integral over |z| = radius, N-point trapezoidal rule.

    The integrand is called once on the full node array and may return extra
    leading axes (batched evaluation); the node axis must come last.  For
    integrands analytic in an annulus around the circle the rule converges
    geometrically in N.
    """
    z = circle_nodes(radius, nodes)
    return np.mean(integrand(z) * z, axis=-1)


#: Roundoff allowance per unit of summand magnitude in the stopping rules.
ROUNDOFF = 64 * np.finfo(float).eps


def adaptive_circle_integral(
    integrand: Callable[[np.ndarray], np.ndarray],
    radius: float,
    nodes: int = 256,
    tol: float = 1e-12,
    cap: int = 8192,
) -> np.ndarray | complex:
    """Double the node count until two successive refinements agree to tol.

    Agreement is relative to max(1, largest magnitude), with an absolute
    floor proportional to the largest summand: once the difference sits at
    the roundoff level of the trapezoidal sum, more nodes cannot improve it.
    Raises QuadratureError when the cap is reached without agreement.
    """

    def refine(count: int):
        z = circle_nodes(radius, count)
        terms = integrand(z) * z
        return np.mean(terms, axis=-1), float(np.max(np.abs(terms)))

    prev, _ = refine(nodes)
    count = 2 * nodes
    while count <= cap:
        cur, summand = refine(count)
        allowed = max(tol * max(1.0, float(np.max(np.abs(cur)))), ROUNDOFF * summand)
        if float(np.max(np.abs(cur - prev))) <= allowed:
            return cur
        prev = cur
        count *= 2
    raise QuadratureError(
        f"circle quadrature did not stabilize to {tol} within {cap} nodes (radius {radius})"
    )


def delta_w_contour(q, m: int, k: int, x: int, cfg: ContourConfig | None = None,
                    tol: float = 1e-12) -> float:
    """Contour evaluation of Delta^k w_m(x).

    Represents the difference power as

        Delta^k w_m(x) = (1-q)^m /(2 pi i) oint (1-z)^k / ((1-qz)^m z^(x+k+1)) dz

    over a circle around the origin.  For k >= 0 the integrand has poles only
    at 0 and 1/q and the configured inner radius r2 < 1/q is used; for k < 0
    the factor (1-z)^k adds a pole at z = 1, so the integration circle must
    stay inside the unit disk and a dedicated radius min(0.9, (1+q)/2) < 1
    overrides cfg.r2.
    """
    if m < 1:
        raise ValueError(f"convolution power m must be >= 1, got {m}")
    qf = float(_q(q))
    if cfg is None:
        cfg = ContourConfig.for_q(q)
    if k >= 0:
        cfg.validate_for(q)
        radius = cfg.r2
    else:
        radius = min(0.9, (1.0 + qf) / 2.0)

    def integrand(z: np.ndarray) -> np.ndarray:
        return (1 - z) ** k / ((1 - qf * z) ** m * z ** (x + k + 1))

    val = adaptive_circle_integral(integrand, radius, cfg.nodes, tol=tol)
    return (1.0 - qf) ** m * float(np.real(val))
