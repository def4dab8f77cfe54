"""Meixner ensemble representation of the last-passage distribution.

P[G(m, n) <= eta] equals the probability that all n particles of the Meixner
orthogonal polynomial ensemble with weight rho(x) = binom(x + m - n, x) q^x
sit inside {0, ..., eta + n - 1}:

    P = (1 / Z_{m,n}) sum_{x in box^n} Delta(x)^2 prod_j rho(x_j),

with Delta the Vandermonde product and Z the same sum over the full lattice.
Two independent evaluations are provided: an exact rational brute-force box
sum whose normalization comes from a closed-form Hankel moment determinant
(Andreief / Cauchy-Binet reduction), and a high-precision Gram route that
forms both the box and full-lattice moment matrices numerically and takes the
ratio of their determinants.  The module also evaluates the underlying
Meixner polynomials through their generating-function contour integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath

from .detformulas import bareiss_determinant
from .lpp import StateSpaceError, _state_cap
from .weights import ContourConfig, GeometricParameter, adaptive_circle_integral

__all__ = [
    "MeixnerEnsembleQuery",
    "PrecisionLossError",
    "vandermonde",
    "meixner_weight",
    "partition_function",
    "meixner_cdf_bruteforce",
    "meixner_cdf_gram",
    "meixner_poly",
]

_BRUTEFORCE_MAX_N = 4


class PrecisionLossError(RuntimeError):
    """Working precision cannot support the conditioning of the Gram matrices."""


@dataclass(frozen=True)
class MeixnerEnsembleQuery:
    """Ensemble parameters; eta = -1 is the empty box with probability zero."""

    q: GeometricParameter
    m: int
    n: int
    eta: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", GeometricParameter.coerce(self.q))
        if self.n < 1 or self.m < self.n:
            raise ValueError(
                f"need m >= n >= 1, got m={self.m}, n={self.n}"
            )
        if self.eta < -1:
            raise ValueError(f"threshold must be >= -1, got {self.eta}")

    @property
    def box_high(self) -> int:
        """Largest admissible particle position, eta + n - 1."""
        return self.eta + self.n - 1


def vandermonde(x) -> int:
    """prod_{i<j} (x_j - x_i) over one particle configuration."""
    xs = list(x)
    out = 1
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out *= xs[j] - xs[i]
    return out


def meixner_weight(q, a: int, x: int) -> Fraction:
    """Single-particle weight binom(x + a, x) q^x (a = m - n >= 0)."""
    qv = GeometricParameter.coerce(q).value
    if x < 0:
        return Fraction(0)
    return Fraction(math.comb(x + a, x)) * qv**x


def _stirling2_row(r: int) -> list[int]:
    """Stirling numbers of the second kind S(r, 0..r)."""
    row = [1]
    for size in range(1, r + 1):
        prev = row
        row = [0] * (size + 1)
        for k in range(1, size + 1):
            row[k] = k * (prev[k] if k < size else 0) + prev[k - 1]
    return row


def _exact_moment(q: Fraction, a: int, r: int) -> Fraction:
    """Closed form of sum_{x>=0} x^r binom(x+a, x) q^x.

    Applying (q d/dq)^r to the binomial series of (1-q)^-(a+1) and expanding
    the operator in ordinary derivatives through Stirling numbers of the
    second kind gives

        mu_r = sum_k S2(r, k) q^k (a+1)^(k, rising) (1-q)^-(a+1+k).
    """
    s2 = _stirling2_row(r)
    total = Fraction(0)
    for k in range(r + 1):
        rising = math.prod(a + 1 + t for t in range(k))
        total += s2[k] * q**k * rising * (1 - q) ** (-(a + 1 + k))
    return total


def partition_function(q, m: int, n: int) -> Fraction:
    """Exact full-lattice normalization Z_{m,n} = n! det(mu_{i+j-2})_{i,j=1..n}."""
    qv = GeometricParameter.coerce(q).value
    a = m - n
    moments = [_exact_moment(qv, a, r) for r in range(2 * n - 1)]
    hankel = [[moments[i + j] for j in range(n)] for i in range(n)]
    return math.factorial(n) * bareiss_determinant(hankel)


def meixner_cdf_bruteforce(mq: MeixnerEnsembleQuery) -> Fraction:
    """Exact rational box sum of the ensemble over {0, ..., eta+n-1}^n.

    The numerator enumerates the full box (no symmetry reduction, which keeps
    the implementation honest as a brute-force oracle); the normalization is
    the closed-form moment determinant.  n is capped at 4 and the box size at
    the MEIXNER_MAX_STATES cap.
    """
    n, mdim, eta = mq.n, mq.m, mq.eta
    if n > _BRUTEFORCE_MAX_N:
        raise StateSpaceError(f"brute-force box sum supports n <= {_BRUTEFORCE_MAX_N}, got {n}")
    if eta < 0:
        return Fraction(0)
    hi = mq.box_high
    cells = (hi + 1) ** n
    cap = _state_cap()
    if cells > cap:
        raise StateSpaceError(f"box sum needs {cells} terms, above the cap {cap}")
    qv = mq.q.value
    a = mdim - n
    site = [meixner_weight(qv, a, x) for x in range(hi + 1)]
    numerator = Fraction(0)
    for config in product(range(hi + 1), repeat=n):
        v = vandermonde(config)
        if v == 0:
            continue
        term = Fraction(v * v)
        for x in config:
            term *= site[x]
        numerator += term
    return numerator / partition_function(mq.q, mdim, n)


def _gram_moments(mq: MeixnerEnsembleQuery, shift, dps: int):
    """Box and full-lattice power moments of the shifted particle positions."""
    n, eta = mq.n, mq.eta
    a = mq.m - n
    qf = mpmath.mpf(mq.q.value.numerator) / mq.q.value.denominator
    top = 2 * n - 2
    hi = mq.box_high

    def weight(x: int) -> mpmath.mpf:
        return mpmath.mpf(math.comb(x + a, x)) * qf**x

    box = [mpmath.mpf(0)] * (top + 1)
    full = [mpmath.mpf(0)] * (top + 1)

    def accumulate(target, x: int, rho) -> None:
        centered = mpmath.mpf(x) - shift
        power = mpmath.mpf(1)
        for r in range(top + 1):
            target[r] += power * rho
            power *= centered

    x = 0
    tail_eps = mpmath.mpf(10) ** (-(dps + 10))
    x_cap = 1_000_000
    while True:
        rho = weight(x)
        if x <= hi:
            accumulate(box, x, rho)
        accumulate(full, x, rho)
        if x > hi and x > 2 * top and x > 4 * abs(shift) + 8:
            # Beyond this point the summand of every moment decays at least
            # geometrically with this ratio, giving an explicit tail bound.
            ratio = qf * (x + 1 + a) / (x + 1) * ((x + 1 - shift) / (x - shift)) ** top
            if ratio < 1:
                tail = abs(mpmath.mpf(x) - shift) ** top * rho * ratio / (1 - ratio)
                if tail < tail_eps * max(mpmath.mpf(1), full[0]):
                    break
        x += 1
        if x > x_cap:
            raise PrecisionLossError(f"full-lattice moment sum did not close within {x_cap} terms")
    return box, full


def _hankel(moments, n: int):
    mat = mpmath.matrix(n, n)
    for i in range(n):
        for j in range(n):
            mat[i, j] = moments[i + j]
    return mat


def _condition_1norm(mat) -> mpmath.mpf:
    return mpmath.mnorm(mat, 1) * mpmath.mnorm(mpmath.inverse(mat), 1)


def meixner_cdf_gram(mq: MeixnerEnsembleQuery, precision: int = 50):
    """High-precision ensemble probability as a ratio of Gram determinants.

    Both the box-restricted and full-lattice moment matrices are formed in
    centered monomials (x - (eta+n-1)/2)^k to tame their conditioning; the
    centering is a determinant-preserving basis change, so the ratio is the
    ensemble probability exactly.  Raises PrecisionLossError when the
    conditioning of either matrix eats more than the working precision can
    support.  Returns an mpmath float with `precision` significant digits.
    """
    if precision < 10:
        raise ValueError(f"precision must be >= 10 digits, got {precision}")
    if mq.eta < 0:
        return mpmath.mpf(0)
    n = mq.n
    with mpmath.workdps(precision + 15):
        shift = mpmath.mpf(mq.box_high) / 2
        box_mom, full_mom = _gram_moments(mq, shift, precision + 15)
        box = _hankel(box_mom, n)
        full = _hankel(full_mom, n)
        cond = max(_condition_1norm(box), _condition_1norm(full))
        if cond > mpmath.mpf(10) ** (precision - 2):
            raise PrecisionLossError(
                f"Gram condition estimate {mpmath.nstr(cond, 3)} exceeds what "
                f"{precision} digits support; raise precision"
            )
        value = mpmath.det(box) / mpmath.det(full)
    with mpmath.workdps(precision):
        return +value


def meixner_poly(q, beta: int, j: int, x: int, cfg: ContourConfig | None = None) -> float:
    """Meixner polynomial value p_j(x) for the weight binom(x+beta-1, x) q^x.

    Evaluated through the generating-function coefficient extraction

        p_j(x) = (j! / 2 pi i) oint (1 - z/q)^x (1 - z)^-(x+beta) z^-(j+1) dz

    on a circle of radius 1/2 (any radius inside the unit disk works: the
    integrand is analytic in the punctured disk).  Normalization is fixed by
    p_0 = 1; orthogonality w.r.t. the weight holds up to constants.
    """
    if beta < 1:
        raise ValueError(f"weight parameter must be >= 1, got {beta}")
    if j < 0:
        raise ValueError(f"degree must be >= 0, got {j}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    qf = float(GeometricParameter.coerce(q))
    nodes = cfg.nodes if cfg is not None else 256

    def integrand(z):
        return (1 - z / qf) ** x / ((1 - z) ** (x + beta) * z ** (j + 1))

    val = adaptive_circle_integral(integrand, 0.5, nodes)
    return math.factorial(j) * float(val.real)
