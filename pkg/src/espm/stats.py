"""Statistical kernels used by the miner.

All functions are pure and operate on plain Python numbers; they are called
once per explored pattern, so they avoid numpy scalar overhead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import StatisticError

_EPS = 1e-16
_TINY = 1e-300
_LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ContingencyTable:
    """Pattern coverage versus label.

    ``covered[c]`` is the support of the pattern for label ``c`` and
    ``totals[c]`` the number of samples (or groups) carrying label ``c``.
    The second row is implied: ``totals[c] - covered[c]``.
    """

    covered: tuple[int, ...]
    totals: tuple[int, ...]

    def __post_init__(self):
        if len(self.covered) != len(self.totals):
            raise StatisticError("covered and totals must have the same length")
        for o, t in zip(self.covered, self.totals):
            if o < 0 or t < o:
                raise StatisticError(f"invalid cell: covered={o}, total={t}")

    @classmethod
    def from_supports(cls, supports: Sequence[int], label_counts: Sequence[int]):
        return cls(tuple(int(s) for s in supports), tuple(int(t) for t in label_counts))

    @property
    def not_covered(self) -> tuple[int, ...]:
        return tuple(t - o for o, t in zip(self.covered, self.totals))

    @property
    def grand_total(self) -> int:
        return sum(self.totals)

    def rows(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.covered, self.not_covered

    def collapse(self, label: int) -> "ContingencyTable":
        """One-vs-rest 2x2 table for ``label``."""
        rest_o = sum(self.covered) - self.covered[label]
        rest_t = self.grand_total - self.totals[label]
        return ContingencyTable(
            (self.covered[label], rest_o), (self.totals[label], rest_t)
        )


@dataclass(frozen=True)
class G2Result:
    statistic: float
    df: int
    # expected count below 5 somewhere in the table: the chi-square
    # approximation may be poor
    low_expected: bool


def g2_statistic(table: ContingencyTable) -> G2Result:
    """G^2 likelihood-ratio statistic of a 2 x |C| table.

    Columns with a zero total are dropped; ``df`` is the number of remaining
    columns minus one.
    """
    n = table.grand_total
    if n <= 0:
        raise StatisticError("G^2 is undefined for an empty table")
    cols = [c for c, t in enumerate(table.totals) if t > 0]
    if len(cols) < 2:
        raise StatisticError("G^2 needs at least two labels with non-zero totals")

    row_cov = sum(table.covered[c] for c in cols)
    row_not = n - row_cov
    g = 0.0
    low = False
    for c in cols:
        col = table.totals[c]
        o_cov = table.covered[c]
        o_not = col - o_cov
        for obs, row in ((o_cov, row_cov), (o_not, row_not)):
            expected = row * col / n
            if expected < 5.0:
                low = True
            if obs > 0:
                g += obs * math.log(obs / expected)
    g *= 2.0
    if g < 0.0:
        # rounding noise on tables that match their expectation
        g = 0.0
    return G2Result(g, len(cols) - 1, low)


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise StatisticError("gammaincc requires a > 0")
    if x < 0:
        raise StatisticError("gammaincc requires x >= 0")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    log_front = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # power series for the lower function P(a, x)
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(10000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return max(0.0, 1.0 - total * math.exp(log_front))

    # Lentz's method on the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(log_front) * h


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail probability P(chi2_df >= x)."""
    if df <= 0:
        raise StatisticError(f"degrees of freedom must be positive, got {df}")
    if x < 0:
        raise StatisticError("chi-square statistic must be non-negative")
    return gammaincc(0.5 * df, 0.5 * x)


# -- binomial ---------------------------------------------------------------

_STIRLERR_SMALL = {}


def _stirlerr(n: float) -> float:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n)."""
    if n <= 15.0:
        v = _STIRLERR_SMALL.get(n)
        if v is None:
            v = math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - 0.5 * _LN_2PI
            _STIRLERR_SMALL[n] = v
        return v
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    nn = n * n
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, np_: float) -> float:
    """Deviance term x log(x/np) + np - x, stable when x is close to np."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / np_) + np_ - x


def binomial_pmf(k: int, n: int, p: float) -> float:
    """P(X = k) for X ~ Binomial(n, p), via the saddle-point expansion."""
    q = 1.0 - p
    if k < 0 or k > n:
        return 0.0
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if q == 0.0:
        return 1.0 if k == n else 0.0
    if k == 0:
        if n == 0:
            return 1.0
        lc = -_bd0(n, n * q) - n * p if p < 0.1 else n * math.log(q)
        return math.exp(lc)
    if k == n:
        lc = -_bd0(n, n * p) - n * q if q < 0.1 else n * math.log(p)
        return math.exp(lc)
    lc = (
        _stirlerr(n)
        - _stirlerr(k)
        - _stirlerr(n - k)
        - _bd0(k, n * p)
        - _bd0(n - k, n * q)
    )
    lf = _LN_2PI + math.log(k) + math.log1p(-k / n)
    return math.exp(lc - 0.5 * lf)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    max_iter = 200 + 20 * int(math.sqrt(max(a, b)))
    for m in range(1, max_iter):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise StatisticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def _binomial_tails(n: int, k: int, p: float) -> tuple[float, float]:
    """(P(X >= k), P(X <= k - 1)); the smaller one is computed directly."""
    if k <= 0:
        return 1.0, 0.0
    if k > n:
        return 0.0, 1.0
    if p <= 0.0:
        return 0.0, 1.0
    if p >= 1.0:
        return 1.0, 0.0
    # P(X >= k) = I_p(k, n - k + 1)
    a = float(k)
    b = float(n - k + 1)
    if p < (a + 1.0) / (a + b + 2.0):
        upper = binomial_pmf(k, n, p) * (1.0 - p) * _betacf(a, b, p)
        upper = min(max(upper, 0.0), 1.0)
        return upper, 1.0 - upper
    lower = binomial_pmf(k - 1, n, p) * p * _betacf(b, a, 1.0 - p)
    lower = min(max(lower, 0.0), 1.0)
    return 1.0 - lower, lower


def binomial_tail(n: int, k: int, p: float) -> float:
    """Exact upper tail P(X >= k) of Binomial(n, p)."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise StatisticError(f"invalid binomial parameters n={n}, p={p}")
    return _binomial_tails(n, k, p)[0]


def binomial_cdf(n: int, k: int, p: float) -> float:
    """Lower tail P(X <= k); complements ``binomial_tail(n, k + 1, p)``."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise StatisticError(f"invalid binomial parameters n={n}, p={p}")
    return _binomial_tails(n, k + 1, p)[1]


# -- Fisher -----------------------------------------------------------------


def fisher_exact_2x2(a: int, b: int, c: int, d: int) -> float:
    """One-sided Fisher exact test for the table ``[[a, b], [c, d]]``.

    Returns P(X >= a) where X is hypergeometric with the observed margins,
    i.e. the probability of at least as many first-row / first-column
    co-occurrences as observed.
    """
    if min(a, b, c, d) < 0:
        raise StatisticError("Fisher test needs non-negative counts")
    n = a + b + c + d
    if n == 0:
        raise StatisticError("Fisher test is undefined for an empty table")
    row1 = a + b
    col1 = a + c
    if row1 in (0, n) or col1 in (0, n):
        return 1.0
    hi = min(row1, col1)
    lo = max(0, row1 + col1 - n)
    if a <= lo:
        return 1.0

    def log_h(x):
        return (
            _log_comb(col1, x) + _log_comb(n - col1, row1 - x) - _log_comb(n, row1)
        )

    # walk outward from the observed cell with the term ratio recurrence;
    # when the upper tail contains the mode the lower tail is complemented
    mode = int((row1 + 1) * (col1 + 1) / (n + 2))
    if a > mode:
        term = math.exp(log_h(a))
        total = term
        x = a
        while x < hi:
            term *= (col1 - x) * (row1 - x) / ((x + 1) * (n - col1 - row1 + x + 1))
            total += term
            x += 1
            if term < total * 1e-17:
                break
        return min(total, 1.0)
    x = a - 1
    term = math.exp(log_h(x))
    lower = term
    while x > lo:
        term *= x * (n - col1 - row1 + x) / ((col1 - x + 1) * (row1 - x + 1))
        lower += term
        x -= 1
        if term < lower * 1e-17:
            break
    return min(max(1.0 - lower, 0.0), 1.0)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
