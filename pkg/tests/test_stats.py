import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2_contingency

from espm.errors import StatisticError
from espm.stats import (
    ContingencyTable,
    binomial_cdf,
    binomial_tail,
    chi_square_sf,
    fisher_exact_2x2,
    g2_statistic,
)


def quad_chi2_sf(x, df):
    """Upper tail by numerical integration of the chi-square density."""
    with mpmath.workdps(40):
        k = mpmath.mpf(df) / 2
        norm = 2**k * mpmath.gamma(k)
        pdf = lambda t: t ** (k - 1) * mpmath.exp(-t / 2) / norm
        x = mpmath.mpf(x)
        return float(mpmath.quad(pdf, [x, x + 10, x + 60, mpmath.inf]))


def summed_binomial_tail(n, k, p):
    with mpmath.workdps(40):
        p = mpmath.mpf(p)
        q = 1 - p
        return float(mpmath.fsum(mpmath.binomial(n, j) * p**j * q ** (n - j) for j in range(k, n + 1)))


def recurrence_binomial_tail(n, k, p):
    """Tail summed term by term from P(X = k) until the terms vanish."""
    with mpmath.workdps(40):
        p = mpmath.mpf(p)
        q = 1 - p
        log_t = (
            mpmath.loggamma(n + 1) - mpmath.loggamma(k + 1) - mpmath.loggamma(n - k + 1)
            + k * mpmath.log(p) + (n - k) * mpmath.log(q)
        )
        term = mpmath.exp(log_t)
        total = term
        for j in range(k, n):
            term *= mpmath.mpf(n - j) / (j + 1) * p / q
            total += term
            if term < total * mpmath.mpf(10) ** -35:
                break
        return float(total)


def enumerated_fisher(a, b, c, d):
    n = a + b + c + d
    r1, c1 = a + b, a + c
    total = sum(
        Fraction(math.comb(c1, x) * math.comb(n - c1, r1 - x), math.comb(n, r1))
        for x in range(a, min(r1, c1) + 1)
    )
    return total


class TestG2:
    def test_d0_item_a(self):
        res = g2_statistic(ContingencyTable((4, 0), (4, 2)))
        assert res.statistic == pytest.approx(7.638170019537754, abs=1e-12)
        assert res.df == 1
        assert res.low_expected

    def test_observed_equals_expected(self):
        res = g2_statistic(ContingencyTable((2, 1), (4, 2)))
        assert res.statistic == 0.0

    def test_larger_table(self):
        # covered (30,10) / not covered (70,90); 2 * sum O ln(O/E) gives 12.9715
        res = g2_statistic(ContingencyTable((30, 10), (100, 100)))
        assert res.statistic == pytest.approx(12.97151432600681, rel=1e-12)
        assert res.df == 1
        assert not res.low_expected

    def test_matches_scipy_log_likelihood(self):
        rng = random.Random(5)
        for _ in range(200):
            k = rng.randint(2, 5)
            totals = [rng.randint(1, 60) for _ in range(k)]
            covered = [rng.randint(0, t) for t in totals]
            rows = [covered, [t - o for o, t in zip(covered, totals)]]
            if sum(rows[0]) == 0 or sum(rows[1]) == 0:
                continue
            expected, _, dof, _ = chi2_contingency(rows, correction=False, lambda_="log-likelihood")
            res = g2_statistic(ContingencyTable(tuple(covered), tuple(totals)))
            assert res.statistic == pytest.approx(expected, rel=1e-9, abs=1e-9)
            assert res.df == dof

    def test_zero_total_raises(self):
        with pytest.raises(StatisticError):
            g2_statistic(ContingencyTable((0, 0), (0, 0)))

    @given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=2, max_size=5), st.randoms())
    def test_label_permutation_invariant(self, cols, rnd):
        covered = tuple(min(a, b) for a, b in cols)
        totals = tuple(max(a, b) for a, b in cols)
        if sum(1 for t in totals if t) < 2:
            return
        perm = list(range(len(cols)))
        rnd.shuffle(perm)
        a = g2_statistic(ContingencyTable(covered, totals))
        b = g2_statistic(ContingencyTable(tuple(covered[i] for i in perm), tuple(totals[i] for i in perm)))
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12, abs=1e-12)
        assert a.df == b.df


class TestChiSquare:
    def test_zero(self):
        for df in (1, 2, 7):
            assert chi_square_sf(0.0, df) == 1.0

    def test_known_points(self):
        # frozen from quad_chi2_sf at 40 digits
        assert chi_square_sf(3.841459, 1) == pytest.approx(0.04999999465319576, abs=1e-12)
        assert chi_square_sf(7.638, 1) == pytest.approx(0.005715125079553848, abs=1e-12)

    def test_df_zero_raises(self):
        with pytest.raises(StatisticError):
            chi_square_sf(1.0, 0)

    def test_against_quadrature_wide_range(self):
        rng = random.Random(11)
        for _ in range(40):
            df = rng.randint(1, 50)
            x = rng.uniform(0.0, 500.0)
            assert abs(chi_square_sf(x, df) - quad_chi2_sf(x, df)) <= 1e-10

    @given(st.integers(1, 20), st.floats(0, 200), st.floats(0, 50))
    def test_monotone(self, df, x, dx):
        assert chi_square_sf(x + dx, df) <= chi_square_sf(x, df) + 1e-15


class TestBinomial:
    def test_single_term(self):
        assert binomial_tail(10, 10, 0.5) == pytest.approx(2**-10, rel=1e-13)

    def test_k_zero(self):
        for n, p in [(0, 0.3), (5, 0.0), (100, 0.99)]:
            assert binomial_tail(n, 0, p) == 1.0

    def test_summation_points(self):
        assert binomial_tail(20, 15, 0.6) == pytest.approx(0.12559897272303743, rel=1e-12)
        assert binomial_tail(30, 28, 0.7) == pytest.approx(0.0021131781488865322, rel=1e-12)

    def test_degenerate_probabilities(self):
        assert binomial_tail(10, 3, 0.0) == 0.0
        assert binomial_tail(10, 10, 1.0) == 1.0
        assert binomial_tail(10, 11, 0.5) == 0.0

    @pytest.mark.parametrize(
        "n,k,p",
        [(10**7, 5_001_000, 0.5), (10**7, 1_002_000, 0.1), (10**6, 300_900, 0.3), (10**7, 6000, 0.0005)],
    )
    def test_large_n(self, n, k, p):
        assert binomial_tail(n, k, p) == pytest.approx(recurrence_binomial_tail(n, k, p), rel=1e-9)

    @given(st.integers(1, 400), st.data())
    @settings(max_examples=200)
    def test_complement(self, n, data):
        k = data.draw(st.integers(0, n))
        p = data.draw(st.floats(0, 1))
        assert abs(binomial_tail(n, k, p) + binomial_cdf(n, k - 1, p) - 1.0) <= 1e-12

    def test_against_summation(self):
        rng = random.Random(3)
        for _ in range(60):
            n = rng.randint(1, 400)
            k = rng.randint(0, n)
            p = rng.random()
            ref = summed_binomial_tail(n, k, p)
            if ref < 1e-290:
                continue
            assert binomial_tail(n, k, p) == pytest.approx(ref, rel=1e-9)


class TestFisher:
    def test_perfect_split(self):
        assert fisher_exact_2x2(4, 0, 0, 2) == pytest.approx(1 / 15, rel=1e-12)

    def test_zero_margin(self):
        assert fisher_exact_2x2(0, 0, 3, 4) == 1.0
        assert fisher_exact_2x2(2, 0, 3, 0) == 1.0

    def test_symmetric_table(self):
        assert fisher_exact_2x2(3, 1, 1, 3) == pytest.approx(17 / 70, rel=1e-12)

    def test_against_enumeration(self):
        rng = random.Random(8)
        for _ in range(300):
            cells = [rng.randint(0, 25) for _ in range(4)]
            if sum(cells) == 0:
                continue
            ref = float(enumerated_fisher(*cells))
            assert fisher_exact_2x2(*cells) == pytest.approx(ref, rel=1e-11)
