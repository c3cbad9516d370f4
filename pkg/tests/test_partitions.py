import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qchar.errors import DomainError
from qchar.partitions import (
    Interval,
    MonomialSeries,
    Signature,
    branching_residual,
    enumerate_signatures,
    lr_coefficient,
    lr_coefficient_bruteforce,
    lr_product,
    quantum_dimension,
    schur_eval,
    schur_expand,
    vandermonde,
)
from qchar.qpoly import Q, RationalFunction


def S(*parts, lo=1):
    return Signature.of(parts, lo=lo)


def hook_content_dim(parts, n):
    """dim V_lambda of U(n), by the hook-content formula (independent oracle)."""
    lam = [p for p in parts if p > 0]
    conj = [sum(1 for p in lam if p > c) for c in range(lam[0])] if lam else []
    num = den = 1
    for i, row in enumerate(lam):
        for j in range(row):
            num *= n + j - i
            den *= (row - j - 1) + (conj[j] - i - 1) + 1
    return Fraction(num, den)


def weyl_qdim(parts):
    """prod_{i<j} [l_i - l_j + j - i]_q / [j - i]_q with symmetric q-integers."""
    def qint(m):
        return (Q**m - Q ** (-m)) / (Q - 1 / Q) if m else RationalFunction(0)

    out = RationalFunction(1)
    n = len(parts)
    for i in range(n):
        for j in range(i + 1, n):
            out = out * qint(parts[i] - parts[j] + j - i) / qint(j - i)
    return out


partition_st = st.lists(st.integers(0, 3), min_size=1, max_size=3).map(
    lambda xs: tuple(sorted(xs, reverse=True))
)


# ------------------------------------------------------------------ types


def test_interval_basics():
    I = Interval.parse("2..4")
    assert (I.lo, I.hi, len(I)) == (2, 4, 3)
    assert list(I) == [2, 3, 4]
    assert I.join(Interval(5, 6)) == Interval(2, 6)
    assert Interval.empty().is_empty() and len(Interval.empty()) == 0
    assert Interval.from_json(I.to_json()) == I
    with pytest.raises(ValueError):
        I.join(Interval(7, 8))


def test_signature_validation_and_json():
    lam = S(3, 1, -2)
    assert lam.weight == 2 and not lam.is_partition()
    assert Signature.from_json(lam.to_json()) == lam
    with pytest.raises((DomainError, ValueError)):
        S(1, 2)
    assert S(1, 0, lo=4).interval == Interval(4, 5)


def test_enumeration_is_graded_and_complete():
    sigs = enumerate_signatures(Interval(1, 2), 0, 3, 3)
    weights = [s.weight for s in sigs]
    assert weights == sorted(weights)
    assert len(sigs) == 1 + 1 + 2 + 2  # p(<=2 rows) for weights 0..3


def test_monomial_series_truncation():
    x = MonomialSeries.univariate({0: 1, 1: 1}, 0, 2, max_degree=2)
    y = MonomialSeries.univariate({0: 1, 1: 1}, 1, 2, max_degree=2)
    p = x * x * y  # (1+x)^2 (1+y) truncated at degree 2
    assert p.coefficient((2, 0)) == 1
    assert p.coefficient((1, 1)) == 2
    assert p.coefficient((2, 1)) == 0
    assert vandermonde(2).terms == {(1, 0): 1, (0, 1): -1}


# ------------------------------------------------------------------ Schur


def test_schur_known_values():
    assert schur_eval(S(2, 1, 0), [1, 2, 3]) == 60
    assert schur_eval(S(1, 1), [Fraction(1, 2), Fraction(1, 3)]) == Fraction(1, 6)
    assert schur_eval(S(0, -1), [2, 4]) == Fraction(3, 4)
    with pytest.raises(DomainError):
        schur_eval(S(0, -1), [0, 1])


def test_schur_expand_counts_tableaux():
    s = schur_expand(S(2, 1, 0), 3)
    assert s.coefficient((1, 1, 1)) == 2
    assert sum(s.terms.values()) == 8


@given(partition_st, st.lists(st.fractions(Fraction(-3), Fraction(3)), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_bialternant_matches_tableau_expansion(parts, point):
    lam = Signature.of(parts)
    pt = point[: len(parts)]
    assert schur_eval(lam, pt) == schur_expand(lam, len(parts)).evaluate(pt)


@given(partition_st, st.integers(-2, 2))
@settings(max_examples=30, deadline=None)
def test_schur_determinant_twist(parts, c):
    """s_{lambda + c}(x) = (x_1 ... x_n)^c s_lambda(x)."""
    pt = [Fraction(k + 2, 3) for k in range(len(parts))]
    lhs = schur_eval(S(*parts).shifted(c), pt)
    assert lhs == math.prod(pt) ** c * schur_eval(S(*parts), pt)


# ------------------------------------------------------------------ quantum dimension


@pytest.mark.parametrize("parts", [(1,), (1, 0), (2, 1, 0), (3, 1, 1), (2, 2, 0, 0), (1, 0, -1)])
def test_qdim_matches_weyl_product(parts):
    assert quantum_dimension(Signature.of(parts)) == weyl_qdim(parts)


@given(partition_st)
def test_qdim_at_one_is_dimension(parts):
    assert quantum_dimension(Signature.of(parts), 1) == hook_content_dim(parts, len(parts))


def test_qdim_numeric_and_formal_agree():
    lam = S(2, 1, 0)
    assert quantum_dimension(lam, Fraction(1, 2)) == quantum_dimension(lam)(Fraction(1, 2))
    assert quantum_dimension(S(1, 0)) == Q + 1 / Q
    with pytest.raises(DomainError):
        quantum_dimension(lam, -0.5)


def test_qdim_is_palindromic():
    d = quantum_dimension(S(3, 1, 0))
    for x in (Fraction(2), Fraction(3, 7)):
        assert d(x) == d(1 / x)


# ------------------------------------------------------------------ LR


def test_lr_known_values():
    assert lr_coefficient(S(1), S(1, lo=2), S(2, 0)) == 1
    assert lr_coefficient(S(2, 1, 0), S(2, 1, 0, lo=4), S(3, 2, 1, 0, 0, 0)) == 2
    assert lr_coefficient(S(1), S(1, lo=2), S(2, 1)) == 0  # weight mismatch
    with pytest.raises(ValueError):
        lr_coefficient(S(1), S(1), S(2))


@given(partition_st, partition_st)
@settings(max_examples=30, deadline=None)
def test_lr_symmetric_and_dimension_sum(lp, mp):
    lam, mu = Signature.of(lp), Signature.of(mp, lo=len(lp) + 1)
    n = len(lp) + len(mp)
    prod = lr_product(lam, mu)
    dims = sum(c * hook_content_dim(nu.parts, n) for nu, c in prod.items())
    # the sum of c^nu_{lam,mu} dim(nu) is dim of the induced U(n) module, which
    # for Schur functors equals the number of SSYT pairs: s_lam s_mu at (1,...,1)
    assert dims == (schur_expand(Signature.of(lp + (0,) * len(mp)), n).evaluate([1] * n)
                    * schur_expand(Signature.of(mp + (0,) * len(lp)), n).evaluate([1] * n))
    for nu, c in prod.items():
        assert lr_coefficient(Signature.of(mp), Signature.of(lp, lo=len(mp) + 1), nu.relabel(Interval.base(n))) == c


@given(partition_st, partition_st, st.integers(-2, 2))
@settings(max_examples=30, deadline=None)
def test_lr_shift_invariance(lp, mp, c):
    lam, mu = Signature.of(lp), Signature.of(mp, lo=len(lp) + 1)
    for nu, coeff in lr_product(lam, mu).items():
        assert lr_coefficient(lam.shifted(c), mu.shifted(c), nu.shifted(c)) == coeff


def test_lr_matches_bruteforce_with_negative_parts():
    lam, mu = S(1, -1), S(0, -1, lo=3)
    for nu in enumerate_signatures(Interval.base(4), -2, 1, -1):
        if nu.weight == -1:
            assert lr_coefficient(lam, mu, nu) == lr_coefficient_bruteforce(lam, mu, nu)


def test_branching_identity_example():
    pts = [[Fraction(1, 2), Fraction(2), Fraction(3), Fraction(-1, 3)]]
    assert branching_residual(S(2, 1, 1, 0), (2, 2), pts) == 0
    assert branching_residual(S(1, 0, -1), (1, 2), [[Fraction(2), Fraction(3), Fraction(5)]]) == 0
