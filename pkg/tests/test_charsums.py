import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import euler_criterion, jacobi_by_factoring, literal_sieve_sum
from shafstats import arith
from shafstats.charsums import (
    SumReport,
    burgess_sum,
    hb_double_sum,
    lemma1_report,
    make_sieve_config,
    prime_count,
    square_sieve_rhs,
    suggested_z,
    u_sum,
)
from shafstats.curve import ApTable
from shafstats.errors import EmptyWindowError, InvalidArgument
from shafstats.sha_stats import build_sha_table, s_m


def test_sum_report_residual_is_exact():
    rep = SumReport(value=3, main_term=Fraction(1, 3), bound=1.0)
    assert rep.residual == Fraction(8, 3)
    with pytest.raises(InvalidArgument):
        SumReport(value=0, main_term=0, bound=-1.0)


def test_u_sum_example(curve11):
    t = ApTable.from_records(curve11, 5, [(5, -3)])
    # p=2,3 use a_p = 1: (-7/7) + (-11/7); p=5: (-11/7)
    assert u_sum(t, 5, 7) == -2
    assert -2 == euler_criterion(-7, 7) + 2 * euler_criterion(-11, 7)


def test_u_sum_trivial_modulus(table_1e4):
    for x in (10, 100, 10**4):
        assert u_sum(table_1e4, x, 1) == len(arith.primes_up_to(x))
        assert prime_count(table_1e4, x) == len(arith.primes_up_to(x))


def test_u_sum_rejects_even(table_1e4):
    with pytest.raises(InvalidArgument):
        u_sum(table_1e4, 100, 4)


def test_u_sum_multiplicative_consistency(table_1e4, curve11):
    x = 10**4
    pairs = list(zip(table_1e4.primes.tolist(), table_1e4.traces.tolist()))
    pairs += [(q, 1) for q in curve11.bad_primes]
    for l1, l2 in [(5, 7), (11, 13), (5, 29), (37, 41)]:
        expected = sum(euler_criterion(t * t - 4 * p, l1) * euler_criterion(t * t - 4 * p, l2) for p, t in pairs)
        assert u_sum(table_1e4, x, l1 * l2) == expected
        assert abs(expected) <= prime_count(table_1e4, x)


def test_u_sum_large_modulus_path(table_1e4):
    n = 1000003 * 1000033  # beyond the lookup-table limit
    pairs = zip(table_1e4.primes.tolist(), table_1e4.traces.tolist())
    expected = sum(arith.jacobi(t * t - 4 * p, n) for p, t in pairs)
    expected += sum(arith.jacobi(1 - 4 * q, n) for q in (2, 3, 31))
    assert u_sum(table_1e4, 10**4, n) == expected


def test_lemma1_report(table_1e4):
    rep = lemma1_report(table_1e4, 10**4, 5, 7)
    assert rep.main_term == Fraction(1229, 1152)
    assert rep.value == u_sum(table_1e4, 10**4, 35)
    assert rep.residual == abs(Fraction(rep.value) - Fraction(1229, 1152))
    assert rep.bound == pytest.approx(35**3 * 100 * math.log(35 * 10**4))


def test_lemma1_degenerate(curve11):
    t = ApTable.from_records(curve11, 1, [])
    rep = lemma1_report(t, 1, 5, 7)
    assert rep.value == 0 and rep.main_term == 0


@pytest.mark.parametrize("l1,l2", [(5, 5), (3, 7), (5, 9), (31, 7)])
def test_lemma1_rejects(table_1e4, l1, l2):
    with pytest.raises(InvalidArgument):
        lemma1_report(table_1e4, 100, l1, l2)


def test_burgess_example():
    rep = burgess_sum(10, 3, 15)
    assert rep.value == 0
    assert [jacobi_by_factoring(m, 15) for m in range(7, 11)] == [-1, 1, 0, 0]
    assert rep.bound == pytest.approx(math.sqrt(3) * 15 ** (3 / 16))
    for bad in [(10, 0, 15), (3, 4, 15), (10, 3, 14), (10, 3, 9), (10, 3, 1)]:
        with pytest.raises(InvalidArgument):
            burgess_sum(*bad)


odd_sqfree = st.integers(min_value=1, max_value=3000).map(lambda k: 2 * k + 1).filter(arith.is_squarefree)


@settings(max_examples=150)
@given(st.integers(min_value=1, max_value=5000), st.data(), odd_sqfree)
def test_burgess_matches_direct_loop(u, data, s):
    v = data.draw(st.integers(min_value=1, max_value=u))
    value = burgess_sum(u, v, s).value
    assert value == sum(jacobi_by_factoring(m, s) for m in range(u - v, u + 1))
    assert abs(value) <= v + 1


def brute_hb(X, Y, f):
    total = 0
    for s in range(1, Y + 1, 2):
        if not arith.is_squarefree(s):
            continue
        inner = sum(w * jacobi_by_factoring(m, s) for m, w in f.items() if m <= X)
        total += inner * inner
    return total


def test_hb_examples():
    assert hb_double_sum(1, 1, {1: 1}).value == 1
    assert hb_double_sum(10, 10, {}).value == 0
    assert hb_double_sum(10, 10, {1: 0, 2: 0}).value == 0
    rep = hb_double_sum(4, 3, {1: 1, 2: 1, 3: 1})
    assert rep.value == 9
    assert rep.bound == 7 * 3


def test_hb_rejects_non_squarefree_weight():
    with pytest.raises(InvalidArgument):
        hb_double_sum(10, 10, {4: 1})
    with pytest.raises(InvalidArgument):
        hb_double_sum(10, 10, {11: 1})


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.data())
def test_hb_matches_direct_loop(X, Y, data):
    ms = [m for m in range(1, X + 1) if arith.is_squarefree(m)]
    weights = data.draw(st.lists(st.integers(-5, 5), min_size=len(ms), max_size=len(ms)))
    f = dict(zip(ms, weights))
    assert hb_double_sum(X, Y, f).value == brute_hb(X, Y, f)


def test_hb_rational_and_float_weights():
    f = {1: Fraction(1, 2), 2: Fraction(-1, 3), 5: Fraction(2, 7)}
    assert hb_double_sum(5, 15, f).value == brute_hb(5, 15, f)
    g = {m: float(w) for m, w in f.items()}
    assert hb_double_sum(5, 15, g).value == pytest.approx(float(brute_hb(5, 15, f)), rel=1e-12)


def test_make_sieve_config_examples():
    c = make_sieve_config(math.e**2, 5, {2, 3, 31})
    assert c.ell_primes == (5, 7)
    assert c.z_floor_ok
    assert make_sieve_config(math.e**3, 5, {2, 3, 31}).z_floor_ok is False
    assert make_sieve_config(100, 2, set()).empty
    assert make_sieve_config(100, 10, set()).ell_primes == (11, 13, 17, 19)
    assert make_sieve_config(100, 10, {13}).ell_primes == (11, 17, 19)
    with pytest.raises(InvalidArgument):
        make_sieve_config(100, 1.5)


def test_suggested_z():
    assert suggested_z(10, 1000) == pytest.approx(10000 ** (4 / 59))
    assert suggested_z(10, 1000, short=True) == pytest.approx(10000 ** (1 / 14))


def test_square_sieve_examples(curve11):
    t = build_sha_table(ApTable.from_records(curve11, 5, [(5, -3)]))
    config = make_sieve_config(10, 5, curve11.bad_primes)
    rep = square_sieve_rhs(t, 1, 5, config)
    assert rep.value == 1
    assert rep.meta["s_m"] == 0
    rep = square_sieve_rhs(t, 11, 5, config)  # 11 * 11 is a square
    assert rep.value == 1 and rep.meta["s_m"] == 1
    with pytest.raises(EmptyWindowError):
        square_sieve_rhs(t, 1, 5, make_sieve_config(10, 2, set()))


def test_square_sieve_matches_literal_n_sum(curve11, table_1e3):
    sha = build_sha_table(table_1e3)
    records = list(zip(table_1e3.primes.tolist(), table_1e3.traces.tolist()))
    for x in (20, 50, 100):
        for m in (1, 2, 3, 5, 11, 163, 5000):
            for z in (5, 10, 23.5):
                config = make_sieve_config(m, z, curve11.bad_primes)
                rep = square_sieve_rhs(sha, m, x, config)
                assert rep.value == literal_sieve_sum(records, m, x, config.ell_primes)


def test_square_terms_give_plus_one(sha_1e4, curve11):
    config = make_sieve_config(100, 50, curve11.bad_primes)
    for rec in sha_1e4.records[:300]:
        n = rec.r * rec.d  # always a square
        for ell in config.ell_primes:
            if n % ell:
                assert euler_criterion(n, ell) == 1
        rep = square_sieve_rhs(sha_1e4, rec.r, 10**4, config)
        assert rep.meta["s_m"] == s_m(sha_1e4, rec.r, 10**4) >= 1
